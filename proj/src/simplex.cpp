#include "graphq/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace graphq {

std::vector<double> project_to_simplex(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n == 0) throw std::invalid_argument("simplex: empty vector");
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cumsum = 0.0;
    double theta = 0.0;
    std::size_t support = 0;
    for (std::size_t j = 0; j < n; ++j) {
        cumsum += sorted[j];
        double t = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (sorted[j] - t > 0.0) {
            theta = t;
            support = j + 1;
        }
    }
    if (support == 0) theta = (cumsum - 1.0) / static_cast<double>(n);
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = std::max(v[j] - theta, 0.0);
    return out;
}

PgResult minimize_on_simplex(
    const std::function<double(std::span<const double>)>& objective,
    const std::function<std::vector<double>(std::span<const double>)>& gradient,
    std::span<const double> start, int max_iters, double tol) {
    PgResult res;
    res.point.assign(start.begin(), start.end());
    res.objective = objective(res.point);
    double step = 1.0;
    for (int it = 0; it < max_iters; ++it) {
        res.iterations = it + 1;
        std::vector<double> grad = gradient(res.point);
        // Backtracking: shrink until the projected step decreases the objective.
        bool moved = false;
        for (int bt = 0; bt < 50; ++bt) {
            std::vector<double> trial(res.point.size());
            for (std::size_t j = 0; j < trial.size(); ++j) trial[j] = res.point[j] - step * grad[j];
            trial = project_to_simplex(trial);
            double f = objective(trial);
            if (f < res.objective - 1e-15) {
                double delta = res.objective - f;
                res.point = std::move(trial);
                res.objective = f;
                moved = true;
                if (delta < tol) {
                    res.converged = true;
                    return res;
                }
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if (!moved) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

}  // namespace graphq
