#pragma once

#include <functional>
#include <span>
#include <vector>

namespace graphq {

// Euclidean projection onto the probability simplex (sort-based, O(K log K)).
std::vector<double> project_to_simplex(std::span<const double> v);

struct PgResult {
    std::vector<double> point;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Minimizes objective(q) over the simplex by projected gradient with
// backtracking line search. start must lie on the simplex.
PgResult minimize_on_simplex(
    const std::function<double(std::span<const double>)>& objective,
    const std::function<std::vector<double>(std::span<const double>)>& gradient,
    std::span<const double> start, int max_iters, double tol);

}  // namespace graphq
