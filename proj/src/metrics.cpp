#include "graphq/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace graphq {

double ae(const Prevalence& q, const Prevalence& q_hat) {
    if (q.values.size() != q_hat.values.size()) {
        throw std::invalid_argument("ae: length mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < q.values.size(); ++i) s += std::abs(q.values[i] - q_hat.values[i]);
    return s / static_cast<double>(q.values.size());
}

double rae(const Prevalence& q, const Prevalence& q_hat, std::size_t n_sample) {
    const std::size_t K = q.values.size();
    if (K != q_hat.values.size()) throw std::invalid_argument("rae: length mismatch");
    if (n_sample == 0) throw std::invalid_argument("rae: n_sample must be >= 1");
    const double eps = 1.0 / (2.0 * static_cast<double>(n_sample));
    const double denom = 1.0 + eps * static_cast<double>(K);
    double s = 0.0;
    for (std::size_t i = 0; i < K; ++i) {
        double qs = (q.values[i] + eps) / denom;
        double qh = (q_hat.values[i] + eps) / denom;
        s += std::abs(qs - qh) / qs;
    }
    return s / static_cast<double>(K);
}

}  // namespace graphq
