#pragma once

#include "graphq/prevalence.hpp"

namespace graphq {

// Absolute error (1/K) sum |q_i - qhat_i|; bounded by 2/K.
double ae(const Prevalence& q, const Prevalence& q_hat);

// Relative absolute error with additive smoothing eps = 1/(2 n_sample)
// applied to both arguments before renormalizing, so zero prevalences stay
// finite.
double rae(const Prevalence& q, const Prevalence& q_hat, std::size_t n_sample);

}  // namespace graphq
