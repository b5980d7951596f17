#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace graphq {

// A point on the K-simplex: entries >= 0, summing to 1 within 1e-9.
// The common currency of all quantifiers.
struct Prevalence {
    std::vector<double> values;

    Prevalence() = default;
    explicit Prevalence(std::vector<double> v) : values(std::move(v)) {}

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }

    static Prevalence uniform(std::size_t k) {
        return Prevalence(std::vector<double>(k, 1.0 / static_cast<double>(k)));
    }

    // Normalizes a nonnegative vector in place. Throws on zero or negative mass.
    static Prevalence normalized(std::vector<double> v) {
        double sum = 0.0;
        for (double x : v) {
            if (x < 0.0) throw std::invalid_argument("prevalence: negative entry");
            sum += x;
        }
        if (sum <= 0.0) throw std::invalid_argument("prevalence: zero total mass");
        for (double& x : v) x /= sum;
        return Prevalence(std::move(v));
    }

    bool valid(double tol = 1e-9) const {
        double sum = 0.0;
        for (double x : values) {
            if (x < -tol) return false;
            sum += x;
        }
        return values.size() > 0 && sum > 1.0 - tol && sum < 1.0 + tol;
    }
};

}  // namespace graphq
