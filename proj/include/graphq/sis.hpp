#pragma once

#include <span>
#include <vector>

#include "graphq/graph.hpp"
#include "graphq/kernels.hpp"

namespace graphq {

// Per-training-node importance weights rho_hat = q_hat / p_hat, estimated by
// vertex-kernel KDE. The label-marginal ratio rho_Y cancels inside the
// per-class normalization, so it is never computed; class_weights outputs are
// invariant to any common rescaling of rho.
struct SisWeights {
    std::vector<double> rho;  // aligned with the train-node order passed in
};

// Per-class normalized training weights derived from rho.
struct ClassWeights {
    int num_classes = 0;
    // members[i]: positions (into the train-node order) of class-i instances.
    std::vector<std::vector<std::size_t>> members;
    // weights[i]: nonnegative, summing to 1 over members[i].
    std::vector<std::vector<double>> weights;
    // per_class_norm[i]: sum of rho over class-i instances, before normalizing.
    std::vector<double> per_class_norm;
    // true where the class had zero total mass and uniform weights were used.
    std::vector<bool> uniform_fallback;

    bool any_fallback() const {
        for (bool f : uniform_fallback) {
            if (f) return true;
        }
        return false;
    }
};

// out[i] = (1/|ref|) sum_{x' in ref} kappa(eval[i], x'). Reference set must be
// nonempty.
std::vector<double> kde_density(const Graph& g, std::span<const NodeId> eval_nodes,
                                std::span<const NodeId> reference_nodes,
                                const KernelConfig& kernel);

// rho_hat(x) = q_hat(x) / max(p_hat(x), floor) for each training node, where
// q_hat is the test-sample KDE under q_kernel and p_hat the training KDE under
// p_kernel. A constant p_kernel gives p_hat = 1 and rho_hat = q_hat exactly.
SisWeights density_ratio(const Graph& g, std::span<const NodeId> train_nodes,
                         std::span<const NodeId> test_nodes, const KernelConfig& q_kernel,
                         const KernelConfig& p_kernel, double floor = 1e-12);

// Normalizes rho within each class. A class whose mass sums to zero falls back
// to uniform weights and is flagged. labels must be aligned with the
// train-node order used for w; every class in {0..K-1} needs at least one
// instance.
ClassWeights class_weights(const SisWeights& w, std::span<const int> labels, int num_classes);

}  // namespace graphq
