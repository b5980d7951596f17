#include "graphq/sis.hpp"

#include <stdexcept>
#include <string>

namespace graphq {

std::vector<double> kde_density(const Graph& g, std::span<const NodeId> eval_nodes,
                                std::span<const NodeId> reference_nodes,
                                const KernelConfig& kernel) {
    if (reference_nodes.empty()) {
        throw std::invalid_argument("kde_density: empty reference set");
    }
    const KernelSlice slice = evaluate_kernel(g, kernel, eval_nodes, reference_nodes);
    const double inv = 1.0 / static_cast<double>(reference_nodes.size());
    std::vector<double> out(eval_nodes.size(), 0.0);
    for (std::size_t i = 0; i < eval_nodes.size(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < reference_nodes.size(); ++j) sum += slice.at(i, j);
        out[i] = sum * inv;
    }
    return out;
}

SisWeights density_ratio(const Graph& g, std::span<const NodeId> train_nodes,
                         std::span<const NodeId> test_nodes, const KernelConfig& q_kernel,
                         const KernelConfig& p_kernel, double floor) {
    if (train_nodes.empty()) throw std::invalid_argument("density_ratio: empty train set");
    if (test_nodes.empty()) throw std::invalid_argument("density_ratio: empty test set");
    if (floor < 0.0) throw std::invalid_argument("density_ratio: floor must be >= 0");

    SisWeights w;
    w.rho = kde_density(g, train_nodes, test_nodes, q_kernel);
    if (p_kernel.kind == KernelKind::Constant) {
        // p_hat is identically 1; rho = q_hat without any division.
        return w;
    }
    const std::vector<double> p_hat = kde_density(g, train_nodes, train_nodes, p_kernel);
    for (std::size_t i = 0; i < w.rho.size(); ++i) {
        w.rho[i] /= std::max(p_hat[i], floor);
    }
    return w;
}

ClassWeights class_weights(const SisWeights& w, std::span<const int> labels, int num_classes) {
    if (labels.size() != w.rho.size()) {
        throw std::invalid_argument("class_weights: labels and rho size mismatch");
    }
    ClassWeights cw;
    cw.num_classes = num_classes;
    cw.members.resize(num_classes);
    cw.weights.resize(num_classes);
    cw.per_class_norm.assign(num_classes, 0.0);
    cw.uniform_fallback.assign(num_classes, false);

    for (std::size_t j = 0; j < labels.size(); ++j) {
        const int y = labels[j];
        if (y < 0 || y >= num_classes) {
            throw std::invalid_argument("class_weights: label out of range");
        }
        cw.members[y].push_back(j);
        cw.per_class_norm[y] += w.rho[j];
    }

    for (int i = 0; i < num_classes; ++i) {
        const auto& m = cw.members[i];
        if (m.empty()) {
            throw std::invalid_argument("class_weights: class " + std::to_string(i) +
                                        " has no training instances");
        }
        auto& wi = cw.weights[i];
        wi.resize(m.size());
        if (cw.per_class_norm[i] > 0.0) {
            for (std::size_t k = 0; k < m.size(); ++k) {
                wi[k] = w.rho[m[k]] / cw.per_class_norm[i];
            }
        } else {
            // Test sample is structurally disjoint from this class; fall back
            // to the unweighted estimate rather than leaving it undefined.
            const double u = 1.0 / static_cast<double>(m.size());
            for (double& x : wi) x = u;
            cw.uniform_fallback[i] = true;
        }
    }
    return cw;
}

}  // namespace graphq
