#pragma once

#include <span>
#include <string>
#include <vector>

#include "graphq/graph.hpp"

namespace graphq {

enum class KernelKind { Ppr, ShortestPath, InterpolatedPpr, Constant };

// Vertex affinity kernel kappa(x, x'). The PPR kernel reads entries of
// Pi = (alpha I + (1 - alpha) Abar)^L; the SP kernel decays exponentially in
// BFS distance; the interpolated kernel mixes PPR with a constant floor so
// that distant vertices keep a minimum weight.
struct KernelConfig {
    KernelKind kind = KernelKind::Constant;
    double alpha = 0.1;      // PPR teleport, in (0, 1)
    int steps = 10;          // PPR walk length L, >= 1
    double lambda_sp = 0.5;  // SP decay, > 0
    double lambda_mix = 0.9; // PPR interpolation weight, in [0, 1]

    static KernelConfig constant() { return {}; }
    static KernelConfig ppr(double alpha, int steps);
    static KernelConfig shortest_path(double lambda_sp);
    static KernelConfig interpolated_ppr(double alpha, int steps, double lambda_mix);

    void validate() const;
};

KernelConfig parse_kernel_config(const std::string& json_text);

// Lazily evaluated block of kernel values: values[i][j] = kappa(sources[i],
// targets[j]), stored row-major. Full kernel matrices are never materialized.
struct KernelSlice {
    std::vector<NodeId> sources;
    std::vector<NodeId> targets;
    std::vector<double> values;

    double at(std::size_t i, std::size_t j) const { return values[i * targets.size() + j]; }
};

// values[i][j] = Pi_{sources[i], targets[j]}, computed per target column by
// L sparse multiplications with Abar. Columns of Pi sum to 1.
KernelSlice ppr_kernel(const Graph& g, double alpha, int steps,
                       std::span<const NodeId> sources, std::span<const NodeId> targets);

// values[i][j] = exp(-lambda_sp * d_SP(i, j)); unreachable pairs get 0.
KernelSlice sp_kernel(const Graph& g, double lambda_sp,
                      std::span<const NodeId> sources, std::span<const NodeId> targets);

// kappa_lambda = lambda_mix * kappa_PPR + (1 - lambda_mix).
KernelSlice interpolated_ppr(const Graph& g, double alpha, int steps, double lambda_mix,
                             std::span<const NodeId> sources, std::span<const NodeId> targets);

KernelSlice constant_kernel(std::span<const NodeId> sources, std::span<const NodeId> targets);

KernelSlice evaluate_kernel(const Graph& g, const KernelConfig& cfg,
                            std::span<const NodeId> sources, std::span<const NodeId> targets);

}  // namespace graphq
