#include "graphq/kernels.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace graphq {

KernelConfig KernelConfig::ppr(double alpha, int steps) {
    KernelConfig c;
    c.kind = KernelKind::Ppr;
    c.alpha = alpha;
    c.steps = steps;
    c.validate();
    return c;
}

KernelConfig KernelConfig::shortest_path(double lambda_sp) {
    KernelConfig c;
    c.kind = KernelKind::ShortestPath;
    c.lambda_sp = lambda_sp;
    c.validate();
    return c;
}

KernelConfig KernelConfig::interpolated_ppr(double alpha, int steps, double lambda_mix) {
    KernelConfig c;
    c.kind = KernelKind::InterpolatedPpr;
    c.alpha = alpha;
    c.steps = steps;
    c.lambda_mix = lambda_mix;
    c.validate();
    return c;
}

void KernelConfig::validate() const {
    if (kind == KernelKind::Ppr || kind == KernelKind::InterpolatedPpr) {
        if (alpha <= 0.0 || alpha >= 1.0) {
            throw std::invalid_argument("kernel: alpha must be in (0, 1)");
        }
        if (steps < 1) throw std::invalid_argument("kernel: steps must be >= 1");
    }
    if (kind == KernelKind::ShortestPath && lambda_sp <= 0.0) {
        throw std::invalid_argument("kernel: lambda_sp must be > 0");
    }
    if (kind == KernelKind::InterpolatedPpr && (lambda_mix < 0.0 || lambda_mix > 1.0)) {
        throw std::invalid_argument("kernel: lambda_mix must be in [0, 1]");
    }
}

KernelConfig parse_kernel_config(const std::string& json_text) {
    const auto j = nlohmann::json::parse(json_text);
    KernelConfig c;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "ppr") {
        c.kind = KernelKind::Ppr;
    } else if (kind == "sp") {
        c.kind = KernelKind::ShortestPath;
    } else if (kind == "interpolated-ppr") {
        c.kind = KernelKind::InterpolatedPpr;
    } else if (kind == "constant") {
        c.kind = KernelKind::Constant;
    } else {
        throw std::invalid_argument("kernel: unknown kind \"" + kind + "\"");
    }
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("steps")) c.steps = j.at("steps").get<int>();
    if (j.contains("lambda_sp")) c.lambda_sp = j.at("lambda_sp").get<double>();
    if (j.contains("lambda_mix")) c.lambda_mix = j.at("lambda_mix").get<double>();
    c.validate();
    return c;
}

KernelSlice ppr_kernel(const Graph& g, double alpha, int steps,
                       std::span<const NodeId> sources, std::span<const NodeId> targets) {
    KernelConfig::ppr(alpha, steps);  // parameter check
    KernelSlice slice;
    slice.sources.assign(sources.begin(), sources.end());
    slice.targets.assign(targets.begin(), targets.end());
    slice.values.assign(sources.size() * targets.size(), 0.0);

    const NodeId n = g.num_nodes();
    std::vector<double> v(n), next(n);
    for (std::size_t j = 0; j < targets.size(); ++j) {
        std::fill(v.begin(), v.end(), 0.0);
        v[targets[j]] = 1.0;
        for (int step = 0; step < steps; ++step) {
            g.apply_normalized_adjacency(v, next);
            for (NodeId i = 0; i < n; ++i) v[i] = alpha * v[i] + (1.0 - alpha) * next[i];
        }
        for (std::size_t i = 0; i < sources.size(); ++i) {
            slice.values[i * targets.size() + j] = v[sources[i]];
        }
    }
    return slice;
}

KernelSlice sp_kernel(const Graph& g, double lambda_sp,
                      std::span<const NodeId> sources, std::span<const NodeId> targets) {
    KernelConfig::shortest_path(lambda_sp);
    KernelSlice slice;
    slice.sources.assign(sources.begin(), sources.end());
    slice.targets.assign(targets.begin(), targets.end());
    slice.values.assign(sources.size() * targets.size(), 0.0);

    const NodeId n = g.num_nodes();
    std::vector<std::int64_t> dist(n);
    std::deque<NodeId> queue;
    for (std::size_t j = 0; j < targets.size(); ++j) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[targets[j]] = 0;
        queue.clear();
        queue.push_back(targets[j]);
        while (!queue.empty()) {
            const NodeId u = queue.front();
            queue.pop_front();
            for (NodeId w : g.neighbors(u)) {
                if (dist[w] < 0) {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        for (std::size_t i = 0; i < sources.size(); ++i) {
            const std::int64_t d = dist[sources[i]];
            // unreachable: limit exp(-lambda * inf) = 0
            slice.values[i * targets.size() + j] =
                d < 0 ? 0.0 : std::exp(-lambda_sp * static_cast<double>(d));
        }
    }
    return slice;
}

KernelSlice interpolated_ppr(const Graph& g, double alpha, int steps, double lambda_mix,
                             std::span<const NodeId> sources, std::span<const NodeId> targets) {
    KernelConfig::interpolated_ppr(alpha, steps, lambda_mix);
    if (lambda_mix == 0.0) return constant_kernel(sources, targets);
    KernelSlice slice = ppr_kernel(g, alpha, steps, sources, targets);
    for (double& v : slice.values) v = lambda_mix * v + (1.0 - lambda_mix);
    return slice;
}

KernelSlice constant_kernel(std::span<const NodeId> sources, std::span<const NodeId> targets) {
    KernelSlice slice;
    slice.sources.assign(sources.begin(), sources.end());
    slice.targets.assign(targets.begin(), targets.end());
    slice.values.assign(sources.size() * targets.size(), 1.0);
    return slice;
}

KernelSlice evaluate_kernel(const Graph& g, const KernelConfig& cfg,
                            std::span<const NodeId> sources, std::span<const NodeId> targets) {
    cfg.validate();
    switch (cfg.kind) {
        case KernelKind::Ppr:
            return ppr_kernel(g, cfg.alpha, cfg.steps, sources, targets);
        case KernelKind::ShortestPath:
            return sp_kernel(g, cfg.lambda_sp, sources, targets);
        case KernelKind::InterpolatedPpr:
            return interpolated_ppr(g, cfg.alpha, cfg.steps, cfg.lambda_mix, sources, targets);
        case KernelKind::Constant:
            return constant_kernel(sources, targets);
    }
    throw std::logic_error("kernel: unreachable kind");
}

}  // namespace graphq
