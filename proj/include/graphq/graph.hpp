#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace graphq {

using NodeId = std::int32_t;

// Immutable sparse undirected graph with optional node features and labels.
// Adjacency is symmetric, deduplicated and free of self-loops; construction
// validates all invariants. Safe to share across threads once built.
class Graph {
public:
    Graph() = default;

    // edges: arbitrary (u, v) pairs; symmetrized and deduplicated, self-loops
    // dropped. features: row-major num_nodes x feature_dim, may be empty.
    // labels: one class id per node in {0..K-1}, may be empty.
    Graph(NodeId num_nodes, const std::vector<std::pair<NodeId, NodeId>>& edges,
          std::vector<double> features, NodeId feature_dim, std::vector<int> labels);

    NodeId num_nodes() const { return num_nodes_; }
    std::int64_t num_edges() const { return static_cast<std::int64_t>(adj_.size()) / 2; }

    std::span<const NodeId> neighbors(NodeId u) const {
        return {adj_.data() + offsets_[u], adj_.data() + offsets_[u + 1]};
    }
    NodeId degree(NodeId u) const { return static_cast<NodeId>(offsets_[u + 1] - offsets_[u]); }

    bool has_features() const { return feature_dim_ > 0; }
    NodeId feature_dim() const { return feature_dim_; }
    std::span<const double> feature_row(NodeId u) const {
        return {features_.data() + static_cast<std::size_t>(u) * feature_dim_,
                static_cast<std::size_t>(feature_dim_)};
    }
    const std::vector<double>& features() const { return features_; }

    bool has_labels() const { return !labels_.empty(); }
    const std::vector<int>& labels() const { return labels_; }
    int label(NodeId u) const { return labels_[u]; }
    int num_classes() const { return num_classes_; }

    // y = Abar * x with Abar = A D^-1 (column-stochastic). The column of a
    // zero-degree node is its basis vector, so mass on it stays put.
    void apply_normalized_adjacency(std::span<const double> x, std::span<double> y) const;

    // Edge list as sorted unique (u, v) pairs with u < v.
    std::vector<std::pair<NodeId, NodeId>> edge_list() const;

private:
    NodeId num_nodes_ = 0;
    std::vector<std::int64_t> offsets_;
    std::vector<NodeId> adj_;
    std::vector<double> features_;
    NodeId feature_dim_ = 0;
    std::vector<int> labels_;
    int num_classes_ = 0;
};

// Dense column-stochastic Abar = A D^-1. Intended for small graphs and tests;
// kernel evaluation on large graphs goes through apply_normalized_adjacency.
std::vector<std::vector<double>> normalized_adjacency(const Graph& g);

// Reads a graph from disk. The edge file has one "u v" pair per line, the
// feature file is a headerless numeric CSV with one row per node, the label
// file one integer per line. K is inferred as 1 + max label.
Graph load_graph(const std::string& edges_path,
                 const std::optional<std::string>& features_path = std::nullopt,
                 const std::optional<std::string>& labels_path = std::nullopt);

// Inverse of load_graph up to edge ordering.
void save_graph(const Graph& g, const std::string& edges_path,
                const std::optional<std::string>& features_path = std::nullopt,
                const std::optional<std::string>& labels_path = std::nullopt);

}  // namespace graphq
