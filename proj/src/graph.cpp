#include "graphq/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace graphq {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

bool blank(const std::string& s) {
    return s.find_first_not_of(" \t") == std::string::npos;
}

}  // namespace

Graph::Graph(NodeId num_nodes, const std::vector<std::pair<NodeId, NodeId>>& edges,
             std::vector<double> features, NodeId feature_dim, std::vector<int> labels)
    : num_nodes_(num_nodes),
      features_(std::move(features)),
      feature_dim_(feature_dim),
      labels_(std::move(labels)) {
    if (num_nodes < 0) fail("graph: negative node count");
    if (feature_dim_ > 0 &&
        features_.size() != static_cast<std::size_t>(num_nodes) * feature_dim_) {
        fail("graph: feature matrix size does not match num_nodes x feature_dim");
    }
    if (!labels_.empty()) {
        if (labels_.size() != static_cast<std::size_t>(num_nodes)) {
            fail("graph: label count does not match num_nodes");
        }
        int max_label = 0;
        for (int y : labels_) {
            if (y < 0) fail("graph: negative label");
            max_label = std::max(max_label, y);
        }
        num_classes_ = max_label + 1;
        std::vector<int> seen(num_classes_, 0);
        for (int y : labels_) seen[y] = 1;
        for (int k = 0; k < num_classes_; ++k) {
            if (!seen[k]) fail("graph: class " + std::to_string(k) + " has no nodes");
        }
    }

    // Symmetrize, drop self-loops, deduplicate.
    std::vector<std::pair<NodeId, NodeId>> undirected;
    undirected.reserve(edges.size());
    for (auto [u, v] : edges) {
        if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes) {
            fail("graph: edge endpoint out of range: " + std::to_string(u) + " " +
                 std::to_string(v));
        }
        if (u == v) continue;
        undirected.emplace_back(std::min(u, v), std::max(u, v));
    }
    std::sort(undirected.begin(), undirected.end());
    undirected.erase(std::unique(undirected.begin(), undirected.end()), undirected.end());

    std::vector<NodeId> deg(num_nodes, 0);
    for (auto [u, v] : undirected) {
        ++deg[u];
        ++deg[v];
    }
    offsets_.assign(num_nodes + 1, 0);
    for (NodeId u = 0; u < num_nodes; ++u) offsets_[u + 1] = offsets_[u] + deg[u];
    adj_.resize(undirected.size() * 2);
    std::vector<std::int64_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (auto [u, v] : undirected) {
        adj_[cursor[u]++] = v;
        adj_[cursor[v]++] = u;
    }
    for (NodeId u = 0; u < num_nodes; ++u) {
        std::sort(adj_.begin() + offsets_[u], adj_.begin() + offsets_[u + 1]);
    }
}

void Graph::apply_normalized_adjacency(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (NodeId j = 0; j < num_nodes_; ++j) {
        const NodeId d = degree(j);
        if (d == 0) {
            y[j] += x[j];
            continue;
        }
        const double share = x[j] / static_cast<double>(d);
        for (NodeId i : neighbors(j)) y[i] += share;
    }
}

std::vector<std::pair<NodeId, NodeId>> Graph::edge_list() const {
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(adj_.size() / 2);
    for (NodeId u = 0; u < num_nodes_; ++u) {
        for (NodeId v : neighbors(u)) {
            if (u < v) edges.emplace_back(u, v);
        }
    }
    return edges;
}

std::vector<std::vector<double>> normalized_adjacency(const Graph& g) {
    const NodeId n = g.num_nodes();
    std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
    for (NodeId j = 0; j < n; ++j) {
        const NodeId d = g.degree(j);
        if (d == 0) {
            m[j][j] = 1.0;
            continue;
        }
        for (NodeId i : g.neighbors(j)) m[i][j] = 1.0 / static_cast<double>(d);
    }
    return m;
}

Graph load_graph(const std::string& edges_path,
                 const std::optional<std::string>& features_path,
                 const std::optional<std::string>& labels_path) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    NodeId max_id = -1;
    for (const auto& line : read_lines(edges_path)) {
        if (blank(line)) continue;
        std::istringstream ss(line);
        long long u, v;
        if (!(ss >> u >> v) || u < 0 || v < 0) {
            fail("edge file: expected two non-negative integers, got \"" + line + "\"");
        }
        edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
        max_id = std::max({max_id, static_cast<NodeId>(u), static_cast<NodeId>(v)});
    }

    std::vector<double> features;
    NodeId feature_dim = 0;
    std::size_t feature_rows = 0;
    if (features_path) {
        for (const auto& line : read_lines(*features_path)) {
            if (blank(line)) continue;
            std::istringstream ss(line);
            std::string cell;
            NodeId dim = 0;
            while (std::getline(ss, cell, ',')) {
                double value;
                auto* first = cell.data();
                auto* last = cell.data() + cell.size();
                while (first < last && (*first == ' ' || *first == '\t')) ++first;
                auto [ptr, ec] = std::from_chars(first, last, value);
                while (ptr < last && (*ptr == ' ' || *ptr == '\t')) ++ptr;
                if (ec != std::errc{} || ptr != last) {
                    fail("feature file: non-numeric cell \"" + cell + "\" in row " +
                         std::to_string(feature_rows));
                }
                features.push_back(value);
                ++dim;
            }
            if (feature_rows == 0) {
                feature_dim = dim;
            } else if (dim != feature_dim) {
                fail("feature file: row " + std::to_string(feature_rows) + " has " +
                     std::to_string(dim) + " cells, expected " + std::to_string(feature_dim));
            }
            ++feature_rows;
        }
    }

    std::vector<int> labels;
    if (labels_path) {
        for (const auto& line : read_lines(*labels_path)) {
            if (blank(line)) continue;
            std::istringstream ss(line);
            long long y;
            if (!(ss >> y) || y < 0) {
                fail("label file: expected a non-negative integer, got \"" + line + "\"");
            }
            labels.push_back(static_cast<int>(y));
        }
    }

    // Node count comes from the densest source available; row counts must agree.
    NodeId num_nodes = max_id + 1;
    if (features_path) num_nodes = std::max(num_nodes, static_cast<NodeId>(feature_rows));
    if (labels_path) num_nodes = std::max(num_nodes, static_cast<NodeId>(labels.size()));
    if (features_path && static_cast<NodeId>(feature_rows) != num_nodes) {
        fail("feature file: " + std::to_string(feature_rows) + " rows for " +
             std::to_string(num_nodes) + " nodes");
    }
    if (labels_path && static_cast<NodeId>(labels.size()) != num_nodes) {
        fail("label file: " + std::to_string(labels.size()) + " rows for " +
             std::to_string(num_nodes) + " nodes");
    }

    return Graph(num_nodes, edges, std::move(features), feature_dim, std::move(labels));
}

void save_graph(const Graph& g, const std::string& edges_path,
                const std::optional<std::string>& features_path,
                const std::optional<std::string>& labels_path) {
    {
        std::ofstream out(edges_path);
        if (!out) fail("cannot write file: " + edges_path);
        for (auto [u, v] : g.edge_list()) out << u << " " << v << "\n";
    }
    if (features_path) {
        std::ofstream out(*features_path);
        if (!out) fail("cannot write file: " + *features_path);
        out.precision(17);
        for (NodeId u = 0; u < g.num_nodes(); ++u) {
            auto row = g.feature_row(u);
            for (std::size_t j = 0; j < row.size(); ++j) {
                if (j) out << ",";
                out << row[j];
            }
            out << "\n";
        }
    }
    if (labels_path) {
        std::ofstream out(*labels_path);
        if (!out) fail("cannot write file: " + *labels_path);
        for (int y : g.labels()) out << y << "\n";
    }
}

}  // namespace graphq
