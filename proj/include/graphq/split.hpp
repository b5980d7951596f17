#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "graphq/graph.hpp"

namespace graphq {

// Disjoint partition of the node set into classifier-train, quantifier-train
// and the pool that test samples are drawn from. Node lists are sorted.
struct Split {
    std::vector<NodeId> classifier_train;
    std::vector<NodeId> quantifier_train;
    std::vector<NodeId> quantifier_test_pool;
    std::uint64_t seed = 0;
};

// Uniform random partition with the given ratios, deterministic in the seed.
// Sizes are floor(n * r_i) with leftover nodes handed to the largest
// fractional parts (ties to the earlier part).
Split make_split(const Graph& g, std::array<double, 3> ratios, std::uint64_t seed);

Split load_split(const std::string& path);
void save_split(const Split& s, const std::string& path);

}  // namespace graphq
