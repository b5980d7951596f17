#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "graphq/graph.hpp"
#include "graphq/prevalence.hpp"
#include "graphq/rng.hpp"

namespace graphq {

enum class ShiftProtocol { Pps, Rw, Bfs };

std::string to_string(ShiftProtocol p);
ShiftProtocol shift_protocol_from_string(const std::string& s);

struct SamplePlan {
    ShiftProtocol protocol = ShiftProtocol::Pps;
    int n = 100;                // nodes per sample
    double zipf_s = 1.0;        // PPS prevalence exponent
    int walk_len = 10;          // RW steps per walk
    double teleport = 0.1;      // RW restart probability
    int per_label_starts = 10;  // RW/BFS start vertices per label
    std::uint64_t seed = 0;

    void validate() const;
};

struct TestSample {
    std::vector<NodeId> nodes;  // distinct, subset of the pool
    Prevalence true_prevalence;  // realized, from the node labels
    ShiftProtocol protocol = ShiftProtocol::Pps;
    std::uint64_t seed = 0;     // per-sample derived seed
    NodeId start = -1;          // RW/BFS start vertex; -1 for PPS
    bool short_sample = false;  // fewer than n nodes were reachable
};

// Zipf prevalence p_i proportional to rank^{-s}, ranks assigned to labels by
// a uniformly random permutation.
Prevalence zipf_prevalence(int num_classes, double s, Rng& rng);
// Identity rank assignment: label i gets rank i + 1.
Prevalence zipf_prevalence_ranked(int num_classes, double s);

// Largest-remainder rounding of n * q; ties go to the lower class id.
std::vector<int> largest_remainder_counts(int n, const Prevalence& q);

// One PPS sample at a fixed target prevalence. Class deficits (a class with
// fewer pool nodes than its count) are redistributed to classes with spare
// capacity; the realized prevalence is what true_prevalence records.
TestSample sample_pps_one(const Graph& g, std::span<const NodeId> pool, const Prevalence& q,
                          int n, std::uint64_t seed);

// 10 K samples with Zipf-drawn prevalences.
std::vector<TestSample> sample_pps(const Graph& g, std::span<const NodeId> pool,
                                   const SamplePlan& plan);

// Teleporting random walks from per-label start vertices; walks traverse the
// whole graph, only pool nodes are collected, distinct, until n or the
// attempt cap. One sample per (label, start).
std::vector<TestSample> sample_rw(const Graph& g, std::span<const NodeId> pool,
                                  const SamplePlan& plan);

// BFS layer order from per-label start vertices, random order within a layer,
// truncated at n. One sample per (label, start).
std::vector<TestSample> sample_bfs(const Graph& g, std::span<const NodeId> pool,
                                   const SamplePlan& plan);

std::vector<TestSample> make_samples(const Graph& g, std::span<const NodeId> pool,
                                     const SamplePlan& plan);

SamplePlan parse_sample_plan(const std::string& json_text);
std::string sample_plan_to_json(const SamplePlan& plan);

std::string samples_to_json(std::span<const TestSample> samples, const SamplePlan& plan);
std::vector<TestSample> samples_from_json(const std::string& json_text);

}  // namespace graphq
