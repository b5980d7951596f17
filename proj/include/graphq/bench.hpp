#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "graphq/classifier.hpp"
#include "graphq/quantifiers.hpp"
#include "graphq/samplers.hpp"
#include "graphq/split.hpp"

namespace graphq {

struct TrialResult {
    std::string dataset;
    std::string shift;
    std::string classifier;
    std::string quantifier;
    std::uint64_t split_seed = 0;
    std::uint64_t clf_seed = 0;
    int sample_id = 0;
    double ae = 0.0;
    double rae = 0.0;
    std::string flags;  // semicolon-joined, empty when clean
};

struct DatasetConfig {
    std::string name;
    std::string edges;
    std::string features;  // may be empty (external classifiers only)
    std::string labels;
};

struct ClassifierEntry {
    std::string name = "logistic";
    std::string kind = "logistic";  // logistic | external
    ClassifierConfig config;
    std::string posteriors;  // external: CSV, one row per node in split-file order
};

struct RunConfig {
    std::vector<DatasetConfig> datasets;
    std::array<double, 3> split_ratios{0.05, 0.15, 0.80};
    std::vector<std::uint64_t> split_seeds{0};
    std::vector<std::uint64_t> clf_seeds{0};
    std::vector<ClassifierEntry> classifiers;
    std::vector<QuantifierSpec> quantifiers;
    std::vector<SamplePlan> plans;
    std::uint64_t master_seed = 0;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

// Row index of each node in the posterior CSV convention: classifier_train,
// then quantifier_train, then quantifier_test_pool, each sorted.
std::vector<std::size_t> split_order_index(const Split& s, NodeId num_nodes);

// Full nested loop: datasets x splits x classifiers x clf seeds x plans x
// samples x quantifiers. Trials are pure and may run on `jobs` threads; the
// result order and every byte of the CSV are independent of the thread count.
// A failed trial is reported to stderr and dropped from the results.
std::vector<TrialResult> run_benchmark(const RunConfig& config, int jobs = 1);

std::string results_to_csv(std::span<const TrialResult> results);
void write_results_csv(std::span<const TrialResult> results, const std::string& path);
std::vector<TrialResult> read_results_csv(const std::string& path);

struct RankRow {
    std::string shift;
    std::string classifier;
    std::string quantifier;
    double mean_ae = 0.0;
    double stderr_ae = 0.0;
    double mean_rae = 0.0;
    double avg_rank = 0.0;
    bool best_equivalent = false;
    int trials = 0;
    std::string flags;
};

struct RankTable {
    std::vector<RankRow> rows;  // sorted by (shift, classifier, avg_rank)
};

// Per (shift, classifier) block: per-dataset mean-AE ranks averaged across
// datasets, tied ranks averaged; best-equivalence marks quantifiers a
// one-sided Welch test at `level` cannot distinguish from the block's best.
RankTable rank_and_test(std::span<const TrialResult> results, double level = 0.05);

std::string rank_table_to_csv(const RankTable& table);

// One-sided Welch t-test p-value for H1: mean(a) > mean(b).
double welch_one_sided_p(std::span<const double> a, std::span<const double> b);

}  // namespace graphq
