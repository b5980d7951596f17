#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "graphq/graph.hpp"
#include "graphq/posteriors.hpp"

namespace graphq {

struct ClassifierConfig {
    double learning_rate = 0.5;
    int epochs = 500;
    double l2 = 1e-3;
    std::uint64_t seed = 0;
    // When set, logits are smoothed by (alpha*I + (1-alpha)*Abar)^steps at
    // train and predict time.
    bool propagate = false;
    double alpha = 0.1;
    int steps = 10;

    static ClassifierConfig logistic() { return {}; }
    static ClassifierConfig propagated(double alpha = 0.1, int steps = 10) {
        ClassifierConfig c;
        c.propagate = true;
        c.alpha = alpha;
        c.steps = steps;
        return c;
    }
    void validate() const;
};

struct LogisticModel {
    int feature_dim = 0;
    int num_classes = 0;
    std::vector<double> weights;  // feature_dim x num_classes, row-major
    std::vector<double> bias;     // num_classes
    ClassifierConfig config;
};

// Regularized cross-entropy over the training nodes as a function of one flat
// parameter vector [W row-major | b]. Exposed so tests can difference loss()
// against grad(); fit_logistic descends the same functions.
struct LogisticProblem {
    const Graph& g;
    std::vector<NodeId> train_nodes;
    ClassifierConfig cfg;

    std::size_t param_count() const;
    double loss(std::span<const double> params) const;
    std::vector<double> grad(std::span<const double> params) const;
};

// Full-batch gradient descent from zero-initialized parameters. The seed is
// recorded for provenance; training itself is deterministic.
LogisticModel fit_logistic(const Graph& g, std::span<const NodeId> train_nodes,
                           const ClassifierConfig& cfg);

PosteriorMatrix predict_proba(const LogisticModel& m, const Graph& g,
                              std::span<const NodeId> nodes);

ClassifierConfig parse_classifier_config(const std::string& json_text);

std::string model_to_json(const LogisticModel& m);
LogisticModel model_from_json(const std::string& json_text);

}  // namespace graphq
