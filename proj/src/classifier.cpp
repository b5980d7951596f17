#include "graphq/classifier.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace graphq {

namespace {

using Mat = Eigen::MatrixXd;  // column-major, so logit columns are contiguous

// z <- (alpha*I + (1-alpha)*Abar)^steps z, column by column.
void propagate(const Graph& g, double alpha, int steps, Mat& z) {
    const auto n = static_cast<std::size_t>(z.rows());
    std::vector<double> next(n);
    for (int t = 0; t < steps; ++t) {
        for (Eigen::Index k = 0; k < z.cols(); ++k) {
            std::fill(next.begin(), next.end(), 0.0);
            g.apply_normalized_adjacency({z.col(k).data(), n}, next);
            for (std::size_t i = 0; i < n; ++i) {
                z(static_cast<Eigen::Index>(i), k) =
                    alpha * z(static_cast<Eigen::Index>(i), k) + (1.0 - alpha) * next[i];
            }
        }
    }
}

// z <- ((alpha*I + (1-alpha)*Abar)^T)^steps z. Adjoint of propagate, used to
// pull the loss gradient back to the raw logits.
void propagate_adjoint(const Graph& g, double alpha, int steps, Mat& z) {
    const NodeId n = static_cast<NodeId>(z.rows());
    std::vector<double> next(static_cast<std::size_t>(n));
    for (int t = 0; t < steps; ++t) {
        for (Eigen::Index k = 0; k < z.cols(); ++k) {
            // (Abar^T x)_j = mean of x over N(j); zero-degree j keeps x_j.
            for (NodeId j = 0; j < n; ++j) {
                auto nb = g.neighbors(j);
                if (nb.empty()) {
                    next[j] = z(j, k);
                } else {
                    double s = 0.0;
                    for (NodeId i : nb) s += z(i, k);
                    next[j] = s / static_cast<double>(nb.size());
                }
            }
            for (NodeId j = 0; j < n; ++j) z(j, k) = alpha * z(j, k) + (1.0 - alpha) * next[j];
        }
    }
}

void softmax_rows_inplace(Mat& z) {
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        double mx = z.row(r).maxCoeff();
        double sum = 0.0;
        for (Eigen::Index k = 0; k < z.cols(); ++k) {
            z(r, k) = std::exp(z(r, k) - mx);
            sum += z(r, k);
        }
        z.row(r) /= sum;
    }
}

// Raw logits X W + b for the given rows (all rows when propagation mixes them).
Mat logits_for(const Graph& g, std::span<const double> params, bool all_rows,
               std::span<const NodeId> rows, int K) {
    const int d = g.feature_dim();
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W(
        params.data(), d, K);
    Eigen::Map<const Eigen::RowVectorXd> b(params.data() + static_cast<std::size_t>(d) * K, K);
    if (all_rows) {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(
            g.features().data(), g.num_nodes(), d);
        Mat z = X * W;
        z.rowwise() += b;
        return z;
    }
    Mat z(static_cast<Eigen::Index>(rows.size()), K);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto f = g.feature_row(rows[i]);
        Eigen::Map<const Eigen::RowVectorXd> x(f.data(), d);
        z.row(static_cast<Eigen::Index>(i)) = x * W + b;
    }
    return z;
}

}  // namespace

void ClassifierConfig::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("classifier: learning_rate must be > 0");
    if (epochs < 0) throw std::invalid_argument("classifier: epochs must be >= 0");
    if (l2 < 0.0) throw std::invalid_argument("classifier: l2 must be >= 0");
    if (propagate) {
        if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("classifier: alpha in [0,1]");
        if (steps < 0) throw std::invalid_argument("classifier: steps must be >= 0");
    }
}

std::size_t LogisticProblem::param_count() const {
    return static_cast<std::size_t>(g.feature_dim()) * g.num_classes() + g.num_classes();
}

double LogisticProblem::loss(std::span<const double> params) const {
    const int K = g.num_classes();
    const int d = g.feature_dim();
    Mat z = cfg.propagate ? logits_for(g, params, true, {}, K)
                          : logits_for(g, params, false, train_nodes, K);
    if (cfg.propagate) propagate(g, cfg.alpha, cfg.steps, z);
    const double m = static_cast<double>(train_nodes.size());
    double ce = 0.0;
    for (std::size_t i = 0; i < train_nodes.size(); ++i) {
        Eigen::Index r = cfg.propagate ? train_nodes[i] : static_cast<Eigen::Index>(i);
        double mx = z.row(r).maxCoeff();
        double lse = 0.0;
        for (int k = 0; k < K; ++k) lse += std::exp(z(r, k) - mx);
        ce += mx + std::log(lse) - z(r, g.label(train_nodes[i]));
    }
    double reg = 0.0;
    for (std::size_t j = 0; j < static_cast<std::size_t>(d) * K; ++j) reg += params[j] * params[j];
    return ce / m + 0.5 * cfg.l2 * reg;
}

std::vector<double> LogisticProblem::grad(std::span<const double> params) const {
    const int K = g.num_classes();
    const int d = g.feature_dim();
    const double m = static_cast<double>(train_nodes.size());
    Mat z = cfg.propagate ? logits_for(g, params, true, {}, K)
                          : logits_for(g, params, false, train_nodes, K);
    if (cfg.propagate) propagate(g, cfg.alpha, cfg.steps, z);

    // dLoss/dLogits: (softmax - onehot)/m on train rows, zero elsewhere.
    Mat gz;
    if (cfg.propagate) {
        gz = Mat::Zero(g.num_nodes(), K);
        for (NodeId u : train_nodes) {
            Eigen::RowVectorXd row = z.row(u);
            double mx = row.maxCoeff();
            row = (row.array() - mx).exp();
            row /= row.sum();
            row(g.label(u)) -= 1.0;
            gz.row(u) = row / m;
        }
        propagate_adjoint(g, cfg.alpha, cfg.steps, gz);
    } else {
        softmax_rows_inplace(z);
        for (std::size_t i = 0; i < train_nodes.size(); ++i) {
            z(static_cast<Eigen::Index>(i), g.label(train_nodes[i])) -= 1.0;
        }
        gz = z / m;
    }

    std::vector<double> out(param_count(), 0.0);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> gW(
        out.data(), d, K);
    Eigen::Map<Eigen::RowVectorXd> gb(out.data() + static_cast<std::size_t>(d) * K, K);
    if (cfg.propagate) {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(
            g.features().data(), g.num_nodes(), d);
        gW = X.transpose() * gz;
    } else {
        for (std::size_t i = 0; i < train_nodes.size(); ++i) {
            auto f = g.feature_row(train_nodes[i]);
            Eigen::Map<const Eigen::VectorXd> x(f.data(), d);
            gW += x * gz.row(static_cast<Eigen::Index>(i));
        }
    }
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> W(
        params.data(), d, K);
    gW += cfg.l2 * W;
    gb = gz.colwise().sum();
    return out;
}

LogisticModel fit_logistic(const Graph& g, std::span<const NodeId> train_nodes,
                           const ClassifierConfig& cfg) {
    cfg.validate();
    if (!g.has_features()) throw std::invalid_argument("classifier: graph has no features");
    if (!g.has_labels()) throw std::invalid_argument("classifier: graph has no labels");
    if (train_nodes.empty()) throw std::invalid_argument("classifier: empty training set");
    std::set<int> seen;
    for (NodeId u : train_nodes) seen.insert(g.label(u));
    if (seen.size() < 2) throw std::invalid_argument("classifier: single-class training set");

    LogisticProblem problem{g, {train_nodes.begin(), train_nodes.end()}, cfg};
    std::vector<double> params(problem.param_count(), 0.0);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::vector<double> gr = problem.grad(params);
        for (std::size_t j = 0; j < params.size(); ++j) params[j] -= cfg.learning_rate * gr[j];
    }

    LogisticModel m;
    m.feature_dim = g.feature_dim();
    m.num_classes = g.num_classes();
    m.weights.assign(params.begin(),
                     params.begin() + static_cast<std::size_t>(m.feature_dim) * m.num_classes);
    m.bias.assign(params.end() - m.num_classes, params.end());
    m.config = cfg;
    return m;
}

PosteriorMatrix predict_proba(const LogisticModel& m, const Graph& g,
                              std::span<const NodeId> nodes) {
    if (m.feature_dim != g.feature_dim()) {
        throw std::invalid_argument("classifier: feature dimension mismatch");
    }
    std::vector<double> params(m.weights);
    params.insert(params.end(), m.bias.begin(), m.bias.end());
    Mat z = m.config.propagate ? logits_for(g, params, true, {}, m.num_classes)
                               : logits_for(g, params, false, nodes, m.num_classes);
    if (m.config.propagate) propagate(g, m.config.alpha, m.config.steps, z);
    softmax_rows_inplace(z);

    PosteriorMatrix out(nodes.size(), m.num_classes);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        Eigen::Index r = m.config.propagate ? nodes[i] : static_cast<Eigen::Index>(i);
        auto dst = out.row(i);
        for (int k = 0; k < m.num_classes; ++k) dst[k] = z(r, k);
    }
    return out;
}

ClassifierConfig parse_classifier_config(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    ClassifierConfig c;
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.l2 = j.value("l2", c.l2);
    c.seed = j.value("seed", c.seed);
    c.propagate = j.value("propagate", c.propagate);
    c.alpha = j.value("alpha", c.alpha);
    c.steps = j.value("steps", c.steps);
    c.validate();
    return c;
}

std::string model_to_json(const LogisticModel& m) {
    nlohmann::json j{{"feature_dim", m.feature_dim},
                     {"num_classes", m.num_classes},
                     {"weights", m.weights},
                     {"bias", m.bias},
                     {"config",
                      {{"learning_rate", m.config.learning_rate},
                       {"epochs", m.config.epochs},
                       {"l2", m.config.l2},
                       {"seed", m.config.seed},
                       {"propagate", m.config.propagate},
                       {"alpha", m.config.alpha},
                       {"steps", m.config.steps}}}};
    return j.dump(2);
}

LogisticModel model_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    LogisticModel m;
    m.feature_dim = j.at("feature_dim").get<int>();
    m.num_classes = j.at("num_classes").get<int>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<std::vector<double>>();
    if (j.contains("config")) m.config = parse_classifier_config(j["config"].dump());
    if (m.weights.size() != static_cast<std::size_t>(m.feature_dim) * m.num_classes ||
        m.bias.size() != static_cast<std::size_t>(m.num_classes)) {
        throw std::invalid_argument("classifier: model parameter sizes inconsistent");
    }
    return m;
}

}  // namespace graphq
