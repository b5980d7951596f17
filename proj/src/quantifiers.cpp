#include "graphq/quantifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "graphq/simplex.hpp"

namespace graphq {

namespace {

constexpr double kDensityFloor = 1e-300;

void check_labels(std::span<const int> labels, std::size_t rows, int K) {
    if (labels.size() != rows) throw std::invalid_argument("quantifier: labels/rows mismatch");
    std::vector<bool> seen(K, false);
    for (int y : labels) {
        if (y < 0 || y >= K) throw std::invalid_argument("quantifier: label out of range");
        seen[y] = true;
    }
    for (int i = 0; i < K; ++i) {
        if (!seen[i]) {
            throw std::invalid_argument("quantifier: class " + std::to_string(i) +
                                        " missing from training set");
        }
    }
}

std::vector<int> hard_labels(const PosteriorMatrix& post) {
    std::vector<int> out(post.rows());
    for (std::size_t r = 0; r < post.rows(); ++r) out[r] = hard_label(post.row(r));
    return out;
}

// b-bin histogram of scores in [0, 1], normalized to sum 1.
std::vector<double> score_histogram(std::span<const double> scores, int bins) {
    std::vector<double> h(bins, 0.0);
    for (double s : scores) {
        int b = static_cast<int>(s * bins);
        b = std::clamp(b, 0, bins - 1);
        h[b] += 1.0;
    }
    if (!scores.empty()) {
        for (double& v : h) v /= static_cast<double>(scores.size());
    }
    return h;
}

double det_gram(const std::vector<std::vector<double>>& m) {
    const std::size_t K = m.size();
    std::vector<std::vector<double>> g(K, std::vector<double>(K, 0.0));
    for (std::size_t a = 0; a < K; ++a) {
        for (std::size_t b = 0; b < K; ++b) {
            for (std::size_t j = 0; j < K; ++j) g[a][b] += m[j][a] * m[j][b];
        }
    }
    // LU with partial pivoting on the K x K Gram matrix.
    double det = 1.0;
    for (std::size_t c = 0; c < K; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < K; ++r) {
            if (std::abs(g[r][c]) > std::abs(g[piv][c])) piv = r;
        }
        if (piv != c) {
            std::swap(g[piv], g[c]);
            det = -det;
        }
        if (g[c][c] == 0.0) return 0.0;
        det *= g[c][c];
        for (std::size_t r = c + 1; r < K; ++r) {
            double f = g[r][c] / g[c][c];
            for (std::size_t k = c; k < K; ++k) g[r][k] -= f * g[c][k];
        }
    }
    return det;
}

// Least squares over the simplex: min ||M q - obs||^2.
QuantifyResult solve_adjustment(const std::vector<std::vector<double>>& confusion,
                                std::span<const double> observed, const SolverConfig& cfg) {
    const std::size_t K = confusion.size();
    auto residual = [&](std::span<const double> q) {
        std::vector<double> r(K, 0.0);
        for (std::size_t j = 0; j < K; ++j) {
            for (std::size_t i = 0; i < K; ++i) r[j] += confusion[j][i] * q[i];
            r[j] -= observed[j];
        }
        return r;
    };
    auto objective = [&](std::span<const double> q) {
        double f = 0.0;
        for (double rj : residual(q)) f += rj * rj;
        return f;
    };
    auto gradient = [&](std::span<const double> q) {
        std::vector<double> r = residual(q);
        std::vector<double> grad(K, 0.0);
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t j = 0; j < K; ++j) grad[i] += 2.0 * confusion[j][i] * r[j];
        }
        return grad;
    };
    Prevalence start = Prevalence::uniform(static_cast<int>(K));
    PgResult pg = minimize_on_simplex(objective, gradient, start.values, cfg.max_iters, cfg.tol);
    QuantifyResult res;
    res.q.values = std::move(pg.point);
    if (std::abs(det_gram(confusion)) < 1e-12) res.flags.push_back("unidentifiable");
    return res;
}

void validate_confusion(const std::vector<std::vector<double>>& confusion) {
    const std::size_t K = confusion.size();
    if (K == 0) throw std::invalid_argument("quantifier: empty confusion matrix");
    for (const auto& row : confusion) {
        if (row.size() != K) throw std::invalid_argument("quantifier: confusion must be square");
    }
    for (std::size_t i = 0; i < K; ++i) {
        double col = 0.0;
        for (std::size_t j = 0; j < K; ++j) {
            if (confusion[j][i] < -1e-12) {
                throw std::invalid_argument("quantifier: negative confusion entry");
            }
            col += confusion[j][i];
        }
        if (std::abs(col - 1.0) > 1e-6) {
            throw std::invalid_argument("quantifier: confusion column " + std::to_string(i) +
                                        " does not sum to 1");
        }
    }
}

// Class representations and the test representation under the fitted DM
// aggregation; dimension bK for concat, b for average.
std::vector<double> dm_aggregate(const std::vector<double>& per_dim_concat, int K, int bins,
                                 DmAggregation agg) {
    if (agg == DmAggregation::Concat) {
        std::vector<double> out(per_dim_concat);
        for (double& v : out) v /= static_cast<double>(K);
        return out;
    }
    std::vector<double> out(bins, 0.0);
    for (int j = 0; j < K; ++j) {
        for (int b = 0; b < bins; ++b) out[b] += per_dim_concat[j * bins + b];
    }
    for (double& v : out) v /= static_cast<double>(K);
    return out;
}

std::vector<double> per_dim_histograms(const PosteriorMatrix& post,
                                       const std::vector<std::size_t>& rows, int bins) {
    const int K = post.num_classes();
    std::vector<double> concat;
    concat.reserve(static_cast<std::size_t>(K) * bins);
    std::vector<double> scores(rows.size());
    for (int j = 0; j < K; ++j) {
        for (std::size_t r = 0; r < rows.size(); ++r) scores[r] = post.row(rows[r])[j];
        auto h = score_histogram(scores, bins);
        concat.insert(concat.end(), h.begin(), h.end());
    }
    return concat;
}

QuantifyResult dm_solve(const std::vector<std::vector<double>>& class_reps,
                        const std::vector<double>& test_rep, const SolverConfig& cfg) {
    const std::size_t K = class_reps.size();
    const std::size_t B = test_rep.size();
    bool identical = true;
    for (std::size_t i = 1; i < K && identical; ++i) {
        for (std::size_t b = 0; b < B; ++b) {
            if (std::abs(class_reps[i][b] - class_reps[0][b]) > 1e-12) {
                identical = false;
                break;
            }
        }
    }
    if (identical) {
        QuantifyResult res;
        res.q = Prevalence::uniform(static_cast<int>(K));
        res.flags.push_back("unidentifiable");
        return res;
    }
    auto mixture = [&](std::span<const double> q) {
        std::vector<double> m(B, 0.0);
        for (std::size_t i = 0; i < K; ++i) {
            for (std::size_t b = 0; b < B; ++b) m[b] += q[i] * class_reps[i][b];
        }
        return m;
    };
    // Squared Hellinger distance; same minimizer as HD, smoother gradient.
    auto objective = [&](std::span<const double> q) {
        std::vector<double> m = mixture(q);
        double f = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
            double d = std::sqrt(m[b]) - std::sqrt(test_rep[b]);
            f += 0.5 * d * d;
        }
        return f;
    };
    auto gradient = [&](std::span<const double> q) {
        std::vector<double> m = mixture(q);
        std::vector<double> grad(K, 0.0);
        for (std::size_t b = 0; b < B; ++b) {
            double sm = std::sqrt(std::max(m[b], 1e-300));
            double coef = (sm - std::sqrt(test_rep[b])) / (2.0 * sm);
            for (std::size_t i = 0; i < K; ++i) grad[i] += coef * class_reps[i][b];
        }
        return grad;
    };
    Prevalence start = Prevalence::uniform(static_cast<int>(K));
    PgResult pg = minimize_on_simplex(objective, gradient, start.values, cfg.max_iters, cfg.tol);
    QuantifyResult res;
    res.q.values = std::move(pg.point);
    return res;
}

double gaussian_kernel(std::span<const double> a, std::span<const double> b, double sigma) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double d = a[k] - b[k];
        d2 += d * d;
    }
    const double K = static_cast<double>(a.size());
    double norm = std::pow(2.0 * std::numbers::pi, -0.5 * K) * std::pow(sigma, -K);
    return norm * std::exp(-d2 / (2.0 * sigma * sigma));
}

// densities[x][i] = p_hat(s_x | class i) over the test rows.
std::vector<std::vector<double>> kdey_density_matrix(const FittedQuantifier& fq,
                                                     const PosteriorMatrix& post_test) {
    std::vector<std::vector<double>> D(post_test.rows(),
                                       std::vector<double>(fq.num_classes, 0.0));
    for (std::size_t x = 0; x < post_test.rows(); ++x) {
        for (int i = 0; i < fq.num_classes; ++i) D[x][i] = kdey_density(fq, i, post_test.row(x));
    }
    return D;
}

bool needs_density_floor(const std::vector<std::vector<double>>& D) {
    for (const auto& row : D) {
        double mx = 0.0;
        for (double v : row) mx = std::max(mx, v);
        if (mx <= 0.0) return true;
    }
    return false;
}

QuantifyResult finish_with_fit_flags(QuantifyResult res, const FittedQuantifier& fq) {
    res.flags.insert(res.flags.end(), fq.fit_flags.begin(), fq.fit_flags.end());
    return res;
}

}  // namespace

std::string to_string(QuantifierKind kind) {
    switch (kind) {
        case QuantifierKind::Cc: return "cc";
        case QuantifierKind::Pcc: return "pcc";
        case QuantifierKind::Acc: return "acc";
        case QuantifierKind::Pacc: return "pacc";
        case QuantifierKind::Hdy: return "hdy";
        case QuantifierKind::DmConcat: return "dm-concat";
        case QuantifierKind::DmAverage: return "dm-average";
        case QuantifierKind::Kdey: return "kdey";
    }
    throw std::logic_error("quantifier: bad kind");
}

QuantifierKind quantifier_kind_from_string(const std::string& s) {
    if (s == "cc") return QuantifierKind::Cc;
    if (s == "pcc") return QuantifierKind::Pcc;
    if (s == "acc") return QuantifierKind::Acc;
    if (s == "pacc") return QuantifierKind::Pacc;
    if (s == "hdy") return QuantifierKind::Hdy;
    if (s == "dm-concat") return QuantifierKind::DmConcat;
    if (s == "dm-average") return QuantifierKind::DmAverage;
    if (s == "kdey") return QuantifierKind::Kdey;
    throw std::invalid_argument("quantifier: unknown kind '" + s + "'");
}

void SolverConfig::validate() const {
    if (max_iters <= 0) throw std::invalid_argument("solver: max_iters must be > 0");
    if (tol <= 0.0) throw std::invalid_argument("solver: tol must be > 0");
    if (grid <= 0) throw std::invalid_argument("solver: grid must be > 0");
}

Prevalence cc(std::span<const int> hard_predictions, int num_classes) {
    if (hard_predictions.empty()) throw std::invalid_argument("cc: empty input");
    std::vector<double> counts(num_classes, 0.0);
    for (int y : hard_predictions) {
        if (y < 0 || y >= num_classes) throw std::invalid_argument("cc: prediction out of range");
        counts[y] += 1.0;
    }
    return Prevalence::normalized(counts);
}

Prevalence pcc(const PosteriorMatrix& posteriors) {
    if (posteriors.rows() == 0) throw std::invalid_argument("pcc: empty input");
    std::vector<double> mean(posteriors.num_classes(), 0.0);
    for (std::size_t r = 0; r < posteriors.rows(); ++r) {
        auto row = posteriors.row(r);
        for (int k = 0; k < posteriors.num_classes(); ++k) mean[k] += row[k];
    }
    for (double& v : mean) v /= static_cast<double>(posteriors.rows());
    return Prevalence{std::move(mean)};
}

QuantifyResult acc_adjust(const std::vector<std::vector<double>>& confusion,
                          const Prevalence& observed, const SolverConfig& cfg) {
    cfg.validate();
    validate_confusion(confusion);
    if (observed.values.size() != confusion.size()) {
        throw std::invalid_argument("acc: observed size mismatch");
    }
    return solve_adjustment(confusion, observed.values, cfg);
}

FittedQuantifier acc_fit(const PosteriorMatrix& post_train, std::span<const int> labels,
                         int num_classes, const SolverConfig& cfg) {
    check_labels(labels, post_train.rows(), num_classes);
    FittedQuantifier fq;
    fq.kind = QuantifierKind::Acc;
    fq.num_classes = num_classes;
    fq.solver = cfg;
    fq.confusion.assign(num_classes, std::vector<double>(num_classes, 0.0));
    std::vector<double> class_count(num_classes, 0.0);
    for (std::size_t r = 0; r < post_train.rows(); ++r) {
        fq.confusion[hard_label(post_train.row(r))][labels[r]] += 1.0;
        class_count[labels[r]] += 1.0;
    }
    for (int j = 0; j < num_classes; ++j) {
        for (int i = 0; i < num_classes; ++i) fq.confusion[j][i] /= class_count[i];
    }
    return fq;
}

FittedQuantifier pacc_fit(const PosteriorMatrix& post_train, std::span<const int> labels,
                          int num_classes, const std::optional<ClassWeights>& weights,
                          const SolverConfig& cfg) {
    check_labels(labels, post_train.rows(), num_classes);
    if (weights && weights->num_classes != num_classes) {
        throw std::invalid_argument("pacc: weight class count mismatch");
    }
    FittedQuantifier fq;
    fq.kind = QuantifierKind::Pacc;
    fq.num_classes = num_classes;
    fq.solver = cfg;
    fq.confusion.assign(num_classes, std::vector<double>(num_classes, 0.0));
    if (weights) {
        for (int i = 0; i < num_classes; ++i) {
            const auto& members = weights->members[i];
            const auto& w = weights->weights[i];
            for (std::size_t m = 0; m < members.size(); ++m) {
                auto row = post_train.row(members[m]);
                for (int j = 0; j < num_classes; ++j) fq.confusion[j][i] += w[m] * row[j];
            }
        }
    } else {
        std::vector<double> class_count(num_classes, 0.0);
        for (std::size_t r = 0; r < post_train.rows(); ++r) {
            auto row = post_train.row(r);
            for (int j = 0; j < num_classes; ++j) fq.confusion[j][labels[r]] += row[j];
            class_count[labels[r]] += 1.0;
        }
        for (int j = 0; j < num_classes; ++j) {
            for (int i = 0; i < num_classes; ++i) fq.confusion[j][i] /= class_count[i];
        }
    }
    return fq;
}

double hellinger(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("hellinger: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double d = std::sqrt(p[i]) - std::sqrt(q[i]);
        s += d * d;
    }
    return std::sqrt(s) / std::numbers::sqrt2;
}

FittedQuantifier hdy_fit(const PosteriorMatrix& post_train, std::span<const int> labels,
                         int num_classes, int bins, const SolverConfig& cfg) {
    if (num_classes != 2) throw std::invalid_argument("hdy: requires exactly 2 classes");
    check_labels(labels, post_train.rows(), 2);
    FittedQuantifier fq;
    fq.kind = QuantifierKind::Hdy;
    fq.num_classes = 2;
    fq.bins = bins;
    fq.solver = cfg;
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<double> scores;
        for (std::size_t r = 0; r < post_train.rows(); ++r) {
            if (labels[r] == cls) scores.push_back(post_train.row(r)[1]);
        }
        fq.class_hist.push_back(score_histogram(scores, bins));
    }
    return fq;
}

QuantifyResult hdy_binary(const PosteriorMatrix& post_train, std::span<const int> labels,
                          const PosteriorMatrix& post_test, int bins, const SolverConfig& cfg) {
    FittedQuantifier fq = hdy_fit(post_train, labels, 2, bins, cfg);
    return quantify(fq, post_test);
}

FittedQuantifier dm_fit(const PosteriorMatrix& post_train, std::span<const int> labels,
                        int num_classes, int bins, DmAggregation aggregation,
                        const SolverConfig& cfg) {
    if (num_classes < 2) throw std::invalid_argument("dm: requires K >= 2");
    check_labels(labels, post_train.rows(), num_classes);
    FittedQuantifier fq;
    fq.kind = aggregation == DmAggregation::Concat ? QuantifierKind::DmConcat
                                                   : QuantifierKind::DmAverage;
    fq.num_classes = num_classes;
    fq.bins = bins;
    fq.aggregation = aggregation;
    fq.solver = cfg;
    for (int cls = 0; cls < num_classes; ++cls) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < post_train.rows(); ++r) {
            if (labels[r] == cls) rows.push_back(r);
        }
        fq.class_hist.push_back(per_dim_histograms(post_train, rows, bins));
    }
    return fq;
}

FittedQuantifier kdey_fit(const PosteriorMatrix& post_train, std::span<const int> labels,
                          int num_classes, double sigma,
                          const std::optional<ClassWeights>& weights, const SolverConfig& cfg) {
    if (sigma <= 0.0) throw std::invalid_argument("kdey: sigma must be > 0");
    check_labels(labels, post_train.rows(), num_classes);
    if (weights && weights->num_classes != num_classes) {
        throw std::invalid_argument("kdey: weight class count mismatch");
    }
    FittedQuantifier fq;
    fq.kind = QuantifierKind::Kdey;
    fq.num_classes = num_classes;
    fq.sigma = sigma;
    fq.solver = cfg;
    for (int cls = 0; cls < num_classes; ++cls) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < post_train.rows(); ++r) {
            if (labels[r] == cls) rows.push_back(r);
        }
        fq.banks.push_back(post_train.select(rows));
        if (weights) {
            fq.bank_weights.push_back(weights->weights[cls]);
        } else {
            fq.bank_weights.emplace_back(rows.size(), 1.0 / static_cast<double>(rows.size()));
        }
    }
    return fq;
}

double kdey_density(const FittedQuantifier& fq, int cls, std::span<const double> s) {
    const PosteriorMatrix& bank = fq.banks[cls];
    const std::vector<double>& w = fq.bank_weights[cls];
    double d = 0.0;
    for (std::size_t r = 0; r < bank.rows(); ++r) {
        d += w[r] * gaussian_kernel(s, bank.row(r), fq.sigma);
    }
    return d;
}

double kdey_objective(const FittedQuantifier& fq, const PosteriorMatrix& post_test,
                      std::span<const double> q) {
    double obj = 0.0;
    for (std::size_t x = 0; x < post_test.rows(); ++x) {
        double mix = 0.0;
        for (int i = 0; i < fq.num_classes; ++i) {
            mix += q[i] * kdey_density(fq, i, post_test.row(x));
        }
        obj -= std::log(mix + kDensityFloor);
    }
    return obj;
}

QuantifyResult kdey_ml_solve(const FittedQuantifier& fq, const PosteriorMatrix& post_test,
                             const SolverConfig& cfg, std::vector<double>* objective_trace) {
    cfg.validate();
    if (post_test.rows() == 0) throw std::invalid_argument("kdey: empty test set");
    const int K = fq.num_classes;
    const auto D = kdey_density_matrix(fq, post_test);
    QuantifyResult res;
    if (needs_density_floor(D)) res.flags.push_back("zero_density");

    std::vector<double> q = Prevalence::uniform(K).values;
    auto objective = [&](const std::vector<double>& p) {
        double obj = 0.0;
        for (const auto& row : D) {
            double mix = kDensityFloor;
            for (int i = 0; i < K; ++i) mix += p[i] * row[i];
            obj -= std::log(mix);
        }
        return obj;
    };
    double prev = objective(q);
    if (objective_trace) objective_trace->push_back(prev);
    for (int it = 0; it < cfg.max_iters; ++it) {
        std::vector<double> next(K, 0.0);
        for (const auto& row : D) {
            double mix = kDensityFloor;
            for (int i = 0; i < K; ++i) mix += q[i] * row[i];
            for (int i = 0; i < K; ++i) next[i] += q[i] * row[i] / mix;
        }
        double total = 0.0;
        for (double v : next) total += v;
        if (total <= 0.0) break;  // every responsibility vanished; keep q
        for (double& v : next) v /= total;
        q = std::move(next);
        double cur = objective(q);
        if (objective_trace) objective_trace->push_back(cur);
        if (prev - cur < cfg.tol) {
            prev = cur;
            break;
        }
        prev = cur;
    }
    res.q.values = std::move(q);
    return res;
}

QuantifyResult kdey_pg_solve(const FittedQuantifier& fq, const PosteriorMatrix& post_test,
                             const SolverConfig& cfg) {
    cfg.validate();
    if (post_test.rows() == 0) throw std::invalid_argument("kdey: empty test set");
    const int K = fq.num_classes;
    const auto D = kdey_density_matrix(fq, post_test);
    QuantifyResult res;
    if (needs_density_floor(D)) res.flags.push_back("zero_density");
    auto objective = [&](std::span<const double> p) {
        double obj = 0.0;
        for (const auto& row : D) {
            double mix = kDensityFloor;
            for (int i = 0; i < K; ++i) mix += p[i] * row[i];
            obj -= std::log(mix);
        }
        return obj;
    };
    auto gradient = [&](std::span<const double> p) {
        std::vector<double> grad(K, 0.0);
        for (const auto& row : D) {
            double mix = kDensityFloor;
            for (int i = 0; i < K; ++i) mix += p[i] * row[i];
            for (int i = 0; i < K; ++i) grad[i] -= row[i] / mix;
        }
        return grad;
    };
    Prevalence start = Prevalence::uniform(K);
    PgResult pg = minimize_on_simplex(objective, gradient, start.values, cfg.max_iters, cfg.tol);
    res.q.values = std::move(pg.point);
    return res;
}

FittedQuantifier make_quantifier(const QuantifierOptions& options,
                                 const PosteriorMatrix& post_train, std::span<const int> labels,
                                 int num_classes, const std::optional<ClassWeights>& sis_weights) {
    options.solver.validate();
    if (sis_weights && options.kind != QuantifierKind::Pacc &&
        options.kind != QuantifierKind::Kdey) {
        throw std::invalid_argument("quantifier: SIS weights only apply to pacc and kdey");
    }
    FittedQuantifier fq;
    switch (options.kind) {
        case QuantifierKind::Cc:
        case QuantifierKind::Pcc:
            // Nothing is fitted; training rows and labels may be absent.
            fq.kind = options.kind;
            fq.num_classes = num_classes;
            fq.solver = options.solver;
            break;
        case QuantifierKind::Acc:
            fq = acc_fit(post_train, labels, num_classes, options.solver);
            break;
        case QuantifierKind::Pacc:
            fq = pacc_fit(post_train, labels, num_classes, sis_weights, options.solver);
            break;
        case QuantifierKind::Hdy:
            fq = hdy_fit(post_train, labels, num_classes, options.bins, options.solver);
            break;
        case QuantifierKind::DmConcat:
            fq = dm_fit(post_train, labels, num_classes, options.bins, DmAggregation::Concat,
                        options.solver);
            break;
        case QuantifierKind::DmAverage:
            fq = dm_fit(post_train, labels, num_classes, options.bins, DmAggregation::Average,
                        options.solver);
            break;
        case QuantifierKind::Kdey:
            fq = kdey_fit(post_train, labels, num_classes, options.sigma, sis_weights,
                          options.solver);
            break;
    }
    if (sis_weights && sis_weights->any_fallback()) {
        fq.fit_flags.push_back("sis_uniform_fallback");
    }
    return fq;
}

QuantifyResult quantify(const FittedQuantifier& fq, const PosteriorMatrix& post_test) {
    if (post_test.rows() == 0) throw std::invalid_argument("quantify: empty test set");
    if (post_test.num_classes() != fq.num_classes) {
        throw std::invalid_argument("quantify: class count mismatch");
    }
    switch (fq.kind) {
        case QuantifierKind::Cc: {
            auto hard = hard_labels(post_test);
            return finish_with_fit_flags({cc(hard, fq.num_classes), {}}, fq);
        }
        case QuantifierKind::Pcc:
            return finish_with_fit_flags({pcc(post_test), {}}, fq);
        case QuantifierKind::Acc: {
            auto hard = hard_labels(post_test);
            Prevalence observed = cc(hard, fq.num_classes);
            return finish_with_fit_flags(solve_adjustment(fq.confusion, observed.values, fq.solver),
                                         fq);
        }
        case QuantifierKind::Pacc: {
            Prevalence observed = pcc(post_test);
            return finish_with_fit_flags(solve_adjustment(fq.confusion, observed.values, fq.solver),
                                         fq);
        }
        case QuantifierKind::Hdy: {
            std::vector<double> scores(post_test.rows());
            for (std::size_t r = 0; r < post_test.rows(); ++r) scores[r] = post_test.row(r)[1];
            auto q_hist = score_histogram(scores, fq.bins);
            const auto& pos = fq.class_hist[1];
            const auto& neg = fq.class_hist[0];
            QuantifyResult res;
            if (hellinger(pos, neg) < 1e-12) res.flags.push_back("unidentifiable");
            const int G = fq.solver.grid;
            double best_hd = std::numeric_limits<double>::infinity();
            double best_alpha = 0.0;
            std::vector<double> mix(fq.bins);
            for (int gi = 0; gi <= G; ++gi) {
                double alpha = static_cast<double>(gi) / G;
                for (int b = 0; b < fq.bins; ++b) {
                    mix[b] = alpha * pos[b] + (1.0 - alpha) * neg[b];
                }
                double hd = hellinger(mix, q_hist);
                if (hd < best_hd) {
                    best_hd = hd;
                    best_alpha = alpha;
                }
            }
            res.q.values = {1.0 - best_alpha, best_alpha};
            return finish_with_fit_flags(std::move(res), fq);
        }
        case QuantifierKind::DmConcat:
        case QuantifierKind::DmAverage: {
            const int K = fq.num_classes;
            std::vector<std::size_t> all(post_test.rows());
            for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;
            auto test_concat = per_dim_histograms(post_test, all, fq.bins);
            auto test_rep = dm_aggregate(test_concat, K, fq.bins, fq.aggregation);
            std::vector<std::vector<double>> class_reps;
            for (int i = 0; i < K; ++i) {
                class_reps.push_back(dm_aggregate(fq.class_hist[i], K, fq.bins, fq.aggregation));
            }
            return finish_with_fit_flags(dm_solve(class_reps, test_rep, fq.solver), fq);
        }
        case QuantifierKind::Kdey:
            return finish_with_fit_flags(kdey_ml_solve(fq, post_test, fq.solver), fq);
    }
    throw std::logic_error("quantify: bad kind");
}

QuantifierSpec parse_quantifier_spec(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    QuantifierSpec spec;
    std::string kind = j.at("kind").get<std::string>();
    std::string agg = j.value("aggregation", "concat");
    if (agg != "concat" && agg != "average") {
        throw std::invalid_argument("quantifier: aggregation must be concat or average");
    }
    spec.options.aggregation =
        agg == "concat" ? DmAggregation::Concat : DmAggregation::Average;
    if (kind == "dm") {
        spec.options.kind = spec.options.aggregation == DmAggregation::Concat
                                ? QuantifierKind::DmConcat
                                : QuantifierKind::DmAverage;
    } else {
        spec.options.kind = quantifier_kind_from_string(kind);
    }
    spec.options.sigma = j.value("sigma", spec.options.sigma);
    spec.options.bins = j.value("bins", spec.options.bins);
    if (spec.options.sigma <= 0.0) throw std::invalid_argument("quantifier: sigma must be > 0");
    if (spec.options.bins <= 0) throw std::invalid_argument("quantifier: bins must be > 0");
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        spec.options.solver.max_iters = s.value("max_iters", spec.options.solver.max_iters);
        spec.options.solver.tol = s.value("tol", spec.options.solver.tol);
        spec.options.solver.seed = s.value("seed", spec.options.solver.seed);
        spec.options.solver.grid = s.value("grid", spec.options.solver.grid);
    }
    spec.options.solver.validate();
    if (j.contains("sis")) {
        const auto& s = j["sis"];
        spec.use_sis = true;
        if (s.contains("kernel")) spec.sis_kernel = parse_kernel_config(s["kernel"].dump());
        if (s.contains("p_kernel")) spec.sis_p_kernel = parse_kernel_config(s["p_kernel"].dump());
        spec.sis_floor = s.value("floor", spec.sis_floor);
        if (spec.sis_floor <= 0.0) throw std::invalid_argument("quantifier: sis floor must be > 0");
        if (spec.use_sis && spec.options.kind != QuantifierKind::Pacc &&
            spec.options.kind != QuantifierKind::Kdey) {
            throw std::invalid_argument("quantifier: SIS weights only apply to pacc and kdey");
        }
    }
    spec.name = j.value("name", to_string(spec.options.kind) + (spec.use_sis ? "-sis" : ""));
    return spec;
}

}  // namespace graphq
