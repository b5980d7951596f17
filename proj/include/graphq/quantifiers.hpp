#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "graphq/kernels.hpp"
#include "graphq/posteriors.hpp"
#include "graphq/prevalence.hpp"
#include "graphq/sis.hpp"

namespace graphq {

enum class QuantifierKind { Cc, Pcc, Acc, Pacc, Hdy, DmConcat, DmAverage, Kdey };
enum class DmAggregation { Concat, Average };

std::string to_string(QuantifierKind kind);
QuantifierKind quantifier_kind_from_string(const std::string& s);

struct SolverConfig {
    int max_iters = 1000;
    double tol = 1e-10;
    std::uint64_t seed = 0;
    int grid = 1000;  // binary HDy grid resolution
    void validate() const;
};

struct QuantifyResult {
    Prevalence q;
    std::vector<std::string> flags;
};

// One fitted estimator; which fields are populated depends on kind.
struct FittedQuantifier {
    QuantifierKind kind = QuantifierKind::Pcc;
    int num_classes = 0;
    SolverConfig solver;

    // acc/pacc: confusion[j][i] = P(prediction j | class i), columns sum to 1.
    std::vector<std::vector<double>> confusion;

    // hdy/dm: per class, K score dimensions x bins concatenated; every
    // b-bin block sums to 1. hdy stores only the class-1 score dimension.
    int bins = 8;
    DmAggregation aggregation = DmAggregation::Concat;
    std::vector<std::vector<double>> class_hist;

    // kdey: per-class training posterior banks with per-row weights
    // (each class's weights sum to 1).
    double sigma = 0.1;
    std::vector<PosteriorMatrix> banks;
    std::vector<std::vector<double>> bank_weights;

    std::vector<std::string> fit_flags;
};

// Classify and count over argmax predictions; ties go to the lowest class id.
Prevalence cc(std::span<const int> hard_predictions, int num_classes);
// Probabilistic CC: mean posterior row.
Prevalence pcc(const PosteriorMatrix& posteriors);

// Solves confusion * q = observed by least squares over the simplex.
// A singular system still yields a valid point but is flagged.
QuantifyResult acc_adjust(const std::vector<std::vector<double>>& confusion,
                          const Prevalence& observed, const SolverConfig& cfg = {});

FittedQuantifier acc_fit(const PosteriorMatrix& post_train, std::span<const int> labels,
                         int num_classes, const SolverConfig& cfg = {});
FittedQuantifier pacc_fit(const PosteriorMatrix& post_train, std::span<const int> labels,
                          int num_classes, const std::optional<ClassWeights>& weights = {},
                          const SolverConfig& cfg = {});

// Hellinger distance between histograms: (1/sqrt(2)) * ||sqrt(p) - sqrt(q)||_2.
double hellinger(std::span<const double> p, std::span<const double> q);

// Binary HDy over the class-1 score: grid search on the mixture weight,
// ties to the smallest alpha. Output ordered (q_0, q_1) = (1-alpha, alpha).
QuantifyResult hdy_binary(const PosteriorMatrix& post_train, std::span<const int> labels,
                          const PosteriorMatrix& post_test, int bins = 8,
                          const SolverConfig& cfg = {});

FittedQuantifier dm_fit(const PosteriorMatrix& post_train, std::span<const int> labels,
                        int num_classes, int bins, DmAggregation aggregation,
                        const SolverConfig& cfg = {});
FittedQuantifier hdy_fit(const PosteriorMatrix& post_train, std::span<const int> labels,
                         int num_classes, int bins, const SolverConfig& cfg = {});

FittedQuantifier kdey_fit(const PosteriorMatrix& post_train, std::span<const int> labels,
                          int num_classes, double sigma,
                          const std::optional<ClassWeights>& weights = {},
                          const SolverConfig& cfg = {});

// p_hat(s | class) as the (weighted) mean Gaussian kernel over the class bank.
double kdey_density(const FittedQuantifier& fq, int cls, std::span<const double> s);

// Negative log-likelihood of the mixture at q over the test posteriors.
double kdey_objective(const FittedQuantifier& fq, const PosteriorMatrix& post_test,
                      std::span<const double> q);

// EM fixed point on the mixture proportions: monotone, uniform init. When
// objective_trace is given it receives the objective at the start and after
// every iteration.
QuantifyResult kdey_ml_solve(const FittedQuantifier& fq, const PosteriorMatrix& post_test,
                             const SolverConfig& cfg,
                             std::vector<double>* objective_trace = nullptr);
// Projected-gradient path on the same objective; convex cross-check.
QuantifyResult kdey_pg_solve(const FittedQuantifier& fq, const PosteriorMatrix& post_test,
                             const SolverConfig& cfg);

struct QuantifierOptions {
    QuantifierKind kind = QuantifierKind::Pcc;
    double sigma = 0.1;
    int bins = 8;
    DmAggregation aggregation = DmAggregation::Concat;
    SolverConfig solver;
};

// Dispatches to the fit operations above. SIS weights are accepted by the
// pacc and kdey kinds only.
FittedQuantifier make_quantifier(const QuantifierOptions& options,
                                 const PosteriorMatrix& post_train, std::span<const int> labels,
                                 int num_classes,
                                 const std::optional<ClassWeights>& sis_weights = {});

QuantifyResult quantify(const FittedQuantifier& fq, const PosteriorMatrix& post_test);

// Full estimator description as configured from JSON:
// {"kind","sigma","bins","aggregation","solver":{...},"sis":{"kernel":{...},"floor"}}.
struct QuantifierSpec {
    std::string name;  // CSV display name; defaults to kind, "-sis" appended
    QuantifierOptions options;
    bool use_sis = false;
    KernelConfig sis_kernel = KernelConfig::constant();   // test-side density
    KernelConfig sis_p_kernel = KernelConfig::constant();  // train-side density
    double sis_floor = 1e-12;
};

QuantifierSpec parse_quantifier_spec(const std::string& json_text);

}  // namespace graphq
