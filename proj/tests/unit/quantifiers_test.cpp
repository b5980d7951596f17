#include <cmath>
#include <optional>
#include <vector>

#include "doctest.h"
#include "graphq/quantifiers.hpp"
#include "graphq/rng.hpp"
#include "graphq/sis.hpp"

using namespace graphq;

namespace {

PosteriorMatrix rows(std::vector<std::vector<double>> r) {
    PosteriorMatrix p(0, static_cast<int>(r.front().size()));
    for (const auto& row : r) p.push_row(row);
    return p;
}

// Binary training set whose posterior scores are well separated by class.
struct BinaryFixture {
    PosteriorMatrix train;
    std::vector<int> labels;
};

BinaryFixture separated_binary(std::size_t per_class) {
    BinaryFixture f;
    f.train = PosteriorMatrix(0, 2);
    Rng rng(17);
    for (std::size_t i = 0; i < per_class; ++i) {
        double s = 0.05 + 0.15 * rng.uniform();
        f.train.push_row(std::vector<double>{1.0 - s, s});
        f.labels.push_back(0);
    }
    for (std::size_t i = 0; i < per_class; ++i) {
        double s = 0.80 + 0.15 * rng.uniform();
        f.train.push_row(std::vector<double>{1.0 - s, s});
        f.labels.push_back(1);
    }
    return f;
}

void check_simplex(const Prevalence& q, std::size_t k) {
    REQUIRE(q.size() == k);
    double sum = 0.0;
    for (double v : q.values) {
        CHECK(v >= -1e-12);
        CHECK(std::isfinite(v));
        sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

}  // namespace

TEST_CASE("kind names round trip") {
    for (auto kind : {QuantifierKind::Cc, QuantifierKind::Pcc, QuantifierKind::Acc,
                      QuantifierKind::Pacc, QuantifierKind::Hdy, QuantifierKind::DmConcat,
                      QuantifierKind::DmAverage, QuantifierKind::Kdey}) {
        CHECK(quantifier_kind_from_string(to_string(kind)) == kind);
    }
    CHECK_THROWS(quantifier_kind_from_string("emq"));
}

TEST_CASE("cc counts argmax predictions") {
    std::vector<int> preds{0, 1, 1, 2, 2, 2};
    auto q = cc(preds, 3);
    CHECK(q[0] == doctest::Approx(1.0 / 6).epsilon(1e-15));
    CHECK(q[1] == doctest::Approx(2.0 / 6).epsilon(1e-15));
    CHECK(q[2] == doctest::Approx(3.0 / 6).epsilon(1e-15));
    CHECK_THROWS(cc(std::vector<int>{}, 2));
    CHECK_THROWS(cc(std::vector<int>{3}, 2));
}

TEST_CASE("pcc averages posterior rows") {
    auto p = rows({{0.2, 0.8}, {0.6, 0.4}});
    auto q = pcc(p);
    CHECK(q[0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(q[1] == doctest::Approx(0.6).epsilon(1e-15));

    auto certain = rows({{1.0, 0.0}, {1.0, 0.0}});
    auto q1 = pcc(certain);
    CHECK(q1[0] == 1.0);
    CHECK(q1[1] == 0.0);
}

TEST_CASE("acc_adjust inverts a known confusion matrix") {
    // observed = M q with q = (0.6, 0.4).
    std::vector<std::vector<double>> M{{0.9, 0.2}, {0.1, 0.8}};
    auto res = acc_adjust(M, Prevalence({0.62, 0.38}));
    CHECK(res.q[0] == doctest::Approx(0.6).epsilon(1e-4));
    CHECK(res.q[1] == doctest::Approx(0.4).epsilon(1e-4));
    CHECK(res.flags.empty());

    auto id = acc_adjust({{1.0, 0.0}, {0.0, 1.0}}, Prevalence({0.3, 0.7}));
    CHECK(id.q[0] == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("acc_adjust clips infeasible systems to the simplex") {
    // M maps the simplex into {x0 <= 0.5}, so observed (1, 0) is infeasible
    // and the least-squares optimum sits at the corner (1, 0).
    std::vector<std::vector<double>> M{{0.5, 0.0}, {0.5, 1.0}};
    auto res = acc_adjust(M, Prevalence({1.0, 0.0}));
    CHECK(res.q[0] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("acc_adjust flags a singular confusion matrix") {
    std::vector<std::vector<double>> M{{0.5, 0.5}, {0.5, 0.5}};
    auto res = acc_adjust(M, Prevalence({0.5, 0.5}));
    REQUIRE(res.flags.size() == 1);
    CHECK(res.flags[0] == "unidentifiable");
    check_simplex(res.q, 2);
}

TEST_CASE("acc_adjust validates its inputs") {
    CHECK_THROWS(acc_adjust({{0.7, 0.2}, {0.1, 0.8}}, Prevalence({0.5, 0.5})));
    CHECK_THROWS(acc_adjust({{1.1, 0.0}, {-0.1, 1.0}}, Prevalence({0.5, 0.5})));
    CHECK_THROWS(acc_adjust({{1.0, 0.0}, {0.0, 1.0}}, Prevalence({0.3, 0.3, 0.4})));
}

TEST_CASE("acc_adjust agrees with a dense grid search in 2 classes") {
    std::vector<std::vector<double>> M{{0.8, 0.3}, {0.2, 0.7}};
    std::vector<double> obs{0.55, 0.45};
    auto res = acc_adjust(M, Prevalence(obs));

    double best_t = 0.0, best_f = 1e300;
    for (int gi = 0; gi <= 10000; ++gi) {
        double t = gi / 10000.0;
        double r0 = M[0][0] * t + M[0][1] * (1 - t) - obs[0];
        double r1 = M[1][0] * t + M[1][1] * (1 - t) - obs[1];
        double f = r0 * r0 + r1 * r1;
        if (f < best_f) {
            best_f = f;
            best_t = t;
        }
    }
    CHECK(best_t == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(res.q[0] == doctest::Approx(best_t).epsilon(2e-4));
}

TEST_CASE("acc_fit builds the hard confusion matrix column-normalized") {
    auto train = rows({{0.9, 0.1}, {0.4, 0.6}, {0.2, 0.8}, {0.3, 0.7}});
    std::vector<int> labels{0, 0, 1, 1};
    auto fq = acc_fit(train, labels, 2);
    CHECK(fq.confusion[0][0] == doctest::Approx(0.5));
    CHECK(fq.confusion[1][0] == doctest::Approx(0.5));
    CHECK(fq.confusion[0][1] == doctest::Approx(0.0));
    CHECK(fq.confusion[1][1] == doctest::Approx(1.0));

    // Every test row predicts class 0, so the feasible optimum is the corner.
    auto res = quantify(fq, rows({{0.9, 0.1}, {0.8, 0.2}}));
    CHECK(res.q[0] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("pacc_fit averages soft posteriors per class") {
    auto train = rows({{0.9, 0.1}, {0.4, 0.6}, {0.2, 0.8}, {0.3, 0.7}});
    std::vector<int> labels{0, 0, 1, 1};
    auto fq = pacc_fit(train, labels, 2);
    CHECK(fq.confusion[0][0] == doctest::Approx(0.65).epsilon(1e-15));
    CHECK(fq.confusion[1][0] == doctest::Approx(0.35).epsilon(1e-15));
    CHECK(fq.confusion[0][1] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(fq.confusion[1][1] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("pacc with a perfect classifier reduces to pcc") {
    auto train = rows({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}});
    std::vector<int> labels{0, 0, 1, 1};
    auto fq = pacc_fit(train, labels, 2);
    auto test = rows({{0.7, 0.3}, {0.2, 0.8}, {0.4, 0.6}});
    auto res = quantify(fq, test);
    auto direct = pcc(test);
    CHECK(res.q[0] == doctest::Approx(direct[0]).epsilon(1e-6));
    CHECK(res.q[1] == doctest::Approx(direct[1]).epsilon(1e-6));
}

TEST_CASE("pacc recovers the mixing prevalence on a synthetic shift") {
    auto f = separated_binary(200);
    auto fq = pacc_fit(f.train, f.labels, 2);
    // Test set drawn from the same two score distributions at 80/20.
    PosteriorMatrix test(0, 2);
    Rng rng(23);
    for (int i = 0; i < 400; ++i) {
        bool cls1 = rng.uniform() < 0.2;
        double s = cls1 ? 0.80 + 0.15 * rng.uniform() : 0.05 + 0.15 * rng.uniform();
        test.push_row(std::vector<double>{1.0 - s, s});
    }
    auto res = quantify(fq, test);
    CHECK(res.q[1] == doctest::Approx(0.2).epsilon(0.08));
}

TEST_CASE("explicit uniform weights match the unweighted pacc fit") {
    auto train = rows({{0.9, 0.1}, {0.4, 0.6}, {0.2, 0.8}, {0.3, 0.7}});
    std::vector<int> labels{0, 0, 1, 1};
    SisWeights w;
    w.rho = {1.0, 1.0, 1.0, 1.0};
    auto cw = class_weights(w, labels, 2);
    auto weighted = pacc_fit(train, labels, 2, cw);
    auto plain = pacc_fit(train, labels, 2);
    for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) {
            CHECK(weighted.confusion[j][i] ==
                  doctest::Approx(plain.confusion[j][i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("weighted pacc shifts the confusion columns toward heavy rows") {
    auto train = rows({{1.0, 0.0}, {0.5, 0.5}, {0.0, 1.0}});
    std::vector<int> labels{0, 0, 1};
    SisWeights w;
    w.rho = {3.0, 1.0, 1.0};
    auto cw = class_weights(w, labels, 2);
    auto fq = pacc_fit(train, labels, 2, cw);
    CHECK(fq.confusion[0][0] == doctest::Approx(0.875).epsilon(1e-15));
    CHECK(fq.confusion[1][0] == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(fq.confusion[1][1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("hellinger distance on hand histograms") {
    std::vector<double> p{0.5, 0.5}, q{0.5, 0.5};
    CHECK(hellinger(p, q) == 0.0);
    CHECK(hellinger(std::vector<double>{1.0, 0.0}, std::vector<double>{0.0, 1.0}) ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK(hellinger(std::vector<double>{1.0, 0.0}, std::vector<double>{0.5, 0.5}) ==
          doctest::Approx(0.5411961001461970).epsilon(1e-14));
    CHECK_THROWS(hellinger(std::vector<double>{1.0}, std::vector<double>{0.5, 0.5}));
}

TEST_CASE("hdy recovers an exact histogram mixture") {
    // Negatives pile into the lowest bin, positives into the highest; the
    // test histogram is exactly their 50/50 mixture.
    PosteriorMatrix train(0, 2);
    std::vector<int> labels;
    for (int i = 0; i < 8; ++i) {
        train.push_row(std::vector<double>{0.9, 0.1});
        labels.push_back(0);
    }
    for (int i = 0; i < 8; ++i) {
        train.push_row(std::vector<double>{0.1, 0.9});
        labels.push_back(1);
    }
    PosteriorMatrix test(0, 2);
    for (int i = 0; i < 4; ++i) test.push_row(std::vector<double>{0.9, 0.1});
    for (int i = 0; i < 4; ++i) test.push_row(std::vector<double>{0.1, 0.9});

    auto res = hdy_binary(train, labels, test, 4);
    CHECK(res.q[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(res.q[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(res.flags.empty());
}

TEST_CASE("hdy hits the pure-class endpoints") {
    auto f = separated_binary(100);
    PosteriorMatrix all_pos(0, 2);
    Rng rng(31);
    for (int i = 0; i < 100; ++i) {
        double s = 0.80 + 0.15 * rng.uniform();
        all_pos.push_row(std::vector<double>{1.0 - s, s});
    }
    auto res = hdy_binary(f.train, f.labels, all_pos, 8);
    CHECK(res.q[1] > 0.95);
}

TEST_CASE("hdy with identical class histograms flags and picks alpha zero") {
    PosteriorMatrix train(0, 2);
    std::vector<int> labels;
    for (int i = 0; i < 4; ++i) {
        train.push_row(std::vector<double>{0.5, 0.5});
        labels.push_back(i % 2);
    }
    auto test = rows({{0.5, 0.5}, {0.5, 0.5}});
    auto res = hdy_binary(train, labels, test, 8);
    REQUIRE(res.flags.size() == 1);
    CHECK(res.flags[0] == "unidentifiable");
    // Grid ties resolve to the smallest alpha.
    CHECK(res.q[0] == 1.0);
    CHECK(res.q[1] == 0.0);
}

TEST_CASE("hdy requires two classes") {
    auto train = rows({{0.2, 0.3, 0.5}});
    std::vector<int> labels{0};
    CHECK_THROWS(hdy_fit(train, labels, 3, 8));
}

TEST_CASE("dm recovers an exactly representable mixture in 3 classes") {
    // Distinct value multisets per class, so even the dimension-averaged
    // histograms stay linearly independent.
    const std::vector<std::vector<double>> pattern{
        {0.9, 0.05, 0.05}, {0.2, 0.7, 0.1}, {0.3, 0.1, 0.6}};
    PosteriorMatrix train(0, 3);
    std::vector<int> labels;
    for (int cls = 0; cls < 3; ++cls) {
        for (int i = 0; i < 10; ++i) {
            train.push_row(pattern[cls]);
            labels.push_back(cls);
        }
    }
    // Test counts 2/3/5 reproduce the class histograms mixed at (0.2, 0.3, 0.5).
    PosteriorMatrix test(0, 3);
    const int counts[3] = {2, 3, 5};
    for (int cls = 0; cls < 3; ++cls) {
        for (int i = 0; i < counts[cls]; ++i) test.push_row(pattern[cls]);
    }
    for (auto agg : {DmAggregation::Concat, DmAggregation::Average}) {
        auto fq = dm_fit(train, labels, 3, 8, agg);
        auto res = quantify(fq, test);
        CHECK(res.q[0] == doctest::Approx(0.2).epsilon(1e-4));
        CHECK(res.q[1] == doctest::Approx(0.3).epsilon(1e-4));
        CHECK(res.q[2] == doctest::Approx(0.5).epsilon(1e-4));
    }
}

TEST_CASE("dm concat matches hdy on clean binary mixtures") {
    PosteriorMatrix train(0, 2);
    std::vector<int> labels;
    for (int i = 0; i < 10; ++i) {
        train.push_row(std::vector<double>{0.9, 0.1});
        labels.push_back(0);
        train.push_row(std::vector<double>{0.1, 0.9});
        labels.push_back(1);
    }
    PosteriorMatrix test(0, 2);
    for (int i = 0; i < 3; ++i) test.push_row(std::vector<double>{0.9, 0.1});
    for (int i = 0; i < 7; ++i) test.push_row(std::vector<double>{0.1, 0.9});

    auto dm = quantify(dm_fit(train, labels, 2, 8, DmAggregation::Concat), test);
    auto hdy = hdy_binary(train, labels, test, 8);
    CHECK(dm.q[1] == doctest::Approx(0.7).epsilon(1e-4));
    CHECK(hdy.q[1] == doctest::Approx(0.7).epsilon(1e-3));
}

TEST_CASE("dm with identical class representations returns uniform and flags") {
    PosteriorMatrix train(0, 2);
    std::vector<int> labels;
    for (int i = 0; i < 6; ++i) {
        train.push_row(std::vector<double>{0.5, 0.5});
        labels.push_back(i % 2);
    }
    auto test = rows({{0.5, 0.5}});
    auto res = quantify(dm_fit(train, labels, 2, 8, DmAggregation::Concat), test);
    REQUIRE(res.flags.size() == 1);
    CHECK(res.flags[0] == "unidentifiable");
    CHECK(res.q[0] == doctest::Approx(0.5));
    CHECK(res.q[1] == doctest::Approx(0.5));
}

TEST_CASE("kdey density matches the closed-form Gaussian on a one-point bank") {
    auto train = rows({{1.0, 0.0}, {0.0, 1.0}});
    std::vector<int> labels{0, 1};
    auto fq = kdey_fit(train, labels, 2, 0.2);
    const double norm = 25.0 / (2.0 * 3.14159265358979323846);
    std::vector<double> at_center{1.0, 0.0};
    CHECK(kdey_density(fq, 0, at_center) == doctest::Approx(norm).epsilon(1e-13));
    CHECK(kdey_density(fq, 1, at_center) ==
          doctest::Approx(norm * std::exp(-25.0)).epsilon(1e-12));

    auto test = rows({{1.0, 0.0}});
    std::vector<double> q{1.0, 0.0};
    CHECK(kdey_objective(fq, test, q) == doctest::Approx(-std::log(norm)).epsilon(1e-12));
}

TEST_CASE("kdey uniform explicit weights equal the default fit") {
    auto f = separated_binary(20);
    SisWeights w;
    w.rho.assign(f.train.rows(), 1.0);
    auto cw = class_weights(w, f.labels, 2);
    auto weighted = kdey_fit(f.train, f.labels, 2, 0.1, cw);
    auto plain = kdey_fit(f.train, f.labels, 2, 0.1);
    for (int cls = 0; cls < 2; ++cls) {
        REQUIRE(weighted.bank_weights[cls].size() == plain.bank_weights[cls].size());
        for (std::size_t i = 0; i < plain.bank_weights[cls].size(); ++i) {
            CHECK(weighted.bank_weights[cls][i] == plain.bank_weights[cls][i]);
        }
    }
}

TEST_CASE("kdey em objective trace is monotone non-increasing") {
    auto f = separated_binary(50);
    auto fq = kdey_fit(f.train, f.labels, 2, 0.1);
    PosteriorMatrix test(0, 2);
    Rng rng(41);
    for (int i = 0; i < 120; ++i) {
        bool cls1 = rng.uniform() < 0.35;
        double s = cls1 ? 0.80 + 0.15 * rng.uniform() : 0.05 + 0.15 * rng.uniform();
        test.push_row(std::vector<double>{1.0 - s, s});
    }
    std::vector<double> trace;
    auto res = kdey_ml_solve(fq, test, fq.solver, &trace);
    REQUIRE(trace.size() >= 2);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] <= trace[i - 1] + 1e-9);
    check_simplex(res.q, 2);
    CHECK(res.q[1] == doctest::Approx(0.35).epsilon(0.15));
}

TEST_CASE("kdey em and projected gradient land on the same objective value") {
    auto f = separated_binary(40);
    auto fq = kdey_fit(f.train, f.labels, 2, 0.15);
    PosteriorMatrix test(0, 2);
    Rng rng(43);
    for (int i = 0; i < 80; ++i) {
        bool cls1 = rng.uniform() < 0.6;
        double s = cls1 ? 0.75 + 0.2 * rng.uniform() : 0.05 + 0.2 * rng.uniform();
        test.push_row(std::vector<double>{1.0 - s, s});
    }
    auto em = kdey_ml_solve(fq, test, fq.solver);
    auto pg = kdey_pg_solve(fq, test, fq.solver);
    double fe = kdey_objective(fq, test, em.q.values);
    double fp = kdey_objective(fq, test, pg.q.values);
    CHECK(std::abs(fe - fp) <= 1e-6);
}

TEST_CASE("kdey drives the prevalence to a pure class on separated banks") {
    auto train = rows({{0.9, 0.1}, {0.85, 0.15}, {0.95, 0.05},
                       {0.1, 0.9}, {0.15, 0.85}, {0.05, 0.95}});
    std::vector<int> labels{0, 0, 0, 1, 1, 1};
    auto fq = kdey_fit(train, labels, 2, 0.05);
    auto test = rows({{0.9, 0.1}, {0.85, 0.15}, {0.95, 0.05}, {0.9, 0.1}});
    auto res = quantify(fq, test);
    CHECK(res.q[0] >= 0.999);
}

TEST_CASE("kdey on identical banks stays uniform") {
    auto train = rows({{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
    std::vector<int> labels{0, 1, 0, 1};
    auto fq = kdey_fit(train, labels, 2, 0.1);
    auto res = quantify(fq, rows({{0.5, 0.5}, {0.4, 0.6}}));
    CHECK(res.q[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(res.q[1] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("kdey flags test points with zero density under every class") {
    auto train = rows({{1.0, 0.0}, {0.0, 1.0}});
    std::vector<int> labels{0, 1};
    auto fq = kdey_fit(train, labels, 2, 0.01);
    auto res = quantify(fq, rows({{0.5, 0.5}}));
    REQUIRE(res.flags.size() == 1);
    CHECK(res.flags[0] == "zero_density");
    check_simplex(res.q, 2);
}

TEST_CASE("kdey rejects a non-positive bandwidth") {
    auto train = rows({{1.0, 0.0}, {0.0, 1.0}});
    std::vector<int> labels{0, 1};
    CHECK_THROWS(kdey_fit(train, labels, 2, 0.0));
}

TEST_CASE("make_quantifier dispatches and rejects SIS on unsupported kinds") {
    auto f = separated_binary(10);
    QuantifierOptions opt;
    opt.kind = QuantifierKind::Pcc;
    auto fq = make_quantifier(opt, f.train, f.labels, 2);
    auto test = rows({{0.2, 0.8}, {0.6, 0.4}});
    auto res = quantify(fq, test);
    CHECK(res.q[0] == doctest::Approx(0.4).epsilon(1e-12));

    SisWeights w;
    w.rho.assign(f.train.rows(), 1.0);
    auto cw = class_weights(w, f.labels, 2);
    QuantifierOptions acc_opt;
    acc_opt.kind = QuantifierKind::Acc;
    CHECK_THROWS(make_quantifier(acc_opt, f.train, f.labels, 2, cw));
}

TEST_CASE("uniform fallback in SIS weights is carried into the result flags") {
    auto train = rows({{0.9, 0.1}, {0.8, 0.2}, {0.2, 0.8}, {0.1, 0.9}});
    std::vector<int> labels{0, 0, 1, 1};
    SisWeights w;
    w.rho = {0.0, 0.0, 1.0, 1.0};
    auto cw = class_weights(w, labels, 2);
    QuantifierOptions opt;
    opt.kind = QuantifierKind::Pacc;
    auto fq = make_quantifier(opt, train, labels, 2, cw);
    REQUIRE(fq.fit_flags.size() == 1);
    CHECK(fq.fit_flags[0] == "sis_uniform_fallback");
    auto res = quantify(fq, rows({{0.5, 0.5}}));
    bool found = false;
    for (const auto& flag : res.flags) {
        if (flag == "sis_uniform_fallback") found = true;
    }
    CHECK(found);
}

TEST_CASE("constant-kernel SIS weights reproduce the unweighted estimates") {
    Graph g(8, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}}, {}, 0, {});
    std::vector<NodeId> train_nodes{0, 1, 2, 3}, test_nodes{4, 5, 6, 7};
    auto sw = density_ratio(g, train_nodes, test_nodes, KernelConfig::constant(),
                            KernelConfig::constant());
    auto train = rows({{0.9, 0.1}, {0.7, 0.3}, {0.2, 0.8}, {0.4, 0.6}});
    std::vector<int> labels{0, 0, 1, 1};
    auto cw = class_weights(sw, labels, 2);
    auto test = rows({{0.8, 0.2}, {0.3, 0.7}, {0.6, 0.4}});

    QuantifierOptions pacc_opt;
    pacc_opt.kind = QuantifierKind::Pacc;
    auto sis_pacc = quantify(make_quantifier(pacc_opt, train, labels, 2, cw), test);
    auto plain_pacc = quantify(make_quantifier(pacc_opt, train, labels, 2), test);
    for (int k = 0; k < 2; ++k) {
        CHECK(sis_pacc.q[k] == doctest::Approx(plain_pacc.q[k]).epsilon(1e-9));
    }

    QuantifierOptions kdey_opt;
    kdey_opt.kind = QuantifierKind::Kdey;
    kdey_opt.sigma = 0.1;
    auto sis_kdey = quantify(make_quantifier(kdey_opt, train, labels, 2, cw), test);
    auto plain_kdey = quantify(make_quantifier(kdey_opt, train, labels, 2), test);
    for (int k = 0; k < 2; ++k) {
        CHECK(sis_kdey.q[k] == doctest::Approx(plain_kdey.q[k]).epsilon(1e-9));
    }
}

TEST_CASE("binary quantifiers are equivariant under class relabeling") {
    auto f = separated_binary(60);
    PosteriorMatrix train_sw(0, 2);
    std::vector<int> labels_sw;
    for (std::size_t r = 0; r < f.train.rows(); ++r) {
        train_sw.push_row(std::vector<double>{f.train.row(r)[1], f.train.row(r)[0]});
        labels_sw.push_back(1 - f.labels[r]);
    }
    PosteriorMatrix test(0, 2), test_sw(0, 2);
    Rng rng(59);
    for (int i = 0; i < 150; ++i) {
        bool cls1 = rng.uniform() < 0.7;
        double s = cls1 ? 0.80 + 0.15 * rng.uniform() : 0.05 + 0.15 * rng.uniform();
        test.push_row(std::vector<double>{1.0 - s, s});
        test_sw.push_row(std::vector<double>{s, 1.0 - s});
    }
    for (auto kind : {QuantifierKind::Pcc, QuantifierKind::Pacc, QuantifierKind::DmConcat,
                      QuantifierKind::Kdey}) {
        QuantifierOptions opt;
        opt.kind = kind;
        auto fwd = quantify(make_quantifier(opt, f.train, f.labels, 2), test);
        auto swp = quantify(make_quantifier(opt, train_sw, labels_sw, 2), test_sw);
        CHECK(fwd.q[0] == doctest::Approx(swp.q[1]).epsilon(1e-4));
        CHECK(fwd.q[1] == doctest::Approx(swp.q[0]).epsilon(1e-4));
    }
}

TEST_CASE("every quantifier outputs a point on the simplex") {
    auto f = separated_binary(40);
    PosteriorMatrix test(0, 2);
    Rng rng(61);
    for (int i = 0; i < 60; ++i) {
        bool cls1 = rng.uniform() < 0.45;
        double s = cls1 ? 0.80 + 0.15 * rng.uniform() : 0.05 + 0.15 * rng.uniform();
        test.push_row(std::vector<double>{1.0 - s, s});
    }
    for (auto kind : {QuantifierKind::Cc, QuantifierKind::Pcc, QuantifierKind::Acc,
                      QuantifierKind::Pacc, QuantifierKind::Hdy, QuantifierKind::DmConcat,
                      QuantifierKind::DmAverage, QuantifierKind::Kdey}) {
        QuantifierOptions opt;
        opt.kind = kind;
        auto res = quantify(make_quantifier(opt, f.train, f.labels, 2), test);
        check_simplex(res.q, 2);
    }
}

TEST_CASE("quantify validates the test matrix") {
    auto f = separated_binary(10);
    QuantifierOptions opt;
    opt.kind = QuantifierKind::Pacc;
    auto fq = make_quantifier(opt, f.train, f.labels, 2);
    PosteriorMatrix empty(0, 2);
    CHECK_THROWS(quantify(fq, empty));
    CHECK_THROWS(quantify(fq, rows({{0.2, 0.3, 0.5}})));
}

TEST_CASE("quantifier specs parse from JSON") {
    auto plain = parse_quantifier_spec(R"({"kind":"pacc"})");
    CHECK(plain.options.kind == QuantifierKind::Pacc);
    CHECK(plain.name == "pacc");
    CHECK_FALSE(plain.use_sis);

    auto dm = parse_quantifier_spec(R"({"kind":"dm","aggregation":"average","bins":16})");
    CHECK(dm.options.kind == QuantifierKind::DmAverage);
    CHECK(dm.options.bins == 16);
    CHECK(dm.name == "dm-average");

    auto sis = parse_quantifier_spec(
        R"({"kind":"kdey","sigma":0.2,"sis":{"kernel":{"kind":"ppr","alpha":0.2,"steps":5}}})");
    CHECK(sis.use_sis);
    CHECK(sis.name == "kdey-sis");
    CHECK(sis.options.sigma == 0.2);
    CHECK(sis.sis_kernel.kind == KernelKind::Ppr);
    CHECK(sis.sis_p_kernel.kind == KernelKind::Constant);

    auto named = parse_quantifier_spec(
        R"({"kind":"pacc","name":"pacc-tuned","solver":{"max_iters":50,"grid":200}})");
    CHECK(named.name == "pacc-tuned");
    CHECK(named.options.solver.max_iters == 50);
    CHECK(named.options.solver.grid == 200);

    CHECK_THROWS(parse_quantifier_spec(R"({"kind":"acc","sis":{}})"));
    CHECK_THROWS(parse_quantifier_spec(R"({"kind":"hdy","bins":0})"));
    CHECK_THROWS(parse_quantifier_spec(R"({"kind":"dm","aggregation":"median"})"));
    CHECK_THROWS(parse_quantifier_spec(R"({"kind":"quapy"})"));
    CHECK_THROWS(parse_quantifier_spec(R"({"kind":"kdey","sigma":-1.0})"));
}
