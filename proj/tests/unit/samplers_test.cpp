#include <algorithm>
#include <set>
#include <vector>

#include "doctest.h"
#include "graphq/samplers.hpp"

using namespace graphq;

namespace {

Graph labeled_pool_graph(int per_class) {
    // Edgeless two-class graph; structure is irrelevant for PPS.
    std::vector<int> labels;
    for (int i = 0; i < per_class; ++i) labels.push_back(0);
    for (int i = 0; i < per_class; ++i) labels.push_back(1);
    return Graph(2 * per_class, {}, {}, 0, std::move(labels));
}

std::vector<NodeId> all_nodes(const Graph& g) {
    std::vector<NodeId> pool(g.num_nodes());
    for (NodeId u = 0; u < g.num_nodes(); ++u) pool[u] = u;
    return pool;
}

Graph two_cliques() {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (NodeId u = 0; u < 5; ++u) {
        for (NodeId v = u + 1; v < 5; ++v) {
            edges.emplace_back(u, v);
            edges.emplace_back(u + 5, v + 5);
        }
    }
    return Graph(10, edges, {}, 0, {0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
}

void check_sample_shape(const TestSample& s, const Graph& g, std::span<const NodeId> pool) {
    CHECK(std::is_sorted(s.nodes.begin(), s.nodes.end()));
    CHECK(std::adjacent_find(s.nodes.begin(), s.nodes.end()) == s.nodes.end());
    std::set<NodeId> pool_set(pool.begin(), pool.end());
    for (NodeId u : s.nodes) CHECK(pool_set.count(u) == 1);
    // Recorded prevalence is the realized one.
    std::vector<double> counts(g.num_classes(), 0.0);
    for (NodeId u : s.nodes) counts[g.label(u)] += 1.0;
    for (int k = 0; k < g.num_classes(); ++k) {
        CHECK(s.true_prevalence[k] ==
              doctest::Approx(counts[k] / static_cast<double>(s.nodes.size())).epsilon(1e-12));
    }
}

}  // namespace

TEST_CASE("ranked zipf prevalence matches the harmonic weights") {
    auto q = zipf_prevalence_ranked(3, 1.0);
    CHECK(q[0] == doctest::Approx(6.0 / 11).epsilon(1e-14));
    CHECK(q[1] == doctest::Approx(3.0 / 11).epsilon(1e-14));
    CHECK(q[2] == doctest::Approx(2.0 / 11).epsilon(1e-14));

    auto flat = zipf_prevalence_ranked(4, 1e-12);
    for (int k = 0; k < 4; ++k) CHECK(flat[k] == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("random zipf prevalence is a permutation of the ranked one") {
    Rng rng(7);
    auto ranked = zipf_prevalence_ranked(5, 1.3);
    auto q = zipf_prevalence(5, 1.3, rng);
    std::vector<double> a = ranked.values, b = q.values;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(a[i]).epsilon(1e-12));
}

TEST_CASE("zipf rank assignment is symmetric across classes on average") {
    Rng rng(11);
    std::vector<double> mean(3, 0.0);
    const int draws = 2000;
    for (int t = 0; t < draws; ++t) {
        auto q = zipf_prevalence(3, 1.0, rng);
        for (int k = 0; k < 3; ++k) mean[k] += q[k];
    }
    for (int k = 0; k < 3; ++k) {
        CHECK(mean[k] / draws == doctest::Approx(1.0 / 3).epsilon(0.03));
    }
}

TEST_CASE("largest remainder counts hit the exact budget with ties to lower ids") {
    auto c1 = largest_remainder_counts(100, Prevalence::uniform(3));
    CHECK(c1 == std::vector<int>{34, 33, 33});
    auto c2 = largest_remainder_counts(100, Prevalence({0.5, 0.5}));
    CHECK(c2 == std::vector<int>{50, 50});
    auto c3 = largest_remainder_counts(10, Prevalence({0.55, 0.45}));
    CHECK(c3 == std::vector<int>{6, 4});
    auto c4 = largest_remainder_counts(7, Prevalence({0.2, 0.3, 0.5}));
    // 1.4 / 2.1 / 3.5 -> floors 1/2/3, leftover to the largest remainder.
    CHECK(c4 == std::vector<int>{1, 2, 4});
}

TEST_CASE("pps sample realizes the target prevalence when capacity allows") {
    Graph g = labeled_pool_graph(15);
    auto pool = all_nodes(g);
    auto s = sample_pps_one(g, pool, Prevalence({0.3, 0.7}), 10, 99);
    REQUIRE(s.nodes.size() == 10);
    CHECK(s.protocol == ShiftProtocol::Pps);
    CHECK(s.start == -1);
    CHECK_FALSE(s.short_sample);
    CHECK(s.true_prevalence[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(s.true_prevalence[1] == doctest::Approx(0.7).epsilon(1e-15));
    check_sample_shape(s, g, pool);
}

TEST_CASE("pps redistributes the deficit of an exhausted class") {
    // Class 0 has only 2 pool nodes; a (0.8, 0.2) target at n = 10 must fall
    // back to (2, 8).
    std::vector<int> labels{0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
    Graph g(22, {}, {}, 0, std::move(labels));
    auto pool = all_nodes(g);
    auto s = sample_pps_one(g, pool, Prevalence({0.8, 0.2}), 10, 5);
    REQUIRE(s.nodes.size() == 10);
    CHECK_FALSE(s.short_sample);
    CHECK(s.true_prevalence[0] == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(s.true_prevalence[1] == doctest::Approx(0.8).epsilon(1e-15));
    check_sample_shape(s, g, pool);
}

TEST_CASE("pps rejects n beyond the pool size") {
    Graph g = labeled_pool_graph(3);
    auto pool = all_nodes(g);
    CHECK_THROWS(sample_pps_one(g, pool, Prevalence({0.5, 0.5}), 7, 0));
}

TEST_CASE("pps batch produces 10K deterministic samples") {
    Graph g = labeled_pool_graph(40);
    auto pool = all_nodes(g);
    SamplePlan plan;
    plan.protocol = ShiftProtocol::Pps;
    plan.n = 20;
    plan.seed = 123;
    auto a = sample_pps(g, pool, plan);
    auto b = sample_pps(g, pool, plan);
    REQUIRE(a.size() == 20);  // 10 per class, K = 2
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].nodes == b[i].nodes);
        CHECK(a[i].seed == b[i].seed);
        check_sample_shape(a[i], g, pool);
    }
    plan.seed = 124;
    auto c = sample_pps(g, pool, plan);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].nodes != c[i].nodes) any_diff = true;
    }
    CHECK(any_diff);
}

TEST_CASE("random walk samples stay within walk_len hops of the start") {
    // Path graph; label 0 pins the start to node 0, so nothing beyond node 2
    // is reachable within 2-step walks.
    Graph g(7, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}}, {}, 0, {0, 1, 1, 1, 1, 1, 1});
    auto pool = all_nodes(g);
    SamplePlan plan;
    plan.protocol = ShiftProtocol::Rw;
    plan.n = 7;
    plan.walk_len = 2;
    plan.per_label_starts = 1;
    plan.seed = 3;
    auto samples = sample_rw(g, pool, plan);
    REQUIRE(samples.size() == 2);
    const TestSample& s0 = samples[0];
    CHECK(s0.start == 0);
    CHECK(s0.short_sample);
    for (NodeId u : s0.nodes) CHECK(u <= 2);
    CHECK(std::find(s0.nodes.begin(), s0.nodes.end(), 0) != s0.nodes.end());
    check_sample_shape(s0, g, pool);
}

TEST_CASE("random walk from an isolated start returns just the start") {
    Graph g(3, {{1, 2}}, {}, 0, {0, 1, 1});
    auto pool = all_nodes(g);
    SamplePlan plan;
    plan.protocol = ShiftProtocol::Rw;
    plan.n = 3;
    plan.per_label_starts = 1;
    auto samples = sample_rw(g, pool, plan);
    REQUIRE(samples.size() == 2);
    CHECK(samples[0].nodes == std::vector<NodeId>{0});
    CHECK(samples[0].short_sample);
    CHECK(samples[0].true_prevalence[0] == 1.0);
}

TEST_CASE("random walk sampling is deterministic in the plan seed") {
    Graph g = two_cliques();
    auto pool = all_nodes(g);
    SamplePlan plan;
    plan.protocol = ShiftProtocol::Rw;
    plan.n = 4;
    plan.per_label_starts = 3;
    plan.seed = 77;
    auto a = sample_rw(g, pool, plan);
    auto b = sample_rw(g, pool, plan);
    REQUIRE(a.size() == 6);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].nodes == b[i].nodes);
        CHECK(a[i].start == b[i].start);
        CHECK(a[i].seed == b[i].seed);
    }
}

TEST_CASE("walk and bfs samples from a clique are maximally shifted") {
    Graph g = two_cliques();
    auto pool = all_nodes(g);
    SamplePlan plan;
    plan.n = 5;
    plan.per_label_starts = 1;
    plan.seed = 13;

    plan.protocol = ShiftProtocol::Rw;
    auto rw = sample_rw(g, pool, plan);
    plan.protocol = ShiftProtocol::Bfs;
    auto bfs = sample_bfs(g, pool, plan);
    for (const auto& batch : {rw, bfs}) {
        REQUIRE(batch.size() == 2);
        CHECK(batch[0].true_prevalence[0] == 1.0);
        CHECK(batch[0].true_prevalence[1] == 0.0);
        CHECK(batch[1].true_prevalence[0] == 0.0);
        CHECK(batch[1].true_prevalence[1] == 1.0);
        CHECK(batch[0].nodes == std::vector<NodeId>{0, 1, 2, 3, 4});
        CHECK(batch[1].nodes == std::vector<NodeId>{5, 6, 7, 8, 9});
    }
}

TEST_CASE("bfs collects whole layers in order") {
    Graph g(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {}, 0, {0, 1, 1, 1, 1});
    auto pool = all_nodes(g);
    SamplePlan plan;
    plan.protocol = ShiftProtocol::Bfs;
    plan.n = 3;
    plan.per_label_starts = 1;
    auto samples = sample_bfs(g, pool, plan);
    CHECK(samples[0].start == 0);
    CHECK(samples[0].nodes == std::vector<NodeId>{0, 1, 2});
    CHECK_FALSE(samples[0].short_sample);
}

TEST_CASE("bfs truncates a partial layer but keeps complete inner layers") {
    // Star: layer 0 = {0}, layer 1 = four leaves; n = 3 takes the center
    // plus two random leaves.
    Graph g(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}, {}, 0, {0, 1, 1, 1, 1});
    auto pool = all_nodes(g);
    SamplePlan plan;
    plan.protocol = ShiftProtocol::Bfs;
    plan.n = 3;
    plan.per_label_starts = 1;
    plan.seed = 21;
    auto samples = sample_bfs(g, pool, plan);
    const auto& s = samples[0];
    REQUIRE(s.nodes.size() == 3);
    CHECK(std::find(s.nodes.begin(), s.nodes.end(), 0) != s.nodes.end());
    check_sample_shape(s, g, pool);
}

TEST_CASE("bfs exhausts the component and flags a short sample") {
    Graph g(6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {}, 0, {0, 1, 1, 1, 1, 1});
    auto pool = all_nodes(g);
    SamplePlan plan;
    plan.protocol = ShiftProtocol::Bfs;
    plan.n = 6;
    plan.per_label_starts = 1;
    auto samples = sample_bfs(g, pool, plan);
    CHECK(samples[0].nodes == std::vector<NodeId>{0, 1, 2, 3, 4});
    CHECK(samples[0].short_sample);
}

TEST_CASE("bfs traverses non-pool vertices but never collects them") {
    // Node 1 bridges 0 and {2, 3} but sits outside the pool.
    Graph g(4, {{0, 1}, {1, 2}, {2, 3}}, {}, 0, {0, 1, 1, 1});
    std::vector<NodeId> pool{0, 2, 3};
    SamplePlan plan;
    plan.protocol = ShiftProtocol::Bfs;
    plan.n = 3;
    plan.per_label_starts = 1;
    auto samples = sample_bfs(g, pool, plan);
    CHECK(samples[0].nodes == std::vector<NodeId>{0, 2, 3});
}

TEST_CASE("start selection requires every label in the pool") {
    Graph g = two_cliques();
    std::vector<NodeId> pool{0, 1, 2, 3, 4};  // label 1 absent
    SamplePlan plan;
    plan.protocol = ShiftProtocol::Bfs;
    plan.n = 2;
    CHECK_THROWS(sample_bfs(g, pool, plan));
}

TEST_CASE("plan validation rejects out-of-range parameters") {
    SamplePlan p;
    p.n = 0;
    CHECK_THROWS(p.validate());
    p = {};
    p.zipf_s = 0.0;
    CHECK_THROWS(p.validate());
    p = {};
    p.walk_len = 0;
    CHECK_THROWS(p.validate());
    p = {};
    p.teleport = 1.5;
    CHECK_THROWS(p.validate());
    p = {};
    p.per_label_starts = 0;
    CHECK_THROWS(p.validate());
}

TEST_CASE("protocol names round trip") {
    for (auto p : {ShiftProtocol::Pps, ShiftProtocol::Rw, ShiftProtocol::Bfs}) {
        CHECK(shift_protocol_from_string(to_string(p)) == p);
    }
    CHECK_THROWS(shift_protocol_from_string("uniform"));
}

TEST_CASE("sample plan JSON round trip") {
    SamplePlan p;
    p.protocol = ShiftProtocol::Rw;
    p.n = 55;
    p.zipf_s = 1.7;
    p.walk_len = 4;
    p.teleport = 0.25;
    p.per_label_starts = 6;
    p.seed = 42;
    auto r = parse_sample_plan(sample_plan_to_json(p));
    CHECK(r.protocol == p.protocol);
    CHECK(r.n == p.n);
    CHECK(r.zipf_s == p.zipf_s);
    CHECK(r.walk_len == p.walk_len);
    CHECK(r.teleport == p.teleport);
    CHECK(r.per_label_starts == p.per_label_starts);
    CHECK(r.seed == p.seed);
}

TEST_CASE("samples JSON round trip") {
    Graph g = two_cliques();
    auto pool = all_nodes(g);
    SamplePlan plan;
    plan.protocol = ShiftProtocol::Bfs;
    plan.n = 4;
    plan.per_label_starts = 2;
    plan.seed = 9;
    auto samples = sample_bfs(g, pool, plan);
    auto restored = samples_from_json(samples_to_json(samples, plan));
    REQUIRE(restored.size() == samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        CHECK(restored[i].nodes == samples[i].nodes);
        CHECK(restored[i].true_prevalence.values == samples[i].true_prevalence.values);
        CHECK(restored[i].protocol == samples[i].protocol);
        CHECK(restored[i].seed == samples[i].seed);
        CHECK(restored[i].start == samples[i].start);
        CHECK(restored[i].short_sample == samples[i].short_sample);
    }
}
