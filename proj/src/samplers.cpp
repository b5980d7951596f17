#include "graphq/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace graphq {

namespace {

constexpr std::uint64_t kTagPps = 0x707073;
constexpr std::uint64_t kTagRw = 0x7277;
constexpr std::uint64_t kTagBfs = 0x626673;
constexpr int kWalkCap = 10000;

Prevalence realized_prevalence(const Graph& g, std::span<const NodeId> nodes) {
    std::vector<double> counts(g.num_classes(), 0.0);
    for (NodeId u : nodes) counts[g.label(u)] += 1.0;
    return Prevalence::normalized(counts);
}

std::vector<std::vector<NodeId>> pool_by_class(const Graph& g, std::span<const NodeId> pool) {
    std::vector<std::vector<NodeId>> by_class(g.num_classes());
    for (NodeId u : pool) by_class[g.label(u)].push_back(u);
    return by_class;
}

void check_pool(const Graph& g, std::span<const NodeId> pool) {
    if (pool.empty()) throw std::invalid_argument("samplers: empty pool");
    if (!g.has_labels()) throw std::invalid_argument("samplers: graph has no labels");
    for (NodeId u : pool) {
        if (u < 0 || u >= g.num_nodes()) {
            throw std::invalid_argument("samplers: pool node out of range");
        }
    }
}

// Start vertices for one label: distinct while available, then uniform
// draws with replacement to reach the requested count.
std::vector<NodeId> pick_starts(const std::vector<NodeId>& candidates, int count, Rng& rng) {
    std::vector<NodeId> shuffled = candidates;
    rng.shuffle(shuffled);
    std::vector<NodeId> starts;
    for (int t = 0; t < count; ++t) {
        if (static_cast<std::size_t>(t) < shuffled.size()) {
            starts.push_back(shuffled[t]);
        } else {
            starts.push_back(candidates[rng.index(candidates.size())]);
        }
    }
    return starts;
}

TestSample pps_draw(const Graph& g, const std::vector<std::vector<NodeId>>& by_class,
                    const Prevalence& q, int n, std::uint64_t seed, Rng& rng) {
    const int K = g.num_classes();
    std::vector<int> counts = largest_remainder_counts(n, q);

    // Cap at capacity, then push the deficit onto classes with spare nodes,
    // proportionally to q.
    std::vector<int> cap(K);
    for (int i = 0; i < K; ++i) {
        cap[i] = static_cast<int>(by_class[i].size());
        counts[i] = std::min(counts[i], cap[i]);
    }
    int deficit = n - std::accumulate(counts.begin(), counts.end(), 0);
    while (deficit > 0) {
        std::vector<int> spare_ids;
        double wsum = 0.0;
        for (int i = 0; i < K; ++i) {
            if (cap[i] > counts[i]) {
                spare_ids.push_back(i);
                wsum += q.values[i];
            }
        }
        if (spare_ids.empty()) break;
        std::vector<double> w(spare_ids.size());
        for (std::size_t j = 0; j < spare_ids.size(); ++j) {
            w[j] = wsum > 0.0 ? q.values[spare_ids[j]] / wsum
                              : 1.0 / static_cast<double>(spare_ids.size());
        }
        std::vector<int> extra = largest_remainder_counts(deficit, Prevalence{w});
        for (std::size_t j = 0; j < spare_ids.size(); ++j) {
            int i = spare_ids[j];
            int add = std::min(extra[j], cap[i] - counts[i]);
            counts[i] += add;
            deficit -= add;
        }
    }

    TestSample s;
    s.protocol = ShiftProtocol::Pps;
    s.seed = seed;
    for (int i = 0; i < K; ++i) {
        std::vector<NodeId> cls = by_class[i];
        rng.shuffle(cls);
        s.nodes.insert(s.nodes.end(), cls.begin(), cls.begin() + counts[i]);
    }
    std::sort(s.nodes.begin(), s.nodes.end());
    s.short_sample = static_cast<int>(s.nodes.size()) < n;
    s.true_prevalence = realized_prevalence(g, s.nodes);
    return s;
}

TestSample collect_rw(const Graph& g, const std::vector<char>& in_pool, NodeId start,
                      const SamplePlan& plan, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<char> taken(g.num_nodes(), 0);
    TestSample s;
    s.protocol = ShiftProtocol::Rw;
    s.seed = seed;
    s.start = start;
    taken[start] = 1;
    s.nodes.push_back(start);
    int walks = 0;
    while (static_cast<int>(s.nodes.size()) < plan.n && walks < kWalkCap) {
        ++walks;
        NodeId pos = start;
        for (int step = 0; step < plan.walk_len; ++step) {
            auto nb = g.neighbors(pos);
            if (rng.uniform() < plan.teleport || nb.empty()) {
                pos = start;
            } else {
                pos = nb[rng.index(nb.size())];
            }
            if (in_pool[pos] && !taken[pos]) {
                taken[pos] = 1;
                s.nodes.push_back(pos);
                if (static_cast<int>(s.nodes.size()) >= plan.n) break;
            }
        }
    }
    std::sort(s.nodes.begin(), s.nodes.end());
    s.short_sample = static_cast<int>(s.nodes.size()) < plan.n;
    s.true_prevalence = realized_prevalence(g, s.nodes);
    return s;
}

TestSample collect_bfs(const Graph& g, const std::vector<char>& in_pool, NodeId start,
                       const SamplePlan& plan, std::uint64_t seed) {
    Rng rng(seed);
    TestSample s;
    s.protocol = ShiftProtocol::Bfs;
    s.seed = seed;
    s.start = start;

    std::vector<int> dist(g.num_nodes(), -1);
    std::deque<NodeId> queue{start};
    dist[start] = 0;
    std::vector<std::vector<NodeId>> layers;
    while (!queue.empty()) {
        NodeId u = queue.front();
        queue.pop_front();
        if (static_cast<std::size_t>(dist[u]) >= layers.size()) layers.emplace_back();
        layers[dist[u]].push_back(u);
        for (NodeId v : g.neighbors(u)) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    for (auto& layer : layers) {
        std::vector<NodeId> members;
        for (NodeId u : layer) {
            if (in_pool[u]) members.push_back(u);
        }
        std::sort(members.begin(), members.end());
        rng.shuffle(members);
        for (NodeId u : members) {
            if (static_cast<int>(s.nodes.size()) >= plan.n) break;
            s.nodes.push_back(u);
        }
        if (static_cast<int>(s.nodes.size()) >= plan.n) break;
    }
    std::sort(s.nodes.begin(), s.nodes.end());
    s.short_sample = static_cast<int>(s.nodes.size()) < plan.n;
    s.true_prevalence = realized_prevalence(g, s.nodes);
    return s;
}

std::vector<TestSample> sample_from_starts(const Graph& g, std::span<const NodeId> pool,
                                           const SamplePlan& plan, std::uint64_t tag) {
    check_pool(g, pool);
    auto by_class = pool_by_class(g, pool);
    std::vector<char> in_pool(g.num_nodes(), 0);
    for (NodeId u : pool) in_pool[u] = 1;

    std::vector<TestSample> out;
    for (int label = 0; label < g.num_classes(); ++label) {
        if (by_class[label].empty()) {
            throw std::invalid_argument("samplers: no start vertex with label " +
                                        std::to_string(label) + " in pool");
        }
        Rng pick_rng(Rng::derive(plan.seed, tag, static_cast<std::uint64_t>(label)));
        auto starts = pick_starts(by_class[label], plan.per_label_starts, pick_rng);
        for (int t = 0; t < plan.per_label_starts; ++t) {
            std::uint64_t seed = Rng::derive(plan.seed, tag, static_cast<std::uint64_t>(label),
                                             static_cast<std::uint64_t>(t) + 1);
            out.push_back(tag == kTagRw ? collect_rw(g, in_pool, starts[t], plan, seed)
                                        : collect_bfs(g, in_pool, starts[t], plan, seed));
        }
    }
    return out;
}

}  // namespace

std::string to_string(ShiftProtocol p) {
    switch (p) {
        case ShiftProtocol::Pps: return "pps";
        case ShiftProtocol::Rw: return "rw";
        case ShiftProtocol::Bfs: return "bfs";
    }
    throw std::logic_error("samplers: bad protocol");
}

ShiftProtocol shift_protocol_from_string(const std::string& s) {
    if (s == "pps") return ShiftProtocol::Pps;
    if (s == "rw") return ShiftProtocol::Rw;
    if (s == "bfs") return ShiftProtocol::Bfs;
    throw std::invalid_argument("samplers: unknown protocol '" + s + "'");
}

void SamplePlan::validate() const {
    if (n < 1) throw std::invalid_argument("samplers: n must be >= 1");
    if (zipf_s <= 0.0) throw std::invalid_argument("samplers: zipf_s must be > 0");
    if (walk_len < 1) throw std::invalid_argument("samplers: walk_len must be >= 1");
    if (teleport < 0.0 || teleport > 1.0) {
        throw std::invalid_argument("samplers: teleport must be in [0, 1]");
    }
    if (per_label_starts < 1) {
        throw std::invalid_argument("samplers: per_label_starts must be >= 1");
    }
}

Prevalence zipf_prevalence(int num_classes, double s, Rng& rng) {
    std::vector<int> ranks(num_classes);
    std::iota(ranks.begin(), ranks.end(), 1);
    rng.shuffle(ranks);
    std::vector<double> w(num_classes);
    for (int i = 0; i < num_classes; ++i) w[i] = std::pow(static_cast<double>(ranks[i]), -s);
    return Prevalence::normalized(w);
}

Prevalence zipf_prevalence_ranked(int num_classes, double s) {
    std::vector<double> w(num_classes);
    for (int i = 0; i < num_classes; ++i) w[i] = std::pow(static_cast<double>(i + 1), -s);
    return Prevalence::normalized(w);
}

std::vector<int> largest_remainder_counts(int n, const Prevalence& q) {
    const int K = static_cast<int>(q.values.size());
    std::vector<int> counts(K);
    std::vector<double> rem(K);
    int assigned = 0;
    for (int i = 0; i < K; ++i) {
        double target = n * q.values[i];
        counts[i] = static_cast<int>(std::floor(target));
        rem[i] = target - counts[i];
        assigned += counts[i];
    }
    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (rem[a] != rem[b]) return rem[a] > rem[b];
        return a < b;
    });
    for (int j = 0; j < n - assigned; ++j) counts[order[j % K]] += 1;
    return counts;
}

TestSample sample_pps_one(const Graph& g, std::span<const NodeId> pool, const Prevalence& q,
                          int n, std::uint64_t seed) {
    check_pool(g, pool);
    if (n > static_cast<int>(pool.size())) {
        throw std::invalid_argument("samplers: n exceeds pool size");
    }
    Rng rng(seed);
    return pps_draw(g, pool_by_class(g, pool), q, n, seed, rng);
}

std::vector<TestSample> sample_pps(const Graph& g, std::span<const NodeId> pool,
                                   const SamplePlan& plan) {
    plan.validate();
    check_pool(g, pool);
    if (plan.n > static_cast<int>(pool.size())) {
        throw std::invalid_argument("samplers: n exceeds pool size");
    }
    auto by_class = pool_by_class(g, pool);
    for (int i = 0; i < g.num_classes(); ++i) {
        if (by_class[i].empty()) {
            throw std::invalid_argument("samplers: pool lacks class " + std::to_string(i));
        }
    }
    std::vector<TestSample> out;
    const int total = 10 * g.num_classes();
    for (int sidx = 0; sidx < total; ++sidx) {
        std::uint64_t seed = Rng::derive(plan.seed, kTagPps, static_cast<std::uint64_t>(sidx));
        Rng rng(seed);
        Prevalence q = zipf_prevalence(g.num_classes(), plan.zipf_s, rng);
        out.push_back(pps_draw(g, by_class, q, plan.n, seed, rng));
    }
    return out;
}

std::vector<TestSample> sample_rw(const Graph& g, std::span<const NodeId> pool,
                                  const SamplePlan& plan) {
    plan.validate();
    return sample_from_starts(g, pool, plan, kTagRw);
}

std::vector<TestSample> sample_bfs(const Graph& g, std::span<const NodeId> pool,
                                   const SamplePlan& plan) {
    plan.validate();
    return sample_from_starts(g, pool, plan, kTagBfs);
}

std::vector<TestSample> make_samples(const Graph& g, std::span<const NodeId> pool,
                                     const SamplePlan& plan) {
    switch (plan.protocol) {
        case ShiftProtocol::Pps: return sample_pps(g, pool, plan);
        case ShiftProtocol::Rw: return sample_rw(g, pool, plan);
        case ShiftProtocol::Bfs: return sample_bfs(g, pool, plan);
    }
    throw std::logic_error("samplers: bad protocol");
}

SamplePlan parse_sample_plan(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    SamplePlan p;
    p.protocol = shift_protocol_from_string(j.at("protocol").get<std::string>());
    p.n = j.value("n", p.n);
    p.zipf_s = j.value("zipf_s", p.zipf_s);
    p.walk_len = j.value("walk_len", p.walk_len);
    p.teleport = j.value("teleport", p.teleport);
    p.per_label_starts = j.value("per_label_starts", p.per_label_starts);
    p.seed = j.value("seed", p.seed);
    p.validate();
    return p;
}

std::string sample_plan_to_json(const SamplePlan& plan) {
    nlohmann::json j{{"protocol", to_string(plan.protocol)},
                     {"n", plan.n},
                     {"zipf_s", plan.zipf_s},
                     {"walk_len", plan.walk_len},
                     {"teleport", plan.teleport},
                     {"per_label_starts", plan.per_label_starts},
                     {"seed", plan.seed}};
    return j.dump(2);
}

std::string samples_to_json(std::span<const TestSample> samples, const SamplePlan& plan) {
    nlohmann::json j;
    j["plan"] = nlohmann::json::parse(sample_plan_to_json(plan));
    j["samples"] = nlohmann::json::array();
    for (const TestSample& s : samples) {
        nlohmann::json e{{"nodes", s.nodes},
                         {"true_prevalence", s.true_prevalence.values},
                         {"protocol", to_string(s.protocol)},
                         {"seed", s.seed},
                         {"short", s.short_sample}};
        if (s.start >= 0) e["start"] = s.start;
        j["samples"].push_back(std::move(e));
    }
    return j.dump(2);
}

std::vector<TestSample> samples_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    std::vector<TestSample> out;
    for (const auto& e : j.at("samples")) {
        TestSample s;
        s.nodes = e.at("nodes").get<std::vector<NodeId>>();
        s.true_prevalence.values = e.at("true_prevalence").get<std::vector<double>>();
        s.protocol = shift_protocol_from_string(e.at("protocol").get<std::string>());
        s.seed = e.value("seed", std::uint64_t{0});
        s.start = e.value("start", NodeId{-1});
        s.short_sample = e.value("short", false);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace graphq
