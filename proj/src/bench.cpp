#include "graphq/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "graphq/metrics.hpp"
#include "graphq/rng.hpp"
#include "graphq/sis.hpp"

namespace graphq {

namespace {

constexpr std::uint64_t kTagSample = 0x73616d70;

std::string join_flags(const std::vector<std::string>& flags) {
    std::string out;
    for (const std::string& f : flags) {
        if (!out.empty()) out += ';';
        out += f;
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Shared inputs of one (dataset, split, classifier, clf_seed) block.
struct Block {
    std::string dataset;
    std::string classifier;
    std::uint64_t split_seed = 0;
    std::uint64_t clf_seed = 0;
    const Graph* g = nullptr;
    Split split;
    std::vector<int> labels_qtrain;
    PosteriorMatrix post_qtrain;
    PosteriorMatrix post_pool;
    std::vector<std::size_t> pool_row;  // node id -> row in post_pool
    // samples per plan, aligned with config.plans
    std::vector<std::vector<TestSample>> samples;
    // fitted quantifiers for non-SIS specs, aligned with config.quantifiers
    std::vector<FittedQuantifier> fitted;
    std::vector<bool> has_fitted;
};

struct Task {
    const Block* block;
    std::size_t plan_idx;
    std::size_t sample_idx;
    std::size_t quant_idx;
};

PosteriorMatrix rows_for_nodes(const PosteriorMatrix& all, const std::vector<std::size_t>& row_of,
                               std::span<const NodeId> nodes) {
    std::vector<std::size_t> rows(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) rows[i] = row_of[nodes[i]];
    return all.select(rows);
}

TrialResult run_trial(const RunConfig& config, const Task& task) {
    const Block& b = *task.block;
    const QuantifierSpec& spec = config.quantifiers[task.quant_idx];
    const TestSample& sample = b.samples[task.plan_idx][task.sample_idx];
    const int K = b.g->num_classes();

    std::vector<std::size_t> rows(sample.nodes.size());
    for (std::size_t i = 0; i < sample.nodes.size(); ++i) rows[i] = b.pool_row[sample.nodes[i]];
    PosteriorMatrix post_test = b.post_pool.select(rows);

    QuantifyResult qr;
    if (spec.use_sis) {
        SisWeights w = density_ratio(*b.g, b.split.quantifier_train, sample.nodes, spec.sis_kernel,
                                     spec.sis_p_kernel, spec.sis_floor);
        ClassWeights cw = class_weights(w, b.labels_qtrain, K);
        FittedQuantifier fq =
            make_quantifier(spec.options, b.post_qtrain, b.labels_qtrain, K, cw);
        qr = quantify(fq, post_test);
    } else {
        qr = quantify(b.fitted[task.quant_idx], post_test);
    }

    TrialResult r;
    r.dataset = b.dataset;
    r.shift = to_string(config.plans[task.plan_idx].protocol);
    r.classifier = b.classifier;
    r.quantifier = spec.name;
    r.split_seed = b.split_seed;
    r.clf_seed = b.clf_seed;
    r.sample_id = static_cast<int>(task.sample_idx);
    r.ae = ae(sample.true_prevalence, qr.q);
    r.rae = rae(sample.true_prevalence, qr.q, sample.nodes.size());
    std::vector<std::string> flags = qr.flags;
    if (sample.short_sample) flags.push_back("short_sample");
    r.flags = join_flags(flags);
    return r;
}

bool trial_key_less(const TrialResult& a, const TrialResult& b) {
    return std::tie(a.dataset, a.shift, a.classifier, a.quantifier, a.split_seed, a.clf_seed,
                    a.sample_id) < std::tie(b.dataset, b.shift, b.classifier, b.quantifier,
                                            b.split_seed, b.clf_seed, b.sample_id);
}

// Tied-average ranks of values sorted ascending (rank 1 = smallest).
std::vector<double> tied_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;  // sample variance, ddof 1
    std::size_t n = 0;
};

MeanVar mean_var(std::span<const double> v) {
    MeanVar mv;
    mv.n = v.size();
    for (double x : v) mv.mean += x;
    if (mv.n > 0) mv.mean /= static_cast<double>(mv.n);
    if (mv.n > 1) {
        for (double x : v) mv.var += (x - mv.mean) * (x - mv.mean);
        mv.var /= static_cast<double>(mv.n - 1);
    }
    return mv;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    RunConfig c;
    c.master_seed = j.value("master_seed", c.master_seed);
    for (const auto& d : j.at("datasets")) {
        DatasetConfig dc;
        dc.name = d.at("name").get<std::string>();
        dc.edges = d.at("edges").get<std::string>();
        dc.features = d.value("features", std::string{});
        dc.labels = d.at("labels").get<std::string>();
        c.datasets.push_back(std::move(dc));
    }
    if (j.contains("split")) {
        const auto& s = j["split"];
        if (s.contains("ratios")) {
            auto r = s["ratios"].get<std::vector<double>>();
            if (r.size() != 3) throw std::invalid_argument("bench: split ratios must have 3 parts");
            c.split_ratios = {r[0], r[1], r[2]};
        }
        if (s.contains("seeds")) c.split_seeds = s["seeds"].get<std::vector<std::uint64_t>>();
    }
    if (j.contains("clf_seeds")) c.clf_seeds = j["clf_seeds"].get<std::vector<std::uint64_t>>();
    for (const auto& e : j.at("classifiers")) {
        ClassifierEntry entry;
        entry.kind = e.value("kind", entry.kind);
        entry.name = e.value("name", entry.kind);
        if (entry.kind == "logistic") {
            entry.config = e.contains("config") ? parse_classifier_config(e["config"].dump())
                                                : ClassifierConfig{};
        } else if (entry.kind == "external") {
            entry.posteriors = e.at("posteriors").get<std::string>();
        } else {
            throw std::invalid_argument("bench: unknown classifier kind '" + entry.kind + "'");
        }
        c.classifiers.push_back(std::move(entry));
    }
    for (const auto& q : j.at("quantifiers")) c.quantifiers.push_back(parse_quantifier_spec(q.dump()));
    for (const auto& p : j.at("plans")) c.plans.push_back(parse_sample_plan(p.dump()));
    if (c.datasets.empty() || c.classifiers.empty() || c.quantifiers.empty() || c.plans.empty()) {
        throw std::invalid_argument("bench: datasets, classifiers, quantifiers, plans all required");
    }
    return c;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("bench: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::vector<std::size_t> split_order_index(const Split& s, NodeId num_nodes) {
    std::vector<std::size_t> row(num_nodes, static_cast<std::size_t>(-1));
    std::size_t next = 0;
    for (const auto* part : {&s.classifier_train, &s.quantifier_train, &s.quantifier_test_pool}) {
        for (NodeId u : *part) {
            if (u < 0 || u >= num_nodes) throw std::invalid_argument("bench: split node out of range");
            row[u] = next++;
        }
    }
    if (next != static_cast<std::size_t>(num_nodes)) {
        throw std::invalid_argument("bench: split does not cover all nodes");
    }
    return row;
}

std::vector<TrialResult> run_benchmark(const RunConfig& config, int jobs) {
    if (jobs < 1) throw std::invalid_argument("bench: jobs must be >= 1");

    std::deque<Graph> graphs;
    std::deque<Block> blocks;

    for (std::size_t di = 0; di < config.datasets.size(); ++di) {
        const DatasetConfig& d = config.datasets[di];
        graphs.push_back(load_graph(
            d.edges, d.features.empty() ? std::nullopt : std::make_optional(d.features),
            std::make_optional(d.labels)));
        const Graph& g = graphs.back();
        for (std::uint64_t ss : config.split_seeds) {
            Split split = make_split(g, config.split_ratios, ss);
            // Posterior rows follow the split-file order; external CSVs use it.
            std::vector<std::size_t> order = split_order_index(split, g.num_nodes());
            for (const ClassifierEntry& ce : config.classifiers) {
                for (std::uint64_t cs : config.clf_seeds) {
                    Block b;
                    b.dataset = d.name;
                    b.classifier = ce.name;
                    b.split_seed = ss;
                    b.clf_seed = cs;
                    b.g = &g;
                    b.split = split;
                    b.labels_qtrain.reserve(split.quantifier_train.size());
                    for (NodeId u : split.quantifier_train) b.labels_qtrain.push_back(g.label(u));
                    if (ce.kind == "logistic") {
                        ClassifierConfig cfg = ce.config;
                        cfg.seed = cs;
                        LogisticModel model = fit_logistic(g, split.classifier_train, cfg);
                        b.post_qtrain = predict_proba(model, g, split.quantifier_train);
                        b.post_pool = predict_proba(model, g, split.quantifier_test_pool);
                    } else {
                        PosteriorMatrix all = load_posteriors(ce.posteriors, g.num_classes());
                        if (all.rows() != static_cast<std::size_t>(g.num_nodes())) {
                            throw std::runtime_error("bench: posterior row count mismatch for " +
                                                     ce.posteriors);
                        }
                        b.post_qtrain = rows_for_nodes(all, order, split.quantifier_train);
                        b.post_pool = rows_for_nodes(all, order, split.quantifier_test_pool);
                    }
                    b.pool_row.assign(g.num_nodes(), static_cast<std::size_t>(-1));
                    for (std::size_t i = 0; i < split.quantifier_test_pool.size(); ++i) {
                        b.pool_row[split.quantifier_test_pool[i]] = i;
                    }
                    for (std::size_t pi = 0; pi < config.plans.size(); ++pi) {
                        SamplePlan plan = config.plans[pi];
                        plan.seed = Rng::derive(config.master_seed, kTagSample, di, ss,
                                                static_cast<std::uint64_t>(pi), plan.seed);
                        b.samples.push_back(make_samples(g, split.quantifier_test_pool, plan));
                    }
                    b.fitted.resize(config.quantifiers.size());
                    b.has_fitted.assign(config.quantifiers.size(), false);
                    for (std::size_t qi = 0; qi < config.quantifiers.size(); ++qi) {
                        const QuantifierSpec& spec = config.quantifiers[qi];
                        if (!spec.use_sis) {
                            b.fitted[qi] = make_quantifier(spec.options, b.post_qtrain,
                                                           b.labels_qtrain, g.num_classes());
                            b.has_fitted[qi] = true;
                        }
                    }
                    blocks.push_back(std::move(b));
                }
            }
        }
    }

    std::vector<Task> tasks;
    for (const Block& b : blocks) {
        for (std::size_t pi = 0; pi < b.samples.size(); ++pi) {
            for (std::size_t si = 0; si < b.samples[pi].size(); ++si) {
                for (std::size_t qi = 0; qi < config.quantifiers.size(); ++qi) {
                    tasks.push_back({&b, pi, si, qi});
                }
            }
        }
    }

    std::vector<TrialResult> results(tasks.size());
    std::vector<char> ok(tasks.size(), 0);
    std::atomic<std::size_t> next{0};
    std::vector<std::string> errors(tasks.size());
    auto worker = [&] {
        for (;;) {
            std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            try {
                results[t] = run_trial(config, tasks[t]);
                ok[t] = 1;
            } catch (const std::exception& e) {
                errors[t] = e.what();
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<TrialResult> out;
    out.reserve(tasks.size());
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (ok[t]) {
            out.push_back(std::move(results[t]));
        } else {
            std::cerr << "bench: trial failed: " << errors[t] << "\n";
        }
    }
    std::sort(out.begin(), out.end(), trial_key_less);
    return out;
}

std::string results_to_csv(std::span<const TrialResult> results) {
    std::string out = "dataset,shift,classifier,quantifier,split_seed,clf_seed,sample_id,ae,rae,flags\n";
    for (const TrialResult& r : results) {
        out += r.dataset + ',' + r.shift + ',' + r.classifier + ',' + r.quantifier + ',' +
               std::to_string(r.split_seed) + ',' + std::to_string(r.clf_seed) + ',' +
               std::to_string(r.sample_id) + ',' + fmt_double(r.ae) + ',' + fmt_double(r.rae) +
               ',' + r.flags + '\n';
    }
    return out;
}

void write_results_csv(std::span<const TrialResult> results, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("bench: cannot open " + path + " for writing");
    out << results_to_csv(results);
}

std::vector<TrialResult> read_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("bench: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("bench: empty results file");
    std::vector<TrialResult> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() == 9) cells.push_back("");  // empty flags column
        if (cells.size() != 10) throw std::runtime_error("bench: malformed results row");
        TrialResult r;
        r.dataset = cells[0];
        r.shift = cells[1];
        r.classifier = cells[2];
        r.quantifier = cells[3];
        r.split_seed = std::stoull(cells[4]);
        r.clf_seed = std::stoull(cells[5]);
        r.sample_id = std::stoi(cells[6]);
        r.ae = std::stod(cells[7]);
        r.rae = std::stod(cells[8]);
        r.flags = cells[9];
        out.push_back(std::move(r));
    }
    return out;
}

double welch_one_sided_p(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2) {
        throw std::invalid_argument("welch: need at least 2 observations per side");
    }
    MeanVar ma = mean_var(a);
    MeanVar mb = mean_var(b);
    double se2 = ma.var / ma.n + mb.var / mb.n;
    if (se2 <= 0.0) return ma.mean > mb.mean ? 0.0 : 1.0;
    double t = (ma.mean - mb.mean) / std::sqrt(se2);
    double da = ma.var / ma.n;
    double db = mb.var / mb.n;
    double df = se2 * se2 / (da * da / (ma.n - 1) + db * db / (mb.n - 1));
    boost::math::students_t dist(df);
    return 1.0 - boost::math::cdf(dist, t);
}

RankTable rank_and_test(std::span<const TrialResult> results, double level) {
    if (results.empty()) throw std::invalid_argument("bench: no trials");
    // block key (shift, classifier) -> quantifier -> dataset -> AEs
    std::map<std::pair<std::string, std::string>,
             std::map<std::string, std::map<std::string, std::vector<double>>>>
        blocks;
    std::map<std::pair<std::string, std::string>, std::map<std::string, std::vector<double>>>
        block_ae, block_rae;
    for (const TrialResult& r : results) {
        auto key = std::make_pair(r.shift, r.classifier);
        blocks[key][r.quantifier][r.dataset].push_back(r.ae);
        block_ae[key][r.quantifier].push_back(r.ae);
        block_rae[key][r.quantifier].push_back(r.rae);
    }

    RankTable table;
    for (const auto& [key, by_quant] : blocks) {
        std::vector<std::string> quants;
        for (const auto& [q, _] : by_quant) quants.push_back(q);

        // Average rank across datasets, ranking per-dataset mean AE.
        std::map<std::string, std::vector<double>> rank_accum;
        std::set<std::string> datasets;
        for (const auto& [q, by_ds] : by_quant) {
            for (const auto& [ds, _] : by_ds) datasets.insert(ds);
        }
        for (const std::string& ds : datasets) {
            std::vector<double> means;
            std::vector<std::string> present;
            for (const std::string& q : quants) {
                auto it = by_quant.at(q).find(ds);
                if (it == by_quant.at(q).end()) continue;
                MeanVar mv = mean_var(it->second);
                means.push_back(mv.mean);
                present.push_back(q);
            }
            std::vector<double> ranks = tied_ranks(means);
            for (std::size_t i = 0; i < present.size(); ++i) {
                rank_accum[present[i]].push_back(ranks[i]);
            }
        }

        // Best mean AE in the block, pooled over datasets.
        std::string best_q;
        double best_mean = std::numeric_limits<double>::infinity();
        for (const std::string& q : quants) {
            MeanVar mv = mean_var(block_ae[key][q]);
            if (mv.mean < best_mean) {
                best_mean = mv.mean;
                best_q = q;
            }
        }

        for (const std::string& q : quants) {
            RankRow row;
            row.shift = key.first;
            row.classifier = key.second;
            row.quantifier = q;
            const auto& aes = block_ae[key][q];
            MeanVar mv = mean_var(aes);
            row.mean_ae = mv.mean;
            row.stderr_ae = mv.n > 1 ? std::sqrt(mv.var / mv.n) : 0.0;
            row.mean_rae = mean_var(block_rae[key][q]).mean;
            row.trials = static_cast<int>(mv.n);
            MeanVar rk = mean_var(rank_accum[q]);
            row.avg_rank = rk.mean;
            const auto& best_aes = block_ae[key][best_q];
            if (q == best_q) {
                row.best_equivalent = true;
            } else if (aes.size() < 2 || best_aes.size() < 2) {
                row.best_equivalent = false;
                row.flags = "insufficient_trials";
            } else {
                // Not marked only when the test says q is worse than the best.
                row.best_equivalent = welch_one_sided_p(aes, best_aes) >= level;
            }
            table.rows.push_back(std::move(row));
        }
    }
    std::sort(table.rows.begin(), table.rows.end(), [](const RankRow& a, const RankRow& b) {
        return std::tie(a.shift, a.classifier, a.avg_rank, a.quantifier) <
               std::tie(b.shift, b.classifier, b.avg_rank, b.quantifier);
    });
    return table;
}

std::string rank_table_to_csv(const RankTable& table) {
    std::string out = "shift,classifier,quantifier,mean_ae,stderr_ae,mean_rae,avg_rank,best,trials,flags\n";
    for (const RankRow& r : table.rows) {
        out += r.shift + ',' + r.classifier + ',' + r.quantifier + ',' + fmt_double(r.mean_ae) +
               ',' + fmt_double(r.stderr_ae) + ',' + fmt_double(r.mean_rae) + ',' +
               fmt_double(r.avg_rank) + ',' + (r.best_equivalent ? "1" : "0") + ',' +
               std::to_string(r.trials) + ',' + r.flags + '\n';
    }
    return out;
}

}  // namespace graphq
