#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "graphq/bench.hpp"
#include "graphq/classifier.hpp"
#include "graphq/graph.hpp"
#include "graphq/metrics.hpp"
#include "graphq/posteriors.hpp"
#include "graphq/quantifiers.hpp"
#include "graphq/samplers.hpp"
#include "graphq/split.hpp"

namespace {

using namespace graphq;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
}

bool file_exists(const std::string& path) { return std::ifstream(path).good(); }

// --seed beats GQ_SEED beats the fallback.
std::uint64_t resolve_seed(bool seed_given, std::uint64_t seed, std::uint64_t fallback) {
    if (seed_given) return seed;
    if (const char* v = std::getenv("GQ_SEED")) return std::stoull(v);
    return fallback;
}

std::array<double, 3> parse_ratios(const std::string& text) {
    std::array<double, 3> out{};
    std::stringstream ss(text);
    std::string cell;
    int i = 0;
    while (std::getline(ss, cell, ',')) {
        if (i >= 3) throw std::runtime_error("ratios: expected 3 comma-separated values");
        out[i++] = std::stod(cell);
    }
    if (i != 3) throw std::runtime_error("ratios: expected 3 comma-separated values");
    return out;
}

int csv_columns(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        return static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
    }
    throw std::runtime_error("empty posterior file " + path);
}

std::vector<int> read_label_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<int> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        labels.push_back(std::stoi(line));
    }
    return labels;
}

std::vector<NodeId> split_file_order(const Split& s) {
    std::vector<NodeId> order;
    order.insert(order.end(), s.classifier_train.begin(), s.classifier_train.end());
    order.insert(order.end(), s.quantifier_train.begin(), s.quantifier_train.end());
    order.insert(order.end(), s.quantifier_test_pool.begin(), s.quantifier_test_pool.end());
    return order;
}

int cmd_split(const std::string& edges, const std::string& features, const std::string& labels,
              const std::string& ratios, bool seed_given, std::uint64_t seed,
              const std::string& out) {
    Graph g = load_graph(edges, features.empty() ? std::nullopt : std::make_optional(features),
                         labels.empty() ? std::nullopt : std::make_optional(labels));
    Split s = make_split(g, parse_ratios(ratios), resolve_seed(seed_given, seed, 0));
    save_split(s, out);
    std::cout << "split: " << s.classifier_train.size() << " classifier-train, "
              << s.quantifier_train.size() << " quantifier-train, "
              << s.quantifier_test_pool.size() << " pool -> " << out << "\n";
    return 0;
}

int cmd_train(const std::string& edges, const std::string& features, const std::string& labels,
              const std::string& split_path, const std::string& config_path, bool seed_given,
              std::uint64_t seed, const std::string& out, const std::string& model_out) {
    Graph g = load_graph(edges, features, labels);
    Split s = load_split(split_path);
    ClassifierConfig cfg =
        config_path.empty() ? ClassifierConfig{} : parse_classifier_config(read_file(config_path));
    cfg.seed = resolve_seed(seed_given, seed, cfg.seed);
    LogisticModel m = fit_logistic(g, s.classifier_train, cfg);
    std::vector<NodeId> order = split_file_order(s);
    PosteriorMatrix post = predict_proba(m, g, order);
    save_posteriors(post, out);
    if (!model_out.empty()) write_file(model_out, model_to_json(m));
    std::cout << "train: " << post.rows() << " posterior rows -> " << out << "\n";
    return 0;
}

int cmd_sample(const std::string& edges, const std::string& labels, const std::string& split_path,
               const std::string& plan_path, const std::string& shift, bool n_given, int n,
               bool seed_given, std::uint64_t seed, const std::string& out) {
    Graph g = load_graph(edges, std::nullopt, std::make_optional(labels));
    Split s = load_split(split_path);
    SamplePlan plan = plan_path.empty() ? SamplePlan{} : parse_sample_plan(read_file(plan_path));
    if (!shift.empty()) plan.protocol = shift_protocol_from_string(shift);
    if (n_given) plan.n = n;
    plan.seed = resolve_seed(seed_given, seed, plan.seed);
    plan.validate();
    auto samples = make_samples(g, s.quantifier_test_pool, plan);
    write_file(out, samples_to_json(samples, plan));
    std::cout << "sample: " << samples.size() << " samples -> " << out << "\n";
    return 0;
}

int cmd_quantify(const std::string& quantifier, const std::string& posteriors,
                 const std::string& train_posteriors, const std::string& train_labels,
                 int classes, bool sigma_given, double sigma, const std::string& out) {
    QuantifierSpec spec;
    if (file_exists(quantifier)) {
        spec = parse_quantifier_spec(read_file(quantifier));
    } else {
        nlohmann::json j{{"kind", quantifier}};
        spec = parse_quantifier_spec(j.dump());
    }
    if (sigma_given) spec.options.sigma = sigma;
    if (spec.use_sis) {
        throw std::runtime_error(
            "quantify: SIS needs graph context; run it through bench");
    }
    int K = classes > 0 ? classes : csv_columns(posteriors);
    PosteriorMatrix post_test = load_posteriors(posteriors, K);

    FittedQuantifier fq;
    if (spec.options.kind == QuantifierKind::Cc || spec.options.kind == QuantifierKind::Pcc) {
        fq = make_quantifier(spec.options, PosteriorMatrix(0, K), {}, K);
    } else {
        if (train_posteriors.empty() || train_labels.empty()) {
            throw std::runtime_error("quantify: kind '" + to_string(spec.options.kind) +
                                     "' needs --train-posteriors and --train-labels");
        }
        PosteriorMatrix post_train = load_posteriors(train_posteriors, K);
        std::vector<int> labels = read_label_file(train_labels);
        fq = make_quantifier(spec.options, post_train, labels, K);
    }
    QuantifyResult res = quantify(fq, post_test);
    nlohmann::json j{{"quantifier", spec.name},
                     {"prevalence", res.q.values},
                     {"flags", res.flags}};
    std::string text = j.dump(2);
    std::cout << text << "\n";
    if (!out.empty()) write_file(out, text);
    return 0;
}

int cmd_bench(const std::string& config_path, int jobs, bool seed_given, std::uint64_t seed,
              const std::string& shift, const std::string& quantifier, bool sigma_given,
              double sigma, bool lambda_given, double lambda_mix, const std::string& out) {
    RunConfig config = load_run_config(config_path);
    config.master_seed = resolve_seed(seed_given, seed, config.master_seed);
    if (!shift.empty()) {
        ShiftProtocol p = shift_protocol_from_string(shift);
        std::erase_if(config.plans, [&](const SamplePlan& pl) { return pl.protocol != p; });
        if (config.plans.empty()) throw std::runtime_error("bench: no plan with shift " + shift);
    }
    if (!quantifier.empty()) {
        std::erase_if(config.quantifiers,
                      [&](const QuantifierSpec& q) { return q.name != quantifier; });
        if (config.quantifiers.empty()) {
            throw std::runtime_error("bench: no quantifier named " + quantifier);
        }
    }
    for (QuantifierSpec& q : config.quantifiers) {
        if (sigma_given) q.options.sigma = sigma;
        if (lambda_given) q.sis_kernel.lambda_mix = lambda_mix;
    }
    auto results = run_benchmark(config, jobs);
    write_results_csv(results, out);
    std::cout << "bench: " << results.size() << " trials -> " << out << "\n";
    return 0;
}

int cmd_report(const std::string& results_path, double level, const std::string& out) {
    auto results = read_results_csv(results_path);
    if (results.empty()) throw std::runtime_error("report: no trials in " + results_path);
    RankTable table = rank_and_test(results, level);
    write_file(out, rank_table_to_csv(table));
    std::cout << "report: " << table.rows.size() << " rows -> " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Graph node-label quantification pipeline"};
    app.require_subcommand(1);

    // split
    auto* sp = app.add_subcommand("split", "Partition a graph into train/test node sets");
    std::string sp_edges, sp_features, sp_labels, sp_out, sp_ratios = "0.05,0.15,0.8";
    std::uint64_t sp_seed = 0;
    sp->add_option("--edges", sp_edges)->required();
    sp->add_option("--features", sp_features);
    sp->add_option("--labels", sp_labels);
    sp->add_option("--ratios", sp_ratios);
    auto* sp_seed_opt = sp->add_option("--seed", sp_seed);
    sp->add_option("--out", sp_out)->required();

    // train
    auto* tr = app.add_subcommand("train", "Fit the classifier, write posteriors");
    std::string tr_edges, tr_features, tr_labels, tr_split, tr_config, tr_out, tr_model;
    std::uint64_t tr_seed = 0;
    tr->add_option("--edges", tr_edges)->required();
    tr->add_option("--features", tr_features)->required();
    tr->add_option("--labels", tr_labels)->required();
    tr->add_option("--split", tr_split)->required();
    tr->add_option("--config", tr_config);
    auto* tr_seed_opt = tr->add_option("--seed", tr_seed);
    tr->add_option("--out", tr_out)->required();
    tr->add_option("--model-out", tr_model);

    // sample
    auto* sa = app.add_subcommand("sample", "Draw test samples from the pool");
    std::string sa_edges, sa_labels, sa_split, sa_plan, sa_shift, sa_out;
    std::uint64_t sa_seed = 0;
    int sa_n = 100;
    sa->add_option("--edges", sa_edges)->required();
    sa->add_option("--labels", sa_labels)->required();
    sa->add_option("--split", sa_split)->required();
    sa->add_option("--plan", sa_plan);
    sa->add_option("--shift", sa_shift);
    auto* sa_n_opt = sa->add_option("--n", sa_n);
    auto* sa_seed_opt = sa->add_option("--seed", sa_seed);
    sa->add_option("--out", sa_out)->required();

    // quantify
    auto* qu = app.add_subcommand("quantify", "Estimate prevalence from posteriors");
    std::string qu_quant, qu_post, qu_train_post, qu_train_labels, qu_out;
    int qu_classes = 0;
    double qu_sigma = 0.1;
    qu->add_option("--quantifier", qu_quant, "config path or kind name")->required();
    qu->add_option("--posteriors", qu_post)->required();
    qu->add_option("--train-posteriors", qu_train_post);
    qu->add_option("--train-labels", qu_train_labels);
    qu->add_option("--classes", qu_classes);
    auto* qu_sigma_opt = qu->add_option("--sigma", qu_sigma);
    qu->add_option("--out", qu_out);

    // bench
    auto* be = app.add_subcommand("bench", "Run the full benchmark loop");
    std::string be_config, be_shift, be_quant, be_out;
    std::uint64_t be_seed = 0;
    int be_jobs = 1;
    double be_sigma = 0.1, be_lambda = 0.9;
    be->add_option("--config", be_config)->required();
    be->add_option("--jobs", be_jobs);
    auto* be_seed_opt = be->add_option("--seed", be_seed);
    be->add_option("--shift", be_shift);
    be->add_option("--quantifier", be_quant);
    auto* be_sigma_opt = be->add_option("--sigma", be_sigma);
    auto* be_lambda_opt = be->add_option("--lambda-mix", be_lambda);
    be->add_option("--out", be_out)->required();

    // report
    auto* re = app.add_subcommand("report", "Aggregate results into a rank table");
    std::string re_results, re_out;
    double re_level = 0.05;
    re->add_option("--results", re_results)->required();
    re->add_option("--level", re_level);
    re->add_option("--out", re_out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sp->parsed()) {
            return cmd_split(sp_edges, sp_features, sp_labels, sp_ratios,
                             sp_seed_opt->count() > 0, sp_seed, sp_out);
        }
        if (tr->parsed()) {
            return cmd_train(tr_edges, tr_features, tr_labels, tr_split, tr_config,
                             tr_seed_opt->count() > 0, tr_seed, tr_out, tr_model);
        }
        if (sa->parsed()) {
            return cmd_sample(sa_edges, sa_labels, sa_split, sa_plan, sa_shift,
                              sa_n_opt->count() > 0, sa_n, sa_seed_opt->count() > 0, sa_seed,
                              sa_out);
        }
        if (qu->parsed()) {
            return cmd_quantify(qu_quant, qu_post, qu_train_post, qu_train_labels, qu_classes,
                                qu_sigma_opt->count() > 0, qu_sigma, qu_out);
        }
        if (be->parsed()) {
            return cmd_bench(be_config, be_jobs, be_seed_opt->count() > 0, be_seed, be_shift,
                             be_quant, be_sigma_opt->count() > 0, be_sigma,
                             be_lambda_opt->count() > 0, be_lambda, be_out);
        }
        if (re->parsed()) return cmd_report(re_results, re_level, re_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
