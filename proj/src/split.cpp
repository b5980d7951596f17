#include "graphq/split.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "graphq/rng.hpp"

namespace graphq {

Split make_split(const Graph& g, std::array<double, 3> ratios, std::uint64_t seed) {
    const double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("make_split: ratios must sum to 1");
    }
    for (double r : ratios) {
        if (r <= 0.0) throw std::invalid_argument("make_split: ratios must be positive");
    }

    const NodeId n = g.num_nodes();
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double ideal = ratios[i] * n;
        sizes[i] = static_cast<std::size_t>(std::floor(ideal));
        frac[i] = ideal - static_cast<double>(sizes[i]);
        assigned += sizes[i];
    }
    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return frac[a] > frac[b]; });
    for (std::size_t r = 0; r < static_cast<std::size_t>(n) - assigned; ++r) {
        ++sizes[order[r % 3]];
    }

    std::vector<NodeId> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(Rng::derive(seed, 0x53504c49u));  // split stream
    rng.shuffle(perm);

    Split s;
    s.seed = seed;
    s.classifier_train.assign(perm.begin(), perm.begin() + sizes[0]);
    s.quantifier_train.assign(perm.begin() + sizes[0], perm.begin() + sizes[0] + sizes[1]);
    s.quantifier_test_pool.assign(perm.begin() + sizes[0] + sizes[1], perm.end());
    std::sort(s.classifier_train.begin(), s.classifier_train.end());
    std::sort(s.quantifier_train.begin(), s.quantifier_train.end());
    std::sort(s.quantifier_test_pool.begin(), s.quantifier_test_pool.end());
    return s;
}

Split load_split(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open split file: " + path);
    nlohmann::json j;
    in >> j;
    Split s;
    s.classifier_train = j.at("classifier_train").get<std::vector<NodeId>>();
    s.quantifier_train = j.at("quantifier_train").get<std::vector<NodeId>>();
    s.quantifier_test_pool = j.at("quantifier_test_pool").get<std::vector<NodeId>>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
}

void save_split(const Split& s, const std::string& path) {
    nlohmann::json j{{"classifier_train", s.classifier_train},
                     {"quantifier_train", s.quantifier_train},
                     {"quantifier_test_pool", s.quantifier_test_pool},
                     {"seed", s.seed}};
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write split file: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace graphq
