#include "graphq/posteriors.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace graphq {

namespace {

double parse_cell(const std::string& cell, std::size_t line_no) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end != begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw std::runtime_error("posteriors: non-numeric cell at line " + std::to_string(line_no));
    }
    return value;
}

}  // namespace

void PosteriorMatrix::push_row(std::span<const double> values) {
    if (num_classes_ == 0) num_classes_ = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != num_classes_) {
        throw std::invalid_argument("posteriors: inconsistent row width");
    }
    data_.insert(data_.end(), values.begin(), values.end());
}

PosteriorMatrix PosteriorMatrix::select(std::span<const std::size_t> indices) const {
    PosteriorMatrix out(indices.size(), num_classes_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= rows()) throw std::out_of_range("posteriors: select index out of range");
        auto src = row(indices[i]);
        auto dst = out.row(i);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

PosteriorMatrix load_posteriors(const std::string& path, int expected_K) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("posteriors: cannot open " + path);
    PosteriorMatrix out(0, expected_K);
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> values;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        values.clear();
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) values.push_back(parse_cell(cell, line_no));
        if (static_cast<int>(values.size()) != expected_K) {
            throw std::runtime_error("posteriors: expected " + std::to_string(expected_K) +
                                     " columns, got " + std::to_string(values.size()) +
                                     " at line " + std::to_string(line_no));
        }
        double sum = 0.0;
        for (double v : values) {
            if (v < 0.0) {
                throw std::runtime_error("posteriors: negative entry at line " +
                                         std::to_string(line_no));
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-6) {
            throw std::runtime_error("posteriors: row sum " + std::to_string(sum) +
                                     " out of tolerance at line " + std::to_string(line_no));
        }
        for (double& v : values) v /= sum;
        out.push_row(values);
    }
    return out;
}

void save_posteriors(const PosteriorMatrix& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("posteriors: cannot open " + path + " for writing");
    char buf[32];
    for (std::size_t i = 0; i < p.rows(); ++i) {
        auto r = p.row(i);
        for (int k = 0; k < p.num_classes(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g", r[k]);
            out << (k ? "," : "") << buf;
        }
        out << '\n';
    }
}

int hard_label(std::span<const double> posterior_row) {
    int best = 0;
    for (int k = 1; k < static_cast<int>(posterior_row.size()); ++k) {
        if (posterior_row[k] > posterior_row[best]) best = k;
    }
    return best;
}

}  // namespace graphq
