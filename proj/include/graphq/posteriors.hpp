#pragma once

#include <span>
#include <string>
#include <vector>

namespace graphq {

// Per-node predicted class-probability vectors: one row on the K-simplex per
// node, in a stated node ordering.
class PosteriorMatrix {
public:
    PosteriorMatrix() = default;
    PosteriorMatrix(std::size_t rows, int num_classes)
        : data_(rows * num_classes, 0.0), num_classes_(num_classes) {}

    std::size_t rows() const { return num_classes_ ? data_.size() / num_classes_ : 0; }
    int num_classes() const { return num_classes_; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * num_classes_, static_cast<std::size_t>(num_classes_)};
    }
    std::span<double> row(std::size_t i) {
        return {data_.data() + i * num_classes_, static_cast<std::size_t>(num_classes_)};
    }

    void push_row(std::span<const double> values);

    // Selects rows by index, preserving order.
    PosteriorMatrix select(std::span<const std::size_t> indices) const;

    const std::vector<double>& data() const { return data_; }

private:
    std::vector<double> data_;
    int num_classes_ = 0;
};

// Reads a headerless CSV with expected_K columns per row. Rows must be
// nonnegative and sum to 1 within 1e-6; rows inside the tolerance are
// renormalized, anything further off is an error.
PosteriorMatrix load_posteriors(const std::string& path, int expected_K);

void save_posteriors(const PosteriorMatrix& p, const std::string& path);

// argmax with ties to the lowest class id.
int hard_label(std::span<const double> posterior_row);

}  // namespace graphq
