#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mvbound {

struct Dataset {
    std::vector<std::vector<double>> features;  // N x d, dense
    std::vector<int> labels;                    // in [0, class_count)
    int class_count = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return features.empty() ? 0 : features[0].size(); }
};

// H x N label predictions over a common point pool, with per-hypothesis
// validation-set (out-of-bag) masks. predictions[h][i] == -1 means
// "not evaluated"; the mask may only be set where a prediction exists.
struct PredictionTable {
    int n_classes = 0;
    std::vector<int> truth;                         // N
    std::vector<std::vector<int>> predictions;      // H x N
    std::vector<std::vector<std::uint8_t>> oob_mask;  // H x N

    std::size_t n_hypotheses() const { return predictions.size(); }
    std::size_t n_points() const { return truth.size(); }

    // Throws std::invalid_argument on any broken invariant.
    void validate() const;
};

// Sparse "label idx:val" text format. Labels are remapped to 0..C-1
// preserving the sort order of the original labels.
Dataset read_libsvm(const std::string& path);

// CSV: header "H,N,C"; truth row; then H rows of N cells, each a label
// or empty (empty = not in S_h). UTF-8, LF, decimal.
PredictionTable read_prediction_table(const std::string& path);
void write_prediction_table(const PredictionTable& table, const std::string& path);

// Deterministic per seed; per-class proportions preserved to rounding.
std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double test_fraction,
                                             std::uint64_t seed);

// Gaussian-blob classification set used by the bundled demos and tests.
Dataset make_synthetic_dataset(std::size_t n, std::size_t dim, int classes,
                               std::uint64_t seed, double spread = 1.6);

}  // namespace mvbound
