#include "mvbound/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "mvbound/common.hpp"

namespace mvbound {

void PredictionTable::validate() const {
    std::size_t h_count = n_hypotheses();
    std::size_t n = n_points();
    if (oob_mask.size() != h_count)
        throw std::invalid_argument("prediction table: mask row count mismatch");
    for (int y : truth)
        if (y < 0 || y >= n_classes)
            throw std::invalid_argument("prediction table: truth label out of range");
    for (std::size_t h = 0; h < h_count; ++h) {
        if (predictions[h].size() != n || oob_mask[h].size() != n)
            throw std::invalid_argument("prediction table: row length mismatch");
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            int p = predictions[h][i];
            if (p != -1 && (p < 0 || p >= n_classes))
                throw std::invalid_argument("prediction table: prediction out of range");
            if (oob_mask[h][i]) {
                any = true;
                if (p == -1)
                    throw std::invalid_argument(
                        "prediction table: masked point without a prediction");
            }
        }
        if (!any)
            throw std::invalid_argument("prediction table: hypothesis " + std::to_string(h) +
                                        " has an empty validation set");
    }
}

Dataset read_libsvm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::vector<std::vector<std::pair<std::size_t, double>>> sparse;
    std::vector<double> raw_labels;
    std::size_t max_idx = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        double label;
        if (!(ls >> label))
            throw std::runtime_error(path + ": parse error at line " + std::to_string(lineno));
        std::vector<std::pair<std::size_t, double>> row;
        std::string tok;
        while (ls >> tok) {
            auto colon = tok.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error(path + ": parse error at line " +
                                         std::to_string(lineno));
            std::size_t pos = 0;
            std::size_t idx;
            double val;
            try {
                idx = std::stoul(tok.substr(0, colon), &pos);
                if (pos != colon) throw std::invalid_argument("");
                val = std::stod(tok.substr(colon + 1), &pos);
                if (pos != tok.size() - colon - 1) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw std::runtime_error(path + ": parse error at line " +
                                         std::to_string(lineno));
            }
            if (idx == 0)
                throw std::runtime_error(path + ": parse error at line " +
                                         std::to_string(lineno) + " (indices are 1-based)");
            max_idx = std::max(max_idx, idx);
            row.emplace_back(idx - 1, val);
        }
        sparse.push_back(std::move(row));
        raw_labels.push_back(label);
    }
    if (sparse.empty()) throw std::runtime_error(path + ": empty file");

    // remap labels to 0..C-1 by sort order
    std::map<double, int> remap;
    for (double y : raw_labels) remap[y] = 0;
    int next = 0;
    for (auto& [k, v] : remap) v = next++;

    Dataset d;
    d.class_count = next;
    d.labels.reserve(raw_labels.size());
    for (double y : raw_labels) d.labels.push_back(remap[y]);
    d.features.assign(sparse.size(), std::vector<double>(max_idx, 0.0));
    for (std::size_t i = 0; i < sparse.size(); ++i)
        for (auto& [j, v] : sparse[i]) d.features[i][j] = v;
    return d;
}

PredictionTable read_prediction_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");

    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cur;
        for (char c : s) {
            if (c == ',') {
                cells.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        cells.push_back(cur);
        return cells;
    };

    auto header = split(line);
    if (header.size() != 3) throw std::runtime_error(path + ": bad header");
    std::size_t h_count = std::stoul(header[0]);
    std::size_t n = std::stoul(header[1]);
    int classes = std::stoi(header[2]);
    if (h_count == 0 || n == 0 || classes < 2)
        throw std::runtime_error(path + ": bad header dimensions");

    PredictionTable t;
    t.n_classes = classes;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": missing truth row");
    auto truth_cells = split(line);
    if (truth_cells.size() != n) throw std::runtime_error(path + ": truth row length mismatch");
    for (auto& c : truth_cells) t.truth.push_back(std::stoi(c));

    for (std::size_t h = 0; h < h_count; ++h) {
        if (!std::getline(in, line))
            throw std::runtime_error(path + ": fewer hypothesis rows than header says");
        auto cells = split(line);
        if (cells.size() != n)
            throw std::runtime_error(path + ": row " + std::to_string(h) + " length mismatch");
        std::vector<int> preds(n, -1);
        std::vector<std::uint8_t> mask(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (cells[i].empty()) continue;
            preds[i] = std::stoi(cells[i]);
            mask[i] = 1;
        }
        t.predictions.push_back(std::move(preds));
        t.oob_mask.push_back(std::move(mask));
    }
    if (std::getline(in, line) && !line.empty())
        throw std::runtime_error(path + ": more hypothesis rows than header says");
    t.validate();
    return t;
}

void write_prediction_table(const PredictionTable& table, const std::string& path) {
    table.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << table.n_hypotheses() << ',' << table.n_points() << ',' << table.n_classes << '\n';
    for (std::size_t i = 0; i < table.truth.size(); ++i)
        out << (i ? "," : "") << table.truth[i];
    out << '\n';
    for (std::size_t h = 0; h < table.n_hypotheses(); ++h) {
        for (std::size_t i = 0; i < table.n_points(); ++i) {
            if (i) out << ',';
            if (table.oob_mask[h][i]) out << table.predictions[h][i];
        }
        out << '\n';
    }
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double test_fraction,
                                             std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw std::invalid_argument("test_fraction must lie in (0,1)");
    std::vector<std::vector<std::size_t>> by_class(d.class_count);
    for (std::size_t i = 0; i < d.size(); ++i) by_class[d.labels[i]].push_back(i);
    for (int c = 0; c < d.class_count; ++c)
        if (by_class[c].size() < 2)
            throw std::runtime_error("class " + std::to_string(c) +
                                     " has fewer than 2 points; cannot split");

    std::mt19937_64 rng(splitmix64(seed));
    Dataset train, test;
    train.class_count = test.class_count = d.class_count;
    std::vector<std::size_t> train_idx, test_idx;
    for (auto& idx : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        std::size_t n_test = static_cast<std::size_t>(
            std::llround(test_fraction * static_cast<double>(idx.size())));
        n_test = std::min(std::max<std::size_t>(n_test, 1), idx.size() - 1);
        test_idx.insert(test_idx.end(), idx.begin(), idx.begin() + n_test);
        train_idx.insert(train_idx.end(), idx.begin() + n_test, idx.end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
    for (std::size_t i : train_idx) {
        train.features.push_back(d.features[i]);
        train.labels.push_back(d.labels[i]);
    }
    for (std::size_t i : test_idx) {
        test.features.push_back(d.features[i]);
        test.labels.push_back(d.labels[i]);
    }
    return {std::move(train), std::move(test)};
}

Dataset make_synthetic_dataset(std::size_t n, std::size_t dim, int classes,
                               std::uint64_t seed, double spread) {
    if (n == 0 || dim == 0 || classes < 2)
        throw std::invalid_argument("make_synthetic_dataset: bad shape");
    std::mt19937_64 rng(splitmix64(seed ^ 0xda7aULL));
    std::normal_distribution<double> gauss(0.0, 1.0);
    // class centers on a ring so that neighbouring blobs overlap
    std::vector<std::vector<double>> centers(classes, std::vector<double>(dim, 0.0));
    for (int c = 0; c < classes; ++c) {
        double angle = 2.0 * 3.14159265358979323846 * c / classes;
        centers[c][0] = spread * std::cos(angle);
        if (dim > 1) centers[c][1] = spread * std::sin(angle);
    }
    Dataset d;
    d.class_count = classes;
    d.features.reserve(n);
    d.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        int c = static_cast<int>(i % classes);
        std::vector<double> x(dim);
        for (std::size_t j = 0; j < dim; ++j) x[j] = centers[c][j] + gauss(rng);
        d.features.push_back(std::move(x));
        d.labels.push_back(c);
    }
    return d;
}

}  // namespace mvbound
