#include "mvbound/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "mvbound/common.hpp"

namespace mvbound {

int RandomTree::predict(const std::vector<double>& x) const {
    int cur = 0;
    while (true) {
        const Node& nd = nodes[cur];
        if (nd.feature < 0) return nd.label;
        cur = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
}

namespace {

int majority_label(const Dataset& d, const std::vector<std::size_t>& idx, int fallback) {
    if (idx.empty()) return fallback;
    std::vector<int> counts(d.class_count, 0);
    for (std::size_t i : idx) counts[d.labels[i]]++;
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

bool is_pure(const Dataset& d, const std::vector<std::size_t>& idx) {
    for (std::size_t i : idx)
        if (d.labels[i] != d.labels[idx[0]]) return false;
    return true;
}

int build_node(RandomTree& tree, const Dataset& d, std::vector<std::size_t> idx, int depth,
               int max_depth, int parent_label, std::mt19937_64& rng) {
    int label = majority_label(d, idx, parent_label);
    int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[node_id].label = label;
    if (depth >= max_depth || idx.size() < 2 || is_pure(d, idx)) return node_id;

    // random feature, random threshold within the node's value range
    std::size_t dim = d.dim();
    std::uniform_int_distribution<std::size_t> pick_feature(0, dim - 1);
    for (int attempt = 0; attempt < 8; ++attempt) {
        std::size_t f = pick_feature(rng);
        double lo = d.features[idx[0]][f], hi = lo;
        for (std::size_t i : idx) {
            lo = std::min(lo, d.features[i][f]);
            hi = std::max(hi, d.features[i][f]);
        }
        if (hi <= lo) continue;  // constant feature on this node, retry
        std::uniform_real_distribution<double> pick_threshold(lo, hi);
        double thr = pick_threshold(rng);
        std::vector<std::size_t> left, right;
        for (std::size_t i : idx)
            (d.features[i][f] <= thr ? left : right).push_back(i);
        if (left.empty() || right.empty()) continue;
        int l = build_node(tree, d, std::move(left), depth + 1, max_depth, label, rng);
        int r = build_node(tree, d, std::move(right), depth + 1, max_depth, label, rng);
        tree.nodes[node_id].feature = static_cast<int>(f);
        tree.nodes[node_id].threshold = thr;
        tree.nodes[node_id].left = l;
        tree.nodes[node_id].right = r;
        return node_id;
    }
    return node_id;  // no usable split found, stay a leaf
}

RandomTree train_tree(const Dataset& d, const std::vector<std::size_t>& sample, int max_depth,
                      std::mt19937_64& rng) {
    RandomTree tree;
    build_node(tree, d, sample, 0, max_depth, 0, rng);
    return tree;
}

}  // namespace

BaggedEnsemble train_bagged(const Dataset& d, int n_hypotheses, const LearnerConfig& config,
                            std::uint64_t seed) {
    if (n_hypotheses < 2) throw std::invalid_argument("train_bagged: need H >= 2");
    if (d.size() < 2) throw std::invalid_argument("train_bagged: need at least 2 points");
    if (!(config.bootstrap_fraction > 0.0 && config.bootstrap_fraction <= 1.0))
        throw std::invalid_argument("train_bagged: bootstrap_fraction must lie in (0,1]");

    std::size_t n = d.size();
    std::size_t boot = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(config.bootstrap_fraction * n)));

    BaggedEnsemble ens;
    ens.seed = seed;
    ens.table.n_classes = d.class_count;
    ens.table.truth = d.labels;
    ens.hypotheses.resize(n_hypotheses);
    ens.table.predictions.assign(n_hypotheses, std::vector<int>(n, -1));
    ens.table.oob_mask.assign(n_hypotheses, std::vector<std::uint8_t>(n, 0));

    std::vector<std::uint8_t> failed(n_hypotheses, 0);
    parallel_for(static_cast<std::size_t>(n_hypotheses), [&](std::size_t h) {
        std::mt19937_64 rng(splitmix64(seed + 0x9e37ULL * (h + 1)));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<std::uint8_t> in_bag;
        std::vector<std::size_t> sample;
        bool ok = false;
        for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
            in_bag.assign(n, 0);
            sample.clear();
            for (std::size_t i = 0; i < boot; ++i) {
                std::size_t j = pick(rng);
                in_bag[j] = 1;
                sample.push_back(j);
            }
            ok = std::find(in_bag.begin(), in_bag.end(), 0) != in_bag.end();
        }
        if (!ok) {
            failed[h] = 1;
            return;
        }

        ens.hypotheses[h] = train_tree(d, sample, config.max_depth, rng);
        for (std::size_t i = 0; i < n; ++i) {
            ens.table.predictions[h][i] = ens.hypotheses[h].predict(d.features[i]);
            ens.table.oob_mask[h][i] = in_bag[i] ? 0 : 1;
        }
    });
    if (std::find(failed.begin(), failed.end(), 1) != failed.end())
        throw std::runtime_error("train_bagged: empty out-of-bag set after 10 retries");
    ens.table.validate();
    return ens;
}

int mv_predict(const std::vector<double>& rho, const std::vector<int>& point_predictions,
               int n_classes) {
    if (rho.size() != point_predictions.size())
        throw std::invalid_argument("mv_predict: size mismatch");
    std::vector<double> score(n_classes, 0.0);
    for (std::size_t h = 0; h < rho.size(); ++h) {
        int y = point_predictions[h];
        if (y < 0 || y >= n_classes)
            throw std::invalid_argument("mv_predict: prediction out of range");
        score[y] += rho[h];
    }
    int best = 0;
    for (int y = 1; y < n_classes; ++y)
        if (score[y] > score[best]) best = y;  // ties keep the smaller label
    return best;
}

double mv_test_loss(const std::vector<double>& rho, const PredictionTable& table) {
    std::size_t h_count = table.n_hypotheses();
    if (rho.size() != h_count) throw std::invalid_argument("mv_test_loss: size mismatch");
    std::size_t used = 0, errors = 0;
    std::vector<int> preds(h_count);
    for (std::size_t i = 0; i < table.n_points(); ++i) {
        bool all = true;
        for (std::size_t h = 0; h < h_count; ++h) {
            preds[h] = table.predictions[h][i];
            if (preds[h] == -1) {
                all = false;
                break;
            }
        }
        if (!all) continue;
        ++used;
        if (mv_predict(rho, preds, table.n_classes) != table.truth[i]) ++errors;
    }
    if (used == 0) throw std::runtime_error("mv_test_loss: no fully predicted points");
    return static_cast<double>(errors) / static_cast<double>(used);
}

std::vector<int> predict_all(const BaggedEnsemble& ensemble, const std::vector<double>& x) {
    std::vector<int> out(ensemble.hypotheses.size());
    for (std::size_t h = 0; h < out.size(); ++h) out[h] = ensemble.hypotheses[h].predict(x);
    return out;
}

double mv_test_loss(const std::vector<double>& rho, const BaggedEnsemble& ensemble,
                    const Dataset& test) {
    if (test.size() == 0) throw std::invalid_argument("mv_test_loss: empty test set");
    std::size_t errors = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        auto preds = predict_all(ensemble, test.features[i]);
        if (mv_predict(rho, preds, test.class_count) != test.labels[i]) ++errors;
    }
    return static_cast<double>(errors) / static_cast<double>(test.size());
}

std::pair<int, double> best_single_hypothesis(const PredictionTable& table) {
    int best = -1;
    double best_loss = 2.0;
    for (std::size_t h = 0; h < table.n_hypotheses(); ++h) {
        std::size_t n = 0, errors = 0;
        for (std::size_t i = 0; i < table.n_points(); ++i) {
            if (!table.oob_mask[h][i]) continue;
            ++n;
            if (table.predictions[h][i] != table.truth[i]) ++errors;
        }
        double loss = static_cast<double>(errors) / static_cast<double>(n);
        if (loss < best_loss) {
            best_loss = loss;
            best = static_cast<int>(h);
        }
    }
    return {best, best_loss};
}

PredictionTable evaluate_on(const BaggedEnsemble& ensemble, const Dataset& data) {
    PredictionTable t;
    t.n_classes = data.class_count;
    t.truth = data.labels;
    std::size_t h_count = ensemble.hypotheses.size();
    t.predictions.assign(h_count, std::vector<int>(data.size(), -1));
    t.oob_mask.assign(h_count, std::vector<std::uint8_t>(data.size(), 1));
    parallel_for(h_count, [&](std::size_t h) {
        for (std::size_t i = 0; i < data.size(); ++i)
            t.predictions[h][i] = ensemble.hypotheses[h].predict(data.features[i]);
    });
    return t;
}

}  // namespace mvbound
