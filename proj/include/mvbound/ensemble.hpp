#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mvbound/dataio.hpp"

namespace mvbound {

struct LearnerConfig {
    int max_depth = 3;               // 1 = decision stump
    double bootstrap_fraction = 1.0; // bootstrap size as a fraction of the pool
};

// Depth-bounded decision tree with a random feature and random threshold
// per split; leaves predict the majority class of their node sample.
class RandomTree {
public:
    int predict(const std::vector<double>& x) const;

    struct Node {
        int feature = -1;      // -1 = leaf
        double threshold = 0.0;
        int label = 0;         // leaf label
        int left = -1, right = -1;
    };
    std::vector<Node> nodes;  // nodes[0] is the root
};

struct BaggedEnsemble {
    std::vector<RandomTree> hypotheses;
    PredictionTable table;  // over the training pool, all points predicted
    std::uint64_t seed = 0;
};

// Bootstrap of size round(bootstrap_fraction*N) with replacement per
// hypothesis; out-of-bag points form S_h. Deterministic per seed, with
// per-hypothesis RNG streams derived from the master seed.
BaggedEnsemble train_bagged(const Dataset& d, int n_hypotheses, const LearnerConfig& config,
                            std::uint64_t seed);

// Weighted plurality; ties broken by the smallest label index.
int mv_predict(const std::vector<double>& rho, const std::vector<int>& point_predictions,
               int n_classes);

// Fraction of points misclassified by the weighted vote. The table
// variant uses every point all hypotheses predicted.
double mv_test_loss(const std::vector<double>& rho, const PredictionTable& table);
double mv_test_loss(const std::vector<double>& rho, const BaggedEnsemble& ensemble,
                    const Dataset& test);

std::vector<int> predict_all(const BaggedEnsemble& ensemble, const std::vector<double>& x);

// argmin over h of the out-of-bag loss; ties go to the smallest index.
std::pair<int, double> best_single_hypothesis(const PredictionTable& table);

// Evaluate an externally trained ensemble on a fresh dataset.
PredictionTable evaluate_on(const BaggedEnsemble& ensemble, const Dataset& data);

}  // namespace mvbound
