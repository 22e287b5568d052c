#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mvbound/common.hpp"
#include "mvbound/dataio.hpp"

namespace mvbound {

// Per-pair error pattern counts over the validation-set overlap
// S_h cap S_h'. Everything mu-dependent derives from these in O(1).
struct PairCounts {
    long n = 0;        // |S_h cap S_h'|
    long both = 0;     // both err
    long one = 0;      // exactly one errs
    long neither = 0;  // neither errs
};

struct LossStats {
    std::vector<double> gibbs;      // H, loss on S_h
    Matrix tandem;                  // H x H, loss on the pairwise overlap
    std::vector<std::vector<long>> overlap;  // H x H counts, diagonal = |S_h|
    std::vector<std::vector<PairCounts>> pair_counts;  // H x H
    long n_min = 0;  // min_h |S_h|
    long m_min = 0;  // min over all pairs (diagonal included) of the overlap

    std::size_t n_hypotheses() const { return gibbs.size(); }
};

struct MuTandemStats {
    double mu = 0.0;
    Matrix loss;      // H x H empirical mu-tandem losses
    Matrix variance;  // H x H unbiased (1/(n-1)) variances
    double k_mu = 1.0;  // range max{1-mu, 1-2mu}
    double b_mu = 1.0;  // upper bound (1-mu)^2
};

std::vector<double> gibbs_losses(const PredictionTable& table);

// Symmetric tandem matrix and overlap counts; throws if any pairwise
// overlap is empty (names the offending pair).
std::pair<Matrix, std::vector<std::vector<long>>> tandem_losses(const PredictionTable& table);

LossStats compute_loss_stats(const PredictionTable& table);

MuTandemStats mu_tandem_stats(const PredictionTable& table, double mu);
MuTandemStats mu_tandem_stats(const LossStats& stats, double mu);

// Both sides of the tandem second-moment identity, evaluated on the
// common index set of fully predicted points.
std::pair<double, double> second_moment_identity_check(const PredictionTable& table,
                                                       const std::vector<double>& rho);

}  // namespace mvbound
