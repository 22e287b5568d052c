#include "mvbound/lossstats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mvbound {

namespace {

// err[h][i]: 1 if h errs on i, 2 if h did not predict i
std::vector<std::vector<std::uint8_t>> error_indicators(const PredictionTable& table) {
    std::size_t h_count = table.n_hypotheses(), n = table.n_points();
    std::vector<std::vector<std::uint8_t>> err(h_count, std::vector<std::uint8_t>(n, 0));
    for (std::size_t h = 0; h < h_count; ++h)
        for (std::size_t i = 0; i < n; ++i) {
            int p = table.predictions[h][i];
            err[h][i] = (p == -1) ? 2 : (p != table.truth[i] ? 1 : 0);
        }
    return err;
}

}  // namespace

std::vector<double> gibbs_losses(const PredictionTable& table) {
    std::size_t h_count = table.n_hypotheses(), n = table.n_points();
    std::vector<double> out(h_count, 0.0);
    for (std::size_t h = 0; h < h_count; ++h) {
        long cnt = 0, errors = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!table.oob_mask[h][i]) continue;
            ++cnt;
            if (table.predictions[h][i] != table.truth[i]) ++errors;
        }
        if (cnt == 0)
            throw std::runtime_error("gibbs_losses: empty validation set for hypothesis " +
                                     std::to_string(h));
        out[h] = static_cast<double>(errors) / static_cast<double>(cnt);
    }
    return out;
}

LossStats compute_loss_stats(const PredictionTable& table) {
    std::size_t h_count = table.n_hypotheses(), n = table.n_points();
    LossStats s;
    s.gibbs = gibbs_losses(table);
    s.tandem = Matrix(h_count, h_count);
    s.overlap.assign(h_count, std::vector<long>(h_count, 0));
    s.pair_counts.assign(h_count, std::vector<PairCounts>(h_count));
    auto err = error_indicators(table);

    // pairs (h, h') with h <= h', mirrored afterwards
    std::vector<std::uint8_t> empty_pair(h_count, 0);
    parallel_for(h_count, [&](std::size_t h) {
        for (std::size_t g = h; g < h_count; ++g) {
            PairCounts pc;
            for (std::size_t i = 0; i < n; ++i) {
                if (!table.oob_mask[h][i] || !table.oob_mask[g][i]) continue;
                int a = err[h][i], b = err[g][i];
                ++pc.n;
                if (a && b)
                    ++pc.both;
                else if (a || b)
                    ++pc.one;
                else
                    ++pc.neither;
            }
            if (pc.n == 0) {
                empty_pair[h] = 1;
                continue;
            }
            s.pair_counts[h][g] = pc;
            s.pair_counts[g][h] = pc;
            s.overlap[h][g] = s.overlap[g][h] = pc.n;
            double t = static_cast<double>(pc.both) / static_cast<double>(pc.n);
            s.tandem(h, g) = t;
            s.tandem(g, h) = t;
        }
    });

    for (std::size_t h = 0; h < h_count; ++h)
        if (empty_pair[h])
            for (std::size_t g = h; g < h_count; ++g)
                if (s.overlap[h][g] == 0)
                    throw std::runtime_error("tandem_losses: empty overlap for pair (" +
                                             std::to_string(h) + "," + std::to_string(g) + ")");

    s.n_min = s.overlap[0][0];
    s.m_min = s.overlap[0][0];
    for (std::size_t h = 0; h < h_count; ++h) {
        s.n_min = std::min(s.n_min, s.overlap[h][h]);
        for (std::size_t g = 0; g < h_count; ++g) s.m_min = std::min(s.m_min, s.overlap[h][g]);
    }
    return s;
}

std::pair<Matrix, std::vector<std::vector<long>>> tandem_losses(const PredictionTable& table) {
    LossStats s = compute_loss_stats(table);
    return {std::move(s.tandem), std::move(s.overlap)};
}

MuTandemStats mu_tandem_stats(const LossStats& stats, double mu) {
    if (!(mu < 0.5)) throw std::invalid_argument("mu_tandem_stats: mu must be < 0.5");
    std::size_t h_count = stats.n_hypotheses();
    MuTandemStats out;
    out.mu = mu;
    out.k_mu = std::max(1.0 - mu, 1.0 - 2.0 * mu);
    out.b_mu = (1.0 - mu) * (1.0 - mu);
    out.loss = Matrix(h_count, h_count);
    out.variance = Matrix(h_count, h_count);

    // products (1[err]-mu)(1[err']-mu) take three values; sums come from counts
    double v_both = (1.0 - mu) * (1.0 - mu);
    double v_one = -mu * (1.0 - mu);
    double v_neither = mu * mu;
    for (std::size_t h = 0; h < h_count; ++h)
        for (std::size_t g = h; g < h_count; ++g) {
            const PairCounts& pc = stats.pair_counts[h][g];
            if (pc.n < 2)
                throw std::runtime_error("mu_tandem_stats: overlap of pair (" +
                                         std::to_string(h) + "," + std::to_string(g) +
                                         ") has fewer than 2 points");
            double n = static_cast<double>(pc.n);
            double sum = pc.both * v_both + pc.one * v_one + pc.neither * v_neither;
            double sum_sq = pc.both * v_both * v_both + pc.one * v_one * v_one +
                            pc.neither * v_neither * v_neither;
            double mean = sum / n;
            double var = (sum_sq - n * mean * mean) / (n - 1.0);
            if (var < 0.0) var = 0.0;  // rounding
            out.loss(h, g) = out.loss(g, h) = mean;
            out.variance(h, g) = out.variance(g, h) = var;
        }
    return out;
}

MuTandemStats mu_tandem_stats(const PredictionTable& table, double mu) {
    return mu_tandem_stats(compute_loss_stats(table), mu);
}

std::pair<double, double> second_moment_identity_check(const PredictionTable& table,
                                                       const std::vector<double>& rho) {
    std::size_t h_count = table.n_hypotheses(), n = table.n_points();
    if (rho.size() != h_count)
        throw std::invalid_argument("second_moment_identity_check: size mismatch");
    auto err = error_indicators(table);

    // common index set: points predicted by every hypothesis
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
        bool all = true;
        for (std::size_t h = 0; h < h_count; ++h)
            if (err[h][i] == 2) {
                all = false;
                break;
            }
        if (all) idx.push_back(i);
    }
    if (idx.empty())
        throw std::runtime_error("second_moment_identity_check: no common points");
    double m = static_cast<double>(idx.size());

    double lhs = 0.0;
    for (std::size_t i : idx) {
        double z = 0.0;
        for (std::size_t h = 0; h < h_count; ++h) z += rho[h] * (err[h][i] == 1 ? 1.0 : 0.0);
        lhs += z * z;
    }
    lhs /= m;

    double rhs = 0.0;
    for (std::size_t h = 0; h < h_count; ++h)
        for (std::size_t g = 0; g < h_count; ++g) {
            long both = 0;
            for (std::size_t i : idx)
                if (err[h][i] == 1 && err[g][i] == 1) ++both;
            rhs += rho[h] * rho[g] * static_cast<double>(both) / m;
        }
    return {lhs, rhs};
}

}  // namespace mvbound
