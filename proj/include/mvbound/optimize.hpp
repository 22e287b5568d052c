#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mvbound/bounds.hpp"
#include "mvbound/grids.hpp"
#include "mvbound/lossstats.hpp"

namespace mvbound {

struct IRpropConfig {
    double eta_plus = 1.2;
    double eta_minus = 0.5;
    double step_init = 0.01;
    double step_min = 1e-8;
    double step_max = 1.0;
    int max_iters = 2000;
};

struct OptimizerConfig {
    int patience = 10;             // inner stop: no improvement for this many steps
    double alternation_tol = 1e-9; // outer stop on bound improvement
    int max_outer_iters = 200;
    IRpropConfig irprop;
};

struct GridConfig {
    int k_mu = 200;
    double c1 = 1.05;
    double c2 = 1.05;
};

struct TraceRecord {
    int iteration = 0;
    double bound = 0.0;
    double mu = 0.0, lambda = 0.0, gamma = 0.0;
};

struct OptimizationTrace {
    std::vector<TraceRecord> records;
    std::string termination;
    bool fallback_scan = false;    // COTND: binary search gave up
    bool gamma_surrogate = false;  // zero Gibbs loss hit the gamma* fallback

    std::string to_jsonl() const;
};

struct OptResult {
    Posterior posterior;
    BoundReport report;  // final-report form of the bound
    OptimizationTrace trace;
};

// Euclidean projection onto {x >= 0, sum x = 1}.
std::vector<double> project_simplex(const std::vector<double>& v);

// Closed-form parameter updates (Gibbs/tandem statistics on validation sets).
double tnd_lambda_star(const LossStats& stats, const Posterior& post, double delta, long k);
double gibbs_gamma_star(const LossStats& stats, const Posterior& post, double delta, long k);

// Optimal offset given the tandem upper bound U_T and Gibbs lower bound L_G.
double cmu_mu_star(double u_tandem, double l_gibbs);

std::vector<double> cmu_gradient(const LossStats& stats, const Posterior& post, double mu,
                                 double lambda, double gamma, double delta, long k);

double co_lambda_star(const MuTandemStats& mu_stats, const Posterior& post, double delta,
                      long k, long n);
double co_gamma_star(const MuTandemStats& mu_stats, const Posterior& post, double delta,
                     long k, long n, double variance_upper);
std::vector<double> co_gradient(const MuTandemStats& mu_stats, const Posterior& post,
                                double a, double b);

// iRProp+ with per-coordinate adaptive steps, projecting onto the simplex
// after each update; returns the best iterate seen.
std::pair<std::vector<double>, OptimizationTrace> irprop_plus_minimize(
    const std::function<double(const std::vector<double>&)>& objective,
    const std::function<std::vector<double>(const std::vector<double>&)>& gradient,
    const std::vector<double>& x0, const OptimizerConfig& config);

OptResult optimize_fo(const LossStats& stats, double delta, const OptimizerConfig& config = {});
OptResult optimize_tnd(const LossStats& stats, double delta, const OptimizerConfig& config = {});
OptResult optimize_cmu_tnd(const LossStats& stats, const std::vector<double>& mu_grid_points,
                           double delta, const OptimizerConfig& config = {});
OptResult optimize_co_tnd(const LossStats& stats, const std::vector<double>& mu_grid_points,
                          double delta, const GridConfig& grid_config = {},
                          const OptimizerConfig& config = {});

// Optimization-time COTND value after minimizing over (rho, lambda, gamma)
// at one grid mu; the profile the binary search walks.
double co_tnd_profile_value(const LossStats& stats, const std::vector<double>& mu_grid_points,
                            std::size_t mu_index, double delta,
                            const GridConfig& grid_config = {},
                            const OptimizerConfig& config = {});

}  // namespace mvbound
