#pragma once

#include <cstddef>
#include <vector>

namespace mvbound {

// A point in the feasible region g^2 <= t <= g of (Gibbs risk,
// tandem risk) pairs.
struct OraclePoint {
    double g = 0.0;  // E_rho[L(h)]
    double t = 0.0;  // E_rho^2[L(h,h')]
};

double oracle_fo(const OraclePoint& p);       // 2g
double oracle_tnd(const OraclePoint& p);      // 4t
double oracle_cbound(const OraclePoint& p);   // requires g <= 1/2

// Parametric second-order bound (t - 2 mu g + mu^2)/(0.5 - mu)^2, mu < 0.5.
double oracle_mv_param(const OraclePoint& p, double mu);

// Minimizer of the parametric bound; requires g < 0.5, may be negative.
double mu_star(const OraclePoint& p);

// Offset form: expectation of the mu-tandem loss over (0.5 - mu)^2.
double oracle_mv_offset(double mu_tandem_expectation, double mu);

struct RatioSurfaceRow {
    double g, t, ratio;  // ratio = oracle_cbound / oracle_tnd
};

// Uniform grid_size x grid_size grid over (g,t), clipped to the feasible
// region with g in [0, 0.5).
std::vector<RatioSurfaceRow> ratio_surface(std::size_t grid_size);

}  // namespace mvbound
