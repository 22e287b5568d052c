#include "mvbound/oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "mvbound/common.hpp"

namespace mvbound {

namespace {
void check_point(const OraclePoint& p) {
    if (!(p.g >= 0.0 && p.g <= 1.0 && p.t >= p.g * p.g - 1e-12 && p.t <= p.g + 1e-12))
        throw std::invalid_argument("oracle point outside the feasible region g^2 <= t <= g");
}
}  // namespace

double oracle_fo(const OraclePoint& p) {
    check_point(p);
    return 2.0 * p.g;
}

double oracle_tnd(const OraclePoint& p) {
    check_point(p);
    return 4.0 * p.t;
}

double oracle_cbound(const OraclePoint& p) {
    check_point(p);
    if (!(p.g <= 0.5)) throw std::invalid_argument("oracle_cbound: requires g <= 1/2");
    double denom = 0.25 + p.t - p.g;
    if (denom == 0.0) throw std::invalid_argument("oracle_cbound: zero denominator");
    return (p.t - p.g * p.g) / denom;
}

double oracle_mv_param(const OraclePoint& p, double mu) {
    check_point(p);
    if (!(mu < 0.5)) throw std::invalid_argument("oracle_mv_param: mu must be < 0.5");
    double d = 0.5 - mu;
    return (p.t - 2.0 * mu * p.g + mu * mu) / (d * d);
}

double mu_star(const OraclePoint& p) {
    check_point(p);
    if (!(p.g < 0.5)) throw std::invalid_argument("mu_star: requires g < 0.5");
    return p.g - (p.t - p.g * p.g) / (0.5 - p.g);
}

double oracle_mv_offset(double mu_tandem_expectation, double mu) {
    if (!(mu < 0.5)) throw std::invalid_argument("oracle_mv_offset: mu must be < 0.5");
    double d = 0.5 - mu;
    return mu_tandem_expectation / (d * d);
}

std::vector<RatioSurfaceRow> ratio_surface(std::size_t grid_size) {
    if (grid_size < 2) throw std::invalid_argument("ratio_surface: grid too small");
    // uniform grid over [0, 0.5)^2 in both coordinates, clipped to feasibility
    std::vector<std::vector<RatioSurfaceRow>> rows(grid_size);
    parallel_for(grid_size, [&](std::size_t i) {
        double g = 0.5 * static_cast<double>(i) / static_cast<double>(grid_size);
        for (std::size_t j = 0; j < grid_size; ++j) {
            double t = 0.5 * static_cast<double>(j) / static_cast<double>(grid_size);
            if (t < g * g || t > g) continue;
            OraclePoint p{g, t};
            double tnd = oracle_tnd(p);
            if (tnd == 0.0) continue;  // degenerate corner g = t = 0
            rows[i].push_back({g, t, oracle_cbound(p) / tnd});
        }
    });
    std::vector<RatioSurfaceRow> out;
    for (auto& r : rows) out.insert(out.end(), r.begin(), r.end());
    return out;
}

}  // namespace mvbound
