#include "mvbound/grids.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mvbound/specfun.hpp"

namespace mvbound {

std::vector<double> mu_grid(int k) {
    if (k < 2) throw std::invalid_argument("mu_grid: need k >= 2");
    std::vector<double> out(k);
    for (int i = 0; i < k; ++i) out[i] = -0.5 + static_cast<double>(i) / k;
    return out;
}

std::vector<double> lambda_grid(long n, double delta1, double c1) {
    if (n < 2) throw std::invalid_argument("lambda_grid: need n >= 2");
    if (!(delta1 > 0.0 && delta1 < 1.0)) throw std::invalid_argument("lambda_grid: bad delta1");
    if (!(c1 > 1.0)) throw std::invalid_argument("lambda_grid: need c1 > 1");
    double root = std::sqrt(static_cast<double>(n - 1) / std::log(1.0 / delta1) + 1.0);
    double base = 2.0 * static_cast<double>(n - 1) / static_cast<double>(n) / (root + 1.0);
    long k = static_cast<long>(std::ceil(std::log(0.5 * root + 0.5) / std::log(c1)));
    k = std::max<long>(k, 1);
    std::vector<double> out(k);
    double v = base;
    for (long i = 0; i < k; ++i, v *= c1) out[i] = v;
    return out;
}

double gamma_grid_min(long n, double b, double c_range, double delta2) {
    double arg = std::exp(-1.0) *
                 (4.0 * b * b / (static_cast<double>(n) * c_range * c_range) *
                      std::log(1.0 / delta2) -
                  1.0);
    return (lambert_w0(arg) + 1.0) / b;
}

double gamma_grid_max(long n, double b, double c_range, double delta1) {
    double v_min = 2.0 * c_range * c_range * std::log(1.0 / delta1) / static_cast<double>(n - 1);
    double alpha = 1.0 / (1.0 + b * b / v_min);
    double d = -alpha * std::exp(-alpha);
    return -(lambert_w_minus1(d) + alpha) / b;
}

std::vector<double> gamma_grid(long n, double b, double c_range, double delta1, double delta2,
                               double c2) {
    if (n < 2) throw std::invalid_argument("gamma_grid: need n >= 2");
    if (!(b > 0.0 && c_range > 0.0)) throw std::invalid_argument("gamma_grid: bad b or c");
    if (!(c2 > 1.0)) throw std::invalid_argument("gamma_grid: need c2 > 1");
    double g_min = gamma_grid_min(n, b, c_range, delta2);
    double g_max = gamma_grid_max(n, b, c_range, delta1);
    if (!(g_max > g_min)) return {g_min};  // degenerate (tiny n)
    long k = static_cast<long>(std::ceil(std::log(g_max / g_min) / std::log(c2)));
    k = std::max<long>(k, 1);
    std::vector<double> out(k);
    double v = g_min;
    for (long i = 0; i < k; ++i, v *= c2) out[i] = v;
    return out;
}

std::size_t snap_to_grid(const std::vector<double>& grid, double x) {
    if (grid.empty()) throw std::invalid_argument("snap_to_grid: empty grid");
    std::size_t best = 0;
    double best_d = std::abs(grid[0] - x);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        double d = std::abs(grid[i] - x);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace mvbound
