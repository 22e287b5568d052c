#include "mvbound/specfun.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace mvbound {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
const double kInvE = std::exp(-1.0);

void check_prob(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument(std::string(name) + " must lie in [0,1]");
}
}  // namespace

double binary_kl(double p, double q) {
    check_prob(p, "p");
    check_prob(q, "q");
    auto term = [](double a, double b) {
        if (a == 0.0) return 0.0;
        if (b == 0.0) return kInf;
        return a * std::log(a / b);
    };
    return term(p, q) + term(1.0 - p, 1.0 - q);
}

double kl_inv_upper(double p, double budget) {
    check_prob(p, "p");
    if (!(budget >= 0.0)) throw std::invalid_argument("budget must be >= 0");
    if (budget == 0.0) return p;
    if (std::isinf(budget)) return 1.0;
    double lo = p, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (binary_kl(p, mid) <= budget)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double kl_inv_lower(double p, double budget) {
    check_prob(p, "p");
    if (!(budget >= 0.0)) throw std::invalid_argument("budget must be >= 0");
    if (budget == 0.0) return p;
    if (std::isinf(budget)) return 0.0;
    double lo = 0.0, hi = p;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        if (binary_kl(p, mid) <= budget)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

namespace {

// Halley refinement of w e^w = x starting from w0.
double halley(double x, double w) {
    for (int it = 0; it < 100; ++it) {
        double ew = std::exp(w);
        double f = w * ew - x;
        if (std::abs(f) <= 1e-14 * (std::abs(x) + 1e-290)) break;
        double denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        double step = f / denom;
        if (!std::isfinite(step)) break;
        double next = w - step;
        if (next == w) break;
        w = next;
    }
    return w;
}

// Series around the branch point x = -1/e, p = sqrt(2(e x + 1)).
double branch_series(double p) {
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
}

}  // namespace

double lambert_w0(double x) {
    if (x < -kInvE - 1e-15)
        throw std::domain_error("lambert_w0: x < -1/e");
    if (x <= -kInvE) return -1.0;
    if (x == 0.0) return 0.0;
    double w;
    if (x < -0.25) {
        double p = std::sqrt(2.0 * (std::exp(1.0) * x + 1.0));
        w = branch_series(p);
        if (p < 1e-5) return w;  // Halley degenerates at the branch point
    } else if (x < 3.0) {
        // rough Pade-free seed, good enough for Halley
        w = x / (1.0 + x);
    } else {
        double l1 = std::log(x), l2 = std::log(l1);
        w = l1 - l2 + l2 / l1;
    }
    return halley(x, w);
}

double lambert_w_minus1(double x) {
    if (x < -kInvE - 1e-15 || x >= 0.0)
        throw std::domain_error("lambert_w_minus1: x outside [-1/e, 0)");
    if (x <= -kInvE) return -1.0;
    double w;
    double p = std::sqrt(2.0 * (std::exp(1.0) * x + 1.0));
    if (p < 0.3) {
        w = -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p * p * p;
        if (p < 1e-5) return w;
    } else {
        double l1 = std::log(-x), l2 = std::log(-l1);
        w = l1 - l2 + l2 / l1;
    }
    return halley(x, w);
}

double phi(double x) {
    if (std::abs(x) < 1e-4) {
        double x2 = x * x;
        return x2 * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0)));
    }
    return std::expm1(x) - x;
}

double phi_over_x2(double x) {
    if (x == 0.0) return 0.5;
    if (std::abs(x) < 1e-4)
        return 0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0 + x / 120.0));
    return phi(x) / (x * x);
}

}  // namespace mvbound
