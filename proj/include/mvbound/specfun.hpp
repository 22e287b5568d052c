#pragma once

namespace mvbound {

// Bernoulli KL divergence kl(p||q), with the 0*ln(0/x)=0 convention.
// Returns +inf when q in {0,1} and p != q.
double binary_kl(double p, double q);

// Upper inverse: max{q in [p,1] : kl(p||q) <= budget}. Bisection to 1e-12.
double kl_inv_upper(double p, double budget);

// Lower inverse: min{q in [0,p] : kl(p||q) <= budget}.
double kl_inv_lower(double p, double budget);

// Principal branch W0, defined for x >= -1/e. Halley iteration,
// residual |w e^w - x| <= 1e-13 relative.
double lambert_w0(double x);

// Lower branch W-1, defined for x in [-1/e, 0).
double lambert_w_minus1(double x);

// phi(x) = e^x - x - 1, evaluated without cancellation for small |x|.
double phi(double x);

// phi(x)/x^2 with the continuous extension 1/2 at x = 0.
double phi_over_x2(double x);

}  // namespace mvbound
