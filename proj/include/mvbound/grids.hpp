#pragma once

#include <vector>

namespace mvbound {

struct GridSet {
    std::vector<double> mu;
    std::vector<double> lambda;
    std::vector<double> gamma;
    double c1 = 1.05, c2 = 1.05;
    double delta1 = 0.0, delta2 = 0.0;
};

// k uniform points covering [-0.5, 0.5), mu_i = -0.5 + i/k.
std::vector<double> mu_grid(int k = 200);

// Geometric lambda grid lambda_i = c1^{i-1} * base, i = 1..k_lambda.
std::vector<double> lambda_grid(long n, double delta1, double c1 = 1.05);

// Geometric gamma grid covering [gamma_min, gamma_max]; b is the loss
// upper bound, c_range the loss range. Degenerates to {gamma_min} when
// gamma_max <= gamma_min.
std::vector<double> gamma_grid(long n, double b, double c_range, double delta1, double delta2,
                               double c2 = 1.05);

// Endpoints exposed for auditing and tests.
double gamma_grid_min(long n, double b, double c_range, double delta2);
double gamma_grid_max(long n, double b, double c_range, double delta1);

// Index of the grid point closest to x; ties go to the smaller value.
std::size_t snap_to_grid(const std::vector<double>& grid, double x);

}  // namespace mvbound
