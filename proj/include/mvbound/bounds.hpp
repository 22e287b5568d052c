#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvbound/lossstats.hpp"

namespace mvbound {

struct Posterior {
    std::vector<double> rho;
    std::vector<double> pi;

    static Posterior uniform(std::size_t h_count);
    void validate() const;
};

struct BoundReport {
    double bound = 0.0;  // clipped to [0,1] for reporting
    double raw = 0.0;    // unclipped value
    std::optional<double> mu, lambda, gamma;
    double kl_term = 0.0;       // KL(rho||pi)
    long union_factor = 1;      // the k of the theorem's union bound
    std::map<std::string, double> terms;

    std::string to_json() const;
};

double kl_divergence(const std::vector<double>& rho, const std::vector<double>& pi);

// PAC-Bayes-kl upper/lower inverses with budget
// (KL + ln(2 sqrt(n)/delta) + extra_log)/n.
double pb_kl_upper(double emp_loss, double kl_rho_pi, long n, double delta,
                   double extra_log = 0.0);
double pb_kl_lower(double emp_loss, double kl_rho_pi, long n, double delta,
                   double extra_log = 0.0);

// PAC-Bayes-lambda upper (lambda in (0,2)) and lower (gamma > 0) bounds.
double pb_lambda_upper(double emp_loss, double kl_rho_pi, long n, double delta, double lambda,
                       double extra_log = 0.0);
double pb_lambda_lower(double emp_loss, double kl_rho_pi, long n, double delta, double gamma,
                       double extra_log = 0.0);

// emp + phi(gamma b)/(gamma b^2) * variance + (kl + delta_term_log)/(gamma n).
// The caller supplies 2KL for tandem-type losses and the union-bounded
// log term.
double pb_bennett(double emp_loss, double variance, double kl_rho_pi, long n,
                  double delta_term_log, double gamma, double b);

// Same shape with the fixed (e-2)*gamma variance coefficient; gamma in (0, 1/b].
double pb_bernstein(double emp_loss, double variance, double kl_rho_pi, long n,
                    double delta_term_log, double gamma, double b);

// Empirical-to-oracle variance bound for a loss of range c_range;
// lambda in (0, 2(n-1)/n). kl_term_log carries the whole log/KL budget.
double variance_bound(double emp_variance, double kl_term_log, long n, double lambda,
                      double c_range);

// Composite majority-vote bounds over validation-set statistics.
BoundReport fo_bound(const LossStats& stats, const Posterior& post, double delta);
BoundReport tnd_bound(const LossStats& stats, const Posterior& post, double delta);

// Theorem-12-style bound (PAC-Bayes-lambda form), used during optimization.
BoundReport cmu_tnd_bound(const LossStats& stats, const Posterior& post, double delta,
                          double mu, double lambda, double gamma, long k_mu);

// Final-report variant of the same bound via PAC-Bayes-kl inverses.
BoundReport cmu_tnd_bound_kl(const LossStats& stats, const Posterior& post, double delta,
                             double mu, long k_mu);

// Theorem-13-style bound; k_report is k_mu during optimization and
// k_mu*k_lambda*k_gamma for the final report.
BoundReport co_tnd_bound(const LossStats& stats, const MuTandemStats& mu_stats,
                         const Posterior& post, double delta, double mu, double gamma,
                         double lambda, long k_report);

}  // namespace mvbound
