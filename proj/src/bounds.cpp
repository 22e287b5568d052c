#include "mvbound/bounds.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mvbound/specfun.hpp"

namespace mvbound {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double clip01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
}
}  // namespace

Posterior Posterior::uniform(std::size_t h_count) {
    Posterior p;
    p.rho.assign(h_count, 1.0 / static_cast<double>(h_count));
    p.pi = p.rho;
    return p;
}

void Posterior::validate() const {
    if (rho.size() != pi.size() || rho.empty())
        throw std::invalid_argument("posterior: size mismatch");
    double sr = 0.0, sp = 0.0;
    for (std::size_t h = 0; h < rho.size(); ++h) {
        if (rho[h] < 0.0 || pi[h] < 0.0)
            throw std::invalid_argument("posterior: negative weight");
        sr += rho[h];
        sp += pi[h];
    }
    if (std::abs(sr - 1.0) > 1e-9 || std::abs(sp - 1.0) > 1e-9)
        throw std::invalid_argument("posterior: weights must sum to 1");
}

std::string BoundReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"bound\":" << bound << ",\"raw\":" << raw;
    if (mu) os << ",\"mu\":" << *mu;
    if (lambda) os << ",\"lambda\":" << *lambda;
    if (gamma) os << ",\"gamma\":" << *gamma;
    os << ",\"kl\":" << kl_term << ",\"union_factor\":" << union_factor << ",\"terms\":{";
    bool first = true;
    for (const auto& [name, value] : terms) {
        if (!first) os << ',';
        first = false;
        os << '"' << name << "\":" << value;
    }
    os << "}}";
    return os.str();
}

double kl_divergence(const std::vector<double>& rho, const std::vector<double>& pi) {
    if (rho.size() != pi.size()) throw std::invalid_argument("kl_divergence: size mismatch");
    double s = 0.0;
    for (std::size_t h = 0; h < rho.size(); ++h) {
        if (rho[h] == 0.0) continue;
        if (pi[h] == 0.0) return kInf;
        s += rho[h] * std::log(rho[h] / pi[h]);
    }
    return s < 0.0 ? 0.0 : s;  // guard rounding on rho == pi
}

double pb_kl_upper(double emp_loss, double kl_rho_pi, long n, double delta, double extra_log) {
    check_delta(delta);
    if (n < 1) throw std::invalid_argument("pb_kl_upper: need n >= 1");
    double budget =
        (kl_rho_pi + std::log(2.0 * std::sqrt(static_cast<double>(n)) / delta) + extra_log) / n;
    return kl_inv_upper(emp_loss, budget);
}

double pb_kl_lower(double emp_loss, double kl_rho_pi, long n, double delta, double extra_log) {
    check_delta(delta);
    if (n < 1) throw std::invalid_argument("pb_kl_lower: need n >= 1");
    double budget =
        (kl_rho_pi + std::log(2.0 * std::sqrt(static_cast<double>(n)) / delta) + extra_log) / n;
    return kl_inv_lower(emp_loss, budget);
}

double pb_lambda_upper(double emp_loss, double kl_rho_pi, long n, double delta, double lambda,
                       double extra_log) {
    check_delta(delta);
    if (!(lambda > 0.0 && lambda < 2.0))
        throw std::invalid_argument("pb_lambda_upper: lambda must lie in (0,2)");
    double log_term = std::log(2.0 * std::sqrt(static_cast<double>(n)) / delta) + extra_log;
    return emp_loss / (1.0 - lambda / 2.0) +
           (kl_rho_pi + log_term) / (lambda * (1.0 - lambda / 2.0) * n);
}

double pb_lambda_lower(double emp_loss, double kl_rho_pi, long n, double delta, double gamma,
                       double extra_log) {
    check_delta(delta);
    if (!(gamma > 0.0)) throw std::invalid_argument("pb_lambda_lower: gamma must be > 0");
    double log_term = std::log(2.0 * std::sqrt(static_cast<double>(n)) / delta) + extra_log;
    return (1.0 - gamma / 2.0) * emp_loss - (kl_rho_pi + log_term) / (gamma * n);
}

double pb_bennett(double emp_loss, double variance, double kl_rho_pi, long n,
                  double delta_term_log, double gamma, double b) {
    if (!(gamma > 0.0)) throw std::invalid_argument("pb_bennett: gamma must be > 0");
    if (!(b > 0.0)) throw std::invalid_argument("pb_bennett: b must be > 0");
    return emp_loss + phi(gamma * b) / (gamma * b * b) * variance +
           (kl_rho_pi + delta_term_log) / (gamma * n);
}

double pb_bernstein(double emp_loss, double variance, double kl_rho_pi, long n,
                    double delta_term_log, double gamma, double b) {
    if (!(gamma > 0.0 && gamma <= 1.0 / b))
        throw std::invalid_argument("pb_bernstein: gamma must lie in (0, 1/b]");
    const double e_minus_2 = std::exp(1.0) - 2.0;
    return emp_loss + e_minus_2 * gamma * variance + (kl_rho_pi + delta_term_log) / (gamma * n);
}

double variance_bound(double emp_variance, double kl_term_log, long n, double lambda,
                      double c_range) {
    double cap = 2.0 * static_cast<double>(n - 1) / static_cast<double>(n);
    if (!(lambda > 0.0 && lambda < cap))
        throw std::invalid_argument("variance_bound: lambda must lie in (0, 2(n-1)/n)");
    double shrink = 1.0 - lambda * static_cast<double>(n) / (2.0 * static_cast<double>(n - 1));
    return emp_variance / shrink +
           c_range * c_range * kl_term_log / (static_cast<double>(n) * lambda * shrink);
}

BoundReport fo_bound(const LossStats& stats, const Posterior& post, double delta) {
    post.validate();
    double kl = kl_divergence(post.rho, post.pi);
    double gibbs = dot(post.rho, stats.gibbs);
    double gibbs_ub = pb_kl_upper(gibbs, kl, stats.n_min, delta);
    BoundReport r;
    r.raw = 2.0 * gibbs_ub;
    r.bound = clip01(r.raw);
    r.kl_term = kl;
    r.union_factor = 1;
    r.terms = {{"gibbs_emp", gibbs}, {"gibbs_upper", gibbs_ub}, {"n", double(stats.n_min)}};
    return r;
}

BoundReport tnd_bound(const LossStats& stats, const Posterior& post, double delta) {
    post.validate();
    double kl = kl_divergence(post.rho, post.pi);
    double tnd = stats.tandem.quad(post.rho);
    long m = stats.m_min;
    double budget = (2.0 * kl + std::log(2.0 * std::sqrt(static_cast<double>(m)) / delta)) / m;
    double tnd_ub = kl_inv_upper(tnd, budget);
    BoundReport r;
    r.raw = 4.0 * tnd_ub;
    r.bound = clip01(r.raw);
    r.kl_term = kl;
    r.union_factor = 1;
    r.terms = {{"tandem_emp", tnd}, {"tandem_upper", tnd_ub}, {"m", double(m)}};
    return r;
}

BoundReport cmu_tnd_bound(const LossStats& stats, const Posterior& post, double delta,
                          double mu, double lambda, double gamma, long k_mu) {
    post.validate();
    check_delta(delta);
    if (!(mu < 0.5)) throw std::invalid_argument("cmu_tnd_bound: mu must be < 0.5");
    if (!(lambda > 0.0 && lambda < 2.0))
        throw std::invalid_argument("cmu_tnd_bound: lambda must lie in (0,2)");
    if (!(gamma > 0.0)) throw std::invalid_argument("cmu_tnd_bound: gamma must be > 0");

    double kl = kl_divergence(post.rho, post.pi);
    double tnd = stats.tandem.quad(post.rho);
    double gibbs = dot(post.rho, stats.gibbs);
    long m = stats.m_min, n = stats.n_min;

    double log_m = std::log(4.0 * k_mu * std::sqrt(static_cast<double>(m)) / delta);
    double log_n = std::log(4.0 * k_mu * std::sqrt(static_cast<double>(n)) / delta);
    double tandem_ub =
        tnd / (1.0 - lambda / 2.0) + (2.0 * kl + log_m) / (lambda * (1.0 - lambda / 2.0) * m);
    double gibbs_lb = (1.0 - gamma / 2.0) * gibbs - (kl + log_n) / (gamma * n);
    double d = 0.5 - mu;

    BoundReport r;
    r.raw = (tandem_ub - 2.0 * mu * gibbs_lb + mu * mu) / (d * d);
    r.bound = clip01(r.raw);
    r.mu = mu;
    r.lambda = lambda;
    r.gamma = gamma;
    r.kl_term = kl;
    r.union_factor = k_mu;
    r.terms = {{"tandem_emp", tnd},     {"tandem_upper", tandem_ub}, {"gibbs_emp", gibbs},
               {"gibbs_lower", gibbs_lb}, {"m", double(m)},          {"n", double(n)}};
    return r;
}

BoundReport cmu_tnd_bound_kl(const LossStats& stats, const Posterior& post, double delta,
                             double mu, long k_mu) {
    post.validate();
    check_delta(delta);
    if (!(mu < 0.5)) throw std::invalid_argument("cmu_tnd_bound_kl: mu must be < 0.5");
    double kl = kl_divergence(post.rho, post.pi);
    double tnd = stats.tandem.quad(post.rho);
    double gibbs = dot(post.rho, stats.gibbs);
    long m = stats.m_min, n = stats.n_min;

    // kl budgets mirror the lambda form's ln(4k sqrt(.)/delta) union structure
    double extra = std::log(2.0 * static_cast<double>(k_mu));
    double tandem_ub = kl_inv_upper(
        tnd, (2.0 * kl + std::log(2.0 * std::sqrt(static_cast<double>(m)) / delta) + extra) / m);
    double gibbs_lb = kl_inv_lower(
        gibbs, (kl + std::log(2.0 * std::sqrt(static_cast<double>(n)) / delta) + extra) / n);
    double d = 0.5 - mu;

    BoundReport r;
    r.raw = (tandem_ub - 2.0 * mu * gibbs_lb + mu * mu) / (d * d);
    r.bound = clip01(r.raw);
    r.mu = mu;
    r.kl_term = kl;
    r.union_factor = k_mu;
    r.terms = {{"tandem_emp", tnd},       {"tandem_upper", tandem_ub},
               {"gibbs_emp", gibbs},      {"gibbs_lower", gibbs_lb},
               {"m", double(m)},          {"n", double(n)}};
    return r;
}

BoundReport co_tnd_bound(const LossStats& stats, const MuTandemStats& mu_stats,
                         const Posterior& post, double delta, double mu, double gamma,
                         double lambda, long k_report) {
    post.validate();
    check_delta(delta);
    if (mu_stats.mu != mu)
        throw std::invalid_argument("co_tnd_bound: mu_stats computed for a different mu");
    double kl = kl_divergence(post.rho, post.pi);
    long n = stats.m_min;  // pairwise statistics live on overlaps
    double b = mu_stats.b_mu;
    double c = mu_stats.k_mu;

    double log_k = std::log(2.0 * static_cast<double>(k_report) / delta);
    double mu_loss = mu_stats.loss.quad(post.rho);
    double mu_var = mu_stats.variance.quad(post.rho);
    double var_ub = variance_bound(mu_var, 2.0 * kl + log_k, n, lambda, c);
    double bennett =
        pb_bennett(mu_loss, var_ub, 2.0 * kl, n, log_k, gamma, b);
    double d = 0.5 - mu;

    BoundReport r;
    r.raw = bennett / (d * d);
    r.bound = clip01(r.raw);
    r.mu = mu;
    r.lambda = lambda;
    r.gamma = gamma;
    r.kl_term = kl;
    r.union_factor = k_report;
    r.terms = {{"mu_tandem_emp", mu_loss}, {"mu_variance_emp", mu_var},
               {"variance_upper", var_ub}, {"bennett", bennett},
               {"n", double(n)},           {"range", c}};
    return r;
}

}  // namespace mvbound
