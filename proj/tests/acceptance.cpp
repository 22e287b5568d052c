// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "mvbound/bounds.hpp"
#include "mvbound/dataio.hpp"
#include "mvbound/ensemble.hpp"
#include "mvbound/grids.hpp"
#include "mvbound/lossstats.hpp"
#include "mvbound/optimize.hpp"
#include "mvbound/oracle.hpp"
#include "mvbound/specfun.hpp"

using namespace mvbound;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const char* what, bool ok, double seconds) {
    std::printf("%s criterion %2d: %s (%.2f s)\n", ok ? "PASS" : "FAIL", id, what, seconds);
    if (!ok) ++failures;
}

double elapsed(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

OraclePoint random_feasible(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    OraclePoint p;
    p.g = 1e-9 + (0.4999 - 1e-9) * u(rng);
    p.t = p.g * p.g + (p.g - p.g * p.g) * u(rng);
    return p;
}

PredictionTable random_full_table(std::mt19937_64& rng, std::size_t h_count, std::size_t n,
                                  const std::vector<double>& err_rates) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PredictionTable t;
    t.n_classes = 2;
    for (std::size_t i = 0; i < n; ++i) t.truth.push_back(int(rng() % 2));
    for (std::size_t h = 0; h < h_count; ++h) {
        std::vector<int> preds(n);
        std::vector<std::uint8_t> mask(n, 1);
        for (std::size_t i = 0; i < n; ++i)
            preds[i] = (u(rng) < err_rates[h]) ? 1 - t.truth[i] : t.truth[i];
        t.predictions.push_back(std::move(preds));
        t.oob_mask.push_back(std::move(mask));
    }
    return t;
}

void criterion_1() {
    auto t0 = Clock::now();
    std::mt19937_64 rng(1001);
    bool ok = true;
    for (int i = 0; i < 10000 && ok; ++i) {
        OraclePoint p = random_feasible(rng);
        ok = ok && std::abs(oracle_mv_param(p, mu_star(p)) - oracle_cbound(p)) <= 1e-12;
        ok = ok && oracle_mv_param(p, 0.0) == oracle_tnd(p);
    }
    double s = elapsed(t0);
    report(1, "oracle substitution identities on 10000 feasible points", ok && s < 1.0, s);
}

void criterion_2() {
    auto t0 = Clock::now();
    bool ok = true;
    auto rows = ratio_surface(400);
    std::size_t diag = 0;
    for (const auto& r : rows) {
        if (r.ratio > 1.0 + 1e-12) ok = false;
        if (r.t == 0.5 * r.g) {
            ++diag;
            if (std::abs(r.ratio - 1.0) > 1e-12) ok = false;
        }
        double diff = oracle_cbound({r.g, r.t}) - oracle_fo({r.g, r.t});
        double key = r.t - 0.5 * r.g;
        if (key > 0 && diff <= -1e-12) ok = false;
        if (key < 0 && diff >= 1e-12) ok = false;
        if (key == 0 && std::abs(diff) > 1e-12) ok = false;
    }
    ok = ok && diag > 100;
    double s = elapsed(t0);
    report(2, "figure-1 surface structure and the trichotomy", ok && s < 5.0, s);
}

void criterion_3() {
    auto t0 = Clock::now();
    std::mt19937_64 rng(3003);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool ok = true;
    for (int i = 0; i < 1000 && ok; ++i) {
        double emp = u(rng), var = 0.25 * u(rng), kl = 5.0 * u(rng);
        long n = 100 + long(rng() % 10000);
        double lg = std::log(1.0 / (0.01 + 0.2 * u(rng)));
        double b = 0.5 + 1.5 * u(rng);
        for (int j = 1; j <= 50; ++j) {
            double g = (j / 50.0) / b;
            double be = pb_bennett(emp, var, kl, n, lg, g, b);
            double br = pb_bernstein(emp, var, kl, n, lg, g, b);
            if (be > br + 1e-12) ok = false;
            if (j == 50 && std::abs(be - br) > 1e-12) ok = false;
        }
    }
    const double e2 = std::exp(1.0) - 2.0;
    for (double x = 1e-3; x <= 1.0; x += 1e-3) {
        double v = phi_over_x2(x);
        if (v < 0.5 - 1e-12 || v > e2 + 1e-12) ok = false;
    }
    if (std::abs(phi_over_x2(1e-6) - 0.5) > 1e-6) ok = false;
    report(3, "Bennett dominates Bernstein; phi/x^2 within [1/2, e-2]", ok, elapsed(t0));
}

void criterion_4() {
    auto t0 = Clock::now();
    std::mt19937_64 rng(4004);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool ok = true;
    for (int i = 0; i < 10000 && ok; ++i) {
        double p = u(rng);
        double q = p + (1.0 - p) * u(rng);
        if (q > 1.0 - 1e-9) q = 1.0 - 1e-9;
        if (std::abs(kl_inv_upper(p, binary_kl(p, q)) - q) > 1e-9) ok = false;
        double ql = p * u(rng);
        if (std::abs(kl_inv_lower(p, binary_kl(p, ql)) - ql) > 1e-9) ok = false;
    }
    report(4, "kl inversion round trips within 1e-9", ok, elapsed(t0));
}

void criterion_5() {
    auto t0 = Clock::now();
    std::mt19937_64 rng(5005);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool ok = true;
    for (int rep = 0; rep < 100 && ok; ++rep) {
        std::size_t H = 2 + rng() % 19, N = 20 + rng() % 481;
        std::vector<double> errs(H);
        for (auto& e : errs) e = u(rng);
        PredictionTable t = random_full_table(rng, H, N, errs);
        std::vector<double> rho(H);
        double sum = 0.0;
        for (auto& r : rho) sum += (r = u(rng) + 1e-3);
        for (auto& r : rho) r /= sum;
        auto [lhs, rhs] = second_moment_identity_check(t, rho);
        if (std::abs(lhs - rhs) > 1e-12) ok = false;
    }
    report(5, "tandem second-moment identity on 100 random instances", ok, elapsed(t0));
}

void criterion_6() {
    auto t0 = Clock::now();
    std::mt19937_64 rng(6006);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool ok = true;
    const double h = 1e-6;
    for (int rep = 0; rep < 50 && ok; ++rep) {
        std::size_t H = 3 + rng() % 5;
        std::vector<double> errs(H);
        for (auto& e : errs) e = 0.05 + 0.4 * u(rng);
        PredictionTable t = random_full_table(rng, H, 150, errs);
        LossStats s = compute_loss_stats(t);
        Posterior post = Posterior::uniform(H);
        double sum = 0.0;
        for (auto& r : post.rho) sum += (r = 0.2 / H + u(rng));
        for (auto& r : post.rho) r /= sum;
        double mu = -0.4 + 0.8 * u(rng), lambda = 0.2 + u(rng), gamma = 0.2 + u(rng);
        long m = s.m_min, n = s.n_min;
        double a = 1.0 / (1.0 - lambda / 2.0);
        double b = mu * (1.0 - gamma / 2.0);
        double c = 1.0 / (lambda * (1.0 - lambda / 2.0) * m) + mu / (gamma * n);
        auto f_cmu = [&](const std::vector<double>& r) {
            return a * s.tandem.quad(r) - 2.0 * b * dot(r, s.gibbs) +
                   2.0 * c * kl_divergence(r, post.pi);
        };
        auto grad = cmu_gradient(s, post, mu, lambda, gamma, 0.05, 200);
        MuTandemStats ms = mu_tandem_stats(s, mu);
        double a2 = 0.3 + u(rng), b2 = 0.001 + 0.05 * u(rng);
        auto f_co = [&](const std::vector<double>& r) {
            return ms.loss.quad(r) + a2 * ms.variance.quad(r) +
                   2.0 * b2 * kl_divergence(r, post.pi);
        };
        auto gco = co_gradient(ms, post, a2, b2);
        for (std::size_t i = 0; i < H; ++i) {
            std::vector<double> rp = post.rho, rm = post.rho;
            rp[i] += h;
            rm[i] -= h;
            double fd = (f_cmu(rp) - f_cmu(rm)) / (2.0 * h);
            if (std::abs(grad[i] - fd) > 1e-6 * (1.0 + std::abs(fd))) ok = false;
            fd = (f_co(rp) - f_co(rm)) / (2.0 * h);
            if (std::abs(gco[i] - fd) > 1e-6 * (1.0 + std::abs(fd))) ok = false;
        }
    }
    report(6, "analytic gradients match central differences", ok, elapsed(t0));
}

void criterion_7() {
    auto t0 = Clock::now();
    bool ok = true;
    ok = ok && lambda_grid(1000, 0.025, 1.05).size() == 45;
    ok = ok && lambda_grid(5000, 0.001, 1.05).size() == 55;
    for (double mu : {-0.5, 0.0, 0.3}) {
        double b = (1.0 - mu) * (1.0 - mu);
        double c = std::max(1.0 - mu, 1.0 - 2.0 * mu);
        for (long n : {1000L, 5000L}) {
            for (double d : {0.025, 0.001}) {
                double gmin = gamma_grid_min(n, b, c, d);
                double gmax = gamma_grid_max(n, b, c, d);
                double v_min = 2.0 * c * c * std::log(1.0 / d) / (n - 1);
                double alpha = 1.0 / (1.0 + b * b / v_min);
                double xm = gmax * b;
                // root residual of e^x = 1 + x/alpha, relative
                if (std::abs(std::exp(xm) - 1.0 - xm / alpha) / std::exp(xm) > 1e-8) ok = false;
                auto grid = gamma_grid(n, b, c, d, d, 1.05);
                if (std::abs(grid.front() - gmin) > 1e-12 * gmin) ok = false;
                if (grid.back() < gmax / 1.05 - 1e-12 || grid.back() > gmax * 1.05) ok = false;
            }
        }
    }
    report(7, "grid sizes and Lambert-root endpoints", ok, elapsed(t0));
}

void criterion_8() {
    auto t0 = Clock::now();
    std::mt19937_64 rng(8008);
    std::uniform_real_distribution<double> u(0.05, 0.45);
    auto mu_pts = mu_grid(200);
    bool ok = true;
    for (int rep = 0; rep < 30 && ok; ++rep) {
        PredictionTable t = random_full_table(rng, 2, 300, {u(rng), u(rng)});
        LossStats s = compute_loss_stats(t);
        Posterior pi = Posterior::uniform(2);

        double scan_tnd = 1e18, scan_cmu = 1e18;
        for (int i = 0; i <= 1000; ++i) {
            Posterior p = pi;
            p.rho = {i / 1000.0, 1.0 - i / 1000.0};
            scan_tnd = std::min(scan_tnd, tnd_bound(s, p, 0.05).raw);
            for (std::size_t j = 0; j < mu_pts.size(); j += 4)
                scan_cmu = std::min(scan_cmu,
                                    cmu_tnd_bound_kl(s, p, 0.05, mu_pts[j], 200).raw);
        }
        OptResult tnd = optimize_tnd(s, 0.05);
        OptResult cmu = optimize_cmu_tnd(s, mu_pts, 0.05);
        if (tnd.report.raw > scan_tnd + 1e-3) ok = false;
        if (cmu.report.raw > scan_cmu + 1e-3) ok = false;

        // final bound never exceeds the bound at rho = pi, for all four
        OptResult fo = optimize_fo(s, 0.05);
        OptResult co = optimize_co_tnd(s, mu_pts, 0.05);
        if (fo.report.raw > fo_bound(s, pi, 0.05).raw + 1e-12) ok = false;
        if (tnd.report.raw > tnd_bound(s, pi, 0.05).raw + 1e-12) ok = false;
        double pi_cmu = 1e18;
        for (double mu : mu_pts)
            pi_cmu = std::min(pi_cmu, cmu_tnd_bound_kl(s, pi, 0.05, mu, 200).raw);
        if (cmu.report.raw > pi_cmu + 1e-12) ok = false;
        // COTND pi reference: snapped closed-form parameters at the mu the
        // optimizer selected
        long n = s.m_min;
        double delta12 = 0.05 / 400.0;
        auto lambda_gr = lambda_grid(n, delta12, 1.05);
        double log_k = std::log(2.0 * 200 / 0.05);
        double mu_sel = mu_pts[snap_to_grid(mu_pts, *co.report.mu)];
        MuTandemStats ms = mu_tandem_stats(s, mu_sel);
        auto gamma_gr = gamma_grid(n, ms.b_mu, ms.k_mu, delta12, delta12, 1.05);
        double lam =
            lambda_gr[snap_to_grid(lambda_gr, co_lambda_star(ms, pi, 0.05, 200, n))];
        double u_v = variance_bound(ms.variance.quad(pi.rho), log_k, n, lam, ms.k_mu);
        double gam =
            gamma_gr[snap_to_grid(gamma_gr, co_gamma_star(ms, pi, 0.05, 200, n, u_v))];
        long k_rep = 200L * long(lambda_gr.size()) * long(gamma_gr.size());
        double pi_co = co_tnd_bound(s, ms, pi, 0.05, mu_sel, gam, lam, k_rep).raw;
        if (co.report.raw > pi_co + 1e-12) ok = false;
    }
    double sec = elapsed(t0);
    report(8, "optimizers reach the 2-hypothesis grid minimum; never lose to pi",
           ok && sec < 30.0, sec);
}

void criterion_9() {
    auto t0 = Clock::now();
    std::mt19937_64 rng(9009);
    std::uniform_real_distribution<double> u(0.05, 0.45);
    auto mu_pts = mu_grid(50);
    bool ok = true;
    for (int rep = 0; rep < 20 && ok; ++rep) {
        std::size_t H = 2 + rng() % 3;
        std::vector<double> errs(H);
        for (auto& e : errs) e = u(rng);
        PredictionTable t = random_full_table(rng, H, 200, errs);
        LossStats s = compute_loss_stats(t);

        std::vector<double> profile(mu_pts.size());
        std::size_t argmin = 0;
        for (std::size_t i = 0; i < mu_pts.size(); ++i) {
            profile[i] = co_tnd_profile_value(s, mu_pts, i, 0.05);
            if (profile[i] < profile[argmin]) argmin = i;
        }
        bool quasi = true;
        for (std::size_t i = 1; i < mu_pts.size(); ++i) {
            if (i <= argmin && profile[i] > profile[i - 1] + 1e-12) quasi = false;
            if (i > argmin && profile[i] + 1e-12 < profile[i - 1]) quasi = false;
        }

        OptResult co = optimize_co_tnd(s, mu_pts, 0.05);
        std::size_t got = snap_to_grid(mu_pts, *co.report.mu);
        if (quasi) {
            if (profile[got] > profile[argmin] + 1e-9) ok = false;
        } else {
            if (!co.trace.fallback_scan) ok = false;
            if (profile[got] > profile[argmin] + 1e-9) ok = false;
        }
    }
    report(9, "COTND mu binary search agrees with the full scan", ok, elapsed(t0));
}

void criterion_10() {
    auto t0 = Clock::now();
    bool ok = true;
    auto mu_pts = mu_grid(200);
    for (std::uint64_t seed = 1; seed <= 5 && ok; ++seed) {
        Dataset data = make_synthetic_dataset(3000, 2, 2, seed);
        auto [train, test] = stratified_split(data, 0.2, seed);
        BaggedEnsemble ens = train_bagged(train, 20, LearnerConfig{3, 1.0}, seed * 977);
        LossStats s = compute_loss_stats(ens.table);
        PredictionTable test_table = evaluate_on(ens, test);
        Posterior uni = Posterior::uniform(20);
        double uniform_loss = mv_test_loss(uni.rho, test_table);

        OptResult fo = optimize_fo(s, 0.05);
        OptResult tnd = optimize_tnd(s, 0.05);
        OptResult cmu = optimize_cmu_tnd(s, mu_pts, 0.05);
        OptResult co = optimize_co_tnd(s, mu_pts, 0.05);

        // (a) every reported bound upper-bounds its posterior's held-out loss
        const OptResult* all[4] = {&fo, &tnd, &cmu, &co};
        for (const OptResult* r : all) {
            double loss = mv_test_loss(r->posterior.rho, test_table);
            if (r->report.bound < loss) ok = false;
        }
        if (fo_bound(s, uni, 0.05).bound < uniform_loss) ok = false;
        if (tnd_bound(s, uni, 0.05).bound < uniform_loss) ok = false;

        // (b) second-order optimization rarely degrades the vote
        for (const OptResult* r : {&tnd, &cmu, &co}) {
            double loss = mv_test_loss(r->posterior.rho, test_table);
            if (loss > 1.1 * uniform_loss + 1e-12) ok = false;
        }
        // (c) the FO overconcentration ratio is surfaced (just computed here)
        double fo_ratio = mv_test_loss(fo.posterior.rho, test_table) /
                          std::max(uniform_loss, 1e-12);
        (void)fo_ratio;
    }
    double sec = elapsed(t0);
    report(10, "end-to-end desk experiment over 5 seeds", ok && sec < 300.0, sec);
}

void criterion_11() {
    auto t0 = Clock::now();
    // correlated error pair: P(11)=0.30, P(10)=0.20, P(01)=0.10, P(00)=0.40
    const double p11 = 0.30, p10 = 0.20, p01 = 0.10;
    std::mt19937_64 rng(1111);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    bool ok = true;
    const std::size_t n = 50, reps = 10000;
    for (double mu : {-0.25, 0.0, 0.25}) {
        // analytic variance of (A - mu)(B - mu)
        double vals[4] = {(1 - mu) * (1 - mu), (1 - mu) * (0 - mu), (0 - mu) * (1 - mu),
                          (0 - mu) * (0 - mu)};
        double probs[4] = {p11, p10, p01, 1.0 - p11 - p10 - p01};
        double mean = 0.0, second = 0.0;
        for (int i = 0; i < 4; ++i) {
            mean += probs[i] * vals[i];
            second += probs[i] * vals[i] * vals[i];
        }
        double analytic = second - mean * mean;

        double sum = 0.0, sumsq = 0.0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            PredictionTable t;
            t.n_classes = 2;
            t.truth.assign(n, 0);
            std::vector<int> a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) {
                double x = u(rng);
                bool ea = x < p11 + p10;
                bool eb = x < p11 || (x >= p11 + p10 && x < p11 + p10 + p01);
                a[i] = ea ? 1 : 0;
                b[i] = eb ? 1 : 0;
            }
            t.predictions = {a, b};
            t.oob_mask.assign(2, std::vector<std::uint8_t>(n, 1));
            MuTandemStats ms = mu_tandem_stats(compute_loss_stats(t), mu);
            double v = ms.variance(0, 1);
            sum += v;
            sumsq += v * v;
        }
        double mc_mean = sum / reps;
        double mc_var = (sumsq - reps * mc_mean * mc_mean) / (reps - 1);
        double se = std::sqrt(mc_var / reps);
        if (std::abs(mc_mean - analytic) > 3.0 * se) ok = false;
    }
    report(11, "mu-tandem variance estimator is unbiased (Monte Carlo)", ok, elapsed(t0));
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    if (failures) {
        std::printf("%d criteria FAILED\n", failures);
        return 1;
    }
    std::printf("all 11 criteria passed\n");
    return 0;
}
