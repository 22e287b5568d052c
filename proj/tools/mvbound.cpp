// mvbound: majority-vote bound computation and minimization front end.
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mvbound/bounds.hpp"
#include "mvbound/dataio.hpp"
#include "mvbound/ensemble.hpp"
#include "mvbound/grids.hpp"
#include "mvbound/lossstats.hpp"
#include "mvbound/optimize.hpp"
#include "mvbound/oracle.hpp"
#include "mvbound/specfun.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mvbound;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    os << text;
}

json report_json(const BoundReport& r) { return json::parse(r.to_json()); }

// Closed-form (lambda, gamma, mu) at a given rho, mu snapped to the grid.
void cmu_params_at(const LossStats& stats, const Posterior& post, double delta,
                   const std::vector<double>& mu_pts, double& lambda, double& gamma,
                   double& mu) {
    long k = static_cast<long>(mu_pts.size());
    long m = stats.m_min, n = stats.n_min;
    lambda = tnd_lambda_star(stats, post, delta, k);
    double gibbs = dot(post.rho, stats.gibbs);
    gamma = gibbs > 0.0 ? gibbs_gamma_star(stats, post, delta, k) : 1e6;
    double kl = kl_divergence(post.rho, post.pi);
    double log_m = std::log(4.0 * k * std::sqrt(static_cast<double>(m)) / delta);
    double log_n = std::log(4.0 * k * std::sqrt(static_cast<double>(n)) / delta);
    double tnd = stats.tandem.quad(post.rho);
    double u_t = tnd / (1.0 - lambda / 2.0) +
                 (2.0 * kl + log_m) / (lambda * (1.0 - lambda / 2.0) * m);
    double l_g = (1.0 - gamma / 2.0) * gibbs - (kl + log_n) / (gamma * n);
    double mu_cont = l_g < 0.5 ? cmu_mu_star(u_t, l_g) : mu_pts.front();
    mu_cont = std::clamp(mu_cont, mu_pts.front(), mu_pts.back());
    mu = mu_pts[snap_to_grid(mu_pts, mu_cont)];
}

// COTND at a fixed posterior: scan the mu grid with snapped closed-form
// (lambda, gamma) per mu; report with the full union factor.
BoundReport co_bound_at(const LossStats& stats, const Posterior& post, double delta,
                        const std::vector<double>& mu_pts, double c1, double c2) {
    long k_mu = static_cast<long>(mu_pts.size());
    long n = stats.m_min;
    double delta12 = delta / (2.0 * static_cast<double>(k_mu));
    std::vector<double> lambda_gr = lambda_grid(n, delta12, c1);
    double log_k = std::log(2.0 * static_cast<double>(k_mu) / delta);
    double kl = kl_divergence(post.rho, post.pi);

    BoundReport best;
    best.raw = std::numeric_limits<double>::infinity();
    for (double mu : mu_pts) {
        MuTandemStats ms = mu_tandem_stats(stats, mu);
        std::vector<double> gamma_gr = gamma_grid(n, ms.b_mu, ms.k_mu, delta12, delta12, c2);
        double lambda =
            lambda_gr[snap_to_grid(lambda_gr, co_lambda_star(ms, post, delta, k_mu, n))];
        double u_v =
            variance_bound(ms.variance.quad(post.rho), 2.0 * kl + log_k, n, lambda, ms.k_mu);
        double gamma =
            gamma_gr[snap_to_grid(gamma_gr, co_gamma_star(ms, post, delta, k_mu, n, u_v))];
        long k_report =
            k_mu * static_cast<long>(lambda_gr.size()) * static_cast<long>(gamma_gr.size());
        BoundReport r = co_tnd_bound(stats, ms, post, delta, mu, gamma, lambda, k_report);
        if (r.raw < best.raw) best = r;
    }
    return best;
}

struct BoundsConfig {
    std::string table_path, test_table_path, out_path;
    double delta = 0.05;
    int mu_grid_size = 200;
    double c1 = 1.05, c2 = 1.05;
};

int cmd_bounds(const BoundsConfig& cfg) {
    PredictionTable table = read_prediction_table(cfg.table_path);
    LossStats stats = compute_loss_stats(table);
    std::size_t H = stats.n_hypotheses();
    Posterior uniform = Posterior::uniform(H);
    std::vector<double> mu_pts = mu_grid(cfg.mu_grid_size);
    GridConfig gcfg{cfg.mu_grid_size, cfg.c1, cfg.c2};

    bool have_test = !cfg.test_table_path.empty();
    PredictionTable test_table;
    if (have_test) test_table = read_prediction_table(cfg.test_table_path);
    auto test_loss = [&](const std::vector<double>& rho) {
        return mv_test_loss(rho, test_table);
    };

    json out;
    out["delta"] = cfg.delta;
    out["n_hypotheses"] = H;
    out["n_min"] = stats.n_min;
    out["m_min"] = stats.m_min;

    // bounds at the uniform posterior
    json uni;
    uni["fo"] = report_json(fo_bound(stats, uniform, cfg.delta));
    uni["tnd"] = report_json(tnd_bound(stats, uniform, cfg.delta));
    double lam_u, gam_u, mu_u;
    cmu_params_at(stats, uniform, cfg.delta, mu_pts, lam_u, gam_u, mu_u);
    uni["cmu_tnd"] = report_json(
        cmu_tnd_bound_kl(stats, uniform, cfg.delta, mu_u, static_cast<long>(mu_pts.size())));
    uni["co_tnd"] = report_json(co_bound_at(stats, uniform, cfg.delta, mu_pts, cfg.c1, cfg.c2));
    double uniform_loss = 0.0;
    if (have_test) {
        uniform_loss = test_loss(uniform.rho);
        uni["test_loss"] = uniform_loss;
    }
    out["uniform"] = uni;

    // optimized posteriors
    OptResult fo = optimize_fo(stats, cfg.delta);
    OptResult tnd = optimize_tnd(stats, cfg.delta);
    OptResult cmu = optimize_cmu_tnd(stats, mu_pts, cfg.delta);
    OptResult co = optimize_co_tnd(stats, mu_pts, cfg.delta, gcfg);

    json opt;
    auto pack = [&](const char* name, const OptResult& r) {
        json j;
        j["report"] = report_json(r.report);
        j["rho"] = r.posterior.rho;
        j["termination"] = r.trace.termination;
        if (have_test) {
            double tl = test_loss(r.posterior.rho);
            j["test_loss"] = tl;
            if (uniform_loss > 0.0) j["test_loss_ratio"] = tl / uniform_loss;
        }
        opt[name] = j;
    };
    pack("fo", fo);
    pack("tnd", tnd);
    pack("cmu_tnd", cmu);
    pack("co_tnd", co);
    out["optimized"] = opt;

    json ratios;
    double tnd_at_tnd = tnd.report.raw;
    if (tnd_at_tnd > 0.0) {
        ratios["fo_over_tnd"] = fo.report.raw / tnd_at_tnd;
        ratios["cmu_over_tnd"] = cmu.report.raw / tnd_at_tnd;
        ratios["co_over_tnd"] = co.report.raw / tnd_at_tnd;
    }
    out["bound_ratios"] = ratios;

    std::string text = out.dump(2) + "\n";
    if (!cfg.out_path.empty())
        write_text(cfg.out_path, text);
    else
        std::cout << text;
    return 0;
}

struct TrainConfig {
    std::string data_path, out_dir = ".";
    int hypotheses = 20;
    std::uint64_t seed = 1;
    int max_depth = 3;
    double bootstrap_fraction = 1.0;
    double test_fraction = 0.0;
    // synthetic generation when no data path is given
    int synth_n = 3000, synth_dim = 2, synth_classes = 2;
    double synth_spread = 1.6;
};

int cmd_train(const TrainConfig& cfg) {
    Dataset data = cfg.data_path.empty()
                       ? make_synthetic_dataset(cfg.synth_n, cfg.synth_dim, cfg.synth_classes,
                                                cfg.seed, cfg.synth_spread)
                       : read_libsvm(cfg.data_path);
    Dataset train = data, test;
    if (cfg.test_fraction > 0.0) {
        auto split = stratified_split(data, cfg.test_fraction, cfg.seed);
        train = std::move(split.first);
        test = std::move(split.second);
    }
    LearnerConfig lc{cfg.max_depth, cfg.bootstrap_fraction};
    BaggedEnsemble ens = train_bagged(train, cfg.hypotheses, lc, cfg.seed);
    fs::path out(cfg.out_dir);
    fs::create_directories(out);
    write_prediction_table(ens.table, (out / "table.csv").string());
    if (cfg.test_fraction > 0.0)
        write_prediction_table(evaluate_on(ens, test), (out / "test_table.csv").string());

    auto [best_h, best_loss] = best_single_hypothesis(ens.table);
    std::vector<double> rho(ens.hypotheses.size(), 1.0 / ens.hypotheses.size());
    json summary;
    summary["n_train"] = train.size();
    summary["n_test"] = test.size();
    summary["hypotheses"] = cfg.hypotheses;
    summary["seed"] = cfg.seed;
    summary["best_oob_hypothesis"] = best_h;
    summary["best_oob_loss"] = best_loss;
    if (cfg.test_fraction > 0.0) {
        summary["uniform_mv_test_loss"] = mv_test_loss(rho, ens, test);
    }
    write_text(out / "train_summary.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_oracle_surface(int grid_size, const std::string& out_path) {
    std::vector<RatioSurfaceRow> rows = ratio_surface(grid_size);
    std::ostringstream os;
    os.precision(17);
    os << "g,t,ratio\n";
    for (const auto& r : rows) os << r.g << ',' << r.t << ',' << r.ratio << '\n';
    if (!out_path.empty())
        write_text(out_path, os.str());
    else
        std::cout << os.str();
    return 0;
}

int cmd_bennett_surface(const std::string& out_path, double delta) {
    // Bennett vs Bernstein, each optimized over its own gamma grid;
    // unit-range loss, KL fixed at 5.
    const double kl = 5.0, b = 1.0;
    const double log_term = std::log(1.0 / delta);
    std::vector<double> gammas;
    for (int i = 0; i <= 200; ++i)
        gammas.push_back(std::pow(10.0, -4.0 + 4.0 * i / 200.0));  // (1e-4, 1]
    std::ostringstream os;
    os.precision(17);
    os << "n,emp,var,bennett,bernstein,ratio\n";
    for (long n : {1000L, 10000L}) {
        for (int ie = 0; ie <= 50; ++ie) {
            double emp = 0.5 * ie / 50.0;
            for (int iv = 1; iv <= 50; ++iv) {
                double var = 0.25 * iv / 50.0;
                double be = std::numeric_limits<double>::infinity();
                double br = be;
                for (double g : gammas) {
                    be = std::min(be, pb_bennett(emp, var, kl, n, log_term, g, b));
                    br = std::min(br, pb_bernstein(emp, var, kl, n, log_term, g, b));
                }
                os << n << ',' << emp << ',' << var << ',' << be << ',' << br << ','
                   << be / br << '\n';
            }
        }
    }
    if (!out_path.empty())
        write_text(out_path, os.str());
    else
        std::cout << os.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Majority-vote PAC-Bayes bound computation and minimization"};
    app.require_subcommand(1);

    TrainConfig tc;
    auto* train = app.add_subcommand("train", "Train a bagged-tree ensemble, write its "
                                              "prediction table and summary");
    train->add_option("--data", tc.data_path, "LIBSVM dataset (omit for a synthetic one)");
    train->add_option("--hypotheses", tc.hypotheses, "Ensemble size")->check(CLI::Range(2, 10000));
    train->add_option("--seed", tc.seed, "Master RNG seed");
    train->add_option("--max-depth", tc.max_depth, "Tree depth cap");
    train->add_option("--bootstrap-fraction", tc.bootstrap_fraction, "Bootstrap size fraction");
    train->add_option("--test-fraction", tc.test_fraction, "Held-out fraction (stratified)");
    train->add_option("--synth-n", tc.synth_n, "Synthetic dataset size");
    train->add_option("--synth-dim", tc.synth_dim, "Synthetic dimension");
    train->add_option("--synth-classes", tc.synth_classes, "Synthetic class count");
    train->add_option("--out", tc.out_dir, "Output directory");

    BoundsConfig bc;
    auto* bounds = app.add_subcommand("bounds", "Compute FO/TND/CmuTND/COTND at uniform and "
                                                "optimized posteriors");
    bounds->add_option("--table", bc.table_path, "Prediction table CSV")->required();
    bounds->add_option("--test-table", bc.test_table_path, "Held-out prediction table CSV");
    bounds->add_option("--delta", bc.delta, "Confidence parameter");
    bounds->add_option("--mu-grid-size", bc.mu_grid_size, "mu grid size")->check(CLI::Range(2, 100000));
    bounds->add_option("--c1", bc.c1, "lambda grid ratio");
    bounds->add_option("--c2", bc.c2, "gamma grid ratio");
    bounds->add_option("--out", bc.out_path, "Report JSON path (default stdout)");

    int grid_size = 400;
    std::string surface_out;
    auto* osurf = app.add_subcommand("oracle-surface", "Emit the oracle C-bound/TND ratio "
                                                       "surface as CSV");
    osurf->add_option("--grid-size", grid_size, "Grid resolution per axis");
    osurf->add_option("--out", surface_out, "CSV path (default stdout)");

    double bdelta = 0.05;
    std::string bennett_out;
    auto* bsurf = app.add_subcommand("bennett-surface", "Emit the Bennett/Bernstein ratio "
                                                        "surface as CSV");
    bsurf->add_option("--delta", bdelta, "Confidence parameter");
    bsurf->add_option("--out", bennett_out, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (train->parsed()) return cmd_train(tc);
        if (bounds->parsed()) return cmd_bounds(bc);
        if (osurf->parsed()) return cmd_oracle_surface(grid_size, surface_out);
        if (bsurf->parsed()) return cmd_bennett_surface(bennett_out, bdelta);
    } catch (const std::domain_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
