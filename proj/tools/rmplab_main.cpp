// Command-line harness for the random matrix product laboratory.
//
// Subcommands: check-model, estimate, spectrum, be, llt, ld,
// pipeline-check, report. Exit codes: 0 success, 1 error, 2 hard
// assumption failure under --strict.

#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "rmplab/experiments.hpp"
#include "rmplab/spectral.hpp"

using namespace rmp;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    int workers = -1;
    bool exact = false;
    bool strict = false;
};

ExperimentConfig load_config(const GlobalArgs& args) {
    ExperimentConfig cfg = args.config_path.empty() ? default_config()
                                                    : parse_config(args.config_path);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed_set) cfg.seed = args.seed;
    if (args.workers >= 0) cfg.workers = args.workers;
    cfg.exact_mode = cfg.exact_mode || args.exact;
    cfg.strict = cfg.strict || args.strict;
    validate_config(cfg);
    return cfg;
}

EstimateCache load_estimates(const ExperimentConfig& cfg) {
    return EstimateCache::read(cfg.out_dir + "/estimates.txt");
}

int cmd_check_model(const ExperimentConfig& cfg) {
    const MatrixMeasure mu = cfg.measure();
    std::printf("model: %d atoms, dim %d, max N(g) = %.6g\n", mu.atom_count(), mu.dim(),
                mu.max_big_n());
    const AssumptionReport rep = check_assumptions(mu, cfg.seed);
    if (rep.proximal.found) {
        std::printf("proximality: witness word [");
        for (size_t i = 0; i < rep.proximal.witness_word.size(); ++i)
            std::printf("%s%d", i ? " " : "", rep.proximal.witness_word[i]);
        std::printf("], eigenvalue gap ratio %.6g\n", rep.proximal.gap_ratio);
    } else {
        std::printf("proximality: inconclusive (%s)\n", rep.proximal.evidence.c_str());
    }
    std::printf("strong irreducibility: %s (%s)\n",
                to_string(rep.irreducibility.verdict).c_str(),
                rep.irreducibility.evidence.c_str());
    std::printf("note: both checks are heuristic; they warn and never gate experiments\n");
    if (cfg.strict && rep.irreducibility.verdict == Verdict::Fail) return 2;
    return 0;
}

int cmd_estimate(const ExperimentConfig& cfg) {
    const EstimateCache est = run_estimate(cfg);
    std::printf("gamma_hat  = %.10g +- %.3g\n", est.gamma, est.gamma_err);
    std::printf("rho_sq_hat = %.10g +- %.3g%s\n", est.rho_sq, est.rho_sq_err,
                est.degenerate_variance ? "  (degenerate)" : "");
    std::printf("cache written to %s/estimates.txt\n", cfg.out_dir.c_str());
    return 0;
}

int cmd_spectrum(const ExperimentConfig& cfg) {
    const MatrixMeasure mu = cfg.measure();
    const OperatorGrid grid = mu.dim() == 2 ? OperatorGrid::circle(cfg.grid_m)
                                            : OperatorGrid::cloud(mu.dim(), cfg.grid_m, cfg.seed);
    TransferOperator op(mu, grid);
    std::vector<double> xi_grid;
    for (int i = 0; i < cfg.xi_points; ++i)
        xi_grid.push_back(-cfg.xi_max + 2.0 * cfg.xi_max * i / (cfg.xi_points - 1));
    const SpectralCurve curve = lambda_curve(op, xi_grid);
    ensure_directory(cfg.out_dir);
    write_curve_csv(cfg.out_dir + "/lambda_curve.csv", curve);
    std::printf("fitted gamma  = %.10g\n", curve.fitted_gamma);
    std::printf("fitted rho^2  = %.10g\n", curve.fitted_rho_sq);
    std::printf("gap at zero: second eigenvalue modulus = %.6g\n", curve.gap_at_zero);
    if (curve.approximate)
        std::printf("note: d >= 3 cloud grid, all spectral outputs are approximate\n");

    const auto check = lambda_estimates_check(op, curve.fitted_gamma, curve.fitted_rho_sq,
                                              {64, 256, 1024});
    if (check.degenerate) {
        std::printf("lambda estimates: degenerate (rho^2 <= 0), xi_0 = 0\n");
    } else {
        std::printf("lambda estimates: xi_0 = %.3g, fitted c = %.4g\n", check.xi0_hat,
                    check.c_hat);
    }
    const auto hf = high_frequency_decay(op, 1.0);
    std::printf("high-frequency decay at xi = 1: rho_K = %.6g (%s)\n", hf.rho_k_hat,
                hf.decays ? "decays" : "no decay detected");
    std::printf("curve written to %s/lambda_curve.csv\n", cfg.out_dir.c_str());
    return 0;
}

int cmd_be(const ExperimentConfig& cfg) {
    const EstimateCache est = load_estimates(cfg);
    SampleBank bank(cfg, est);
    const BEReport rep = run_be_experiment(cfg, est, bank);
    ensure_directory(cfg.out_dir);
    write_be_csv(cfg.out_dir + "/be_gaps.csv", rep);
    for (const auto& r : rep.rows)
        std::printf("n=%-6ld gap=%.6g trunc_frac=%.3g\n", r.n, r.gap, r.trunc_frac);
    std::printf("fitted log-log slope = %.4f +- %.4f (CLT rate target -0.5)\n", rep.slope,
                rep.slope_se);
    std::printf("written %s/be_gaps.csv\n", cfg.out_dir.c_str());
    return 0;
}

int cmd_llt(const ExperimentConfig& cfg) {
    const EstimateCache est = load_estimates(cfg);
    SampleBank bank(cfg, est);
    const LLTReport rep = run_llt_experiment(cfg, est, bank);
    ensure_directory(cfg.out_dir);
    write_llt_csv(cfg.out_dir + "/llt.csv", rep);
    for (const auto& [n, dev] : rep.sup_dev) std::printf("n=%-6ld sup_dev=%.6g\n", n, dev);
    std::printf("sup deviation decreased from first to last n: %s\n",
                rep.decreased ? "yes" : "no");
    std::printf("written %s/llt.csv\n", cfg.out_dir.c_str());
    return 0;
}

int cmd_ld(const ExperimentConfig& cfg) {
    const EstimateCache est = load_estimates(cfg);
    const LDReport rep = run_ld_experiment(cfg, est);
    ensure_directory(cfg.out_dir);
    write_ld_csv(cfg.out_dir + "/ld_rates.csv", rep, cfg.seed);
    for (const auto& r : rep.rows)
        std::printf("n=%-5ld freq_sigma=%.6g freq_dist=%.6g\n", r.n, r.freq_sigma, r.freq_dist);
    std::printf("cocycle event:  slope %.5f +- %.5f  negative at 95%%: %s\n",
                rep.fit_sigma.slope, rep.fit_sigma.slope_se,
                rep.sigma_negative ? "yes" : "no");
    std::printf("distance event: slope %.5f +- %.5f  negative at 95%%: %s\n",
                rep.fit_dist.slope, rep.fit_dist.slope_se, rep.dist_negative ? "yes" : "no");
    std::printf("written %s/ld_rates.csv\n", cfg.out_dir.c_str());
    return 0;
}

int cmd_pipeline(const ExperimentConfig& cfg) {
    const EstimateCache est = load_estimates(cfg);
    const PipelineReport rep = fn_pipeline_check(cfg, est);
    std::printf("pipeline check at n = %ld\n", rep.n);
    std::printf("(i)   characteristic function, two routes: max err %.3g at xi=%.3g  [%s]\n",
                rep.cf_max_err, rep.cf_worst_xi, rep.cf_pass ? "ok" : "FAIL");
    std::printf("(ii)  sandwich constant C~ = %.6g  [%s]\n", rep.c_tilde,
                rep.sandwich_finite ? "finite" : "FAIL");
    std::printf("(iii) window functional vs Fourier route: max err %.3g [%s], "
                "aggregated R_n: max err %.3g [%s]\n",
                rep.window_max_err, rep.window_pass ? "ok" : "FAIL", rep.r_n_max_err,
                rep.r_n_pass ? "ok" : "FAIL");
    const bool ok = rep.cf_pass && rep.sandwich_finite && rep.window_pass && rep.r_n_pass;
    if (!ok) std::printf("pipeline check FAILED\n");
    return ok ? 0 : 1;
}

int cmd_report(const ExperimentConfig& cfg) {
    const std::string text = merge_report(cfg.out_dir);
    std::fputs(text.c_str(), stdout);
    std::printf("\nwritten %s/report.txt\n", cfg.out_dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random matrix product laboratory"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--config", args.config_path, "experiment config file");
    app.add_option("--out", args.out_dir, "output directory (overrides config)");
    auto* seed_opt = app.add_option("--seed", args.seed, "master seed (overrides config)");
    app.add_option("--workers", args.workers, "worker threads, 0 = hardware");
    app.add_flag("--exact", args.exact, "force exact enumeration where feasible");
    app.add_flag("--strict", args.strict, "exit 2 on hard assumption failure");

    auto* c_check = app.add_subcommand("check-model", "heuristic assumption checks");
    auto* c_est = app.add_subcommand("estimate", "estimate gamma and rho^2, write the cache");
    auto* c_spec = app.add_subcommand("spectrum", "transfer-operator eigenvalue curve");
    auto* c_be = app.add_subcommand("be", "Berry-Esseen gap experiment");
    auto* c_llt = app.add_subcommand("llt", "local limit window experiment");
    auto* c_ld = app.add_subcommand("ld", "large deviation rate experiment");
    auto* c_pipe = app.add_subcommand("pipeline-check", "exact F_n Fourier identities");
    auto* c_rep = app.add_subcommand("report", "merge CSV outputs into report.txt");

    CLI11_PARSE(app, argc, argv);
    args.seed_set = seed_opt->count() > 0;

    try {
        const ExperimentConfig cfg = load_config(args);
        if (c_check->parsed()) return cmd_check_model(cfg);
        if (c_est->parsed()) return cmd_estimate(cfg);
        if (c_spec->parsed()) return cmd_spectrum(cfg);
        if (c_be->parsed()) return cmd_be(cfg);
        if (c_llt->parsed()) return cmd_llt(cfg);
        if (c_ld->parsed()) return cmd_ld(cfg);
        if (c_pipe->parsed()) return cmd_pipeline(cfg);
        if (c_rep->parsed()) return cmd_report(cfg);
    } catch (const DegenerateModel& e) {
        std::fprintf(stderr, "degeneracy verdict: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
