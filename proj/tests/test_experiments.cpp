#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "rmplab/experiments.hpp"

using namespace rmp;

namespace {

ExperimentConfig small_config(const std::string& out) {
    ExperimentConfig cfg = default_config();
    cfg.n_grid = {16, 64, 256};
    cfg.samples = 20000;
    cfg.estimate_n = 1024;
    cfg.estimate_samples = 30000;
    cfg.ld_n_grid = {8, 16, 24, 32};
    cfg.ld_samples = 40000;
    cfg.out_dir = out;
    cfg.seed = 5;
    cfg.workers = 2;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("config parsing: defaults, overrides, diagnostics") {
    const std::string path = "/tmp/rmplab_test_config.txt";
    {
        std::ofstream out(path);
        out << "# comment line\n"
            << "dim = 2\n"
            << "atoms = 2\n"
            << "atom.0 = 3;1;1;1\n"
            << "atom.1 = 1;1;1;3\n"
            << "weight.0 = 1\n"
            << "weight.1 = 3\n"
            << "n_grid = 32;64\n"
            << "samples = 5000\n"
            << "zeta = 0.5  # inline comment\n"
            << "a = -1\n"
            << "b = 1\n";
    }
    auto cfg = parse_config(path);
    CHECK(cfg.atoms.size() == 2);
    CHECK(cfg.atoms[0](0, 0) == 3.0);
    CHECK(cfg.n_grid == std::vector<long>{32, 64});
    CHECK(cfg.zeta == 0.5);
    auto mu = cfg.measure();
    CHECK(mu.weight(1) == doctest::Approx(0.75));  // renormalized

    // line- and field-precise diagnostics
    {
        std::ofstream out(path);
        out << "samples = 5000\n\nbogus_key = 1\n";
    }
    try {
        parse_config(path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line_number == 3);
        CHECK(e.field_name == "bogus_key");
    }

    {
        std::ofstream out(path);
        out << "atom.0 = 1;0;0;1\natoms = 1\n";
    }
    CHECK_THROWS_AS(parse_config(path), ConfigError);  // missing weights

    {
        std::ofstream out(path);
        out << "n_grid = 64;32\n";
    }
    CHECK_THROWS(parse_config(path));  // not ascending

    std::remove(path.c_str());
}

TEST_CASE("estimate stage writes a cache the experiments can consume") {
    auto cfg = small_config("/tmp/rmplab_exp_test");
    auto est = run_estimate(cfg);
    CHECK(est.gamma == doctest::Approx(0.9155).epsilon(2e-3));
    CHECK(est.rho_sq > 0);
    CHECK_FALSE(est.degenerate_variance);

    auto read_back = EstimateCache::read(cfg.out_dir + "/estimates.txt");
    CHECK(read_back.gamma == est.gamma);
    CHECK(read_back.rho_sq == est.rho_sq);
}

TEST_CASE("be experiment: gaps decrease and the exact mode matches monte carlo") {
    auto cfg = small_config("/tmp/rmplab_exp_test2");
    auto est = run_estimate(cfg);
    SampleBank bank(cfg, est);
    auto rep = run_be_experiment(cfg, est, bank);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows.front().gap > rep.rows.back().gap);
    CHECK(rep.slope < 0);
    for (auto& r : rep.rows) {
        CHECK(r.gap >= 0.0);
        CHECK(r.trunc_frac >= 0.0);
    }

    // exact mode at n = 12 provides the reference for monte carlo there
    ExperimentConfig exact_cfg = cfg;
    exact_cfg.n_grid = {12};
    exact_cfg.exact_mode = true;
    SampleBank exact_bank(exact_cfg, est);
    auto exact_rep = run_be_experiment(exact_cfg, est, exact_bank);

    ExperimentConfig mc_cfg = cfg;
    mc_cfg.n_grid = {12};
    mc_cfg.samples = 200000;
    SampleBank mc_bank(mc_cfg, est);
    auto mc_rep = run_be_experiment(mc_cfg, est, mc_bank);
    // both gaps target the same distribution; DKW at 2e5 samples
    CHECK(std::abs(exact_rep.rows[0].gap - mc_rep.rows[0].gap) <
          dkw_epsilon(200000, 0.01) + 1e-3);
}

TEST_CASE("degenerate variance aborts the be experiment with a verdict") {
    ExperimentConfig cfg = default_config();
    cfg.atoms = {2.0 * Mat::identity(2)};
    cfg.weights = {1.0};
    cfg.n_grid = {16};
    cfg.samples = 2000;
    cfg.estimate_n = 64;
    cfg.estimate_samples = 2000;
    cfg.out_dir = "/tmp/rmplab_exp_degenerate";
    auto est = run_estimate(cfg);
    CHECK(est.degenerate_variance);
    SampleBank bank(cfg, est);
    CHECK_THROWS_AS(run_be_experiment(cfg, est, bank), DegenerateModel);
    CHECK_THROWS_AS(run_llt_experiment(cfg, est, bank), DegenerateModel);
}

TEST_CASE("llt experiment: empty window gives zero on both sides") {
    auto cfg = small_config("/tmp/rmplab_exp_test3");
    cfg.n_grid = {16};
    cfg.a = 0.25;
    cfg.b = 0.25 + 1e-15;
    auto est = run_estimate(cfg);
    SampleBank bank(cfg, est);
    auto rep = run_llt_experiment(cfg, est, bank);
    for (auto& row : rep.rows) {
        CHECK(row.a_hat <= 4.0 * 1e-10);
        CHECK(row.target < 1e-10);
    }
}

TEST_CASE("llt sup deviation decreases along the n grid") {
    auto cfg = small_config("/tmp/rmplab_exp_test4");
    cfg.samples = 60000;
    auto est = run_estimate(cfg);
    SampleBank bank(cfg, est);
    auto rep = run_llt_experiment(cfg, est, bank);
    REQUIRE(rep.sup_dev.size() == 3);
    CHECK(rep.decreased);
}

TEST_CASE("llt exact mode at n = 12 agrees with monte carlo within binomial error") {
    auto cfg = small_config("/tmp/rmplab_exp_test5");
    cfg.n_grid = {12};
    auto est = run_estimate(cfg);

    ExperimentConfig exact_cfg = cfg;
    exact_cfg.exact_mode = true;
    SampleBank eb(exact_cfg, est);
    auto exact_rep = run_llt_experiment(exact_cfg, est, eb);

    ExperimentConfig mc = cfg;
    mc.samples = 400000;
    SampleBank mb(mc, est);
    auto mc_rep = run_llt_experiment(mc, est, mb);

    REQUIRE(exact_rep.rows.size() == mc_rep.rows.size());
    for (size_t i = 0; i < exact_rep.rows.size(); ++i) {
        const double p = exact_rep.rows[i].a_hat / std::sqrt(12.0);
        const double se = std::sqrt(12.0) * std::sqrt(std::max(p * (1 - p), 1e-9) / mc.samples);
        CHECK(std::abs(mc_rep.rows[i].a_hat - exact_rep.rows[i].a_hat) < 4 * se + 1e-6);
    }
}

TEST_CASE("ld experiment: a feasible epsilon yields negative fitted slopes") {
    // the cocycle fluctuations are tiny for the benchmark, so epsilon must
    // sit inside the band of sustainable deviations
    auto cfg = small_config("/tmp/rmplab_exp_test6");
    cfg.epsilon = 0.02;
    cfg.ld_n_grid = {8, 16, 24, 32, 48};
    cfg.ld_samples = 150000;
    // hyperplane through an attracting direction so the distance event fires
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    cfg.y_rep = {1.0, -golden};
    auto est = run_estimate(cfg);
    auto rep = run_ld_experiment(cfg, est);
    CHECK(rep.fit_sigma.points >= 3);
    CHECK(rep.sigma_negative);
    CHECK(rep.fit_dist.points >= 3);
    CHECK(rep.dist_negative);
    // frequencies decrease along the grid where observed
    for (size_t i = 1; i < rep.rows.size(); ++i)
        if (rep.rows[i].freq_sigma > 0)
            CHECK(rep.rows[i].freq_sigma <= rep.rows[i - 1].freq_sigma + 0.01);
}

TEST_CASE("ld experiment: epsilon above the sustainable band gives zero frequencies") {
    auto cfg = small_config("/tmp/rmplab_exp_test7");
    cfg.epsilon = 0.9;  // above log N_max - gamma
    cfg.ld_n_grid = {8, 16};
    cfg.ld_samples = 5000;
    auto est = run_estimate(cfg);
    auto rep = run_ld_experiment(cfg, est);
    for (auto& r : rep.rows) CHECK(r.freq_sigma == 0.0);
    CHECK_FALSE(rep.sigma_negative);  // no fit possible, reported not crashed
}

TEST_CASE("pipeline check: all three identities hold at n = 8") {
    auto cfg = small_config("/tmp/rmplab_exp_test8");
    auto est = run_estimate(cfg);
    auto rep = fn_pipeline_check(cfg, est);
    CHECK(rep.cf_pass);
    CHECK(rep.cf_max_err < 1e-6);
    CHECK(rep.sandwich_finite);
    CHECK(rep.window_pass);
    CHECK(rep.r_n_pass);
}

TEST_CASE("csv outputs are byte-identical across worker counts") {
    auto base = small_config("/tmp/rmplab_det_a");
    base.n_grid = {16, 64};
    base.samples = 20000;
    auto est = run_estimate(base);

    auto render = [&](int workers, const std::string& out) {
        ExperimentConfig cfg = base;
        cfg.workers = workers;
        cfg.out_dir = out;
        ensure_directory(out);
        SampleBank bank(cfg, est);
        auto be = run_be_experiment(cfg, est, bank);
        write_be_csv(out + "/be_gaps.csv", be);
        auto llt = run_llt_experiment(cfg, est, bank);
        write_llt_csv(out + "/llt.csv", llt);
        auto ld = run_ld_experiment(cfg, est);
        write_ld_csv(out + "/ld_rates.csv", ld, cfg.seed);
    };
    render(1, "/tmp/rmplab_det_a");
    render(3, "/tmp/rmplab_det_b");
    for (const char* name : {"be_gaps.csv", "llt.csv", "ld_rates.csv"}) {
        CHECK(slurp(std::string("/tmp/rmplab_det_a/") + name) ==
              slurp(std::string("/tmp/rmplab_det_b/") + name));
    }
}

TEST_CASE("report merges whatever CSVs exist") {
    auto cfg = small_config("/tmp/rmplab_exp_report");
    cfg.n_grid = {16, 64};
    auto est = run_estimate(cfg);
    SampleBank bank(cfg, est);
    auto be = run_be_experiment(cfg, est, bank);
    write_be_csv(cfg.out_dir + "/be_gaps.csv", be);
    const std::string text = merge_report(cfg.out_dir);
    CHECK(text.find("berry-esseen") != std::string::npos);
    CHECK(text.find("fitted log-log slope") != std::string::npos);
    CHECK(slurp(cfg.out_dir + "/report.txt") == text);
}
