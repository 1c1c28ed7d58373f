#include "rmplab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rmplab/rng.hpp"

namespace rmp {

namespace {

constexpr double kPi = 3.14159265358979323846;

// small-sample one-sided 95% t quantiles by residual degrees of freedom
double t95(int df) {
    static const double table[] = {6.314, 2.920, 2.353, 2.132, 2.015, 1.943, 1.895, 1.860};
    if (df < 1) return 6.314;
    if (df <= 8) return table[df - 1];
    return 1.70;
}

}  // namespace

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw std::runtime_error("cannot create directory '" + path + "': " + ec.message());
}

EstimateCache run_estimate(const ExperimentConfig& cfg) {
    const MatrixMeasure mu = cfg.measure();
    const ProjPoint x = cfg.x();

    const long n_full = cfg.estimate_n;
    const long n_half = std::max<long>(2, n_full / 2);
    const auto est_full = estimate_lyapunov(mu, n_full, cfg.estimate_samples,
                                            derive_seed(cfg.seed, 101), cfg.workers, x);
    const auto est_half = estimate_lyapunov(mu, n_half, cfg.estimate_samples,
                                            derive_seed(cfg.seed, 102), cfg.workers, x);

    EstimateCache cache;
    // Richardson over {n/2, n}: the O(1/n) start-point constant cancels
    cache.gamma = 2.0 * est_full.gamma_hat - est_half.gamma_hat;
    cache.gamma_err = std::sqrt(4.0 * est_full.std_error * est_full.std_error +
                                est_half.std_error * est_half.std_error);
    const auto var = estimate_variance_clt(mu, n_full, cfg.estimate_samples,
                                           derive_seed(cfg.seed, 103), cache.gamma, cfg.workers,
                                           x);
    cache.rho_sq = var.rho_sq_hat;
    cache.rho_sq_err = var.std_error;
    cache.degenerate_variance = var.degenerate;
    cache.n_used = n_full;
    cache.samples_used = cfg.estimate_samples;
    cache.seed = cfg.seed;

    ensure_directory(cfg.out_dir);
    cache.write(cfg.out_dir + "/estimates.txt");
    return cache;
}

SampleBank::SampleBank(const ExperimentConfig& cfg, const EstimateCache& est)
    : cfg_(cfg), est_(est), mu_(cfg.measure()) {}

const SampleBank::PerN& SampleBank::get(long n) {
    auto it = cache_.find(n);
    if (it != cache_.end()) return it->second;

    PerN per;
    const double trunc_at = -cfg_.A * std::log(static_cast<double>(n));
    bool exact_feasible = false;
    if (cfg_.exact_mode) {
        try {
            enumeration_size(mu_, static_cast<int>(n));
            exact_feasible = true;
        } catch (const std::exception&) {
            exact_feasible = false;
        }
    }

    if (exact_feasible) {
        auto atoms = exact_functionals(mu_, cfg_.x(), cfg_.y(), static_cast<int>(n), est_.gamma);
        std::vector<std::pair<double, double>> weighted;
        weighted.reserve(atoms.size());
        double trunc_mass = 0, vanish_mass = 0;
        for (auto& [f, w] : atoms) {
            weighted.emplace_back(f.coeff_log, w);
            if (f.log_dist <= trunc_at) trunc_mass += w;
            if (f.log_dist == kNegInf) vanish_mass += w;
        }
        std::sort(weighted.begin(), weighted.end());
        per.exact = true;
        per.samples = static_cast<long>(weighted.size());
        per.coeff_sorted.reserve(weighted.size());
        per.weights_cum.reserve(weighted.size());
        double acc = 0;
        for (auto& [v, w] : weighted) {
            per.coeff_sorted.push_back(v);
            acc += w;
            per.weights_cum.push_back(acc);
        }
        if (!per.weights_cum.empty()) per.weights_cum.back() = 1.0;
        per.trunc_count = static_cast<long>(std::llround(trunc_mass * weighted.size()));
        per.vanished = static_cast<long>(std::llround(vanish_mass * weighted.size()));
    } else {
        const uint64_t sub_seed = derive_seed(cfg_.seed, static_cast<uint64_t>(n));
        auto rows = run_paths(mu_, cfg_.x(), cfg_.y(), n, cfg_.samples, sub_seed, cfg_.workers,
                              est_.gamma);
        per.samples = cfg_.samples;
        per.coeff_sorted.reserve(rows.size());
        for (auto& r : rows) {
            per.coeff_sorted.push_back(r.coeff_log);
            if (r.log_dist <= trunc_at) ++per.trunc_count;
            if (r.log_dist == kNegInf) ++per.vanished;
        }
        if (cfg_.dump_samples) {
            ensure_directory(cfg_.out_dir);
            write_samples_csv(cfg_.out_dir + "/samples_n" + std::to_string(n) + ".csv", rows);
        }
        std::sort(per.coeff_sorted.begin(), per.coeff_sorted.end());
    }
    return cache_.emplace(n, std::move(per)).first->second;
}

namespace {

// empirical CDF value P(X <= b) over the bank entry
double bank_cdf(const SampleBank::PerN& per, double b) {
    const auto it = std::upper_bound(per.coeff_sorted.begin(), per.coeff_sorted.end(), b);
    const size_t idx = static_cast<size_t>(it - per.coeff_sorted.begin());
    if (idx == 0) return 0.0;
    if (!per.weights_cum.empty()) return per.weights_cum[idx - 1];
    return static_cast<double>(idx) / static_cast<double>(per.coeff_sorted.size());
}

}  // namespace

BEReport run_be_experiment(const ExperimentConfig& cfg, const EstimateCache& est,
                           SampleBank& bank) {
    if (est.degenerate_variance || !(est.rho_sq > 0))
        throw DegenerateModel(
            "Berry-Esseen experiment aborted: the variance estimate is degenerate (rho^2 = " +
            std::to_string(est.rho_sq) + "); the model has no CLT fluctuation scale");
    const double rho = std::sqrt(est.rho_sq);

    BEReport rep;
    rep.rho_used = rho;
    rep.gamma_used = est.gamma;
    std::vector<double> log_n, log_gap;
    for (long n : cfg.n_grid) {
        const auto& per = bank.get(n);
        const double sqrt_n = std::sqrt(static_cast<double>(n));
        double gap = 0;
        const int grid_n = 10000;
        for (int i = 0; i <= grid_n; ++i) {
            const double b = -6.0 * rho + 12.0 * rho * i / grid_n;
            const double fhat = bank_cdf(per, b * sqrt_n);
            gap = std::max(gap, std::abs(fhat - gaussian_cdf(b, rho)));
        }
        BERow row;
        row.n = n;
        row.gap = gap;
        row.trunc_frac = static_cast<double>(per.trunc_count) / per.samples;
        row.samples = per.samples;
        row.seed = cfg.seed;
        rep.rows.push_back(row);
        log_n.push_back(std::log(static_cast<double>(n)));
        log_gap.push_back(std::log(std::max(gap, 1e-300)));
    }
    const LineFit fit = fit_line(log_n, log_gap);
    rep.slope = fit.slope;
    rep.slope_se = fit.slope_se;
    rep.intercept = fit.intercept;
    return rep;
}

LLTReport run_llt_experiment(const ExperimentConfig& cfg, const EstimateCache& est,
                             SampleBank& bank) {
    if (est.degenerate_variance || !(est.rho_sq > 0))
        throw DegenerateModel(
            "local limit experiment aborted: the variance estimate is degenerate");
    const double rho = std::sqrt(est.rho_sq);

    LLTReport rep;
    for (long n : cfg.n_grid) {
        const auto& per = bank.get(n);
        const double sqrt_n = std::sqrt(static_cast<double>(n));
        const double t_span = 3.0 * rho * sqrt_n;
        double sup_dev = 0;
        for (int i = 0; i < cfg.t_points; ++i) {
            const double t = -t_span + 2.0 * t_span * i / (cfg.t_points - 1);
            const double p = bank_cdf(per, cfg.b - t) - bank_cdf(per, cfg.a - t);
            LLTRow row;
            row.n = n;
            row.t = t;
            row.a_hat = sqrt_n * p;
            row.target = std::exp(-t * t / (2.0 * est.rho_sq * n)) * (cfg.b - cfg.a) /
                         (std::sqrt(2.0 * kPi) * rho);
            row.abs_dev = std::abs(row.a_hat - row.target);
            sup_dev = std::max(sup_dev, row.abs_dev);
            rep.rows.push_back(row);
        }
        rep.sup_dev.emplace_back(n, sup_dev);
    }
    rep.decreased = rep.sup_dev.size() >= 2 &&
                    rep.sup_dev.back().second < rep.sup_dev.front().second;
    return rep;
}

LDReport run_ld_experiment(const ExperimentConfig& cfg, const EstimateCache& est) {
    const MatrixMeasure mu = cfg.measure();
    LDReport rep;
    rep.epsilon = cfg.epsilon;

    std::vector<double> xs_s, ys_s, xs_d, ys_d;
    for (long n : cfg.ld_n_grid) {
        const uint64_t sub_seed = derive_seed(cfg.seed, 0x1D00 + static_cast<uint64_t>(n));
        auto rows = run_paths(mu, cfg.x(), cfg.y(), n, cfg.ld_samples, sub_seed, cfg.workers,
                              est.gamma);
        long hits_sigma = 0, hits_dist = 0;
        for (auto& r : rows) {
            if (std::abs(r.sigma) >= cfg.epsilon * n) ++hits_sigma;
            if (r.log_dist <= -cfg.epsilon * n) ++hits_dist;
        }
        LDRow row;
        row.n = n;
        row.freq_sigma = static_cast<double>(hits_sigma) / cfg.ld_samples;
        row.freq_dist = static_cast<double>(hits_dist) / cfg.ld_samples;
        row.samples = cfg.ld_samples;
        rep.rows.push_back(row);
        if (hits_sigma >= 5) {
            xs_s.push_back(static_cast<double>(n));
            ys_s.push_back(std::log(row.freq_sigma));
        }
        if (hits_dist >= 5) {
            xs_d.push_back(static_cast<double>(n));
            ys_d.push_back(std::log(row.freq_dist));
        }
    }
    rep.fit_sigma = fit_line(xs_s, ys_s);
    rep.fit_dist = fit_line(xs_d, ys_d);
    rep.sigma_negative = rep.fit_sigma.points >= 3 &&
                         rep.fit_sigma.slope +
                                 t95(rep.fit_sigma.points - 2) * rep.fit_sigma.slope_se <
                             0.0;
    rep.dist_negative = rep.fit_dist.points >= 3 &&
                        rep.fit_dist.slope +
                                t95(rep.fit_dist.points - 2) * rep.fit_dist.slope_se <
                            0.0;
    return rep;
}

PipelineReport fn_pipeline_check(const ExperimentConfig& cfg, const EstimateCache& est) {
    PipelineReport rep;
    const int n = cfg.pipeline_n;
    rep.n = n;
    const MatrixMeasure mu = cfg.measure();
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const double log_n = std::log(static_cast<double>(n));

    auto atoms = exact_functionals(mu, cfg.x(), cfg.y(), n, est.gamma);

    // ---- (i) conjugate characteristic function of F_n, two routes -----
    // unit-scale partition (zeta = 1) with cap comfortably above A log n
    const int cap1 = static_cast<int>(std::ceil(cfg.A * log_n)) + 2;
    PartitionOfUnity part1 = build_partition(cfg.y(), 1.0, cap1);
    PhiAggregates agg1 = phi_aggregates(part1, n, cfg.A, +1);

    std::vector<std::pair<double, double>> fn_atoms;
    fn_atoms.reserve(atoms.size() * 3);
    for (auto& [f, w] : atoms) {
        const double ld = f.log_dist;
        for (int k = 0; k <= agg1.k_max(); ++k) {
            const double c = part1.chi_from_logdist(k, ld);
            if (c > 0) fn_atoms.emplace_back((f.sigma - k) / sqrt_n, w * c);
        }
        const double star = agg1.phi_star_from_logdist(ld);
        if (star > 0) fn_atoms.emplace_back(f.sigma / sqrt_n, w * star);
    }

    rep.cf_max_err = 0;
    for (int i = 0; i < 50; ++i) {
        const double xi = -5.0 + 10.0 * i / 49.0;
        const std::complex<double> direct = conjugate_cf(fn_atoms, xi);
        std::complex<double> op_route(0, 0);
        for (auto& [f, w] : atoms) {
            const std::complex<double> inner =
                agg1.phi_xi_from_logdist(f.log_dist, xi) +
                agg1.phi_star_from_logdist(f.log_dist);
            op_route += w * std::exp(std::complex<double>(0, -xi * f.sigma / sqrt_n)) * inner;
        }
        const double err = std::abs(direct - op_route);
        if (err > rep.cf_max_err) {
            rep.cf_max_err = err;
            rep.cf_worst_xi = xi;
        }
    }
    rep.cf_pass = rep.cf_max_err <= 1e-6;

    // ---- (ii) sandwich of the truncated law ---------------------------
    auto fn_cdf = [&](double b) {
        double s = 0;
        for (auto& [v, w] : fn_atoms)
            if (v <= b) s += w;
        return s;
    };
    auto l_n = [&](double b) {
        double s = 0;
        for (auto& [f, w] : atoms)
            if (f.log_dist > -cfg.A * log_n && (f.sigma + f.log_dist) / sqrt_n <= b) s += w;
        return s;
    };
    double worst = 0;
    for (int i = 0; i <= 400; ++i) {
        const double b = -4.0 + 8.0 * i / 400.0;
        const double ln_b = l_n(b);
        const double lo = fn_cdf(b - 1.0 / sqrt_n);
        const double hi = fn_cdf(b + 1.0 / sqrt_n);
        worst = std::max({worst, lo - ln_b, ln_b - hi});
    }
    rep.c_tilde = sqrt_n * worst;
    rep.sandwich_finite = std::isfinite(rep.c_tilde);

    // ---- (iii) window functionals: direct sums against Fourier route --
    const int cap2 = static_cast<int>(std::ceil(cfg.B * log_n / cfg.zeta)) + 2;
    PartitionOfUnity part2 = build_partition(cfg.y(), cfg.zeta, cap2);
    PhiAggregates agg2 = phi_aggregates(part2, n, cfg.B, -1);
    const WindowFunction psi = make_upper_window(cfg.a, cfg.b, cfg.zeta);
    const Approximants ap = approximants(psi, cfg.delta);
    const double band = 1.0 / (cfg.delta * cfg.delta);

    // Simpson quadrature of a smooth complex integrand over [-band, band]
    auto simpson_int = [&](auto&& f, int cells) {
        std::complex<double> acc(0, 0);
        const double h = 2.0 * band / cells;
        for (int i = 0; i < cells; ++i) {
            const double x0 = -band + i * h;
            acc += h / 6.0 * (f(x0) + 4.0 * f(x0 + h / 2) + f(x0 + h));
        }
        return acc;
    };

    rep.window_max_err = 0;
    for (double t : {0.0, 0.7}) {
        for (int k : {0, 1, 3}) {
            if (k > agg2.k_max()) continue;
            double direct = 0;
            for (auto& [f, w] : atoms)
                direct += w * ap.plus(f.sigma + t - k * cfg.zeta) *
                          part2.chi_from_logdist(k, f.log_dist);
            direct *= sqrt_n;

            auto integrand = [&](double xi) {
                std::complex<double> inner(0, 0);
                for (auto& [f, w] : atoms)
                    inner += w * std::exp(std::complex<double>(0, xi * f.sigma)) *
                             part2.chi_from_logdist(k, f.log_dist);
                return ap.plus.fourier(xi) *
                       std::exp(std::complex<double>(0, xi * (t - k * cfg.zeta))) * inner;
            };
            const std::complex<double> fourier = sqrt_n / (2 * kPi) * simpson_int(integrand, 8000);
            rep.window_max_err = std::max(rep.window_max_err, std::abs(fourier - direct));
        }
    }
    rep.window_pass = rep.window_max_err <= 1e-6;

    // aggregated R_n(t): sum of window terms against the Phi-form integral
    rep.r_n_max_err = 0;
    for (double t : {0.0, 0.5}) {
        double direct = 0;
        for (auto& [f, w] : atoms) {
            double inner = 0;
            for (int k = 0; k <= agg2.k_max(); ++k) {
                const double c = part2.chi_from_logdist(k, f.log_dist);
                if (c > 0) inner += ap.plus(f.sigma + t - k * cfg.zeta) * c;
            }
            inner += ap.plus(f.sigma + t) * agg2.phi_star_from_logdist(f.log_dist);
            direct += w * inner;
        }
        direct *= sqrt_n;

        auto integrand = [&](double xi) {
            std::complex<double> inner(0, 0);
            for (auto& [f, w] : atoms)
                inner += w * std::exp(std::complex<double>(0, xi * f.sigma)) *
                         (agg2.phi_xi_from_logdist(f.log_dist, xi * sqrt_n) +
                          agg2.phi_star_from_logdist(f.log_dist));
            return ap.plus.fourier(xi) * std::exp(std::complex<double>(0, xi * t)) * inner;
        };
        const std::complex<double> fourier = sqrt_n / (2 * kPi) * simpson_int(integrand, 8000);
        rep.r_n_max_err = std::max(rep.r_n_max_err, std::abs(fourier - direct));
    }
    rep.r_n_pass = rep.r_n_max_err <= 1e-6;
    return rep;
}

void write_be_csv(const std::string& path, const BEReport& rep) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(fp, "n,gap,trunc_frac,samples,seed\n");
    for (const auto& r : rep.rows)
        std::fprintf(fp, "%ld,%.17g,%.17g,%ld,%llu\n", r.n, r.gap, r.trunc_frac, r.samples,
                     static_cast<unsigned long long>(r.seed));
    std::fclose(fp);
}

void write_llt_csv(const std::string& path, const LLTReport& rep) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(fp, "n,t,a_hat,target,abs_dev\n");
    for (const auto& r : rep.rows)
        std::fprintf(fp, "%ld,%.17g,%.17g,%.17g,%.17g\n", r.n, r.t, r.a_hat, r.target,
                     r.abs_dev);
    std::fclose(fp);
}

void write_ld_csv(const std::string& path, const LDReport& rep, uint64_t seed) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(fp, "n,freq_sigma,freq_dist,samples,seed\n");
    for (const auto& r : rep.rows)
        std::fprintf(fp, "%ld,%.17g,%.17g,%ld,%llu\n", r.n, r.freq_sigma, r.freq_dist,
                     r.samples, static_cast<unsigned long long>(seed));
    std::fclose(fp);
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::vector<std::string>> rows;
    if (!in) return rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace

std::string merge_report(const std::string& out_dir) {
    std::ostringstream out;
    out << "experiment report\n=================\n";

    const std::string est_path = out_dir + "/estimates.txt";
    if (std::ifstream in{est_path}) {
        out << "\n[estimates]\n" << in.rdbuf();
    }

    auto be = read_csv(out_dir + "/be_gaps.csv");
    if (be.size() > 1) {
        out << "\n[berry-esseen]\n";
        std::vector<double> lx, ly;
        out << "    n        gap   trunc_frac\n";
        for (size_t i = 1; i < be.size(); ++i) {
            const double n = std::stod(be[i][0]), gap = std::stod(be[i][1]);
            out << "  " << be[i][0] << "  " << gap << "  " << be[i][2] << "\n";
            lx.push_back(std::log(n));
            ly.push_back(std::log(std::max(gap, 1e-300)));
        }
        const LineFit fit = fit_line(lx, ly);
        out << "fitted log-log slope = " << fit.slope << " +- " << fit.slope_se
            << " (CLT rate target -0.5)\n";
    }

    auto llt = read_csv(out_dir + "/llt.csv");
    if (llt.size() > 1) {
        out << "\n[local limit]\nsup_t |A_n(t) - target| per n:\n";
        std::map<long, double> sup;
        for (size_t i = 1; i < llt.size(); ++i) {
            const long n = std::stol(llt[i][0]);
            sup[n] = std::max(sup[n], std::stod(llt[i][4]));
        }
        for (auto& [n, d] : sup) out << "  n=" << n << "  sup_dev=" << d << "\n";
        if (sup.size() >= 2) {
            const double first = sup.begin()->second, last = sup.rbegin()->second;
            out << "decrease from first to last n: " << (last < first ? "yes" : "no") << "\n";
        }
    }

    auto ld = read_csv(out_dir + "/ld_rates.csv");
    if (ld.size() > 1) {
        out << "\n[large deviations]\n";
        std::vector<double> xs_s, ys_s, xs_d, ys_d;
        for (size_t i = 1; i < ld.size(); ++i) {
            const double n = std::stod(ld[i][0]);
            const double fs = std::stod(ld[i][1]), fd = std::stod(ld[i][2]);
            out << "  n=" << ld[i][0] << "  freq_sigma=" << fs << "  freq_dist=" << fd << "\n";
            if (fs > 0) {
                xs_s.push_back(n);
                ys_s.push_back(std::log(fs));
            }
            if (fd > 0) {
                xs_d.push_back(n);
                ys_d.push_back(std::log(fd));
            }
        }
        const LineFit fs = fit_line(xs_s, ys_s), fd = fit_line(xs_d, ys_d);
        out << "cocycle event decay slope: " << fs.slope << " +- " << fs.slope_se << "\n";
        out << "distance event decay slope: " << fd.slope << " +- " << fd.slope_se << "\n";
    }

    auto curve = read_csv(out_dir + "/lambda_curve.csv");
    if (curve.size() > 1) {
        out << "\n[spectral curve]\n"
            << "  " << curve.size() - 1 << " frequencies in lambda_curve.csv\n";
    }

    const std::string text = out.str();
    std::ofstream report(out_dir + "/report.txt");
    report << text;
    return text;
}

}  // namespace rmp
