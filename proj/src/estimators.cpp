#include "rmplab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "rmplab/rng.hpp"

namespace rmp {

namespace {

ProjPoint default_start(int d) {
    Vec v(d, 0.0);
    v[0] = 1.0;
    return ProjPoint(std::move(v));
}

DualPoint default_dual(int d) {
    Vec f(d, 0.0);
    f[0] = 1.0;
    return DualPoint(std::move(f));
}

}  // namespace

LyapunovEstimate estimate_lyapunov(const MatrixMeasure& mu, long n, long samples, uint64_t seed,
                                   int workers, std::optional<ProjPoint> x0) {
    const ProjPoint x = x0 ? *x0 : default_start(mu.dim());
    const DualPoint y = default_dual(mu.dim());
    auto rows = run_paths(mu, x, y, n, samples, seed, workers);

    double mean = 0.0;
    for (const auto& r : rows) mean += r.sigma;
    mean /= static_cast<double>(samples);
    double var = 0.0;
    for (const auto& r : rows) var += (r.sigma - mean) * (r.sigma - mean);
    var = samples > 1 ? var / static_cast<double>(samples - 1) : 0.0;

    LyapunovEstimate est;
    est.gamma_hat = mean / static_cast<double>(n);
    est.std_error = std::sqrt(var / static_cast<double>(samples)) / static_cast<double>(n);
    est.n_used = n;
    est.samples_used = samples;
    est.seed = seed;
    est.substitution_bias_bound = std::log(std::sqrt(static_cast<double>(mu.dim()))) /
                                  static_cast<double>(n);
    return est;
}

VarianceEstimate estimate_variance_clt(const MatrixMeasure& mu, long n, long samples,
                                       uint64_t seed, double gamma_hat, int workers,
                                       std::optional<ProjPoint> x0) {
    const ProjPoint x = x0 ? *x0 : default_start(mu.dim());
    const DualPoint y = default_dual(mu.dim());
    auto rows = run_paths(mu, x, y, n, samples, seed, workers, gamma_hat);

    double mean = 0.0;
    for (const auto& r : rows) mean += r.sigma;
    mean /= static_cast<double>(samples);
    double var = 0.0;
    for (const auto& r : rows) var += (r.sigma - mean) * (r.sigma - mean);
    var = samples > 1 ? var / static_cast<double>(samples - 1) : 0.0;

    VarianceEstimate est;
    est.method = "clt-empirical";
    est.rho_sq_hat = var / static_cast<double>(n);
    // asymptotic normality of the sample variance: sd(s^2) ~ s^2 sqrt(2/(m-1))
    est.std_error = est.rho_sq_hat * std::sqrt(2.0 / std::max<long>(1, samples - 1));
    est.degenerate = !(est.rho_sq_hat > 1e-12);
    return est;
}

StationaryCloud estimate_stationary(const MatrixMeasure& mu, long burn_in, long chain_length,
                                    uint64_t seed, int workers, int chains,
                                    std::optional<ProjPoint> x0) {
    if (chain_length < 1) throw std::invalid_argument("estimate_stationary: empty chain");
    chains = static_cast<int>(std::max<long>(1, std::min<long>(chains, chain_length)));
    if (workers <= 0) workers = std::max(1u, std::thread::hardware_concurrency());

    const ProjPoint start = x0 ? *x0 : default_start(mu.dim());
    const long per_chain = (chain_length + chains - 1) / chains;

    std::vector<std::vector<ProjPoint>> buckets(static_cast<size_t>(chains));
    auto run_chain = [&](int c) {
        SplitMix64 rng = path_rng(derive_seed(seed, 0xC0DE), static_cast<uint64_t>(c));
        Vec v = start.rep();
        const int d = mu.dim();
        Vec w(d);
        auto step = [&]() {
            const Mat& g = mu.atom(mu.sample_atom(rng.uniform01())).matrix();
            for (int i = 0; i < d; ++i) {
                double s = 0.0;
                for (int j = 0; j < d; ++j) s += g(i, j) * v[j];
                w[i] = s;
            }
            std::swap(v, w);
            const double nv = norm2(v);
            for (double& t : v) t /= nv;
        };
        for (long k = 0; k < burn_in; ++k) step();
        auto& bucket = buckets[static_cast<size_t>(c)];
        bucket.reserve(static_cast<size_t>(per_chain));
        for (long k = 0; k < per_chain; ++k) {
            step();
            bucket.emplace_back(v);
        }
    };

    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(workers, chains); ++w)
        pool.emplace_back([&, w] {
            for (int c = w; c < chains; c += std::min(workers, chains)) run_chain(c);
        });
    for (auto& t : pool) t.join();

    StationaryCloud cloud;
    cloud.burn_in = burn_in;
    for (auto& b : buckets)
        for (auto& p : b) cloud.points.push_back(std::move(p));
    if (static_cast<long>(cloud.points.size()) > chain_length)
        cloud.points.resize(static_cast<size_t>(chain_length));
    cloud.chain_length = static_cast<long>(cloud.points.size());
    cloud.weights.assign(cloud.points.size(), 1.0 / static_cast<double>(cloud.points.size()));
    return cloud;
}

RegularityFit regularity_exponent(const StationaryCloud& cloud, const DualPoint& y,
                                  const std::vector<double>& r_grid) {
    RegularityFit fit;
    if (cloud.points.empty()) return fit;

    std::vector<double> dists;
    dists.reserve(cloud.points.size());
    for (const auto& p : cloud.points) dists.push_back(dual_pairing(p, y));
    std::sort(dists.begin(), dists.end());

    std::vector<double> lx, ly;
    for (double r : r_grid) {
        if (!(r > 0.0 && r <= 1.0)) continue;
        const auto it = std::lower_bound(dists.begin(), dists.end(), r);
        const long count = static_cast<long>(it - dists.begin());
        if (count < 50) continue;
        lx.push_back(std::log(r));
        ly.push_back(std::log(static_cast<double>(count) /
                              static_cast<double>(dists.size())));
    }
    if (lx.size() < 2) return fit;  // "no fit"

    const LineFit lf = fit_line(lx, ly);
    fit.ok = true;
    fit.eta_hat = lf.slope;
    fit.c_hat = lf.intercept;
    fit.radii_used = lf.points;
    return fit;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    const size_t m = x.size();
    if (m < 2 || y.size() != m) return f;
    double sx = 0, sy = 0;
    for (size_t i = 0; i < m; ++i) sx += x[i], sy += y[i];
    const double mx = sx / m, my = sy / m;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < m; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) return f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0;
    for (size_t i = 0; i < m; ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        rss += e * e;
    }
    f.slope_se = m > 2 ? std::sqrt(rss / (m - 2) / sxx) : 0.0;
    f.points = static_cast<int>(m);
    return f;
}

void EstimateCache::write(const std::string& path) const {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(fp, "gamma_hat = %.17g +- %.17g\n", gamma, gamma_err);
    std::fprintf(fp, "rho_sq_hat = %.17g +- %.17g\n", rho_sq, rho_sq_err);
    std::fprintf(fp, "n_used = %ld +- 0\n", n_used);
    std::fprintf(fp, "samples_used = %ld +- 0\n", samples_used);
    std::fprintf(fp, "seed = %llu +- 0\n", static_cast<unsigned long long>(seed));
    std::fprintf(fp, "degenerate_variance = %d +- 0\n", degenerate_variance ? 1 : 0);
    std::fclose(fp);
}

EstimateCache EstimateCache::read(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("estimate cache '" + path +
                                 "' not found; run the `estimate` subcommand first");
    EstimateCache c;
    std::string line;
    bool saw_gamma = false, saw_rho = false;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string name, eq, value, pm, err;
        if (!(ss >> name >> eq >> value)) continue;
        ss >> pm >> err;
        if (err.empty()) err = "0";
        if (name == "gamma_hat") c.gamma = std::stod(value), c.gamma_err = std::stod(err),
                                 saw_gamma = true;
        else if (name == "rho_sq_hat") c.rho_sq = std::stod(value),
                                       c.rho_sq_err = std::stod(err), saw_rho = true;
        else if (name == "n_used") c.n_used = std::stol(value);
        else if (name == "samples_used") c.samples_used = std::stol(value);
        else if (name == "seed") c.seed = std::stoull(value);
        else if (name == "degenerate_variance") c.degenerate_variance = value != "0";
    }
    if (!saw_gamma || !saw_rho)
        throw std::runtime_error("estimate cache '" + path +
                                 "' is incomplete; rerun the `estimate` subcommand");
    return c;
}

}  // namespace rmp
