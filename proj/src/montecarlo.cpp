#include "rmplab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <thread>

#include "rmplab/rng.hpp"

namespace rmp {

namespace {

// Longest run of unnormalized steps that provably stays inside the double
// range: each step scales the carried vector by at most max N(g), and the
// squared norm must stay below exp(709).
int renorm_block(const MatrixMeasure& mu) {
    const double l = std::log(std::max(1.0 + 1e-12, mu.max_big_n()));
    const double b = 300.0 / l;
    return static_cast<int>(std::clamp(b, 1.0, 512.0));
}

struct PathResult {
    double sigma;
    Vec end;  // unit, not yet canonical
};

PathResult simulate_one(const MatrixMeasure& mu, const Vec& x0, long n, SplitMix64& rng,
                        int block) {
    const int d = static_cast<int>(x0.size());
    Vec v = x0, w(d);
    double sigma = 0.0;
    int since_renorm = 0;
    for (long k = 0; k < n; ++k) {
        const int a = mu.sample_atom(rng.uniform01());
        const Mat& g = mu.atom(a).matrix();
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += g(i, j) * v[j];
            w[i] = s;
        }
        std::swap(v, w);
        if (++since_renorm >= block) {
            const double nv = norm2(v);
            sigma += std::log(nv);
            for (double& c : v) c /= nv;
            since_renorm = 0;
        }
    }
    const double nv = norm2(v);
    sigma += std::log(nv);
    for (double& c : v) c /= nv;
    return {sigma, std::move(v)};
}

}  // namespace

std::vector<PathFunctionals> run_paths(const MatrixMeasure& mu, const ProjPoint& x,
                                       const DualPoint& y, long n, long samples, uint64_t seed,
                                       int workers, std::optional<double> center_gamma) {
    if (n < 1) throw std::invalid_argument("run_paths: n must be >= 1");
    if (samples < 1) throw std::invalid_argument("run_paths: samples must be >= 1");
    if (x.dim() != mu.dim() || y.dim() != mu.dim())
        throw std::invalid_argument("run_paths: x/y dimension mismatch");
    if (workers <= 0)
        workers = std::max(1u, std::thread::hardware_concurrency());

    const int block = renorm_block(mu);
    const double center = center_gamma ? *center_gamma * static_cast<double>(n) : 0.0;
    std::vector<PathFunctionals> out(static_cast<size_t>(samples));

    auto run_range = [&](long lo, long hi) {
        for (long p = lo; p < hi; ++p) {
            SplitMix64 rng = path_rng(seed, static_cast<uint64_t>(p));
            PathResult r = simulate_one(mu, x.rep(), n, rng, block);
            PathFunctionals& f = out[static_cast<size_t>(p)];
            f.end_point = ProjPoint(std::move(r.end));
            const double pairing = dual_pairing(f.end_point, y);
            f.sigma = r.sigma - center;
            f.log_dist = pairing == 0.0 ? kNegInf : std::log(pairing);
            f.coeff_log = f.sigma + f.log_dist;
        }
    };

    if (workers == 1 || samples < 256) {
        run_range(0, samples);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (samples + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const long lo = w * chunk;
            const long hi = std::min<long>(samples, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& t : pool) t.join();
    }
    return out;
}

namespace {

void enumerate_rec(const MatrixMeasure& mu, const Vec& v, double sigma, double weight, int depth,
                   const DualPoint& y, double center,
                   std::vector<std::pair<PathFunctionals, double>>& out) {
    if (depth == 0) {
        PathFunctionals f;
        Vec u = v;
        const double nv = norm2(u);
        for (double& c : u) c /= nv;
        f.end_point = ProjPoint(std::move(u));
        const double pairing = dual_pairing(f.end_point, y);
        f.sigma = sigma + std::log(nv) - center;
        f.log_dist = pairing == 0.0 ? kNegInf : std::log(pairing);
        f.coeff_log = f.sigma + f.log_dist;
        out.emplace_back(std::move(f), weight);
        return;
    }
    const int d = static_cast<int>(v.size());
    for (int a = 0; a < mu.atom_count(); ++a) {
        const Mat& g = mu.atom(a).matrix();
        Vec w(d);
        for (int i = 0; i < d; ++i) {
            double s = 0.0;
            for (int j = 0; j < d; ++j) s += g(i, j) * v[j];
            w[i] = s;
        }
        double s2 = sigma;
        const double nw = norm2(w);
        // renormalize at every level: depth <= 24 keeps this cheap
        s2 += std::log(nw);
        for (double& c : w) c /= nw;
        enumerate_rec(mu, w, s2, weight * mu.weight(a), depth - 1, y, center, out);
    }
}

}  // namespace

std::vector<std::pair<PathFunctionals, double>> exact_functionals(const MatrixMeasure& mu,
                                                                  const ProjPoint& x,
                                                                  const DualPoint& y, int n,
                                                                  std::optional<double>
                                                                      center_gamma) {
    const uint64_t count = enumeration_size(mu, n);
    std::vector<std::pair<PathFunctionals, double>> out;
    out.reserve(count);
    const double center = center_gamma ? *center_gamma * n : 0.0;
    enumerate_rec(mu, x.rep(), 0.0, 1.0, n, y, center, out);
    return out;
}

EmpiricalCDF EmpiricalCDF::from_samples(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("EmpiricalCDF: empty sample");
    EmpiricalCDF e;
    std::sort(values.begin(), values.end());
    e.values_ = std::move(values);
    return e;
}

EmpiricalCDF EmpiricalCDF::from_weighted(std::vector<std::pair<double, double>> atoms) {
    if (atoms.empty()) throw std::invalid_argument("EmpiricalCDF: empty sample");
    std::sort(atoms.begin(), atoms.end());
    EmpiricalCDF e;
    e.values_.reserve(atoms.size());
    e.cum_.reserve(atoms.size());
    double total = 0.0;
    for (const auto& [v, w] : atoms) total += w;
    double acc = 0.0;
    for (const auto& [v, w] : atoms) {
        acc += w;
        e.values_.push_back(v);
        e.cum_.push_back(acc / total);
    }
    e.cum_.back() = 1.0;
    return e;
}

double EmpiricalCDF::query(double b) const {
    const auto it = std::upper_bound(values_.begin(), values_.end(), b);
    const size_t idx = static_cast<size_t>(it - values_.begin());
    if (idx == 0) return 0.0;
    if (cum_.empty()) return static_cast<double>(idx) / static_cast<double>(values_.size());
    return cum_[idx - 1];
}

double kolmogorov_distance(const EmpiricalCDF& f, const EmpiricalCDF& g) {
    double sup = 0.0;
    for (const auto* cdf : {&f, &g}) {
        const auto& vals = cdf->values();
        for (size_t i = 0; i < vals.size(); ++i) {
            if (i > 0 && vals[i] == vals[i - 1]) continue;
            const double v = vals[i];
            sup = std::max(sup, std::abs(f.query(v) - g.query(v)));
            // the gap just below a jump point matters as much as the jump itself
            const double vm = std::nextafter(v, -std::numeric_limits<double>::infinity());
            sup = std::max(sup, std::abs(f.query(vm) - g.query(vm)));
        }
    }
    return sup;
}

double dkw_epsilon(size_t m, double alpha) {
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(m)));
}

void write_samples_csv(const std::string& path, const std::vector<PathFunctionals>& rows) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(fp, "path_index,sigma,log_dist,coeff_log\n");
    for (size_t i = 0; i < rows.size(); ++i)
        std::fprintf(fp, "%zu,%.17g,%.17g,%.17g\n", i, rows[i].sigma, rows[i].log_dist,
                     rows[i].coeff_log);
    std::fclose(fp);
}

}  // namespace rmp
