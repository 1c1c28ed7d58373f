#include "rmplab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "rmplab/estimators.hpp"
#include "rmplab/rng.hpp"

namespace rmp {

namespace {

constexpr double kPi = 3.14159265358979323846;

double angle_of(const Vec& v) {
    double t = std::atan2(v[1], v[0]);
    if (t < 0) t += kPi;
    if (t >= kPi) t -= kPi;
    return t;
}

}  // namespace

OperatorGrid OperatorGrid::circle(int M) {
    if (M < 4) throw std::invalid_argument("OperatorGrid::circle: M must be >= 4");
    OperatorGrid g;
    g.dim = 2;
    g.resolution = M;
    g.exact = true;
    g.points.reserve(M);
    for (int j = 0; j < M; ++j) {
        const double t = kPi * j / M;
        g.points.emplace_back(Vec{std::cos(t), std::sin(t)});
    }
    return g;
}

OperatorGrid OperatorGrid::cloud(int dim, int M, uint64_t seed) {
    if (dim < 3) throw std::invalid_argument("OperatorGrid::cloud: use circle() for d = 2");
    OperatorGrid g;
    g.dim = dim;
    g.resolution = M;
    g.exact = false;

    // greedy max-min thinning of a larger random sample gives a
    // quasi-uniform cloud
    SplitMix64 rng(derive_seed(seed, 0x6151D));
    std::vector<ProjPoint> candidates;
    const int pool = 8 * M;
    candidates.reserve(pool);
    for (int i = 0; i < pool; ++i) {
        Vec v(dim);
        for (double& x : v) x = 2.0 * rng.uniform01() - 1.0;
        if (norm2(v) < 1e-6) {
            --i;
            continue;
        }
        candidates.emplace_back(std::move(v));
    }
    std::vector<double> min_dist(pool, 2.0);
    g.points.push_back(candidates[0]);
    int last = 0;
    for (int k = 1; k < M; ++k) {
        int best = -1;
        double best_d = -1.0;
        for (int i = 0; i < pool; ++i) {
            min_dist[i] = std::min(min_dist[i], proj_distance(candidates[i],
                                                              candidates[last]));
            if (min_dist[i] > best_d) {
                best_d = min_dist[i];
                best = i;
            }
        }
        g.points.push_back(candidates[best]);
        last = best;
    }
    return g;
}

TransferOperator::TransferOperator(const MatrixMeasure& mu, OperatorGrid grid, double re_bound)
    : grid_(std::move(grid)), re_bound_(re_bound), atoms_(mu.atom_count()) {
    if (grid_.dim != mu.dim())
        throw std::invalid_argument("TransferOperator: grid/measure dimension mismatch");
    const int M = grid_.size();
    atom_weight_.resize(atoms_);
    for (int a = 0; a < atoms_; ++a) atom_weight_[a] = mu.weight(a);

    sigma_.resize(static_cast<size_t>(M) * atoms_);
    stencil_ptr_.assign(static_cast<size_t>(M) * atoms_ + 1, 0);

    const double h = kPi / grid_.resolution;
    for (int j = 0; j < M; ++j) {
        for (int a = 0; a < atoms_; ++a) {
            const Vec img = matvec(mu.atom(a).matrix(), grid_.points[j].rep());
            const double nrm = norm2(img);
            sigma_[static_cast<size_t>(j) * atoms_ + a] = std::log(nrm);

            if (grid_.exact) {
                const double t = angle_of(img) / h;
                int i0 = static_cast<int>(std::floor(t));
                double frac = t - i0;
                i0 %= grid_.resolution;
                const int i1 = (i0 + 1) % grid_.resolution;
                stencil_idx_.push_back(i0);
                stencil_w_.push_back(1.0 - frac);
                stencil_idx_.push_back(i1);
                stencil_w_.push_back(frac);
            } else {
                // 4 nearest neighbours, inverse-distance weights
                Vec u = img;
                for (double& x : u) x /= nrm;
                ProjPoint p(std::move(u));
                std::vector<std::pair<double, int>> near;
                near.reserve(M);
                for (int i = 0; i < M; ++i)
                    near.emplace_back(proj_distance(p, grid_.points[i]), i);
                std::partial_sort(near.begin(), near.begin() + 4, near.end());
                if (near[0].first < 1e-9) {
                    stencil_idx_.push_back(near[0].second);
                    stencil_w_.push_back(1.0);
                } else {
                    double total = 0.0;
                    for (int s = 0; s < 4; ++s) total += 1.0 / near[s].first;
                    for (int s = 0; s < 4; ++s) {
                        stencil_idx_.push_back(near[s].second);
                        stencil_w_.push_back(1.0 / near[s].first / total);
                    }
                }
            }
            stencil_ptr_[static_cast<size_t>(j) * atoms_ + a + 1] =
                static_cast<int>(stencil_idx_.size());
        }
    }
}

TransferOperator::Applier TransferOperator::applier(std::complex<double> z) const {
    if (std::abs(z.real()) > re_bound_)
        throw std::invalid_argument("TransferOperator: |Re z| exceeds the configured bound " +
                                    std::to_string(re_bound_));
    Applier ap;
    ap.op = this;
    const size_t cells = sigma_.size();
    ap.twist.resize(cells);
    for (size_t c = 0; c < cells; ++c)
        ap.twist[c] = atom_weight_[c % atoms_] * std::exp(z * sigma_[c]);
    return ap;
}

CVec TransferOperator::Applier::operator()(const CVec& phi) const {
    const TransferOperator& o = *op;
    const int M = o.size();
    CVec out(static_cast<size_t>(M));
    for (int j = 0; j < M; ++j) {
        std::complex<double> acc(0.0, 0.0);
        for (int a = 0; a < o.atoms_; ++a) {
            const size_t cell = static_cast<size_t>(j) * o.atoms_ + a;
            std::complex<double> interp(0.0, 0.0);
            for (int e = o.stencil_ptr_[cell]; e < o.stencil_ptr_[cell + 1]; ++e)
                interp += o.stencil_w_[e] * phi[o.stencil_idx_[e]];
            acc += twist[cell] * interp;
        }
        out[j] = acc;
    }
    return out;
}

CVec TransferOperator::apply(std::complex<double> z, const CVec& phi) const {
    if (static_cast<int>(phi.size()) != size())
        throw std::invalid_argument("TransferOperator::apply: grid size mismatch");
    return applier(z)(phi);
}

Vec TransferOperator::stationary_vector(double tol, int max_iter) const {
    const int M = size();
    Vec m(static_cast<size_t>(M), 1.0 / M), next(static_cast<size_t>(M));
    for (int it = 0; it < max_iter; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int j = 0; j < M; ++j) {
            for (int a = 0; a < atoms_; ++a) {
                const size_t cell = static_cast<size_t>(j) * atoms_ + a;
                const double wj = m[j] * atom_weight_[a];
                for (int e = stencil_ptr_[cell]; e < stencil_ptr_[cell + 1]; ++e)
                    next[stencil_idx_[e]] += wj * stencil_w_[e];
            }
        }
        double total = 0.0, diff = 0.0;
        for (int i = 0; i < M; ++i) total += next[i];
        for (int i = 0; i < M; ++i) {
            next[i] /= total;
            diff = std::max(diff, std::abs(next[i] - m[i]));
        }
        std::swap(m, next);
        if (diff <= tol) break;
    }
    return m;
}

EigenPair leading_eigen(const TransferOperator& op, std::complex<double> z, double tol,
                        int max_iter, const CVec* warm_start) {
    const int M = op.size();
    const auto ap = op.applier(z);
    CVec phi = warm_start && static_cast<int>(warm_start->size()) == M
                   ? *warm_start
                   : CVec(static_cast<size_t>(M), {1.0, 0.0});

    std::complex<double> lambda(1.0, 0.0);
    double residual = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < max_iter; ++it) {
        const CVec next = ap(phi);
        std::complex<double> num(0, 0);
        double den = 0;
        for (int i = 0; i < M; ++i) {
            num += std::conj(phi[i]) * next[i];
            den += std::norm(phi[i]);
        }
        lambda = num / den;

        double sup_phi = 0, sup_res = 0;
        for (int i = 0; i < M; ++i) {
            sup_phi = std::max(sup_phi, std::abs(phi[i]));
            sup_res = std::max(sup_res, std::abs(next[i] - lambda * phi[i]));
        }
        residual = sup_res / sup_phi;

        double sup_next = 0;
        for (int i = 0; i < M; ++i) sup_next = std::max(sup_next, std::abs(next[i]));
        if (sup_next == 0.0) throw EigenFailure("power iteration collapsed to zero", residual, it);
        phi.assign(next.begin(), next.end());
        for (auto& c : phi) c /= sup_next;

        if (residual <= tol) break;
    }
    if (residual > tol)
        throw EigenFailure("power iteration did not reach tolerance " + std::to_string(tol) +
                               " (last residual " + std::to_string(residual) + ")",
                           residual, it);

    // normalize: sup-norm one, phase real-positive at the reference point
    double sup = 0;
    for (auto& c : phi) sup = std::max(sup, std::abs(c));
    for (auto& c : phi) c /= sup;
    int ref = 0;
    if (std::abs(phi[0]) < 0.1) {
        double best = 0;
        for (int i = 0; i < M; ++i)
            if (std::abs(phi[i]) > best) best = std::abs(phi[i]), ref = i;
    }
    const std::complex<double> rot = std::conj(phi[ref]) / std::abs(phi[ref]);
    for (auto& c : phi) c *= rot;

    return {lambda, std::move(phi), residual, it};
}

double spectral_gap_at_zero(const TransferOperator& op, int burn, int steps) {
    const int M = op.size();
    const auto ap = op.applier({0.0, 0.0});
    const Vec nu = op.stationary_vector();

    auto deflate = [&](const CVec& phi) {
        CVec out = ap(phi);
        std::complex<double> mass(0, 0);
        for (int i = 0; i < M; ++i) mass += nu[i] * phi[i];
        for (auto& c : out) c -= mass;
        return out;
    };

    SplitMix64 rng(0xD3F1A7Eull);
    CVec phi(static_cast<size_t>(M));
    for (auto& c : phi) c = {2.0 * rng.uniform01() - 1.0, 0.0};

    double log_growth = 0.0;
    int counted = 0;
    for (int k = 0; k < burn + steps; ++k) {
        CVec next = deflate(phi);
        double sup = 0;
        for (auto& c : next) sup = std::max(sup, std::abs(c));
        if (!(sup > 0) || !std::isfinite(sup))
            throw EigenFailure("gap estimate unavailable: deflated iteration degenerated", sup,
                               k);
        if (k >= burn) {
            log_growth += std::log(sup);
            ++counted;
        }
        phi = std::move(next);
        for (auto& c : phi) c /= sup;
    }
    return std::exp(log_growth / counted);
}

namespace {

// least squares for even/odd quartic models on the fit window
void fit_expansion(SpectralCurve& curve, double fit_window) {
    std::vector<double> xs;
    std::vector<std::complex<double>> ls;
    for (size_t i = 0; i < curve.xi.size(); ++i)
        if (std::abs(curve.xi[i]) <= fit_window && curve.xi[i] != 0.0) {
            xs.push_back(curve.xi[i]);
            ls.push_back(curve.lambda[i]);
        }
    if (xs.size() < 4) return;

    // Im lambda = b1 xi + b3 xi^3
    double a11 = 0, a12 = 0, a22 = 0, r1 = 0, r2 = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        a11 += x * x;
        a12 += x * x * x * x;
        a22 += x * x * x * x * x * x;
        r1 += x * ls[i].imag();
        r2 += x * x * x * ls[i].imag();
    }
    const double det_im = a11 * a22 - a12 * a12;
    const double b1 = (a22 * r1 - a12 * r2) / det_im;

    // Re lambda - 1 = a2 xi^2 + a4 xi^4
    double c11 = 0, c12 = 0, c22 = 0, q1 = 0, q2 = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double x2 = xs[i] * xs[i];
        c11 += x2 * x2;
        c12 += x2 * x2 * x2;
        c22 += x2 * x2 * x2 * x2;
        q1 += x2 * (ls[i].real() - 1.0);
        q2 += x2 * x2 * (ls[i].real() - 1.0);
    }
    const double det_re = c11 * c22 - c12 * c12;
    const double a2 = (c22 * q1 - c12 * q2) / det_re;

    curve.fitted_gamma = b1;
    curve.fitted_rho_sq = -2.0 * a2 - b1 * b1;
}

}  // namespace

SpectralCurve lambda_curve(const TransferOperator& op, const std::vector<double>& xi_grid,
                           double fit_window, bool with_gap) {
    SpectralCurve curve;
    curve.approximate = op.approximate();
    curve.xi = xi_grid;
    std::sort(curve.xi.begin(), curve.xi.end());
    curve.lambda.resize(curve.xi.size());
    curve.residual.resize(curve.xi.size());
    curve.eigenfunctions.resize(curve.xi.size());

    // march outward from 0 in both directions so warm starts stay close
    std::vector<size_t> order;
    std::vector<size_t> pos, neg;
    for (size_t i = 0; i < curve.xi.size(); ++i)
        (curve.xi[i] >= 0 ? pos : neg).push_back(i);
    std::sort(pos.begin(), pos.end(), [&](size_t a, size_t b) { return curve.xi[a] < curve.xi[b]; });
    std::sort(neg.begin(), neg.end(), [&](size_t a, size_t b) { return curve.xi[a] > curve.xi[b]; });
    order.insert(order.end(), pos.begin(), pos.end());
    order.insert(order.end(), neg.begin(), neg.end());

    const CVec* warm = nullptr;
    for (size_t k = 0; k < order.size(); ++k) {
        const size_t i = order[k];
        if (k == 0 || (k > 0 && curve.xi[order[k - 1]] * curve.xi[i] < 0)) warm = nullptr;
        EigenPair pair = leading_eigen(op, {0.0, curve.xi[i]}, 1e-10, 20000, warm);
        curve.lambda[i] = pair.lambda;
        curve.residual[i] = pair.residual;
        curve.eigenfunctions[i] = std::move(pair.phi);
        warm = &curve.eigenfunctions[i];
    }

    fit_expansion(curve, fit_window);
    if (with_gap) curve.gap_at_zero = spectral_gap_at_zero(op);
    return curve;
}

LambdaCheckReport lambda_estimates_check(const TransferOperator& op, double gamma, double rho_sq,
                                         const std::vector<long>& n_list) {
    LambdaCheckReport report;
    if (!(rho_sq > 0)) {
        report.degenerate = true;
        report.xi0_hat = 0.0;
        return report;
    }
    report.xi0_hat = std::numeric_limits<double>::infinity();

    for (long n : n_list) {
        LambdaCheckRow row{n, 0.0, 0.0, true};
        const double sqrt_n = std::sqrt(static_cast<double>(n));

        // cache lambda at the needed arguments; warm-start along the sweep
        const CVec* warm = nullptr;
        CVec last;
        auto lambda_at = [&](double zeta) {
            EigenPair p = leading_eigen(op, {0.0, zeta}, 1e-11, 40000, warm);
            last = std::move(p.phi);
            warm = &last;
            return p.lambda;
        };

        // bound 1: |lambda_{i xi / sqrt n}^n| <= exp(-rho^2 xi^2 / 3),
        // scanning candidate xi_0 from 1.0 downward on a xi sample
        const std::vector<double> cand = {1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1};
        double xi0 = 0.0;
        for (double c : cand) {
            bool ok = true;
            warm = nullptr;
            for (int s = 1; s <= 24 && ok; ++s) {
                const double xi = c * sqrt_n * s / 24.0;
                const std::complex<double> lam = lambda_at(xi / sqrt_n);
                const double lhs = static_cast<double>(n) * std::log(std::abs(lam));
                ok = lhs <= -rho_sq * xi * xi / 3.0;
            }
            if (ok) {
                xi0 = c;
                break;
            }
        }
        row.xi0 = xi0;

        // bounds 2 and 3: fitted constant c over the two ranges
        double c_fit = 0.0;
        warm = nullptr;
        const double xi_hi = xi0 > 0 ? xi0 * sqrt_n : std::pow(n, 1.0 / 6.0);
        for (int s = 1; s <= 32; ++s) {
            const double xi = xi_hi * s / 32.0;
            const std::complex<double> lam = lambda_at(xi / sqrt_n);
            const std::complex<double> lam_n = std::exp(static_cast<double>(n) * std::log(lam));
            const std::complex<double> centered =
                std::exp(std::complex<double>(0.0, -xi * sqrt_n * gamma)) * lam_n;
            const double diff = std::abs(centered - std::exp(-rho_sq * xi * xi / 2.0));
            double denom;
            if (xi <= std::pow(n, 1.0 / 6.0))
                denom = xi * xi * xi * std::exp(-rho_sq * xi * xi / 2.0) / sqrt_n;
            else
                denom = std::exp(-rho_sq * xi * xi / 4.0) / sqrt_n;
            if (denom > 1e-300) c_fit = std::max(c_fit, diff / denom);
        }
        row.c_fit = c_fit;
        row.all_hold = xi0 > 0 && std::isfinite(c_fit);
        report.rows.push_back(row);
        report.xi0_hat = std::min(report.xi0_hat, xi0);
        report.c_hat = std::max(report.c_hat, c_fit);
    }
    return report;
}

HighFreqReport high_frequency_decay(const TransferOperator& op, double xi, int n_max, int burn) {
    HighFreqReport rep;
    rep.xi = xi;
    const int M = op.size();
    const auto ap = op.applier({0.0, xi});

    // basket of trigonometric polynomials in the grid coordinate
    std::vector<CVec> basket;
    for (int m = 1; m <= 10; ++m) {
        CVec f(static_cast<size_t>(M)), g(static_cast<size_t>(M));
        for (int j = 0; j < M; ++j) {
            const double t = angle_of(op.grid().points[j].rep());
            f[j] = {std::cos(2 * m * t), 0.0};
            g[j] = {std::sin(2 * m * t), 0.0};
        }
        basket.push_back(std::move(f));
        basket.push_back(std::move(g));
    }

    double worst_slope = -std::numeric_limits<double>::infinity();
    double worst_se = 0.0;
    bool monotone = true;
    for (auto& f0 : basket) {
        CVec f = f0;
        std::vector<double> steps, lognorms;
        double offset = 0.0;  // accumulated log of renormalizations
        for (int k = 1; k <= n_max; ++k) {
            f = ap(f);
            double sup = 0;
            for (auto& c : f) sup = std::max(sup, std::abs(c));
            if (sup == 0.0) break;  // exact annihilation: decays trivially
            const double lognorm = offset + std::log(sup);
            if (lognorm < -34.0) break;  // roundoff floor, stop before it pollutes the fit
            steps.push_back(k);
            lognorms.push_back(lognorm);
            offset = lognorm;
            for (auto& c : f) c /= sup;
        }
        if (steps.size() < 4) continue;
        // fit the asymptotic rate: drop the transient, keep the later half
        // (at least past the requested burn-in when available)
        size_t start = steps.size() / 2;
        for (size_t i = 0; i < steps.size(); ++i)
            if (steps[i] >= burn) {
                start = std::min(start, i);
                break;
            }
        if (steps.size() - start < 4) start = steps.size() - 4;
        std::vector<double> xs(steps.begin() + start, steps.end());
        std::vector<double> ys(lognorms.begin() + start, lognorms.end());
        const LineFit lf = fit_line(xs, ys);
        if (lf.slope > worst_slope) {
            worst_slope = lf.slope;
            worst_se = lf.slope_se;
        }
        for (size_t i = start + 1; i < lognorms.size(); ++i)
            if (lognorms[i] > lognorms[i - 1] + 1e-12) monotone = false;
    }
    rep.rho_k_hat = std::exp(worst_slope);
    rep.slope_se = worst_se;
    rep.decays = std::exp(worst_slope + 2 * worst_se) < 1.0;
    rep.monotone_after_burn = monotone;
    return rep;
}

void write_curve_csv(const std::string& path, const SpectralCurve& curve) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("cannot open " + path + " for writing");
    std::fprintf(fp, "xi,re_lambda,im_lambda,abs_lambda,residual\n");
    for (size_t i = 0; i < curve.xi.size(); ++i)
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g\n", curve.xi[i], curve.lambda[i].real(),
                     curve.lambda[i].imag(), std::abs(curve.lambda[i]), curve.residual[i]);
    std::fclose(fp);
}

}  // namespace rmp
