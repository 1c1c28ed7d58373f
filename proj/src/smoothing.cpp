#include "rmplab/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "rmplab/rng.hpp"

namespace rmp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kC0 = 3.0 / (8.0 * kPi);

double sinc(double x) {
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

// cubic B-spline profile: triangle convolved with itself on [-2, 2]
double bspline_profile(double x) {
    x = std::abs(x);
    if (x >= 2.0) return 0.0;
    if (x >= 1.0) {
        const double t = 2.0 - x;
        return t * t * t / 6.0;
    }
    return x * x * x / 2.0 - x * x + 2.0 / 3.0;
}

// cumulative table of theta on [0, T]; beyond T the u^{-3} envelope of the
// averaged sin^4 tail takes over
constexpr double kCdfRange = 5000.0;
constexpr double kCdfStep = 0.05;
std::vector<double>& cdf_table() {
    static std::vector<double> table = [] {
        const size_t n = static_cast<size_t>(kCdfRange / kCdfStep) + 1;
        std::vector<double> t(n, 0.0);
        // composite Simpson per cell
        for (size_t i = 1; i < n; ++i) {
            const double a = (i - 1) * kCdfStep, b = i * kCdfStep;
            const double m = 0.5 * (a + b);
            t[i] = t[i - 1] + (b - a) / 6.0 *
                                  (SmoothingKernel::base_density(a) +
                                   4.0 * SmoothingKernel::base_density(m) +
                                   SmoothingKernel::base_density(b));
        }
        return t;
    }();
    return table;
}

std::once_flag cdf_once;

}  // namespace

SmoothingKernel::SmoothingKernel(double delta) : delta_(delta) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("SmoothingKernel: delta must lie in (0, 1]");
}

SmoothingKernel make_kernel(double delta) { return SmoothingKernel(delta); }

double SmoothingKernel::base_density(double u) {
    const double s = sinc(u / 4.0);
    return kC0 * s * s * s * s;
}

double SmoothingKernel::base_fourier(double xi) { return 1.5 * bspline_profile(2.0 * xi); }

double SmoothingKernel::base_tail(double s) {
    if (s < 0) return 1.0 - base_tail(-s);
    std::call_once(cdf_once, [] { cdf_table(); });
    const auto& table = cdf_table();
    if (s >= kCdfRange) return 32.0 * kC0 / (s * s * s);
    const double half = table.back() + 32.0 * kC0 / (kCdfRange * kCdfRange * kCdfRange);
    const double t = s / kCdfStep;
    const size_t i = static_cast<size_t>(t);
    const double frac = t - i;
    const double upto = i + 1 < table.size() ? table[i] * (1 - frac) + table[i + 1] * frac
                                             : table.back();
    return half - upto;
}

double SmoothingKernel::base_cdf(double u) {
    if (u >= 0) return 1.0 - base_tail(u);
    return base_tail(-u);
}

double SmoothingKernel::tail_constant() {
    static const double c = [] {
        double best = 0.0;
        for (double s = 1e-3; s < 2e3; s *= 1.05)
            best = std::max(best, s * 2.0 * base_tail(s));
        return best;
    }();
    return c;
}

// --- piecewise linear ---------------------------------------------------

double PiecewiseLinear::operator()(double u) const {
    if (xs.empty() || u <= xs.front() || u >= xs.back()) {
        if (!xs.empty() && (u == xs.front() || u == xs.back())) {
            return u == xs.front() ? ys.front() : ys.back();
        }
        return 0.0;
    }
    const auto it = std::upper_bound(xs.begin(), xs.end(), u);
    const size_t i = static_cast<size_t>(it - xs.begin());
    const double x0 = xs[i - 1], x1 = xs[i];
    if (x1 == x0) return ys[i];
    const double t = (u - x0) / (x1 - x0);
    return ys[i - 1] * (1 - t) + ys[i] * t;
}

double PiecewiseLinear::integral() const {
    double s = 0.0;
    for (size_t i = 1; i < xs.size(); ++i)
        s += 0.5 * (ys[i - 1] + ys[i]) * (xs[i] - xs[i - 1]);
    return s;
}

double PiecewiseLinear::sup() const {
    double m = 0.0;
    for (double y : ys) m = std::max(m, std::abs(y));
    return m;
}

std::complex<double> PiecewiseLinear::fourier(double xi) const {
    if (xs.empty()) return {0.0, 0.0};
    // slope jumps c_j at the breakpoints: f'' = sum c_j delta_{x_j}, so
    // f-hat = -xi^{-2} sum c_j e^{-i xi x_j}
    const size_t n = xs.size();
    std::vector<double> jump(n, 0.0);
    double prev_slope = 0.0;
    for (size_t i = 0; i + 1 < n; ++i) {
        const double dx = xs[i + 1] - xs[i];
        const double slope = dx > 0 ? (ys[i + 1] - ys[i]) / dx : 0.0;
        jump[i] += slope - prev_slope;
        prev_slope = slope;
    }
    jump[n - 1] += 0.0 - prev_slope;

    if (std::abs(xi) < 1e-5) {
        // moment expansion: -xi^{-2} sum c_j e^{-i xi x_j}
        double m2 = 0, m3 = 0, m4 = 0, m5 = 0;
        for (size_t j = 0; j < n; ++j) {
            const double x = xs[j];
            m2 += jump[j] * x * x;
            m3 += jump[j] * x * x * x;
            m4 += jump[j] * x * x * x * x;
            m5 += jump[j] * x * x * x * x * x;
        }
        const double re = m2 / 2.0 - xi * xi * m4 / 24.0;
        const double im = -xi * m3 / 6.0 + xi * xi * xi * m5 / 120.0;
        return {re, im};
    }
    std::complex<double> s(0.0, 0.0);
    for (size_t j = 0; j < n; ++j)
        s += jump[j] * std::exp(std::complex<double>(0.0, -xi * xs[j]));
    return -s / (xi * xi);
}

PiecewiseLinear PiecewiseLinear::shifted(double s) const {
    PiecewiseLinear out = *this;
    for (double& x : out.xs) x += s;
    return out;
}

PiecewiseLinear PiecewiseLinear::trapezoid(double lo, double ramp_lo, double ramp_hi, double hi,
                                           double height) {
    if (!(lo <= ramp_lo && ramp_lo <= ramp_hi && ramp_hi <= hi))
        throw std::invalid_argument("trapezoid: breakpoints out of order");
    PiecewiseLinear f;
    f.xs = {lo, ramp_lo, ramp_hi, hi};
    f.ys = {0.0, height, height, 0.0};
    // collapse coincident breakpoints
    PiecewiseLinear g;
    for (size_t i = 0; i < f.xs.size(); ++i) {
        if (!g.xs.empty() && f.xs[i] == g.xs.back()) {
            g.ys.back() = std::max(g.ys.back(), f.ys[i]);
            continue;
        }
        g.xs.push_back(f.xs[i]);
        g.ys.push_back(f.ys[i]);
    }
    return g;
}

namespace {

PiecewiseLinear combine(const PiecewiseLinear& a, const PiecewiseLinear& b, bool take_max) {
    if (a.empty()) return take_max ? b : PiecewiseLinear{};
    if (b.empty()) return take_max ? a : PiecewiseLinear{};
    // merged breakpoints plus crossings
    std::vector<double> grid;
    grid.reserve(a.xs.size() + b.xs.size() + 8);
    grid.insert(grid.end(), a.xs.begin(), a.xs.end());
    grid.insert(grid.end(), b.xs.begin(), b.xs.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::vector<double> refined;
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
        refined.push_back(grid[i]);
        const double x0 = grid[i], x1 = grid[i + 1];
        const double d0 = a(x0) - b(x0), d1 = a(x1) - b(x1);
        if (d0 * d1 < 0) refined.push_back(x0 + (x1 - x0) * d0 / (d0 - d1));
    }
    refined.push_back(grid.back());

    PiecewiseLinear out;
    for (double x : refined) {
        const double v = take_max ? std::max(a(x), b(x)) : std::min(a(x), b(x));
        out.xs.push_back(x);
        out.ys.push_back(v);
    }
    // trim zero tails
    while (out.xs.size() > 2 && out.ys[0] == 0.0 && out.ys[1] == 0.0) {
        out.xs.erase(out.xs.begin());
        out.ys.erase(out.ys.begin());
    }
    while (out.xs.size() > 2 && out.ys.back() == 0.0 && out.ys[out.ys.size() - 2] == 0.0) {
        out.xs.pop_back();
        out.ys.pop_back();
    }
    return out;
}

}  // namespace

PiecewiseLinear PiecewiseLinear::pointwise_min(const PiecewiseLinear& a,
                                               const PiecewiseLinear& b) {
    return combine(a, b, false);
}

PiecewiseLinear PiecewiseLinear::pointwise_max(const PiecewiseLinear& a,
                                               const PiecewiseLinear& b) {
    return combine(a, b, true);
}

PiecewiseLinear dilate(const PiecewiseLinear& f, double w) {
    if (f.empty() || w <= 0) return f;
    // unimodal: plateau between the outward shifts of the two monotone legs
    double ymax = 0;
    for (double y : f.ys) ymax = std::max(ymax, y);
    size_t lp = 0, rp = f.ys.size() - 1;
    for (size_t i = 0; i < f.ys.size(); ++i)
        if (f.ys[i] == ymax) {
            lp = i;
            break;
        }
    for (size_t i = f.ys.size(); i-- > 0;)
        if (f.ys[i] == ymax) {
            rp = i;
            break;
        }
    PiecewiseLinear out;
    for (size_t i = 0; i <= lp; ++i) {
        out.xs.push_back(f.xs[i] - w);
        out.ys.push_back(f.ys[i]);
    }
    for (size_t i = rp; i < f.xs.size(); ++i) {
        out.xs.push_back(f.xs[i] + w);
        out.ys.push_back(f.ys[i]);
    }
    return out;
}

PiecewiseLinear erode(const PiecewiseLinear& f, double w) {
    if (f.empty() || w <= 0) return f;
    const PiecewiseLinear result =
        PiecewiseLinear::pointwise_min(f.shifted(-w), f.shifted(w));
    // eroded support may vanish entirely
    if (result.sup() == 0.0) return {};
    return result;
}

WindowFunction make_upper_window(double a, double b, double zeta) {
    if (!(zeta > 0 && zeta <= 1) || !(a < b))
        throw std::invalid_argument("make_upper_window: need a < b and zeta in (0, 1]");
    WindowFunction w;
    w.pl = PiecewiseLinear::trapezoid(a - 2 * zeta, a - zeta, b + zeta, b + 2 * zeta);
    w.a = a;
    w.b = b;
    w.zeta = zeta;
    w.upper = true;
    return w;
}

WindowFunction make_lower_window(double a, double b, double zeta) {
    if (!(zeta > 0 && zeta <= 1) || !(b - a >= 4 * zeta))
        throw std::invalid_argument("make_lower_window: need b - a >= 4 zeta");
    WindowFunction w;
    w.pl = PiecewiseLinear::trapezoid(a + zeta, a + 2 * zeta, b - 2 * zeta, b - zeta);
    w.a = a;
    w.b = b;
    w.zeta = zeta;
    w.upper = false;
    return w;
}

// --- band-limited approximants ------------------------------------------

BandLimited::BandLimited(PiecewiseLinear base, PiecewiseLinear box, double scale, double kappa,
                         double delta)
    : base_(std::move(base)), box_(std::move(box)), scale_(scale), kappa_(kappa),
      kernel_(delta) {}

namespace {

// integral of pl(u - d2 tau) theta(tau) over the support window, adaptive
// Simpson split at the breakpoint preimages
double mollify_at(const PiecewiseLinear& pl, double u, double d2) {
    if (pl.empty()) return 0.0;
    const double tlo = (u - pl.support_hi()) / d2;
    const double thi = (u - pl.support_lo()) / d2;
    auto f = [&](double tau) { return pl(u - d2 * tau) * SmoothingKernel::base_density(tau); };

    // forced initial subdivisions stop false convergence on the kernel's
    // periodic oscillation (samples a period apart alias onto the envelope)
    std::function<double(double, double, double, double, double, int, int)> simpson =
        [&](double a, double b, double fa, double fm, double fb, int depth,
            int force) -> double {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
        const double flm = f(lm), frm = f(rm);
        const double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
        const double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
        if (depth <= 0 ||
            (force <= 0 && std::abs(left + right - whole) < 1e-12 * (1 + std::abs(whole))))
            return left + right + (left + right - whole) / 15.0;
        return simpson(a, m, fa, flm, fm, depth - 1, force - 1) +
               simpson(m, b, fm, frm, fb, depth - 1, force - 1);
    };

    // split at breakpoint preimages and at kernel-period boundaries
    std::vector<double> cuts = {tlo};
    for (double x : pl.xs) {
        const double t = (u - x) / d2;
        if (t > tlo && t < thi) cuts.push_back(t);
    }
    const double period = 4 * kPi;
    for (double t = std::ceil(tlo / period) * period; t < thi; t += period)
        if (t > tlo) cuts.push_back(t);
    cuts.push_back(thi);
    std::sort(cuts.begin(), cuts.end());

    double total = 0.0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (b - a < 1e-14) continue;
        const double m = 0.5 * (a + b);
        total += simpson(a, b, f(a), f(m), f(b), 28, 3);
    }
    return total;
}

}  // namespace

double BandLimited::operator()(double u) const {
    const double d2 = kernel_.delta() * kernel_.delta();
    double v = scale_ * mollify_at(base_, u, d2);
    if (kappa_ != 0.0 && !box_.empty()) v -= kappa_ * mollify_at(box_, u, d2);
    return v;
}

std::complex<double> BandLimited::fourier(double xi) const {
    if (std::abs(xi) > kernel_.fourier_support()) return {0.0, 0.0};
    std::complex<double> v = scale_ * base_.fourier(xi);
    if (kappa_ != 0.0 && !box_.empty()) v -= kappa_ * box_.fourier(xi);
    return v * kernel_.fourier(xi);
}

Approximants approximants(const WindowFunction& psi, double delta) {
    if (!(delta > 0 && delta < 1))
        throw std::invalid_argument("approximants: delta must lie in (0, 1)");
    const PiecewiseLinear& f = psi.pl;
    const bool empty = f.empty() || f.sup() == 0.0;
    const double lo = empty ? -1.0 : f.support_lo();
    const double hi = empty ? 1.0 : f.support_hi();

    double w = delta;
    for (int attempt = 1; attempt <= 3; ++attempt) {
        SmoothingKernel kernel(delta);
        const double tail_w = kernel.tail_mass(w);
        const double eps_plus = 2.0 * tail_w / (1.0 - tail_w);
        BandLimited plus(dilate(f, w), {}, 1.0 + eps_plus, 0.0, delta);

        // minus: erode, mollify, and subtract a wide box term that soaks up
        // the kernel tails across the whole verification window
        PiecewiseLinear box =
            empty ? PiecewiseLinear{}
                  : PiecewiseLinear::trapezoid(lo - 7.5, lo - 7.0, hi + 7.0, hi + 7.5);
        const double kappa =
            empty ? 0.0 : 1.5 * tail_w / (1.0 - kernel.tail_mass(2.0));
        BandLimited minus(erode(f, w), box, 1.0, kappa, delta);

        // hard domination check on the spec'd grid
        bool ok = true;
        const int grid_n = 10000;
        const double glo = lo - 5.0, ghi = hi + 5.0;
        for (int i = 0; i < grid_n && ok; ++i) {
            const double u = glo + (ghi - glo) * i / (grid_n - 1.0);
            const double mid = f(u);
            if (minus(u) > mid || plus(u) < mid) ok = false;
        }
        if (!ok) {
            w *= 2.0;
            continue;
        }

        Approximants out{std::move(minus), std::move(plus), 0.0, 0.0, w, attempt};
        // L1 distances by midpoint rule on a wide window
        const double ilo = lo - 20.0, ihi = hi + 20.0;
        const int m = 2000;
        const double h = (ihi - ilo) / m;
        for (int i = 0; i < m; ++i) {
            const double u = ilo + (i + 0.5) * h;
            out.l1_minus += std::abs(out.minus(u) - f(u)) * h;
            out.l1_plus += std::abs(out.plus(u) - f(u)) * h;
        }
        return out;
    }
    throw std::runtime_error("approximants: domination failed after 3 margin widenings");
}

// --- conjugate characteristic function ----------------------------------

std::complex<double> conjugate_cf(const std::vector<std::pair<double, double>>& atoms,
                                  double xi) {
    std::complex<double> s(0.0, 0.0);
    double total = 0.0;
    for (const auto& [x, w] : atoms) {
        if (!std::isfinite(x))
            throw std::invalid_argument("conjugate_cf: non-finite atom value");
        s += w * std::exp(std::complex<double>(0.0, -xi * x));
        total += w;
    }
    return s / total;
}

std::complex<double> conjugate_cf(const EmpiricalCDF& cdf, double xi) {
    std::complex<double> s(0.0, 0.0);
    const auto& vals = cdf.values();
    for (double x : vals) {
        if (!std::isfinite(x))
            throw std::invalid_argument("conjugate_cf: non-finite sample value");
        s += std::exp(std::complex<double>(0.0, -xi * x));
    }
    return s / static_cast<double>(vals.size());
}

// --- smoothing inequality ------------------------------------------------

double gaussian_cdf(double x, double sd) { return 0.5 * std::erfc(-x / (sd * std::sqrt(2.0))); }

double gaussian_pdf(double x, double sd) {
    return std::exp(-x * x / (2 * sd * sd)) / (sd * std::sqrt(2 * kPi));
}

GapBoundReport smoothing_gap_bound(const EmpiricalCDF& F, const SmoothCdf& H, double delta,
                                   const SmoothingKernel& kernel) {
    GapBoundReport rep;
    rep.kernel_c = SmoothingKernel::tail_constant();
    rep.kappa = 1.0 + 4.0 * rep.kernel_c;
    rep.big_c = 12.0 * H.density_bound * rep.kernel_c;
    const double d2 = delta * delta;
    const double inv_d2 = 1.0 / d2;

    // scan |F - H| at the jump points of F and on a dense grid
    auto gap_at = [&](double u) {
        const double lo = std::nextafter(u, -std::numeric_limits<double>::infinity());
        return std::max(std::abs(F.query(u) - H.cdf(u)), std::abs(F.query(lo) - H.cdf(lo)));
    };
    const double scan_hi = rep.kappa * inv_d2 + 10.0;
    for (double v : F.values()) {
        if (!std::isfinite(v)) continue;
        const double g = gap_at(v);
        rep.lhs = std::max(rep.lhs, g);
        if (std::abs(v) >= inv_d2) rep.far_field = std::max(rep.far_field, g);
    }
    const int scan_n = 4000;
    for (int i = 0; i <= scan_n; ++i) {
        const double u = -scan_hi + 2 * scan_hi * i / scan_n;
        const double g = gap_at(u);
        rep.lhs = std::max(rep.lhs, g);
        if (std::abs(u) >= inv_d2) rep.far_field = std::max(rep.far_field, g);
    }
    rep.applicable = rep.far_field <= rep.big_c * d2;

    // (F * theta_delta)(u) = E Theta((u - X)/delta^2); H convolved by a
    // graded composite-Simpson rule in the kernel variable
    auto f_conv = [&](double u) {
        double s = 0.0;
        const auto& vals = F.values();
        if (F.weighted()) {
            double prev = 0.0;
            for (size_t j = 0; j < vals.size(); ++j) {
                const double wj = F.query(vals[j]) - prev;
                prev = F.query(vals[j]);
                s += wj * kernel.cdf(u - vals[j]);
            }
        } else {
            for (double x : vals) s += kernel.cdf(u - x);
            s /= static_cast<double>(vals.size());
        }
        return s;
    };

    // precompute the graded tau mesh and kernel weights once
    static thread_local std::vector<std::pair<double, double>> mesh;  // (tau, simpson weight)
    mesh.clear();
    auto add_zone = [&](double a, double b, double h) {
        const int cells = std::max(1, static_cast<int>((b - a) / h));
        const double step = (b - a) / cells;
        for (int i = 0; i < cells; ++i) {
            const double x0 = a + i * step, x1 = x0 + step, xm = 0.5 * (x0 + x1);
            mesh.emplace_back(x0, step / 6.0);
            mesh.emplace_back(xm, 4.0 * step / 6.0);
            mesh.emplace_back(x1, step / 6.0);
        }
    };
    add_zone(-2000.0, -120.0, 0.5);
    add_zone(-120.0, 120.0, 0.06);
    add_zone(120.0, 2000.0, 0.5);

    auto h_conv = [&](double u) {
        double s = 0.0;
        for (const auto& [tau, wgt] : mesh)
            s += wgt * H.cdf(u - d2 * tau) * SmoothingKernel::base_density(tau);
        return s;
    };

    const int conv_n = 2000;
    for (int i = 0; i <= conv_n; ++i) {
        const double u = -rep.kappa * inv_d2 + 2 * rep.kappa * inv_d2 * i / conv_n;
        rep.sup_conv = std::max(rep.sup_conv, std::abs(f_conv(u) - h_conv(u)));
    }
    rep.rhs = 2.0 * rep.sup_conv + rep.big_c * d2;
    rep.pass = rep.lhs <= rep.rhs;
    return rep;
}

// --- partition of unity ---------------------------------------------------

namespace {

constexpr double kBumpEps = 0.1;

double smoothstep_ramp(double t) {
    if (t <= kBumpEps) return 0.0;
    if (t >= 1.0 - kBumpEps) return 1.0;
    const double s = (t - kBumpEps) / (1.0 - 2.0 * kBumpEps);
    return s * s * (3.0 - 2.0 * s);
}

}  // namespace

double PartitionOfUnity::bump(double t) {
    if (!(std::abs(t) < 1.0)) return 0.0;  // NaN and -inf fall through to 0
    return smoothstep_ramp(1.0 - std::abs(t));
}

PartitionOfUnity::PartitionOfUnity(DualPoint y, double zeta, int count_cap)
    : y_(std::move(y)), zeta_(zeta), cap_(count_cap) {
    if (!(zeta > 0.0 && zeta <= 1.0))
        throw std::invalid_argument("PartitionOfUnity: zeta must lie in (0, 1]");
    if (count_cap < 1) throw std::invalid_argument("PartitionOfUnity: count cap must be >= 1");
    verify(0x9A27);
}

double PartitionOfUnity::log_dist(const ProjPoint& w) const {
    const double p = dual_pairing(w, y_);
    return p == 0.0 ? kNegInf : std::log(p);
}

double PartitionOfUnity::chi_from_logdist(int k, double ld) const {
    if (k < 0) return 0.0;
    return bump(ld / zeta_ + k);
}

double PartitionOfUnity::chi(int k, const ProjPoint& w) const {
    return chi_from_logdist(k, log_dist(w));
}

double PartitionOfUnity::tail_from_logdist(double ld) const {
    if (ld == kNegInf) return 1.0;
    const double s = -ld / zeta_;
    const int k0 = static_cast<int>(std::floor(s));
    double sum = 0.0;
    for (int k = k0; k <= k0 + 1; ++k)
        if (k >= 0 && k <= cap_) sum += chi_from_logdist(k, ld);
    return 1.0 - sum;
}

double PartitionOfUnity::tail(const ProjPoint& w) const { return tail_from_logdist(log_dist(w)); }

void PartitionOfUnity::verify(uint64_t seed) const {
    SplitMix64 rng(derive_seed(seed, 0xBEEF));
    const int d = y_.dim();

    // orthonormal basis of the hyperplane ker f
    std::vector<Vec> basis;
    {
        Vec f = y_.rep();
        for (int i = 0; i < d; ++i) {
            Vec e(d, 0.0);
            e[i] = 1.0;
            double c = dot(e, f);
            for (int j = 0; j < d; ++j) e[j] -= c * f[j];
            for (const Vec& b : basis) {
                const double bc = dot(e, b);
                for (int j = 0; j < d; ++j) e[j] -= bc * b[j];
            }
            const double nv = norm2(e);
            if (nv > 1e-8) {
                for (double& x : e) x /= nv;
                basis.push_back(std::move(e));
                if (static_cast<int>(basis.size()) == d - 1) break;
            }
        }
    }

    auto point_at_distance = [&](double r) {
        Vec u(d, 0.0);
        for (const Vec& b : basis) {
            const double c = 2.0 * rng.uniform01() - 1.0;
            for (int j = 0; j < d; ++j) u[j] += c * b[j];
        }
        const double nu = norm2(u);
        for (double& x : u) x /= nu;
        Vec v(d);
        const double s = std::sqrt(std::max(0.0, 1.0 - r * r));
        for (int j = 0; j < d; ++j) v[j] = s * u[j] + r * y_.rep()[j];
        return ProjPoint(std::move(v));
    };

    const int samples = 10000;
    for (int t = 0; t < samples; ++t) {
        // log-uniform distances spanning every annulus in range
        const double ldist = -(cap_ + 2.0) * zeta_ * rng.uniform01();
        const ProjPoint w = point_at_distance(std::exp(ldist));
        const double ld = log_dist(w);

        int nonzero = 0;
        double sum = 0.0;
        for (int k = 0; k <= cap_; ++k) {
            const double c = chi_from_logdist(k, ld);
            if (c != 0.0) {
                ++nonzero;
                // support inside the annulus T_k
                if (!(ld > -(k + 1) * zeta_ && ld < -(k - 1) * zeta_))
                    throw std::runtime_error("partition bump escaped its annulus");
            }
            sum += c;
        }
        if (nonzero > 2) throw std::runtime_error("more than two partition bumps overlap");
        if (std::abs(sum + tail_from_logdist(ld) - 1.0) > 1e-12)
            throw std::runtime_error("partition of unity does not sum to one");
    }

    // C1 bound via central differences along geodesics toward/away H_y
    for (int k = 0; k <= std::min(cap_, 60); ++k) {
        const double bound = 12.0 / zeta_ * std::exp(k * zeta_);
        for (int t = 0; t < 24; ++t) {
            const double r = std::exp(-(k + (2.0 * rng.uniform01() - 1.0)) * zeta_);
            if (r >= 1.0) continue;
            const double h = std::min(1e-5, 0.05 * zeta_ * r);
            const double angle = std::asin(std::min(1.0, r));
            const double cplus = chi_from_logdist(k, std::log(std::sin(angle + h)));
            const double cminus =
                chi_from_logdist(k, std::log(std::sin(std::max(1e-300, angle - h))));
            const double deriv = std::abs(cplus - cminus) / (2.0 * h);
            if (deriv > bound)
                throw std::runtime_error("partition bump C1 norm exceeds 12 zeta^{-1} e^{k zeta}");
        }
    }
}

PartitionOfUnity build_partition(DualPoint y, double zeta, int count_cap) {
    return PartitionOfUnity(std::move(y), zeta, count_cap);
}

// --- aggregates ------------------------------------------------------------

PhiAggregates::PhiAggregates(const PartitionOfUnity& part, long n, double scale_constant,
                             int sign)
    : part_(&part), n_(n), sign_(sign) {
    if (sign != 1 && sign != -1)
        throw std::invalid_argument("PhiAggregates: sign must be +1 or -1");
    if (n < 1) throw std::invalid_argument("PhiAggregates: n must be >= 1");
    k_max_ = static_cast<int>(std::floor(scale_constant * std::log(static_cast<double>(n)) /
                                         part.zeta()));
    if (k_max_ < 0) k_max_ = 0;
    if (k_max_ > part.count_cap())
        throw std::invalid_argument(
            "PhiAggregates: partition count cap is too small for this n (needs " +
            std::to_string(k_max_) + ")");
    sqrt_n_ = std::sqrt(static_cast<double>(n));
}

double PhiAggregates::phase(int k, double xi) const {
    return sign_ * xi * k * part_->zeta() / sqrt_n_;
}

std::complex<double> PhiAggregates::phi_xi_from_logdist(double ld, double xi) const {
    if (ld == kNegInf) return {0.0, 0.0};
    const double s = -ld / part_->zeta();
    const int k0 = static_cast<int>(std::floor(s));
    std::complex<double> sum(0.0, 0.0);
    for (int k = k0; k <= k0 + 1; ++k) {
        if (k < 0 || k > k_max_) continue;
        const double c = part_->chi_from_logdist(k, ld);
        if (c != 0.0) sum += c * std::exp(std::complex<double>(0.0, phase(k, xi)));
    }
    return sum;
}

std::complex<double> PhiAggregates::phi_xi(const ProjPoint& w, double xi) const {
    return phi_xi_from_logdist(part_->log_dist(w), xi);
}

double PhiAggregates::phi_star_from_logdist(double ld) const {
    if (ld == kNegInf) return 1.0;
    const double s = -ld / part_->zeta();
    const int k0 = static_cast<int>(std::floor(s));
    double sum = 0.0;
    for (int k = k0; k <= k0 + 1; ++k)
        if (k >= 0 && k <= k_max_) sum += part_->chi_from_logdist(k, ld);
    return 1.0 - sum;
}

double PhiAggregates::phi_star(const ProjPoint& w) const {
    return phi_star_from_logdist(part_->log_dist(w));
}

PhiAggregates phi_aggregates(const PartitionOfUnity& part, long n, double scale_constant,
                             int sign) {
    return PhiAggregates(part, n, scale_constant, sign);
}

}  // namespace rmp
