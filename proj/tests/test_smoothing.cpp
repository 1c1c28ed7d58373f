#include <cmath>
#include <complex>

#include "doctest.h"
#include "rmplab/rng.hpp"
#include "rmplab/smoothing.hpp"

using namespace rmp;

namespace {

constexpr double kPi = 3.14159265358979323846;

// adaptive Simpson for test oracles
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-11,
                 int depth = 40) {
    std::function<double(double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fm, double fhi, int d) -> double {
        const double m = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + m), rm = 0.5 * (m + hi);
        const double flm = f(lm), frm = f(rm);
        const double whole = (hi - lo) / 6 * (flo + 4 * fm + fhi);
        const double split = (m - lo) / 6 * (flo + 4 * flm + fm) +
                             (hi - m) / 6 * (fm + 4 * frm + fhi);
        if (d <= 0 || std::abs(split - whole) < tol) return split + (split - whole) / 15;
        return rec(lo, m, flo, flm, fm, d - 1) + rec(m, hi, fm, frm, fhi, d - 1);
    };
    const double m = 0.5 * (a + b);
    return rec(a, b, f(a), f(m), f(b), depth);
}

// integrate on period-aligned cells so oscillations cannot alias
double integrate_cells(const std::function<double(double)>& f, double a, double b, double cell,
                       double tol = 1e-12) {
    double total = 0;
    for (double lo = a; lo < b; lo += cell)
        total += integrate(f, lo, std::min(b, lo + cell), tol);
    return total;
}

}  // namespace

TEST_CASE("kernel: unit mass by quadrature, positivity, exact Fourier support") {
    // c0 is fixed analytically; the quadrature oracle confirms unit mass.
    // Integrate per oscillation period so the sampler cannot alias.
    double mass = 2 * integrate_cells(
        [](double u) { return SmoothingKernel::base_density(u); }, 0, 10000, 4 * kPi, 1e-14);
    CHECK(std::abs(mass - 1.0) < 1e-8);

    SplitMix64 rng(5);
    for (int i = 0; i < 10000; ++i) {
        const double u = 2e4 * (rng.uniform01() - 0.5);
        CHECK(SmoothingKernel::base_density(u) > 0.0);
    }

    SmoothingKernel k(0.5);
    CHECK(k.fourier(0.0) == doctest::Approx(1.0));
    CHECK(k.fourier(1.0001 / (0.5 * 0.5)) == 0.0);
    CHECK(k.fourier(4.0 / (0.5 * 0.5)) == 0.0);
    for (int i = 0; i <= 10000; ++i) {
        const double xi = -1.2 + 2.4 * i / 10000.0;
        const double v = SmoothingKernel::base_fourier(xi);
        CHECK(v <= 1.0 + 1e-15);
        CHECK(v >= 0.0);
        if (std::abs(xi) > 1.0) CHECK(v == 0.0);
    }
}

TEST_CASE("kernel: closed-form Fourier transform matches direct quadrature") {
    for (double xi : {0.0, 0.17, 0.5, 0.77, 0.99}) {
        const double direct =
            integrate_cells([&](double u) { return SmoothingKernel::base_density(u) *
                                                   std::cos(xi * u); },
                            0, 4000, 4 * kPi, 1e-13) * 2.0;
        CHECK(std::abs(direct - SmoothingKernel::base_fourier(xi)) < 1e-6);
    }
}

TEST_CASE("kernel cdf and tails are consistent") {
    CHECK(SmoothingKernel::base_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(SmoothingKernel::base_cdf(-1e6) == doctest::Approx(0.0));
    CHECK(SmoothingKernel::base_cdf(1e6) == doctest::Approx(1.0));
    // tail against quadrature at a few spots
    for (double s : {2.0, 10.0, 50.0}) {
        const double direct = integrate_cells(
            [](double u) { return SmoothingKernel::base_density(u); }, s, 10000, 4 * kPi, 1e-14);
        CHECK(SmoothingKernel::base_tail(s) == doctest::Approx(direct).epsilon(1e-6));
    }
    CHECK(SmoothingKernel::tail_constant() > 0.0);
    // scaled kernel: delta^2-contraction of the argument
    SmoothingKernel k(0.3);
    CHECK(k.density(0.0) ==
          doctest::Approx(SmoothingKernel::base_density(0.0) / 0.09).epsilon(1e-12));
    CHECK(k.tail_mass(0.18) == doctest::Approx(2 * SmoothingKernel::base_tail(2.0)));
}

TEST_CASE("piecewise linear: evaluation, integral, exact Fourier transform") {
    auto f = PiecewiseLinear::trapezoid(-2, -1, 1, 2);
    CHECK(f(-2.0) == 0.0);
    CHECK(f(-1.5) == doctest::Approx(0.5));
    CHECK(f(0.0) == 1.0);
    CHECK(f(3.0) == 0.0);
    CHECK(f.integral() == doctest::Approx(3.0));

    // FT of the symmetric unit trapezoid: product of two sinc factors
    for (double xi : {1e-7, 0.3, 1.0, 2.5}) {
        const std::complex<double> ft = f.fourier(xi);
        const double expect = 3.0 * (std::sin(1.5 * xi) / (1.5 * xi)) *
                              (std::sin(0.5 * xi) / (0.5 * xi));
        CHECK(std::abs(ft.real() - expect) < 1e-9);
        CHECK(std::abs(ft.imag()) < 1e-9);
    }
    // shifted window picks up a phase
    auto g = f.shifted(1.5);
    const std::complex<double> ft = g.fourier(0.7);
    const std::complex<double> expect =
        f.fourier(0.7) * std::exp(std::complex<double>(0, -0.7 * 1.5));
    CHECK(std::abs(ft - expect) < 1e-10);
}

TEST_CASE("dilation and erosion of trapezoids") {
    auto f = PiecewiseLinear::trapezoid(0, 1, 3, 4);
    auto d = dilate(f, 0.5);
    CHECK(d(-0.4) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(d(0.75) == 1.0);  // plateau extends left by w
    CHECK(d(0.3) == doctest::Approx(f(0.8)).epsilon(1e-12));
    CHECK(d(2.0) == 1.0);
    CHECK(d(3.4) == 1.0);  // plateau extended right by w

    auto e = erode(f, 0.5);
    CHECK(e(0.5) == 0.0);
    CHECK(e(1.0) == doctest::Approx(0.5));
    CHECK(e(2.0) == 1.0);
    CHECK(e(3.0) == doctest::Approx(0.5));
    // eroding past half the plateau kills the function
    auto gone = erode(PiecewiseLinear::trapezoid(0, 1, 1.2, 2.2), 1.2);
    CHECK(gone.empty());

    // sliding-window property on sample points
    SplitMix64 rng(7);
    for (int t = 0; t < 2000; ++t) {
        const double u = -1 + 6 * rng.uniform01();
        double lo = 1e9, hi = -1e9;
        for (int j = 0; j <= 100; ++j) {
            const double v = f(u - 0.5 + j * 0.01);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(d(u) == doctest::Approx(hi).epsilon(1e-9));
        CHECK(e(u) == doctest::Approx(lo).epsilon(1e-9));
    }
}

TEST_CASE("windows: shapes, supports, integrals") {
    auto up = make_upper_window(-0.5, 0.5, 0.25);
    CHECK(up.pl.support_lo() == doctest::Approx(-1.0));
    CHECK(up.pl.support_hi() == doctest::Approx(1.0));
    CHECK(up(-0.6) == 1.0);
    CHECK(up(0.6) == 1.0);
    CHECK(up.pl.integral() == doctest::Approx(1.0 + 3 * 0.25));
    CHECK(up.lipschitz() == doctest::Approx(4.0));

    auto low = make_lower_window(-0.5, 0.5, 0.25);
    CHECK(low.pl.support_lo() == doctest::Approx(-0.25));
    CHECK(low(0.0) == 1.0);
    CHECK(low.pl.integral() == doctest::Approx(1.0 - 3 * 0.25));
    CHECK_THROWS(make_lower_window(0, 0.5, 0.25));

    // indicator sandwich: low <= 1_{[a,b]} <= up on a grid
    for (int i = 0; i <= 1000; ++i) {
        const double u = -1.5 + 3.0 * i / 1000.0;
        const double ind = (u >= -0.5 && u <= 0.5) ? 1.0 : 0.0;
        CHECK(low(u) <= ind + 1e-12);
        CHECK(up(u) >= ind - 1e-12);
    }
}

TEST_CASE("approximants: domination, Fourier support, L1 ladder") {
    auto psi = make_upper_window(0.0, 1.0, 0.25);
    auto ap = approximants(psi, 0.25);

    // construction already re-verifies; sample independently here
    SplitMix64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        const double u = -6 + 14 * rng.uniform01();
        const double mid = psi(u);
        CHECK(ap.minus(u) <= mid + 1e-12);
        CHECK(ap.plus(u) >= mid - 1e-12);
    }
    // integrated domination
    CHECK(ap.l1_plus >= 0.0);
    const double int_minus =
        integrate([&](double u) { return ap.minus(u); }, -8, 9, 1e-8, 24);
    const double int_plus = integrate([&](double u) { return ap.plus(u); }, -8, 9, 1e-8, 24);
    CHECK(int_minus <= psi.pl.integral() + 1e-6);
    CHECK(int_plus >= psi.pl.integral() - 1e-6);

    // Fourier transforms vanish outside the band
    CHECK(std::abs(ap.plus.fourier(16.0001)) == 0.0);
    CHECK(std::abs(ap.minus.fourier(-17.0)) == 0.0);

    // evaluator matches the inverse Fourier transform of the closed form
    for (double u : {-0.3, 0.2, 0.5, 1.4}) {
        std::complex<double> inv(0, 0);
        const int cells = 4000;
        const double band = 16.0;
        const double h = 2 * band / cells;
        for (int i = 0; i < cells; ++i) {
            const double x0 = -band + i * h;
            auto f = [&](double xi) {
                return ap.plus.fourier(xi) * std::exp(std::complex<double>(0, xi * u));
            };
            inv += h / 6.0 * (f(x0) + 4.0 * f(x0 + h / 2) + f(x0 + h));
        }
        inv /= 2 * kPi;
        CHECK(std::abs(inv.real() - ap.plus(u)) < 1e-7);
        CHECK(std::abs(inv.imag()) < 1e-9);
    }

    // L1 distances shrink along the delta ladder
    double prev_minus = 1e9, prev_plus = 1e9;
    for (double delta : {0.5, 0.25, 0.125}) {
        auto a = approximants(psi, delta);
        CHECK(a.l1_minus < prev_minus);
        CHECK(a.l1_plus < prev_plus);
        prev_minus = a.l1_minus;
        prev_plus = a.l1_plus;
    }
}

TEST_CASE("approximants of the zero window are negligible") {
    WindowFunction zero;
    zero.zeta = 0.25;
    auto ap = approximants(zero, 0.25);
    for (double u : {-3.0, 0.0, 2.0}) {
        CHECK(std::abs(ap.minus(u)) < 1e-12);
        CHECK(std::abs(ap.plus(u)) < 1e-12);
    }
    CHECK(ap.l1_minus < 1e-6);
    CHECK(ap.l1_plus < 1e-6);
}

TEST_CASE("conjugate characteristic function: closed forms and symmetry") {
    CHECK(std::abs(conjugate_cf({{0.0, 1.0}}, 3.7) - std::complex<double>(1, 0)) < 1e-15);
    for (double xi : {0.0, 0.5, 2.0}) {
        const auto v = conjugate_cf({{1.0, 0.5}, {-1.0, 0.5}}, xi);
        CHECK(std::abs(v.real() - std::cos(xi)) < 1e-14);
        CHECK(std::abs(v.imag()) < 1e-14);
    }
    SplitMix64 rng(3);
    std::vector<std::pair<double, double>> atoms;
    for (int i = 0; i < 50; ++i) atoms.emplace_back(rng.uniform01() * 4 - 2, rng.uniform01());
    for (double xi : {0.3, 1.1}) {
        const auto a = conjugate_cf(atoms, xi);
        const auto b = conjugate_cf(atoms, -xi);
        CHECK(std::abs(a - std::conj(b)) < 1e-14);
        CHECK(std::abs(a) <= 1.0 + 1e-14);
    }
    CHECK(std::abs(conjugate_cf(atoms, 0.0) - std::complex<double>(1, 0)) < 1e-14);
}

TEST_CASE("inversion recovers a smoothed gaussian mixture density") {
    // mixture 0.6 N(-1, 0.5^2) + 0.4 N(2, 1) smoothed by theta_delta
    const double delta = 0.4;
    SmoothingKernel kernel(delta);
    auto density = [&](double u) {
        return 0.6 * gaussian_pdf(u + 1.0, 0.5) + 0.4 * gaussian_pdf(u - 2.0, 1.0);
    };
    auto cf = [&](double xi) {
        // conjugate convention: E e^{-i xi X}
        const std::complex<double> a =
            std::exp(std::complex<double>(-0.5 * 0.25 * xi * xi, 1.0 * xi));
        const std::complex<double> b =
            std::exp(std::complex<double>(-0.5 * xi * xi, -2.0 * xi));
        return 0.6 * a + 0.4 * b;
    };
    const double band = 1.0 / (delta * delta);
    for (double u : {-1.0, 0.0, 1.5}) {
        std::complex<double> inv(0, 0);
        const int cells = 6000;
        const double h = 2 * band / cells;
        for (int i = 0; i < cells; ++i) {
            const double x0 = -band + i * h;
            auto f = [&](double xi) {
                return std::exp(std::complex<double>(0, u * xi)) * cf(xi) * kernel.fourier(xi);
            };
            inv += h / 6.0 * (f(x0) + 4.0 * f(x0 + h / 2) + f(x0 + h));
        }
        inv /= 2 * kPi;
        const double smoothed = integrate_cells(
            [&](double t) { return density(u - t) * kernel.density(t); }, -30, 30,
            4 * kPi * 0.16, 1e-12);
        CHECK(std::abs(inv.real() - smoothed) < 1e-6);
    }
}

TEST_CASE("smoothing inequality: gaussian, shifted gaussian, atom cases") {
    SmoothingKernel k03(0.3);
    // F == H: an empirical stand-in for the gaussian via fine quantiles
    std::vector<double> quantiles;
    const int m = 4000;
    for (int i = 1; i <= m; ++i) {
        // inverse cdf by bisection
        const double p = (i - 0.5) / m;
        double lo = -10, hi = 10;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (gaussian_cdf(mid, 1.0) < p ? lo : hi) = mid;
        }
        quantiles.push_back(0.5 * (lo + hi));
    }
    auto F = EmpiricalCDF::from_samples(quantiles);
    SmoothCdf H{[](double u) { return gaussian_cdf(u, 1.0); }, gaussian_pdf(0, 1.0)};
    auto rep = smoothing_gap_bound(F, H, 0.3, k03);
    CHECK(rep.applicable);
    CHECK(rep.pass);
    CHECK(rep.lhs < 2e-4);  // quantile discretization only

    // shifted gaussian
    std::vector<double> shifted = quantiles;
    for (double& v : shifted) v += 0.05;
    auto F2 = EmpiricalCDF::from_samples(shifted);
    auto rep2 = smoothing_gap_bound(F2, H, 0.3, k03);
    CHECK(rep2.applicable);
    CHECK(rep2.pass);
    CHECK(rep2.lhs > 0.015);  // the shift is visible
    CHECK(rep2.lhs <= rep2.rhs);

    // an atom of mass 1/2 at zero plus mass 1/2 at +10: worst-case jump
    std::vector<std::pair<double, double>> atoms = {{0.0, 0.5}, {10.0, 0.5}};
    auto F3 = EmpiricalCDF::from_weighted(atoms);
    SmoothingKernel k02(0.2);
    auto rep3 = smoothing_gap_bound(F3, H, 0.2, k02);
    CHECK(rep3.applicable);
    CHECK(rep3.pass);
    CHECK(rep3.lhs > 0.45);
    CHECK(rep3.lhs < 0.51);
}

TEST_CASE("partition bump: plateau, complement identity, C1 bound") {
    CHECK(PartitionOfUnity::bump(0.0) == 1.0);
    CHECK(PartitionOfUnity::bump(0.05) == 1.0);   // plateau of half-width 0.1
    CHECK(PartitionOfUnity::bump(-0.09) == 1.0);
    CHECK(PartitionOfUnity::bump(1.0) == 0.0);
    CHECK(PartitionOfUnity::bump(-2.0) == 0.0);
    for (double t = 0.0; t <= 1.0; t += 0.01)
        CHECK(PartitionOfUnity::bump(t) + PartitionOfUnity::bump(t - 1.0) ==
              doctest::Approx(1.0).epsilon(1e-14));
    // max slope 1.5/0.8 < 4 - 1
    double worst = 0;
    for (double t = -1.0; t <= 1.0; t += 1e-4)
        worst = std::max(worst, std::abs(PartitionOfUnity::bump(t + 5e-5) -
                                         PartitionOfUnity::bump(t - 5e-5)) /
                                    1e-4);
    CHECK(worst < 3.0);
}

TEST_CASE("partition of unity: exact values at annulus centers") {
    for (double zeta : {1.0, 0.25}) {
        auto part = build_partition(DualPoint(Vec{1, 0}), zeta, 40);
        for (int k : {0, 3, 17}) {
            const double ld = -k * zeta;  // distance e^{-k zeta}: plateau center
            CHECK(part.chi_from_logdist(k, ld) == 1.0);
            for (int j = 0; j <= 40; ++j)
                if (j != k) CHECK(part.chi_from_logdist(j, ld) == 0.0);
            // between centers the two neighbours split the mass exactly
            const double mid = -(k + 0.5) * zeta;
            CHECK(part.chi_from_logdist(k, mid) + part.chi_from_logdist(k + 1, mid) ==
                  doctest::Approx(1.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("partition sums to one off the hyperplane at random points") {
    SplitMix64 rng(13);
    auto part = build_partition(DualPoint(Vec{1, 0, 0}), 0.25, 60);
    for (int t = 0; t < 10000; ++t) {
        Vec v(3);
        for (double& c : v) c = 2 * rng.uniform01() - 1;
        ProjPoint w(std::move(v));
        const double ld = part.log_dist(w);
        double sum = part.tail(w);
        int nonzero = 0;
        for (int k = 0; k <= 60; ++k) {
            const double c = part.chi_from_logdist(k, ld);
            if (c != 0) ++nonzero;
            sum += c;
        }
        CHECK(nonzero <= 2);
        CHECK(std::abs(sum - 1.0) < 1e-12);
    }
    // on the hyperplane the tail carries everything
    CHECK(part.tail(ProjPoint(Vec{0, 1, 0})) == 1.0);
}

TEST_CASE("partition construction rejects bad scales") {
    CHECK_THROWS(build_partition(DualPoint(Vec{1, 0}), 0.0, 10));
    CHECK_THROWS(build_partition(DualPoint(Vec{1, 0}), 1.5, 10));
}

TEST_CASE("phi aggregates: identity at xi = 0 and modulus bound") {
    auto part = build_partition(DualPoint(Vec{1, 0}), 0.25, 60);
    auto agg = phi_aggregates(part, 256, 1.5, -1);
    CHECK(agg.k_max() == static_cast<int>(std::floor(1.5 * std::log(256.0) / 0.25)));

    SplitMix64 rng(17);
    for (int t = 0; t < 3000; ++t) {
        const double ld = -8.0 * rng.uniform01();
        const auto at_zero = agg.phi_xi_from_logdist(ld, 0.0) + agg.phi_star_from_logdist(ld);
        CHECK(std::abs(at_zero - std::complex<double>(1, 0)) < 1e-14);
        for (double xi : {0.7, 3.0}) {
            const auto v = agg.phi_xi_from_logdist(ld, xi) + agg.phi_star_from_logdist(ld);
            CHECK(std::abs(v) <= 1.0 + 1e-13);
        }
    }

    // single-term regime: A log n < 1 keeps only chi_0 (zeta = 1)
    auto part1 = build_partition(DualPoint(Vec{1, 0}), 1.0, 10);
    auto small = phi_aggregates(part1, 2, 0.5, +1);  // 0.5 log 2 < 1
    CHECK(small.k_max() == 0);
    const double ld = -0.2;
    CHECK(std::abs(small.phi_xi_from_logdist(ld, 2.0) -
                   std::complex<double>(part1.chi_from_logdist(0, ld), 0)) < 1e-14);

    // mismatched cap is an error
    CHECK_THROWS(phi_aggregates(part1, 100000, 1.5, +1));
}

TEST_CASE("phi aggregates: holder seminorm growth is bounded by n^{alpha A}") {
    const double alpha = 0.1, A = 1.5;  // alpha A = 0.15 <= 1/6
    auto part = build_partition(DualPoint(Vec{1, 0}), 1.0, 80);
    SplitMix64 rng(23);
    std::vector<double> ln_n, ln_norm;
    for (long n : {64, 256, 1024, 4096}) {
        auto agg = phi_aggregates(part, n, A, +1);
        const double xi = 1.0;
        double seminorm = 0;
        // probe pairs straddling annulus boundaries at every scale
        for (int k = 0; k <= agg.k_max(); ++k) {
            for (int t = 0; t < 40; ++t) {
                const double ld = -(k + rng.uniform01());
                const double step = 0.05 * std::exp(ld);  // spatial step near distance e^{ld}
                const double d1 = std::exp(ld), d2 = std::max(1e-300, d1 - step);
                const auto f1 = agg.phi_xi_from_logdist(std::log(d1), xi);
                const auto f2 = agg.phi_xi_from_logdist(std::log(d2), xi);
                const double dist = d1 - d2;
                if (dist <= 0) continue;
                seminorm = std::max(seminorm, std::abs(f1 - f2) / std::pow(dist, alpha));
            }
        }
        ln_n.push_back(std::log(static_cast<double>(n)));
        ln_norm.push_back(std::log(seminorm));
    }
    // log-log slope at most alpha A + 0.05
    double slope = (ln_norm.back() - ln_norm.front()) / (ln_n.back() - ln_n.front());
    CHECK(slope <= alpha * A + 0.05);
}
