#pragma once

// The approximation toolkit: a smoothing kernel with exactly compactly
// supported Fourier transform, trapezoid windows with band-limited
// majorants/minorants, conjugate characteristic functions, the
// Berry-Esseen smoothing inequality, and the partitions of unity
// subordinate to log-scale annuli around a hyperplane.

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "rmplab/montecarlo.hpp"

namespace rmp {

// --- kernel -----------------------------------------------------------

// theta(u) = c0 (sin(u/4)/(u/4))^4 with c0 = 3/(8 pi); its Fourier
// transform is 3/2 times the cubic B-spline profile at 2 xi, supported
// exactly by [-1, 1]. theta_delta(u) = delta^{-2} theta(u / delta^2).
class SmoothingKernel {
public:
    explicit SmoothingKernel(double delta);

    double delta() const { return delta_; }

    static double base_density(double u);       // theta
    static double base_fourier(double xi);      // theta-hat, exact piecewise cubic
    static double base_cdf(double u);           // integral of theta up to u
    static double base_tail(double s);          // integral of theta over [s, inf)
    // c with  integral_{|u| >= d} theta_delta <= c delta^2 / d  for all d
    static double tail_constant();

    double density(double u) const { return base_density(u / (delta_ * delta_)) / (delta_ * delta_); }
    double fourier(double xi) const { return base_fourier(xi * delta_ * delta_); }
    double cdf(double u) const { return base_cdf(u / (delta_ * delta_)); }
    double fourier_support() const { return 1.0 / (delta_ * delta_); }
    // two-sided mass of theta_delta outside [-w, w]
    double tail_mass(double w) const { return 2.0 * base_tail(w / (delta_ * delta_)); }

private:
    double delta_;
};

SmoothingKernel make_kernel(double delta);

// --- piecewise-linear functions and windows ---------------------------

// Continuous piecewise-linear function with compact support (zero outside
// the breakpoint range; first and last values must be zero).
struct PiecewiseLinear {
    std::vector<double> xs, ys;

    bool empty() const { return xs.empty(); }
    double operator()(double u) const;
    double integral() const;
    double support_lo() const { return xs.empty() ? 0.0 : xs.front(); }
    double support_hi() const { return xs.empty() ? 0.0 : xs.back(); }
    double sup() const;

    // exact Fourier transform via the slope jumps (stable near xi = 0)
    std::complex<double> fourier(double xi) const;

    PiecewiseLinear shifted(double s) const;

    static PiecewiseLinear trapezoid(double lo, double ramp_lo, double ramp_hi, double hi,
                                     double height = 1.0);
    // pointwise min/max of two piecewise-linear functions
    static PiecewiseLinear pointwise_min(const PiecewiseLinear& a, const PiecewiseLinear& b);
    static PiecewiseLinear pointwise_max(const PiecewiseLinear& a, const PiecewiseLinear& b);
};

// sup / inf over a sliding window of half-width w (valid for the unimodal
// profiles used here)
PiecewiseLinear dilate(const PiecewiseLinear& f, double w);
PiecewiseLinear erode(const PiecewiseLinear& f, double w);

// The two trapezoid windows: the upper one dominates 1_{[a,b]} with ramps
// outside, the lower one is dominated by it with ramps inside.
struct WindowFunction {
    PiecewiseLinear pl;
    double a = 0, b = 0, zeta = 0;
    bool upper = true;

    double operator()(double u) const { return pl(u); }
    double lipschitz() const { return zeta > 0 ? 1.0 / zeta : 0.0; }
};

WindowFunction make_upper_window(double a, double b, double zeta);
WindowFunction make_lower_window(double a, double b, double zeta);  // needs b - a >= 4 zeta

// --- band-limited approximants ----------------------------------------

// scale * (base * theta_delta) - kappa * (box * theta_delta): the Fourier
// transform is supported by [-delta^{-2}, delta^{-2}] by construction.
class BandLimited {
public:
    BandLimited(PiecewiseLinear base, PiecewiseLinear box, double scale, double kappa,
                double delta);

    double operator()(double u) const;
    std::complex<double> fourier(double xi) const;
    double fourier_support() const { return kernel_.fourier_support(); }

private:
    PiecewiseLinear base_, box_;
    double scale_, kappa_;
    SmoothingKernel kernel_;
};

struct Approximants {
    BandLimited minus, plus;
    double l1_minus = 0, l1_plus = 0;  // L1 distances to the window
    double margin = 0;                 // final sup/inf-convolution half-width
    int attempts = 0;
};

// Pointwise domination psi_minus <= psi <= psi_plus is hard-checked on a
// 10^4-point grid spanning the support widened by 5; on failure the margin
// doubles, with at most three attempts.
Approximants approximants(const WindowFunction& psi, double delta);

// --- conjugate characteristic function --------------------------------

std::complex<double> conjugate_cf(const std::vector<std::pair<double, double>>& atoms,
                                  double xi);
std::complex<double> conjugate_cf(const EmpiricalCDF& cdf, double xi);

// --- Berry-Esseen smoothing inequality --------------------------------

struct SmoothCdf {
    std::function<double(double)> cdf;
    double density_bound = 0;  // m with |H'| <= m
};

struct GapBoundReport {
    double lhs = 0;        // sup |F - H|
    double sup_conv = 0;   // sup over |u| <= kappa delta^{-2} of |(F-H)*theta_delta|
    double rhs = 0;        // 2 sup_conv + C delta^2
    double kernel_c = 0;   // tail constant c
    double kappa = 0;      // 1 + 4c
    double big_c = 0;      // 12 m c
    double far_field = 0;  // sup over |u| >= delta^{-2} of |F - H|
    bool applicable = false;  // far_field <= big_c delta^2
    bool pass = false;        // lhs <= rhs (meaningful when applicable)
};

GapBoundReport smoothing_gap_bound(const EmpiricalCDF& F, const SmoothCdf& H, double delta,
                                   const SmoothingKernel& kernel);

double gaussian_cdf(double x, double sd);
double gaussian_pdf(double x, double sd);

// --- partition of unity around a hyperplane ---------------------------

// chi_k(w) = chi~(log d(w, H_y)/zeta + k) where chi~ is an even plateau
// bump built from the cubic smoothstep, with chi~(t) + chi~(t-1) = 1 on
// [0, 1]. Each chi_k is supported by the annulus
// { exp(-(k+1) zeta) < d(w, H_y) < exp(-(k-1) zeta) }.
class PartitionOfUnity {
public:
    PartitionOfUnity(DualPoint y, double zeta, int count_cap);

    static double bump(double t);  // chi~

    double chi_from_logdist(int k, double log_dist) const;
    double chi(int k, const ProjPoint& w) const;
    double tail_from_logdist(double log_dist) const;  // 1 - sum_{k <= K} chi_k
    double tail(const ProjPoint& w) const;
    double log_dist(const ProjPoint& w) const;

    const DualPoint& dual() const { return y_; }
    double zeta() const { return zeta_; }
    int count_cap() const { return cap_; }

private:
    DualPoint y_;
    double zeta_;
    int cap_;
    void verify(uint64_t seed) const;  // construction-time invariant sweep
};

PartitionOfUnity build_partition(DualPoint y, double zeta, int count_cap);

// --- aggregate functions over the partition ---------------------------

// Phi_{n,xi}(w) = sum_{0 <= k <= C log n / zeta} e^{sign i xi k zeta / sqrt n} chi_k(w)
// and Phi*_n(w) = 1 - sum over the same k of chi_k(w).
class PhiAggregates {
public:
    PhiAggregates(const PartitionOfUnity& part, long n, double scale_constant, int sign);

    int k_max() const { return k_max_; }
    long n() const { return n_; }

    std::complex<double> phi_xi_from_logdist(double log_dist, double xi) const;
    std::complex<double> phi_xi(const ProjPoint& w, double xi) const;
    double phi_star_from_logdist(double log_dist) const;
    double phi_star(const ProjPoint& w) const;
    double phase(int k, double xi) const;  // sign * xi * k * zeta / sqrt(n)

private:
    const PartitionOfUnity* part_;
    long n_;
    int sign_;
    int k_max_;
    double sqrt_n_;
};

PhiAggregates phi_aggregates(const PartitionOfUnity& part, long n, double scale_constant,
                             int sign);

}  // namespace rmp
