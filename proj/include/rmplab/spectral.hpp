#pragma once

// Discretized Markov operator P and its twisted perturbations
//   (P_z phi)(x) = sum_a w_a exp(z sigma(g_a, x)) phi(g_a x)
// on P^{d-1}. For d = 2 the grid is exact (equispaced angles on the
// half-circle with linear interpolation); for d >= 3 a quasi-uniform point
// cloud with inverse-distance interpolation is used and every spectral
// output carries an `approximate` flag.

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "rmplab/measure.hpp"

namespace rmp {

struct OperatorGrid {
    int dim = 2;
    int resolution = 0;   // M
    bool exact = true;    // true only for the d = 2 angle grid
    std::vector<ProjPoint> points;

    static OperatorGrid circle(int M);                          // d = 2
    static OperatorGrid cloud(int dim, int M, uint64_t seed);   // d >= 3

    int size() const { return static_cast<int>(points.size()); }
};

using CVec = std::vector<std::complex<double>>;

class TransferOperator {
public:
    TransferOperator(const MatrixMeasure& mu, OperatorGrid grid, double re_bound = 0.5);

    const OperatorGrid& grid() const { return grid_; }
    int size() const { return grid_.size(); }
    bool approximate() const { return !grid_.exact; }
    double re_bound() const { return re_bound_; }

    // One application of P_z. Throws when |Re z| exceeds the configured
    // bound (the perturbative regime of the twist).
    CVec apply(std::complex<double> z, const CVec& phi) const;

    // Precomputed twist coefficients for repeated application at fixed z.
    struct Applier {
        const TransferOperator* op;
        CVec twist;  // per (point, atom)
        CVec operator()(const CVec& phi) const;
    };
    Applier applier(std::complex<double> z) const;

    // Left-stationary vector of P_0 on the grid (nonnegative, sums to 1).
    Vec stationary_vector(double tol = 1e-13, int max_iter = 100000) const;

private:
    OperatorGrid grid_;
    double re_bound_;
    int atoms_;
    std::vector<double> atom_weight_;
    std::vector<double> sigma_;     // [point * atoms + a]
    std::vector<int> stencil_idx_;  // [entry]
    std::vector<double> stencil_w_; // [entry]
    std::vector<int> stencil_ptr_;  // per (point, atom): start into entries
    friend struct Applier;
};

struct EigenFailure : std::runtime_error {
    EigenFailure(const std::string& what, double residual, int iters)
        : std::runtime_error(what), last_residual(residual), iterations(iters) {}
    double last_residual;
    int iterations;
};

struct EigenPair {
    std::complex<double> lambda;
    CVec phi;         // sup-norm 1, phase fixed at the reference point
    double residual;  // sup |P_z phi - lambda phi| / sup |phi|
    int iterations;
};

EigenPair leading_eigen(const TransferOperator& op, std::complex<double> z, double tol = 1e-10,
                        int max_iter = 20000, const CVec* warm_start = nullptr);

// Modulus of the second eigenvalue of P_0, from power iteration on the
// deflated operator phi -> P phi - nu(phi) 1. Throws EigenFailure when the
// growth estimate does not stabilize.
double spectral_gap_at_zero(const TransferOperator& op, int burn = 100, int steps = 600);

struct SpectralCurve {
    std::vector<double> xi;
    CVec lambda;
    std::vector<double> residual;
    std::vector<CVec> eigenfunctions;
    double gap_at_zero = 0.0;
    double fitted_gamma = 0.0;
    double fitted_rho_sq = 0.0;
    bool approximate = false;
};

// lambda_{i xi} along a grid of frequencies, with the quadratic expansion
// lambda = 1 + i gamma xi - (rho^2 + gamma^2)/2 xi^2 + O(xi^3) fitted by
// quartic least squares over |xi| <= fit_window.
SpectralCurve lambda_curve(const TransferOperator& op, const std::vector<double>& xi_grid,
                           double fit_window = 0.3, bool with_gap = true);

struct LambdaCheckRow {
    long n;
    double xi0;      // largest verified xi_0 for the |lambda^n| bound
    double c_fit;    // fitted constant of the two expansion bounds
    bool all_hold;
};

struct LambdaCheckReport {
    bool degenerate = false;  // rho^2 <= 0
    double xi0_hat = 0.0;     // min over n
    double c_hat = 0.0;       // max over n
    std::vector<LambdaCheckRow> rows;
};

LambdaCheckReport lambda_estimates_check(const TransferOperator& op, double gamma, double rho_sq,
                                         const std::vector<long>& n_list);

struct HighFreqReport {
    double xi = 0.0;
    double rho_k_hat = 1.0;   // fitted decay factor of |P_{i xi}^n|
    double slope_se = 0.0;
    bool decays = false;      // rho_k_hat + 2 se < 1
    bool monotone_after_burn = false;
};

HighFreqReport high_frequency_decay(const TransferOperator& op, double xi, int n_max = 80,
                                    int burn = 20);

void write_curve_csv(const std::string& path, const SpectralCurve& curve);

}  // namespace rmp
