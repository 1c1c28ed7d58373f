#pragma once

// Estimation of the analytic constants of the walk: the first Lyapunov
// exponent gamma, the CLT variance rho^2, the stationary (Furstenberg)
// measure and the regularity exponent of its hyperplane tubes.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmplab/montecarlo.hpp"

namespace rmp {

struct LyapunovEstimate {
    double gamma_hat = 0.0;
    double std_error = 0.0;
    long n_used = 0;
    long samples_used = 0;
    uint64_t seed = 0;
    // sigma(S_n,x) <= log|S_n| <= sigma(S_n,x) + log(sqrt d) bounds the
    // substitution bias by log(sqrt d)/n.
    double substitution_bias_bound = 0.0;
};

LyapunovEstimate estimate_lyapunov(const MatrixMeasure& mu, long n, long samples, uint64_t seed,
                                   int workers = 0,
                                   std::optional<ProjPoint> x0 = std::nullopt);

struct VarianceEstimate {
    double rho_sq_hat = 0.0;
    double std_error = 0.0;
    std::string method;  // "clt-empirical" or "spectral-curvature"
    bool degenerate = false;
};

VarianceEstimate estimate_variance_clt(const MatrixMeasure& mu, long n, long samples,
                                       uint64_t seed, double gamma_hat, int workers = 0,
                                       std::optional<ProjPoint> x0 = std::nullopt);

struct StationaryCloud {
    std::vector<ProjPoint> points;
    std::vector<double> weights;  // uniform, kept explicit for the contract
    long burn_in = 0;
    long chain_length = 0;
};

// Occupation measure of the chain x_{k+1} = g_{k+1} x_k after burn-in.
// Chains are independent and concatenated by chain index, so the result
// does not depend on the worker count.
StationaryCloud estimate_stationary(const MatrixMeasure& mu, long burn_in, long chain_length,
                                    uint64_t seed, int workers = 0, int chains = 8,
                                    std::optional<ProjPoint> x0 = std::nullopt);

struct RegularityFit {
    bool ok = false;          // false = "no fit": not enough mass near H_y
    double eta_hat = 0.0;     // slope of log nu(B(H_y, r)) vs log r
    double c_hat = 0.0;       // intercept (log C)
    int radii_used = 0;
};

// Least-squares fit over the radii where the empirical tube count is at
// least 50 (Poisson noise dominates below that).
RegularityFit regularity_exponent(const StationaryCloud& cloud, const DualPoint& y,
                                  const std::vector<double>& r_grid);

// Plain-text estimate cache: one "name = value +- error" line each.
struct EstimateCache {
    double gamma = 0.0, gamma_err = 0.0;
    double rho_sq = 0.0, rho_sq_err = 0.0;
    long n_used = 0, samples_used = 0;
    uint64_t seed = 0;
    bool degenerate_variance = false;

    void write(const std::string& path) const;
    static EstimateCache read(const std::string& path);  // throws with advice when missing
};

// Ordinary least squares of y against x; returns slope, intercept and the
// standard error of the slope.
struct LineFit {
    double slope = 0.0, intercept = 0.0, slope_se = 0.0;
    int points = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace rmp
