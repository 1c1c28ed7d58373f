#pragma once

// Seeded, parallel, overflow-free sampling of the path functionals
// (sigma(S_n, x), log d(S_n x, H_y)) and the exact small-n law by
// enumeration. Results are bit-identical for a fixed (seed, samples)
// pair regardless of the worker count.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmplab/measure.hpp"

namespace rmp {

struct PathFunctionals {
    double sigma = 0.0;     // sigma(S_n, x) minus n*gamma_hat when centering is requested
    double log_dist = 0.0;  // log d(S_n x, H_y)
    double coeff_log = 0.0; // their sum (-inf propagated from vanishing pairings)
    ProjPoint end_point;    // S_n x
};

// Simulates `samples` independent paths of length n. The cocycle is
// accumulated by telescoping with periodic renormalization of the carried
// vector, so no n overflows the double range.
std::vector<PathFunctionals> run_paths(const MatrixMeasure& mu, const ProjPoint& x,
                                       const DualPoint& y, long n, long samples, uint64_t seed,
                                       int workers, std::optional<double> center_gamma = {});

// Exact law of the functionals under mu^{*n} as weighted atoms.
std::vector<std::pair<PathFunctionals, double>> exact_functionals(const MatrixMeasure& mu,
                                                                  const ProjPoint& x,
                                                                  const DualPoint& y, int n,
                                                                  std::optional<double>
                                                                      center_gamma = {});

class EmpiricalCDF {
public:
    static EmpiricalCDF from_samples(std::vector<double> values);
    static EmpiricalCDF from_weighted(std::vector<std::pair<double, double>> atoms);

    // P(X <= b), right-continuous.
    double query(double b) const;
    size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }
    bool weighted() const { return !cum_.empty(); }

private:
    std::vector<double> values_;  // sorted ascending
    std::vector<double> cum_;     // cumulative weights; empty for equal weights
};

// sup_b |F(b) - G(b)|, evaluated exactly over the jump points of both.
double kolmogorov_distance(const EmpiricalCDF& f, const EmpiricalCDF& g);

// Dvoretzky-Kiefer-Wolfowitz band: with m samples, the empirical CDF stays
// within eps of the truth with probability >= 1 - alpha.
double dkw_epsilon(size_t m, double alpha);

// Raw sample export, columns (path_index, sigma, log_dist, coeff_log).
void write_samples_csv(const std::string& path, const std::vector<PathFunctionals>& rows);

}  // namespace rmp
