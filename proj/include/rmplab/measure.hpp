#pragma once

// Finitely supported probability measures on GL_d(R) and heuristic checks
// of the standing assumptions (proximality, strong irreducibility). The
// checks warn, they never gate: the hypotheses are semigroup-theoretic and
// not decidable from finite sampling.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rmplab/projective.hpp"

namespace rmp {

class MatrixMeasure {
public:
    // Validates and normalizes: weights are renormalized to sum 1, zero or
    // negative weights and singular atoms are rejected with the offending
    // index named in the error.
    MatrixMeasure(std::vector<Mat> atoms, std::vector<double> weights);

    int dim() const { return dim_; }
    int atom_count() const { return static_cast<int>(atoms_.size()); }
    const GroupAtom& atom(int i) const { return atoms_[i]; }
    double weight(int i) const { return weights_[i]; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<double>& cumulative_weights() const { return cumw_; }
    double max_big_n() const { return max_big_n_; }

    int sample_atom(double u01) const;  // inverse-CDF draw, u01 in [0,1)

private:
    std::vector<GroupAtom> atoms_;
    std::vector<double> weights_;
    std::vector<double> cumw_;
    int dim_ = 0;
    double max_big_n_ = 1.0;
};

enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Verdict v);

struct ProximalityReport {
    bool found = false;
    std::vector<int> witness_word;  // indices into the atom list, leftmost applied last
    double gap_ratio = 0.0;         // |lambda_1| / |lambda_2| of the witness product
    std::string evidence;
};

struct IrreducibilityReport {
    Verdict verdict = Verdict::Inconclusive;
    std::string evidence;
    int distinct_attractors = 0;
};

struct AssumptionReport {
    ProximalityReport proximal;
    IrreducibilityReport irreducibility;
};

// Random-word search for a product with |lambda_1|/|lambda_2| > 1 + 1e-6.
// Words of length 1 and 2 are tried exhaustively first, then random words
// up to max_word_len. Deterministic for a fixed seed.
ProximalityReport check_proximal(const MatrixMeasure& mu, int max_word_len, int trials,
                                 uint64_t rng_seed);

// Heuristic: fail when the atoms' real eigendirections form an invariant
// finite union of lines; pass (d = 2) when at least three distinct
// attracting directions of proximal products are exhibited, or (d >= 3)
// when no common eigendirection exists and random orbits span R^d.
IrreducibilityReport check_strong_irreducibility(const MatrixMeasure& mu, int trials,
                                                 uint64_t rng_seed);

AssumptionReport check_assumptions(const MatrixMeasure& mu, uint64_t rng_seed);

// Exact support of mu^{*n}: all products g_{i_n} ... g_{i_1} with their
// weights. Refuses when atom_count^n exceeds 2^24.
std::vector<std::pair<GroupAtom, double>> convolution_enumerate(const MatrixMeasure& mu, int n);

inline constexpr uint64_t kEnumerationCap = uint64_t(1) << 24;

// Throws (with the required budget in the message) when atoms^n > cap.
uint64_t enumeration_size(const MatrixMeasure& mu, int n);

// The two-atom testbed used throughout: g1 = [[2,1],[1,1]],
// g2 = [[1,1],[1,2]], uniform weights. Positive matrices, proximal and
// strongly irreducible by inspection, with an enumerable small-n law.
MatrixMeasure benchmark_measure();

}  // namespace rmp
