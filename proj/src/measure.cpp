#include "rmplab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rmplab/rng.hpp"

namespace rmp {

MatrixMeasure::MatrixMeasure(std::vector<Mat> raw, std::vector<double> weights)
    : weights_(std::move(weights)) {
    if (raw.empty()) throw std::invalid_argument("MatrixMeasure: empty support");
    if (raw.size() != weights_.size())
        throw std::invalid_argument("MatrixMeasure: atom/weight count mismatch");
    dim_ = raw.front().dim();
    if (dim_ < 2) throw std::invalid_argument("MatrixMeasure: dimension must be >= 2");

    double total = 0.0;
    for (size_t i = 0; i < weights_.size(); ++i) {
        if (!(weights_[i] > 0.0))
            throw std::invalid_argument("MatrixMeasure: zero weight atom at index " +
                                        std::to_string(i));
        total += weights_[i];
    }
    if (!(total > 0.0)) throw std::invalid_argument("MatrixMeasure: zero total weight");

    atoms_.reserve(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        if (raw[i].dim() != dim_)
            throw std::invalid_argument("MatrixMeasure: atom " + std::to_string(i) +
                                        " has mismatched dimension");
        try {
            atoms_.emplace_back(std::move(raw[i]));
        } catch (const std::exception& e) {
            throw std::invalid_argument("MatrixMeasure: atom " + std::to_string(i) + ": " +
                                        e.what());
        }
        max_big_n_ = std::max(max_big_n_, atoms_.back().big_n());
    }

    cumw_.resize(weights_.size());
    double acc = 0.0;
    for (size_t i = 0; i < weights_.size(); ++i) {
        weights_[i] /= total;
        acc += weights_[i];
        cumw_[i] = acc;
    }
    cumw_.back() = 1.0;
}

int MatrixMeasure::sample_atom(double u01) const {
    const int k = atom_count();
    for (int i = 0; i < k - 1; ++i)
        if (u01 < cumw_[i]) return i;
    return k - 1;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        default: return "inconclusive";
    }
}

namespace {

Mat word_product(const MatrixMeasure& mu, const std::vector<int>& word) {
    Mat p = mu.atom(word.front()).matrix();
    for (size_t i = 1; i < word.size(); ++i) p = mu.atom(word[i]).matrix() * p;
    return p;
}

// |lambda_1| / |lambda_2|; returns 0 when the spectrum is degenerate.
double eigen_gap_ratio(const Mat& m) {
    const auto ev = eigenvalues(m);
    if (ev.size() < 2) return 0.0;
    const double l1 = std::abs(ev[0]), l2 = std::abs(ev[1]);
    if (l2 == 0.0) return std::numeric_limits<double>::infinity();
    return l1 / l2;
}

constexpr double kGapThreshold = 1.0 + 1e-6;

// Real eigendirections of g: for each real eigenvalue, the null direction
// of g - lambda I, sign-canonicalized.
std::vector<Vec> real_eigendirections(const Mat& g, double imag_tol = 1e-8) {
    std::vector<Vec> dirs;
    for (const cplx& ev : eigenvalues(g)) {
        if (std::abs(ev.imag()) > imag_tol * (1.0 + std::abs(ev))) continue;
        Mat shifted = g;
        for (int i = 0; i < g.dim(); ++i) shifted(i, i) -= ev.real();
        Vec v = smallest_singular_vector(shifted);
        dirs.push_back(canonicalize_unit(std::move(v)));
    }
    return dirs;
}

bool contains_direction(const std::vector<Vec>& set, const Vec& v, double tol) {
    for (const Vec& s : set) {
        double c = std::abs(dot(s, v));
        if (std::sqrt(std::max(0.0, 1.0 - std::min(1.0, c) * std::min(1.0, c))) < tol) return true;
    }
    return false;
}

// Attracting direction of a proximal product: dominant eigendirection.
std::optional<Vec> attracting_direction(const Mat& m) {
    const auto ev = eigenvalues(m);
    if (ev.size() < 2) return std::nullopt;
    if (std::abs(ev[0]) <= kGapThreshold * std::abs(ev[1])) return std::nullopt;
    if (std::abs(ev[0].imag()) > 1e-8 * (1.0 + std::abs(ev[0]))) return std::nullopt;
    Mat shifted = m;
    for (int i = 0; i < m.dim(); ++i) shifted(i, i) -= ev[0].real();
    return canonicalize_unit(smallest_singular_vector(shifted));
}

}  // namespace

ProximalityReport check_proximal(const MatrixMeasure& mu, int max_word_len, int trials,
                                 uint64_t rng_seed) {
    ProximalityReport rep;
    const int k = mu.atom_count();

    auto consider = [&](const std::vector<int>& word) -> bool {
        const double ratio = eigen_gap_ratio(word_product(mu, word));
        if (ratio > kGapThreshold && ratio > rep.gap_ratio) {
            rep.found = true;
            rep.witness_word = word;
            rep.gap_ratio = ratio;
        }
        return rep.found;
    };

    for (int i = 0; i < k; ++i)
        if (consider({i})) {
            rep.evidence = "length-1 word with eigenvalue gap " + std::to_string(rep.gap_ratio);
            return rep;
        }
    if (max_word_len >= 2) {
        for (int i = 0; i < k && !rep.found; ++i)
            for (int j = 0; j < k && !rep.found; ++j) consider({i, j});
        if (rep.found) {
            rep.evidence = "length-2 word with eigenvalue gap " + std::to_string(rep.gap_ratio);
            return rep;
        }
    }

    SplitMix64 rng(derive_seed(rng_seed, 1));
    for (int t = 0; t < trials && !rep.found; ++t) {
        const int len = 3 + static_cast<int>(rng.below(std::max(1, max_word_len - 2)));
        std::vector<int> word(len);
        for (int& w : word) w = static_cast<int>(rng.below(k));
        consider(word);
        if (rep.found)
            rep.evidence = "random word of length " + std::to_string(len) +
                           " with eigenvalue gap " + std::to_string(rep.gap_ratio);
    }
    if (!rep.found)
        rep.evidence = "no proximal product found among words up to length " +
                       std::to_string(max_word_len) + " (" + std::to_string(trials) +
                       " random trials)";
    return rep;
}

IrreducibilityReport check_strong_irreducibility(const MatrixMeasure& mu, int trials,
                                                 uint64_t rng_seed) {
    IrreducibilityReport rep;
    const int k = mu.atom_count();
    const int d = mu.dim();
    const double tol = 1e-9;

    // Candidate invariant finite union: the atoms' real eigendirections.
    std::vector<Vec> candidates;
    for (int i = 0; i < k; ++i)
        for (Vec& v : real_eigendirections(mu.atom(i).matrix()))
            if (!contains_direction(candidates, v, 1e-8)) candidates.push_back(std::move(v));

    if (!candidates.empty()) {
        bool closed = true;
        for (int i = 0; i < k && closed; ++i)
            for (const Vec& v : candidates) {
                Vec img = canonicalize_unit(matvec(mu.atom(i).matrix(), v));
                if (!contains_direction(candidates, img, 1e-7)) {
                    closed = false;
                    break;
                }
            }
        if (closed) {
            rep.verdict = Verdict::Fail;
            rep.evidence = "the " + std::to_string(candidates.size()) +
                           " real eigendirections of the atoms form an invariant finite union "
                           "of lines";
            return rep;
        }
    }

    SplitMix64 rng(derive_seed(rng_seed, 2));

    // Positive evidence, d = 2: three distinct attracting directions.
    if (d == 2) {
        std::vector<Vec> attractors;
        auto push = [&](const std::optional<Vec>& a) {
            if (a && !contains_direction(attractors, *a, 1e-6)) attractors.push_back(*a);
        };
        for (int i = 0; i < k; ++i) push(attracting_direction(mu.atom(i).matrix()));
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                push(attracting_direction(word_product(mu, {i, j})));
        for (int t = 0; t < trials && attractors.size() < 3; ++t) {
            const int len = 3 + static_cast<int>(rng.below(10));
            std::vector<int> word(len);
            for (int& w : word) w = static_cast<int>(rng.below(k));
            push(attracting_direction(word_product(mu, word)));
        }
        rep.distinct_attractors = static_cast<int>(attractors.size());
        if (attractors.size() >= 3) {
            rep.verdict = Verdict::Pass;
            rep.evidence = std::to_string(attractors.size()) +
                           " distinct attracting directions of proximal products exhibited";
        } else {
            rep.verdict = Verdict::Inconclusive;
            rep.evidence = "only " + std::to_string(attractors.size()) +
                           " attracting direction(s) found; evidence is ambiguous";
        }
        return rep;
    }

    // d >= 3: no common eigendirection across atoms, plus orbit spanning.
    for (const Vec& v : candidates) {
        bool common = true;
        for (int i = 0; i < k; ++i) {
            Vec img = canonicalize_unit(matvec(mu.atom(i).matrix(), v));
            double c = std::min(1.0, std::abs(dot(img, v)));
            if (std::sqrt(std::max(0.0, 1.0 - c * c)) > tol) {
                common = false;
                break;
            }
        }
        if (common) {
            rep.verdict = Verdict::Fail;
            rep.evidence = "a common eigendirection of all atoms exists (invariant line)";
            return rep;
        }
    }

    // Orbit of a random line should span R^d.
    std::vector<Vec> orbit;
    Vec v0(d);
    for (double& x : v0) x = rng.uniform01() - 0.5;
    Vec v = canonicalize_unit(std::move(v0));
    orbit.push_back(v);
    for (int t = 0; t < std::max(trials, 8 * d); ++t) {
        const int i = static_cast<int>(rng.below(k));
        v = canonicalize_unit(matvec(mu.atom(i).matrix(), v));
        orbit.push_back(v);
    }
    Mat gram(d);
    for (const Vec& u : orbit)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) gram(i, j) += u[i] * u[j];
    const auto ge = sym_eigen_jacobi(gram);
    const bool spans = ge.values.front() > 1e-8 * ge.values.back();
    if (spans) {
        rep.verdict = Verdict::Pass;
        rep.evidence = "no common eigendirection; orbit of a random line spans R^d "
                       "(heuristic for d >= 3)";
    } else {
        rep.verdict = Verdict::Inconclusive;
        rep.evidence = "orbit of a random line appears confined to a proper subspace";
    }
    return rep;
}

AssumptionReport check_assumptions(const MatrixMeasure& mu, uint64_t rng_seed) {
    AssumptionReport rep;
    rep.proximal = check_proximal(mu, 12, 400, rng_seed);
    rep.irreducibility = check_strong_irreducibility(mu, 400, rng_seed);
    return rep;
}

uint64_t enumeration_size(const MatrixMeasure& mu, int n) {
    if (n < 1) throw std::invalid_argument("enumeration: n must be >= 1");
    uint64_t total = 1;
    const uint64_t k = static_cast<uint64_t>(mu.atom_count());
    for (int i = 0; i < n; ++i) {
        if (total > kEnumerationCap / k)
            throw std::invalid_argument(
                "enumeration: atom_count^n exceeds the 2^24 cap (required budget ~" +
                std::to_string(static_cast<double>(total) * static_cast<double>(k)) + " atoms)");
        total *= k;
    }
    if (total > kEnumerationCap)
        throw std::invalid_argument("enumeration: atom_count^n exceeds the 2^24 cap");
    return total;
}

std::vector<std::pair<GroupAtom, double>> convolution_enumerate(const MatrixMeasure& mu, int n) {
    enumeration_size(mu, n);
    const int k = mu.atom_count();
    std::vector<std::pair<Mat, double>> level;
    level.reserve(k);
    for (int i = 0; i < k; ++i) level.emplace_back(mu.atom(i).matrix(), mu.weight(i));
    for (int step = 1; step < n; ++step) {
        std::vector<std::pair<Mat, double>> next;
        next.reserve(level.size() * k);
        for (const auto& [p, w] : level)
            for (int i = 0; i < k; ++i)
                next.emplace_back(mu.atom(i).matrix() * p, w * mu.weight(i));
        level = std::move(next);
    }
    std::vector<std::pair<GroupAtom, double>> out;
    out.reserve(level.size());
    for (auto& [p, w] : level) out.emplace_back(GroupAtom(std::move(p)), w);
    return out;
}

MatrixMeasure benchmark_measure() {
    Mat g1(2, {2, 1, 1, 1});
    Mat g2(2, {1, 1, 1, 2});
    return MatrixMeasure({g1, g2}, {0.5, 0.5});
}

}  // namespace rmp
