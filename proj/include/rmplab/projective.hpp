#pragma once

// Geometry of the real projective space P^{d-1}: sign-canonical unit
// representatives, the sine distance, the norm cocycle and the
// coefficient decomposition log|<f, g v>| = sigma(g,x) + log d(gx, H_y).

#include <limits>
#include <string>

#include "rmplab/linalg.hpp"

namespace rmp {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// A point [v] of P^{d-1}: unit representative with the first coordinate
// above 1e-14 in modulus made positive, so equality is testable.
class ProjPoint {
public:
    ProjPoint() = default;  // empty placeholder, filled by sampling buffers
    explicit ProjPoint(Vec v);
    const Vec& rep() const { return v_; }
    int dim() const { return static_cast<int>(v_.size()); }

private:
    Vec v_;
};

// A dual point [f]: unit covector, same canonical form. Its kernel is the
// projective hyperplane H_y.
class DualPoint {
public:
    explicit DualPoint(Vec f);
    const Vec& rep() const { return f_; }
    int dim() const { return static_cast<int>(f_.size()); }

private:
    Vec f_;
};

// An invertible matrix with its cached operator norm, inverse operator
// norm and N(g) = max(|g|, |g^-1|). Construction rejects matrices with
// |det| < 1e-12 * |g|^d.
class GroupAtom {
public:
    explicit GroupAtom(Mat m);

    const Mat& matrix() const { return m_; }
    int dim() const { return m_.dim(); }
    double op_norm() const { return op_norm_; }
    double inv_op_norm() const { return inv_op_norm_; }
    double big_n() const { return big_n_; }
    double det() const { return det_; }

private:
    Mat m_;
    double op_norm_ = 0.0;
    double inv_op_norm_ = 0.0;
    double big_n_ = 0.0;
    double det_ = 0.0;
};

Vec canonicalize_unit(Vec v);  // shared by ProjPoint/DualPoint

// d(x,w) = sqrt(1 - <v_x, v_w>^2), the sine of the angle between lines.
double proj_distance(const ProjPoint& x, const ProjPoint& w);

ProjPoint act(const GroupAtom& g, const ProjPoint& x);
ProjPoint act(const Mat& g, const ProjPoint& x);

// sigma(g, x) = log |g v_x| for the unit representative.
double norm_cocycle(const GroupAtom& g, const ProjPoint& x);
double norm_cocycle(const Mat& g, const ProjPoint& x);

// Delta(x, y) = |<f, v>| = d(x, H_y).
double dual_pairing(const ProjPoint& x, const DualPoint& y);

// log(|<f, g v>| / (|f| |v|)). Exactly vanishing pairings yield -inf
// rather than an error; such events carry zero mass under the standing
// assumptions but must not abort batch runs.
double coefficient_log(const GroupAtom& g, const ProjPoint& x, const DualPoint& y);
double coefficient_log(const Mat& g, const ProjPoint& x, const DualPoint& y);

}  // namespace rmp
