#include "rmplab/projective.hpp"

#include <cmath>

namespace rmp {

Vec canonicalize_unit(Vec v) {
    double n2 = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) throw std::invalid_argument("projective point: non-finite entry");
        n2 += x * x;
    }
    if (n2 == 0.0) throw std::invalid_argument("projective point: zero vector");
    const double inv = 1.0 / std::sqrt(n2);
    for (double& x : v) x *= inv;
    for (double x : v) {
        if (std::abs(x) > 1e-14) {
            if (x < 0)
                for (double& y : v) y = -y;
            break;
        }
    }
    return v;
}

ProjPoint::ProjPoint(Vec v) : v_(canonicalize_unit(std::move(v))) {}

DualPoint::DualPoint(Vec f) : f_(canonicalize_unit(std::move(f))) {}

GroupAtom::GroupAtom(Mat m) : m_(std::move(m)) {
    if (!m_.finite()) throw std::invalid_argument("GroupAtom: non-finite entries");
    const Vec sv = singular_values(m_);
    op_norm_ = sv.front();
    const double smin = sv.back();
    det_ = determinant(m_);
    double thresh = 1e-12;
    for (int i = 0; i < m_.dim(); ++i) thresh *= op_norm_;
    if (!(std::abs(det_) >= thresh))
        throw std::invalid_argument("GroupAtom: matrix is singular or nearly so (|det| < 1e-12 |g|^d)");
    inv_op_norm_ = 1.0 / smin;
    big_n_ = std::max(op_norm_, inv_op_norm_);
}

double proj_distance(const ProjPoint& x, const ProjPoint& w) {
    double c = dot(x.rep(), w.rep());
    c = std::min(1.0, std::abs(c));
    return std::sqrt(std::max(0.0, 1.0 - c * c));
}

ProjPoint act(const Mat& g, const ProjPoint& x) { return ProjPoint(matvec(g, x.rep())); }

ProjPoint act(const GroupAtom& g, const ProjPoint& x) { return act(g.matrix(), x); }

double norm_cocycle(const Mat& g, const ProjPoint& x) {
    return std::log(norm2(matvec(g, x.rep())));
}

double norm_cocycle(const GroupAtom& g, const ProjPoint& x) {
    return norm_cocycle(g.matrix(), x);
}

double dual_pairing(const ProjPoint& x, const DualPoint& y) {
    return std::min(1.0, std::abs(dot(x.rep(), y.rep())));
}

double coefficient_log(const Mat& g, const ProjPoint& x, const DualPoint& y) {
    const double p = std::abs(dot(y.rep(), matvec(g, x.rep())));
    if (p == 0.0) return kNegInf;
    return std::log(p);
}

double coefficient_log(const GroupAtom& g, const ProjPoint& x, const DualPoint& y) {
    return coefficient_log(g.matrix(), x, y);
}

}  // namespace rmp
