#include "rmplab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rmp {

Mat Mat::transpose() const {
    Mat t(n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

bool Mat::finite() const {
    for (double v : a_)
        if (!std::isfinite(v)) return false;
    return true;
}

Mat operator*(const Mat& a, const Mat& b) {
    if (a.n_ != b.n_) throw std::invalid_argument("Mat multiply: dimension mismatch");
    const int n = a.n_;
    Mat c(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Mat operator*(double c, const Mat& a) {
    Mat r = a;
    for (int i = 0; i < r.dim(); ++i)
        for (int j = 0; j < r.dim(); ++j) r(i, j) *= c;
    return r;
}

Vec matvec(const Mat& m, const Vec& v) {
    const int n = m.dim();
    if (static_cast<int>(v.size()) != n) throw std::invalid_argument("matvec: size mismatch");
    Vec r(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += m(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const Vec& v) { return std::sqrt(dot(v, v)); }

namespace {

double frobenius(const Mat& m) {
    double s = 0.0;
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

double offdiag_norm(const Mat& m) {
    double s = 0.0;
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j)
            if (i != j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
}

}  // namespace

SymEigen sym_eigen_jacobi(const Mat& m, double rel_tol, int max_sweeps) {
    const int n = m.dim();
    Mat a = m;
    Mat v = Mat::identity(n);
    const double scale = frobenius(m);
    const double tol = rel_tol * (scale > 0 ? scale : 1.0);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (offdiag_norm(a) <= tol) break;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= tol * 1e-3) continue;
                const double app = a(p, p), aqq = a(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    SymEigen out;
    out.values.resize(n);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Vec diag(n);
    for (int i = 0; i < n; ++i) diag[i] = a(i, i);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return diag[i] < diag[j]; });
    out.vectors = Mat(n);
    for (int k = 0; k < n; ++k) {
        out.values[k] = diag[order[k]];
        for (int i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

Vec singular_values(const Mat& m) {
    const SymEigen e = sym_eigen_jacobi(m.transpose() * m);
    Vec sv(e.values.size());
    for (size_t i = 0; i < sv.size(); ++i)
        sv[i] = std::sqrt(std::max(0.0, e.values[e.values.size() - 1 - i]));
    return sv;
}

double operator_norm(const Mat& m) {
    if (!m.finite()) throw std::invalid_argument("operator_norm: non-finite entries");
    return singular_values(m).front();
}

double inverse_operator_norm(const Mat& m) {
    if (!m.finite()) throw std::invalid_argument("inverse_operator_norm: non-finite entries");
    const double smin = singular_values(m).back();
    if (smin == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / smin;
}

double determinant(const Mat& m) {
    const int n = m.dim();
    Mat a = m;
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
        if (a(piv, col) == 0.0) return 0.0;
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a(piv, j), a(col, j));
            det = -det;
        }
        det *= a(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            for (int j = col; j < n; ++j) a(r, j) -= f * a(col, j);
        }
    }
    return det;
}

namespace {

// Householder reduction of a real matrix to upper Hessenberg form,
// returned as a complex matrix for the QR stage.
std::vector<cplx> hessenberg_complex(const Mat& m) {
    const int n = m.dim();
    std::vector<double> h(m.data());
    auto H = [&](int i, int j) -> double& { return h[static_cast<size_t>(i) * n + j]; };

    for (int k = 0; k < n - 2; ++k) {
        double xnorm = 0.0;
        for (int i = k + 1; i < n; ++i) xnorm += H(i, k) * H(i, k);
        xnorm = std::sqrt(xnorm);
        if (xnorm == 0.0) continue;
        const double alpha = (H(k + 1, k) >= 0 ? -xnorm : xnorm);
        std::vector<double> u(n, 0.0);
        u[k + 1] = H(k + 1, k) - alpha;
        for (int i = k + 2; i < n; ++i) u[i] = H(i, k);
        double unorm2 = 0.0;
        for (int i = k + 1; i < n; ++i) unorm2 += u[i] * u[i];
        if (unorm2 == 0.0) continue;
        const double beta = 2.0 / unorm2;
        // H <- (I - beta u u^T) H
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = k + 1; i < n; ++i) s += u[i] * H(i, j);
            s *= beta;
            for (int i = k + 1; i < n; ++i) H(i, j) -= s * u[i];
        }
        // H <- H (I - beta u u^T)
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = k + 1; j < n; ++j) s += H(i, j) * u[j];
            s *= beta;
            for (int j = k + 1; j < n; ++j) H(i, j) -= s * u[j];
        }
    }

    std::vector<cplx> out(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            out[static_cast<size_t>(i) * n + j] = cplx(H(i, j), 0.0);
    // zero out anything below the first subdiagonal
    for (int i = 2; i < n; ++i)
        for (int j = 0; j < i - 1; ++j) out[static_cast<size_t>(i) * n + j] = 0.0;
    return out;
}

cplx wilkinson_shift(cplx a, cplx b, cplx c, cplx d) {
    // eigenvalue of [[a,b],[c,d]] closest to d
    const cplx tr = a + d;
    const cplx det = a * d - b * c;
    const cplx disc = std::sqrt(tr * tr - 4.0 * det);
    const cplx l1 = 0.5 * (tr + disc);
    const cplx l2 = 0.5 * (tr - disc);
    return (std::abs(l1 - d) < std::abs(l2 - d)) ? l1 : l2;
}

}  // namespace

std::vector<cplx> eigenvalues(const Mat& m, double tol, int max_iter_per_eig) {
    if (!m.finite()) throw std::invalid_argument("eigenvalues: non-finite entries");
    const int n = m.dim();
    if (n == 1) return {cplx(m(0, 0), 0.0)};

    std::vector<cplx> h = hessenberg_complex(m);
    auto H = [&](int i, int j) -> cplx& { return h[static_cast<size_t>(i) * n + j]; };

    std::vector<cplx> eig;
    eig.reserve(n);

    int hi = n - 1;
    int iter = 0;
    while (hi >= 0) {
        if (hi == 0) {
            eig.push_back(H(0, 0));
            break;
        }
        // locate the active block [lo, hi]: scan for negligible subdiagonals
        int lo = hi;
        while (lo > 0) {
            const double off = std::abs(H(lo, lo - 1));
            const double scale = std::abs(H(lo - 1, lo - 1)) + std::abs(H(lo, lo));
            if (off <= tol * (scale > 0 ? scale : 1.0)) {
                H(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }
        if (lo == hi) {
            eig.push_back(H(hi, hi));
            --hi;
            iter = 0;
            continue;
        }

        if (++iter > max_iter_per_eig) {
            // exceptional shift to break symmetric stalls
            H(hi, hi) += cplx(std::abs(H(hi, hi - 1)), 0.5 * std::abs(H(hi, hi - 1)));
            iter = 0;
        }

        const cplx mu = wilkinson_shift(H(hi - 1, hi - 1), H(hi - 1, hi), H(hi, hi - 1), H(hi, hi));

        // implicit single-shift QR step on the block via Givens rotations
        const int nr = hi - lo + 1;
        std::vector<std::pair<cplx, cplx>> rot(nr - 1);  // (c, s) per rotation
        for (int k = lo; k <= hi; ++k) H(k, k) -= mu;
        for (int k = lo; k < hi; ++k) {
            const cplx x = H(k, k), y = H(k + 1, k);
            const double r = std::sqrt(std::norm(x) + std::norm(y));
            cplx c(1.0, 0.0), s(0.0, 0.0);
            if (r > 0) {
                c = std::conj(x) / r;  // so that c*x + s*y is real r
                s = std::conj(y) / r;
            }
            rot[k - lo] = {c, s};
            for (int j = k; j <= hi; ++j) {
                const cplx hk = H(k, j), hk1 = H(k + 1, j);
                H(k, j) = c * hk + s * hk1;
                H(k + 1, j) = -std::conj(s) * hk + std::conj(c) * hk1;
            }
        }
        for (int k = lo; k < hi; ++k) {
            const cplx c = rot[k - lo].first, s = rot[k - lo].second;
            for (int i = lo; i <= std::min(hi, k + 1); ++i) {
                const cplx hik = H(i, k), hik1 = H(i, k + 1);
                H(i, k) = hik * std::conj(c) + hik1 * std::conj(s);
                H(i, k + 1) = -hik * s + hik1 * c;
            }
        }
        for (int k = lo; k <= hi; ++k) H(k, k) += mu;
    }

    std::sort(eig.begin(), eig.end(),
              [](const cplx& a, const cplx& b) { return std::abs(a) > std::abs(b); });
    return eig;
}

Vec smallest_singular_vector(const Mat& m) {
    const SymEigen e = sym_eigen_jacobi(m.transpose() * m);
    const int n = m.dim();
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = e.vectors(i, 0);
    const double nv = norm2(v);
    for (double& x : v) x /= nv;
    return v;
}

}  // namespace rmp
