#pragma once

// Dense linear algebra for small d x d matrices (d <= 10 is the target
// range). Everything here is dependency-free: cyclic Jacobi for symmetric
// eigenproblems, LU for determinants, Hessenberg + shifted QR for general
// eigenvalues.

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace rmp {

using cplx = std::complex<double>;

class Mat {
public:
    Mat() = default;
    explicit Mat(int n) : n_(n), a_(static_cast<size_t>(n) * n, 0.0) {
        if (n < 1) throw std::invalid_argument("Mat: dimension must be >= 1");
    }
    Mat(int n, std::vector<double> rowmajor) : n_(n), a_(std::move(rowmajor)) {
        if (n < 1 || a_.size() != static_cast<size_t>(n) * n)
            throw std::invalid_argument("Mat: entry count does not match dimension");
    }

    static Mat identity(int n) {
        Mat m(n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int dim() const { return n_; }
    double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
    double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }
    const std::vector<double>& data() const { return a_; }

    Mat transpose() const;
    bool finite() const;

    friend Mat operator*(const Mat& a, const Mat& b);
    friend Mat operator*(double c, const Mat& a);

private:
    int n_ = 0;
    std::vector<double> a_;
};

using Vec = std::vector<double>;

Vec matvec(const Mat& m, const Vec& v);
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);

struct SymEigen {
    Vec values;               // ascending
    Mat vectors;              // columns are eigenvectors
};

// Cyclic Jacobi on a symmetric matrix. Off-diagonal mass is driven below
// rel_tol * frobenius(m).
SymEigen sym_eigen_jacobi(const Mat& m, double rel_tol = 1e-14, int max_sweeps = 64);

// Singular values via Jacobi on m^T m, descending order.
Vec singular_values(const Mat& m);

double operator_norm(const Mat& m);          // largest singular value
double inverse_operator_norm(const Mat& m);  // 1/sigma_min; +inf when singular

double determinant(const Mat& m);  // LU with partial pivoting

// All eigenvalues of a general real matrix: Householder reduction to
// Hessenberg form followed by shifted QR in complex arithmetic.
// Results are sorted by descending modulus.
std::vector<cplx> eigenvalues(const Mat& m, double tol = 1e-12, int max_iter_per_eig = 80);

// Unit null vector candidate: the eigenvector of m^T m with smallest
// eigenvalue. Used to extract eigendirections from g - lambda*I.
Vec smallest_singular_vector(const Mat& m);

}  // namespace rmp
