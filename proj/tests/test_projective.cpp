#include <cmath>

#include "doctest.h"
#include "rmplab/projective.hpp"
#include "rmplab/rng.hpp"

using namespace rmp;

namespace {

ProjPoint random_point(int d, SplitMix64& rng) {
    Vec v(d);
    for (double& x : v) x = 2.0 * rng.uniform01() - 1.0;
    return ProjPoint(std::move(v));
}

Mat random_invertible(int d, SplitMix64& rng) {
    for (;;) {
        Mat m(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m(i, j) = 2.0 * rng.uniform01() - 1.0;
        if (std::abs(determinant(m)) > 0.05) return m;
    }
}

// Random orthogonal matrix from Gram-Schmidt on a random one.
Mat random_orthogonal(int d, SplitMix64& rng) {
    Mat m = random_invertible(d, rng);
    Mat q(d);
    for (int c = 0; c < d; ++c) {
        Vec v(d);
        for (int i = 0; i < d; ++i) v[i] = m(i, c);
        for (int p = 0; p < c; ++p) {
            double s = 0;
            for (int i = 0; i < d; ++i) s += q(i, p) * v[i];
            for (int i = 0; i < d; ++i) v[i] -= s * q(i, p);
        }
        const double nv = norm2(v);
        for (int i = 0; i < d; ++i) q(i, c) = v[i] / nv;
    }
    return q;
}

}  // namespace

TEST_CASE("canonical representatives are unit and sign-fixed") {
    ProjPoint p(Vec{-3.0, 0.0});
    CHECK(p.rep()[0] == doctest::Approx(1.0));
    CHECK(p.rep()[1] == doctest::Approx(0.0));
    ProjPoint q(Vec{0.0, -2.0, 0.0});
    CHECK(q.rep()[1] == doctest::Approx(1.0));
    CHECK_THROWS(ProjPoint(Vec{0.0, 0.0}));
}

TEST_CASE("projective distance: trivial and derived values") {
    ProjPoint e1(Vec{1, 0}), e2(Vec{0, 1});
    CHECK(proj_distance(e1, e1) == 0.0);
    CHECK(proj_distance(e1, e2) == doctest::Approx(1.0));
    ProjPoint diag(Vec{1, 1});
    CHECK(proj_distance(e1, diag) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));
}

TEST_CASE("distance is O(d)-invariant and satisfies the triangle inequality") {
    SplitMix64 rng(31);
    for (int d : {2, 3, 5}) {
        for (int t = 0; t < 200; ++t) {
            ProjPoint x = random_point(d, rng), w = random_point(d, rng),
                      z = random_point(d, rng);
            Mat r = random_orthogonal(d, rng);
            CHECK(std::abs(proj_distance(act(r, x), act(r, w)) - proj_distance(x, w)) < 1e-12);
            CHECK(proj_distance(x, w) <= proj_distance(x, z) + proj_distance(z, w) + 1e-12);
        }
    }
}

TEST_CASE("group action: identity, eigendirection, rotation") {
    ProjPoint e1(Vec{1, 0}), e2(Vec{0, 1});
    GroupAtom id(Mat::identity(2));
    CHECK(proj_distance(act(id, e1), e1) == 0.0);
    GroupAtom diag(Mat(2, {2, 0, 0, 1}));
    CHECK(proj_distance(act(diag, e1), e1) == 0.0);
    GroupAtom rot(Mat(2, {0, -1, 1, 0}));
    CHECK(proj_distance(act(rot, e1), e2) == doctest::Approx(0.0));
}

TEST_CASE("norm cocycle closed forms") {
    SplitMix64 rng(37);
    ProjPoint x = random_point(3, rng);
    GroupAtom id(Mat::identity(3));
    CHECK(norm_cocycle(id, x) == doctest::Approx(0.0));
    GroupAtom twice(2.0 * Mat::identity(3));
    CHECK(norm_cocycle(twice, x) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    // diag(2,1) applied to (1,1)/sqrt(2): |g v| = sqrt(5/2)
    GroupAtom g(Mat(2, {2, 0, 0, 1}));
    ProjPoint diag(Vec{1, 1});
    CHECK(norm_cocycle(g, diag) == doctest::Approx(0.5 * std::log(2.5)).epsilon(1e-12));
}

TEST_CASE("cocycle additivity and N(g) bounds on random data") {
    SplitMix64 rng(41);
    for (int d : {2, 3}) {
        for (int t = 0; t < 500; ++t) {
            GroupAtom g1(random_invertible(d, rng)), g2(random_invertible(d, rng));
            ProjPoint x = random_point(d, rng);
            const double lhs = norm_cocycle(GroupAtom(g2.matrix() * g1.matrix()), x);
            const double rhs = norm_cocycle(g2, act(g1, x)) + norm_cocycle(g1, x);
            CHECK(std::abs(lhs - rhs) < 1e-10);
            CHECK(std::abs(norm_cocycle(g1, x)) <= std::log(g1.big_n()) + 1e-12);
        }
    }
}

TEST_CASE("dual pairing equals the distance to the hyperplane") {
    ProjPoint e1(Vec{1, 0}), mix(Vec{1, 1});
    DualPoint f1(Vec{1, 0}), f2(Vec{0, 1});
    CHECK(dual_pairing(e1, f1) == doctest::Approx(1.0));
    CHECK(dual_pairing(e1, f2) == doctest::Approx(0.0));
    CHECK(dual_pairing(mix, f1) == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-12));

    // d(x, H_y) = min over the kernel: brute-force the minimum at d=3
    SplitMix64 rng(43);
    for (int t = 0; t < 50; ++t) {
        ProjPoint x = random_point(3, rng);
        DualPoint y(Vec{2 * rng.uniform01() - 1, 2 * rng.uniform01() - 1,
                        2 * rng.uniform01() - 1});
        // orthonormal basis (u, w) of ker f
        const Vec& f = y.rep();
        Vec u = std::abs(f[0]) < 0.9 ? Vec{1, 0, 0} : Vec{0, 1, 0};
        double c = dot(u, f);
        for (int i = 0; i < 3; ++i) u[i] -= c * f[i];
        double nu = norm2(u);
        for (double& t2 : u) t2 /= nu;
        Vec w = {f[1] * u[2] - f[2] * u[1], f[2] * u[0] - f[0] * u[2],
                 f[0] * u[1] - f[1] * u[0]};
        auto dist_at = [&](double th) {
            Vec h(3);
            for (int i = 0; i < 3; ++i) h[i] = std::cos(th) * u[i] + std::sin(th) * w[i];
            return proj_distance(x, ProjPoint(std::move(h)));
        };
        const double pi = 3.14159265358979323846;
        double best = 1.0, best_th = 0.0;
        for (int k = 0; k < 2000; ++k) {
            const double th = pi * k / 2000.0;
            const double dd = dist_at(th);
            if (dd < best) best = dd, best_th = th;
        }
        double step = pi / 2000.0;
        for (int level = 0; level < 8; ++level) {
            const double center = best_th;
            for (int k = -10; k <= 10; ++k) {
                const double th = center + k * step / 10.0;
                const double dd = dist_at(th);
                if (dd < best) best = dd, best_th = th;
            }
            step /= 10.0;
        }
        CHECK(std::abs(best - dual_pairing(x, y)) < 1e-9);
    }
}

TEST_CASE("coefficient log: trivial cases and the split identity") {
    ProjPoint e1(Vec{1, 0}), e2(Vec{0, 1});
    DualPoint f1(Vec{1, 0});
    GroupAtom id(Mat::identity(2));
    CHECK(coefficient_log(id, e1, f1) == doctest::Approx(0.0));
    GroupAtom three(3.0 * Mat::identity(2));
    CHECK(coefficient_log(three, e1, f1) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    GroupAtom shear(Mat(2, {1, 1, 0, 1}));
    CHECK(coefficient_log(shear, e2, f1) == doctest::Approx(0.0).epsilon(1e-14));
    // exact vanishing gives the -inf sentinel, not a crash
    GroupAtom rot(Mat(2, {0, -1, 1, 0}));
    CHECK(coefficient_log(rot, e1, f1) == kNegInf);
}

TEST_CASE("split identity on 10^4 random triples") {
    SplitMix64 rng(47);
    int checked = 0;
    for (int t = 0; t < 10000; ++t) {
        const int d = 2 + static_cast<int>(rng.below(2));
        GroupAtom g(random_invertible(d, rng));
        ProjPoint x = random_point(d, rng);
        DualPoint y = [&] {
            Vec f(d);
            for (double& c : f) c = 2 * rng.uniform01() - 1;
            return DualPoint(std::move(f));
        }();
        const double direct = coefficient_log(g, x, y);
        const double pairing = dual_pairing(act(g, x), y);
        if (pairing == 0.0) continue;
        const double split = norm_cocycle(g, x) + std::log(pairing);
        CHECK(std::abs(direct - split) < 1e-9);
        ++checked;
    }
    CHECK(checked > 9900);
}
