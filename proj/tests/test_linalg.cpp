#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fracsource/linalg.hpp"

#include <cmath>
#include <numbers>

using namespace fracsource;

TEST_CASE("gauss panels integrate polynomials and smooth functions") {
    // 8-point rule is exact through degree 15
    auto p15 = [](double x) { return 16.0 * std::pow(x, 15.0); };
    CHECK(gauss_panels(p15, 0.0, 1.0, 1) == doctest::Approx(1.0).epsilon(1e-14));
    auto s = [](double x) { return std::sin(x); };
    CHECK(gauss_panels(s, 0.0, std::numbers::pi, 4) ==
          doctest::Approx(2.0).epsilon(1e-13));
    auto ce = [](double x) { return cplx(std::cos(x), std::sin(x)); };
    cplx v = gauss_panels(ce, 0.0, 1.0, 2);
    CHECK(std::abs(v - cplx(std::sin(1.0), 1.0 - std::cos(1.0))) < 1e-14);
}

TEST_CASE("tridiagonal LU solves random systems with pivoting") {
    DeterministicRng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 3 + (rng.next_u64() % 40);
        TriMatrixZ m;
        m.sub.resize(n);
        m.diag.resize(n);
        m.sup.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            m.sub[i] = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
            m.diag[i] = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
            m.sup[i] = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
        }
        // force a tiny pivot somewhere to exercise row swaps
        if (trial % 3 == 0) m.diag[n / 2] = cplx(1e-18, 0.0);
        std::vector<cplx> x(n);
        for (auto& v : x) v = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
        auto rhs = m.apply(x);
        auto sol = solve_tridiag(m, rhs);
        double err = 0, nrm = 0;
        for (std::size_t i = 0; i < n; ++i) {
            err += std::norm(sol[i] - x[i]);
            nrm += std::norm(x[i]);
        }
        CHECK(std::sqrt(err / nrm) < 1e-10);

        TriFactorZ fac(m);
        auto sol2 = fac.solve(rhs);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(sol2[i] - sol[i]) < 1e-12);

        // transposed solve: A^T y = e_0, check A^T residual
        std::vector<cplx> e0(n, cplx{});
        e0[0] = 1.0;
        auto yt = fac.solve_transposed(e0);
        TriMatrixZ mt;
        mt.diag = m.diag;
        mt.sub.assign(n, cplx{});
        mt.sup.assign(n, cplx{});
        for (std::size_t i = 0; i + 1 < n; ++i) {
            mt.sub[i + 1] = m.sup[i];
            mt.sup[i] = m.sub[i + 1];
        }
        auto r = mt.apply(yt);
        CHECK(std::abs(r[0] - cplx(1.0, 0.0)) < 1e-9);
    }
}

TEST_CASE("QL eigensolver reproduces the discrete Laplacian spectrum") {
    // tridiag(-1, 2, -1)/h^2 on m interior points of (0,1) has eigenvalues
    // 4 sin^2(k pi h / 2)/h^2 and eigenvectors sin(k pi x_i)
    const std::size_t m = 61;
    const double h = 1.0 / (m + 1);
    std::vector<double> d(m, 2.0 / (h * h)), e(m, -1.0 / (h * h));
    std::vector<double> vecs;
    sym_tridiag_eig(d, e, &vecs);
    for (std::size_t k = 1; k <= m; ++k) {
        const double expect =
            4.0 / (h * h) * std::pow(std::sin(k * std::numbers::pi * h / 2), 2.0);
        CHECK(d[k - 1] == doctest::Approx(expect).epsilon(1e-12));
    }
    // eigenvector check for the first three modes
    for (std::size_t k = 1; k <= 3; ++k) {
        double dot = 0, na = 0, nb = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double ref = std::sin(k * std::numbers::pi * (i + 1) * h);
            const double got = vecs[i * m + (k - 1)];
            dot += ref * got;
            na += ref * ref;
            nb += got * got;
        }
        CHECK(std::abs(std::abs(dot) / std::sqrt(na * nb) - 1.0) < 1e-12);
    }
    // orthonormality of returned vectors
    double worst = 0;
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b <= a; ++b) {
            double dot = 0;
            for (std::size_t i = 0; i < m; ++i)
                dot += vecs[i * m + a] * vecs[i * m + b];
            worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    CHECK(worst < 1e-12);
}

TEST_CASE("eigenvalues-only path matches full decomposition") {
    std::vector<double> d1{1.0, 0.5, -0.25, 2.0}, e1{0.3, -0.7, 0.1, 0.0};
    auto d2 = d1;
    auto e2 = e1;
    std::vector<double> vecs;
    sym_tridiag_eig(d1, e1, nullptr);
    sym_tridiag_eig(d2, e2, &vecs);
    for (std::size_t i = 0; i < d1.size(); ++i)
        CHECK(d1[i] == doctest::Approx(d2[i]).epsilon(1e-14));
}

TEST_CASE("truncated SVD least squares") {
    // 4x2 system with exact solution (1, -2)
    std::vector<double> A{1, 0, 0, 1, 1, 1, 2, -1};
    std::vector<double> x{1.0, -2.0};
    std::vector<double> b(4);
    for (int i = 0; i < 4; ++i) b[i] = A[2 * i] * x[0] + A[2 * i + 1] * x[1];
    auto r = tsvd_solve(A, 4, 2, b, 1e-12);
    CHECK(r.rank_retained == 2);
    CHECK(r.solution[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.solution[1] == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(r.residual_norm < 1e-12);
    CHECK(r.smallest_retained > 0.0);

    // rank-deficient: duplicate column, cutoff removes the null direction
    std::vector<double> B{1, 1, 2, 2, 3, 3};
    std::vector<double> rhs{2, 4, 6};
    auto rd = tsvd_solve(B, 3, 2, rhs, 1e-10);
    CHECK(rd.rank_retained == 1);
    CHECK(rd.solution[0] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(rd.solution[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("deterministic rng is reproducible") {
    DeterministicRng a(7), b(7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    DeterministicRng c(8);
    double lo = 1, hi = 0;
    for (int i = 0; i < 1000; ++i) {
        double v = c.next_double();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        CHECK(v >= 0.0);
        CHECK(v < 1.0);
    }
    CHECK(lo < 0.1);
    CHECK(hi > 0.9);
}

TEST_CASE("parallel_for covers every index once") {
    std::vector<int> hits(1000, 0);
    parallel_for(1000, [&](std::size_t i) { hits[i]++; });
    for (int h : hits) CHECK(h == 1);
}
