#pragma once

// Small dense/banded linear algebra kernels shared by the solver modules:
// tridiagonal LU with partial pivoting (real and complex), a deterministic
// implicit-shift QL eigensolver for symmetric tridiagonal matrices, fixed
// Gauss-Legendre panel quadrature, and truncated-SVD least squares.

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracsource {

using cplx = std::complex<double>;

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Scenario / hypothesis validation failure. The message starts with the
// admissibility-condition code documented in SCHEMA.md, e.g. "(vo) ...".
struct ValidationError : Error {
    using Error::Error;
};

// Runtime numerical failure (singular factorization, non-convergence, ...).
struct NumericalError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Tridiagonal systems
// ---------------------------------------------------------------------------

// General tridiagonal matrix, row i: sub[i]*x[i-1] + diag[i]*x[i] + sup[i]*x[i+1].
// sub[0] and sup[n-1] are ignored.
template <typename T>
struct TriMatrix {
    std::vector<T> sub, diag, sup;

    std::size_t size() const { return diag.size(); }

    std::vector<T> apply(const std::vector<T>& x) const {
        const std::size_t n = size();
        std::vector<T> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            T v = diag[i] * x[i];
            if (i > 0) v += sub[i] * x[i - 1];
            if (i + 1 < n) v += sup[i] * x[i + 1];
            y[i] = v;
        }
        return y;
    }
};

using TriMatrixD = TriMatrix<double>;
using TriMatrixZ = TriMatrix<cplx>;

// Solves a tridiagonal system by LU with partial pivoting (one extra
// super-diagonal of fill-in). Throws NumericalError on a (near-)singular
// pivot, reporting the pivot magnitude relative to the matrix scale.
std::vector<double> solve_tridiag(const TriMatrixD& m, std::vector<double> rhs);
std::vector<cplx> solve_tridiag(const TriMatrixZ& m, std::vector<cplx> rhs);

// Factored form for reuse across right-hand sides at a fixed matrix.
class TriFactorZ {
public:
    explicit TriFactorZ(const TriMatrixZ& m);
    std::vector<cplx> solve(std::vector<cplx> rhs) const;
    std::vector<cplx> solve_transposed(std::vector<cplx> rhs) const;
    double min_pivot_ratio() const { return min_pivot_ratio_; }

private:
    std::size_t n_;
    std::vector<cplx> d_, e1_, e2_, sub_;   // U diagonals and L multipliers
    std::vector<int> swapped_;
    TriMatrixZ original_;
    double min_pivot_ratio_ = 0.0;
};

// ---------------------------------------------------------------------------
// Symmetric tridiagonal eigensolver (implicit-shift QL)
// ---------------------------------------------------------------------------

// On return `diag` holds the eigenvalues in ascending order. When `vectors`
// is non-null it is resized to n*n and column j (stride n) holds the
// normalized eigenvector of eigenvalue j. Deterministic for fixed input.
void sym_tridiag_eig(std::vector<double>& diag, std::vector<double>& off,
                     std::vector<double>* vectors);

// ---------------------------------------------------------------------------
// Gauss-Legendre panel quadrature
// ---------------------------------------------------------------------------

// 8-point Gauss-Legendre rule on [-1, 1].
inline constexpr double kGL8Nodes[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
inline constexpr double kGL8Weights[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

// Integrates f over [a, b] with `panels` equal Gauss-Legendre panels.
template <typename F>
auto gauss_panels(F&& f, double a, double b, int panels)
    -> decltype(f(0.0)) {
    using R = decltype(f(0.0));
    R total{};
    const double w = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * w;
        R acc{};
        for (int q = 0; q < 8; ++q)
            acc += kGL8Weights[q] * f(mid + 0.5 * w * kGL8Nodes[q]);
        total += acc * (0.5 * w);
    }
    return total;
}

// ---------------------------------------------------------------------------
// Truncated-SVD least squares
// ---------------------------------------------------------------------------

struct TsvdResult {
    std::vector<double> solution;
    std::vector<double> singular_values;  // descending
    int rank_retained = 0;
    double smallest_retained = 0.0;       // injectivity certificate
    double residual_norm = 0.0;           // ||A x - b||_2
};

// Solves min ||A x - b|| keeping singular values >= rel_cutoff * sigma_max.
// `a` is row-major rows x cols. Deterministic, single-threaded.
TsvdResult tsvd_solve(const std::vector<double>& a, std::size_t rows,
                      std::size_t cols, const std::vector<double>& b,
                      double rel_cutoff);

// Singular values only (descending).
std::vector<double> singular_values(const std::vector<double>& a,
                                    std::size_t rows, std::size_t cols);

// ---------------------------------------------------------------------------
// Deterministic RNG helpers
// ---------------------------------------------------------------------------

// splitmix64; used instead of std::uniform_real_distribution so streams are
// bit-identical across standard library implementations.
class DeterministicRng {
public:
    explicit DeterministicRng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0, 1)
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }
    // uniform in [lo, hi)
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

private:
    std::uint64_t state_;
};

// Bounded parallel loop with deterministic output: the worker for chunk i
// writes only into slot i. Thread count is capped by the FRACSOURCE_THREADS
// environment variable (default 1).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

int env_thread_cap();

}  // namespace fracsource
