#include "fracsource/linalg.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

namespace fracsource {

namespace {

template <typename T>
double mag(const T& v) {
    return std::abs(v);
}

// LU with partial pivoting for a tridiagonal matrix; during elimination the
// pivot row may be swapped with the next one, producing a second
// super-diagonal. Returns the solution in-place of rhs.
template <typename T>
std::vector<T> tridiag_lu_solve(const TriMatrix<T>& m, std::vector<T> rhs) {
    const std::size_t n = m.size();
    if (rhs.size() != n) throw Error("tridiag solve: rhs size mismatch");
    if (n == 0) return rhs;
    std::vector<T> d = m.diag, e1 = m.sup, e2(n, T{}), c = m.sub;
    e1.resize(n, T{});

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        scale = std::max(scale, mag(d[i]) + (i ? mag(c[i]) : 0.0) +
                                    (i + 1 < n ? mag(e1[i]) : 0.0));
    if (scale == 0.0) throw NumericalError("tridiag solve: zero matrix");

    for (std::size_t i = 0; i + 1 < n; ++i) {
        T lower = c[i + 1];
        if (mag(d[i]) >= mag(lower)) {
            if (mag(d[i]) <= 1e-300 * scale)
                throw NumericalError("tridiag solve: singular pivot");
            const T mfac = lower / d[i];
            d[i + 1] -= mfac * e1[i];
            rhs[i + 1] -= mfac * rhs[i];
        } else {
            // swap rows i and i+1
            const T mfac = d[i] / lower;
            T nd = e1[i] - mfac * d[i + 1];
            T ne1 = (i + 2 < n) ? (T{} - mfac * e1[i + 1]) : T{};
            d[i] = lower;
            e1[i] = d[i + 1];
            e2[i] = (i + 2 < n) ? e1[i + 1] : T{};
            d[i + 1] = nd;
            e1[i + 1] = ne1;
            std::swap(rhs[i], rhs[i + 1]);
            rhs[i + 1] -= mfac * rhs[i];
        }
    }
    if (mag(d[n - 1]) <= 1e-300 * scale)
        throw NumericalError("tridiag solve: singular trailing pivot");

    // back substitution with two super-diagonals
    for (std::size_t ii = n; ii-- > 0;) {
        T v = rhs[ii];
        if (ii + 1 < n) v -= e1[ii] * rhs[ii + 1];
        if (ii + 2 < n) v -= e2[ii] * rhs[ii + 2];
        rhs[ii] = v / d[ii];
    }
    return rhs;
}

}  // namespace

std::vector<double> solve_tridiag(const TriMatrixD& m, std::vector<double> rhs) {
    return tridiag_lu_solve(m, std::move(rhs));
}
std::vector<cplx> solve_tridiag(const TriMatrixZ& m, std::vector<cplx> rhs) {
    return tridiag_lu_solve(m, std::move(rhs));
}

TriFactorZ::TriFactorZ(const TriMatrixZ& m) : n_(m.size()), original_(m) {
    d_ = m.diag;
    e1_ = m.sup;
    e1_.resize(n_, cplx{});
    e2_.assign(n_, cplx{});
    sub_.assign(n_, cplx{});
    swapped_.assign(n_, 0);

    double scale = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
        scale = std::max(scale, mag(m.diag[i]) + (i ? mag(m.sub[i]) : 0.0) +
                                    (i + 1 < n_ ? mag(m.sup[i]) : 0.0));
    if (scale == 0.0) throw NumericalError("tridiag factor: zero matrix");
    min_pivot_ratio_ = 1e308;

    std::vector<cplx> c = m.sub;
    for (std::size_t i = 0; i + 1 < n_; ++i) {
        cplx lower = c[i + 1];
        if (mag(d_[i]) >= mag(lower)) {
            if (mag(d_[i]) <= 1e-300 * scale)
                throw NumericalError(
                    "resolvent factorization failed: singular pivot, |pivot|/scale=" +
                    std::to_string(mag(d_[i]) / scale));
            const cplx mfac = lower / d_[i];
            sub_[i + 1] = mfac;
            d_[i + 1] -= mfac * e1_[i];
        } else {
            const cplx mfac = d_[i] / lower;
            swapped_[i] = 1;
            sub_[i + 1] = mfac;
            cplx nd = e1_[i] - mfac * d_[i + 1];
            cplx ne1 = (i + 2 < n_) ? (cplx{} - mfac * e1_[i + 1]) : cplx{};
            d_[i] = lower;
            e1_[i] = d_[i + 1];
            e2_[i] = (i + 2 < n_) ? e1_[i + 1] : cplx{};
            d_[i + 1] = nd;
            e1_[i + 1] = ne1;
        }
        min_pivot_ratio_ = std::min(min_pivot_ratio_, mag(d_[i]) / scale);
    }
    min_pivot_ratio_ = std::min(min_pivot_ratio_, mag(d_[n_ - 1]) / scale);
    if (mag(d_[n_ - 1]) <= 1e-300 * scale)
        throw NumericalError(
            "resolvent factorization failed: singular trailing pivot");
}

std::vector<cplx> TriFactorZ::solve(std::vector<cplx> rhs) const {
    if (rhs.size() != n_) throw Error("tridiag factor solve: size mismatch");
    for (std::size_t i = 0; i + 1 < n_; ++i) {
        if (swapped_[i]) std::swap(rhs[i], rhs[i + 1]);
        rhs[i + 1] -= sub_[i + 1] * rhs[i];
    }
    for (std::size_t ii = n_; ii-- > 0;) {
        cplx v = rhs[ii];
        if (ii + 1 < n_) v -= e1_[ii] * rhs[ii + 1];
        if (ii + 2 < n_) v -= e2_[ii] * rhs[ii + 2];
        rhs[ii] = v / d_[ii];
    }
    return rhs;
}

std::vector<cplx> TriFactorZ::solve_transposed(std::vector<cplx> rhs) const {
    // Solve A^T x = rhs through two CG-free passes on the stored original
    // matrix: A^T is again tridiagonal, factor it on demand. Factoring per
    // call keeps the class small; transposed solves are rare (operator-norm
    // probes only).
    TriMatrixZ t;
    t.diag = original_.diag;
    t.sub.assign(n_, cplx{});
    t.sup.assign(n_, cplx{});
    for (std::size_t i = 0; i + 1 < n_; ++i) {
        t.sub[i + 1] = original_.sup[i];
        t.sup[i] = original_.sub[i + 1];
    }
    return tridiag_lu_solve(t, std::move(rhs));
}

// ---------------------------------------------------------------------------

void sym_tridiag_eig(std::vector<double>& d, std::vector<double>& e,
                     std::vector<double>* vectors) {
    const std::size_t n = d.size();
    if (n == 0) return;
    if (e.size() < n) e.resize(n, 0.0);
    std::vector<double>& z = *([&]() -> std::vector<double>* {
        static thread_local std::vector<double> dummy;
        if (!vectors) return &dummy;
        vectors->assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) (*vectors)[i * n + i] = 1.0;
        return vectors;
    }());

    // shift e so that e[i] couples d[i] and d[i+1]; classic QL uses e[1..]
    std::vector<double> ev(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) ev[i] = e[i];

    const double eps = 1e-15;
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(ev[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (iter++ == 60)
                    throw NumericalError("sym_tridiag_eig: QL did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * ev[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + ev[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (std::size_t i = m; i-- > l;) {
                    double f = s * ev[i];
                    double b = c * ev[i];
                    r = std::hypot(f, g);
                    ev[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        ev[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    if (vectors) {
                        for (std::size_t k = 0; k < n; ++k) {
                            const double fk = z[k * n + i + 1];
                            z[k * n + i + 1] = s * z[k * n + i] + c * fk;
                            z[k * n + i] = c * z[k * n + i] - s * fk;
                        }
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                ev[l] = g;
                ev[m] = 0.0;
            }
        } while (m != l);
    }

    // sort ascending, carrying eigenvectors, deterministic (stable on ties)
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
    std::vector<double> ds(n);
    for (std::size_t i = 0; i < n; ++i) ds[i] = d[order[i]];
    d = ds;
    if (vectors) {
        std::vector<double> zs(n * n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                zs[k * n + j] = z[k * n + order[j]];
        *vectors = zs;
        // deterministic sign: largest-magnitude component positive
        for (std::size_t j = 0; j < n; ++j) {
            double best = 0.0;
            std::size_t bi = 0;
            for (std::size_t k = 0; k < n; ++k)
                if (std::abs((*vectors)[k * n + j]) > std::abs(best)) {
                    best = (*vectors)[k * n + j];
                    bi = k;
                }
            (void)bi;
            if (best < 0.0)
                for (std::size_t k = 0; k < n; ++k) (*vectors)[k * n + j] *= -1.0;
        }
    }
}

// ---------------------------------------------------------------------------

TsvdResult tsvd_solve(const std::vector<double>& a, std::size_t rows,
                      std::size_t cols, const std::vector<double>& b,
                      double rel_cutoff) {
    if (a.size() != rows * cols) throw Error("tsvd_solve: matrix size mismatch");
    if (b.size() != rows) throw Error("tsvd_solve: rhs size mismatch");
    Eigen::MatrixXd A(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) A(i, j) = a[i * cols + j];
    Eigen::VectorXd rhs(rows);
    for (std::size_t i = 0; i < rows; ++i) rhs(i) = b[i];

    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    TsvdResult out;
    out.singular_values.assign(sv.data(), sv.data() + sv.size());
    const double smax = sv.size() ? sv(0) : 0.0;
    if (smax == 0.0)
        throw NumericalError("tsvd_solve: sensitivity map has effective rank zero");
    const double cut = rel_cutoff * smax;

    Eigen::VectorXd x = Eigen::VectorXd::Zero(cols);
    Eigen::VectorXd uty = svd.matrixU().transpose() * rhs;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) >= cut) {
            x += (uty(k) / sv(k)) * svd.matrixV().col(k);
            out.rank_retained++;
            out.smallest_retained = sv(k);
        }
    }
    if (out.rank_retained == 0)
        throw NumericalError("tsvd_solve: all singular values below cutoff");
    out.residual_norm = (A * x - rhs).norm();
    out.solution.assign(x.data(), x.data() + cols);
    return out;
}

std::vector<double> singular_values(const std::vector<double>& a,
                                    std::size_t rows, std::size_t cols) {
    Eigen::MatrixXd A(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) A(i, j) = a[i * cols + j];
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    return std::vector<double>(sv.data(), sv.data() + sv.size());
}

// ---------------------------------------------------------------------------

int env_thread_cap() {
    const char* env = std::getenv("FRACSOURCE_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    if (v < 1) return 1;
    return std::min(v, 64);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const int threads = std::min<std::size_t>(env_thread_cap(), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            for (std::size_t i = t; i < n; i += threads) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace fracsource
