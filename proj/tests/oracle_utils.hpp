#pragma once

// Test-only oracles, independent of the library evaluation paths:
// an extended-precision (80-bit long double, compensated) Taylor oracle for
// the Mittag-Leffler function and small quadrature helpers.

#include <cmath>
#include <complex>
#include <vector>

namespace fracsource::testing {

// Compensated long-double Taylor sum of E_{a,b}(z). Usable while the
// cancellation stays within long-double headroom, i.e. |z|^{1/a} <~ 25.
inline std::complex<double> ml_series_oracle(double alpha, double beta,
                                             std::complex<double> z,
                                             int max_terms = 10000) {
    using CL = std::complex<long double>;
    const long double la = alpha, lb = beta;
    CL zl(z.real(), z.imag());
    CL sum = 0.0L, comp = 0.0L;
    CL zk = 1.0L;
    for (int k = 0; k < max_terms; ++k) {
        const long double lg = lgammal(la * k + lb);
        CL term = zk * std::exp(CL(-lg, 0.0L));
        // Kahan update
        CL y = term - comp;
        CL t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        zk *= zl;
        if (std::abs(term) < 1e-24L * std::max<long double>(1.0L, std::abs(sum)) &&
            k > 8)
            break;
    }
    return {double(sum.real()), double(sum.imag())};
}

// Composite trapezoid on a sampled signal.
inline double trapezoid(const std::vector<double>& f, double dt) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) s += 0.5 * (f[i] + f[i + 1]);
    return s * dt;
}

}  // namespace fracsource::testing
