#pragma once

// Gamma-family functions and the two-parameter Mittag-Leffler function
// E_{a,b}(z) = sum_k z^k / Gamma(a k + b), evaluated by Taylor series,
// optimally truncated algebraic expansion, or a Hankel-type contour integral
// depending on the argument. The operative region is z on or near the
// negative real axis (relaxation kernels -t^a lambda).

#include "fracsource/linalg.hpp"

#include <complex>
#include <vector>

namespace fracsource {

// log Gamma for x > 0 (Stirling with exact Bernoulli coefficients plus
// upward recurrence below x = 10; relative error a few ulp).
double log_gamma(double x);

// Gamma on the real line; poles at non-positive integers throw.
double gamma_fn(double x);

// reciprocal Gamma, entire: returns 0 at the poles of Gamma
double reciprocal_gamma(double x);

// Gamma for complex argument (Stirling + recurrence + reflection).
cplx gamma_fn(cplx z);

// lower incomplete gamma(a, x) = int_0^x t^{a-1} e^{-t} dt, a > 0, x >= 0
double lower_incomplete_gamma(double a, double x);

enum class MlRegime { Zero, Series, Asymptotic, Contour, ClosedForm };

struct MLParams {
    double alpha = 0.5;  // in (0, 2]
    double beta = 0.5;   // > 0
};

struct MlResult {
    cplx value;
    MlRegime regime = MlRegime::Series;
    double err_estimate = 0.0;  // relative error estimate
    bool converged = true;
};

MlResult mittag_leffler_full(const MLParams& params, cplx z);

// convenience: throws NumericalError when no regime converged to 1e-8
cplx mittag_leffler(double alpha, double beta, cplx z);
double mittag_leffler_neg(double alpha, double beta, double x);  // E(-x), x>=0

const char* ml_regime_name(MlRegime r);

// Bound report for |E_{a,a}(-t^a lambda)| <= C / (1 + t^a lambda):
// scans the (t, lambda) grid and returns the largest ratio observed.
struct MlBoundReport {
    double fitted_constant = 0.0;  // max over grid of |E| * (1 + t^a lambda)
    double max_ratio_t = 0.0;
    double max_ratio_lambda = 0.0;
    std::size_t samples = 0;
};

MlBoundReport ml_bound_check(double alpha, const std::vector<double>& t_grid,
                             const std::vector<double>& lambda_grid);

}  // namespace fracsource
