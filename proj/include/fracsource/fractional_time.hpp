#pragma once

// Discrete fractional calculus on uniform time grids: the weakly singular
// convolution integral I^b, the derivative D_t^b = d^ceil(b)/dt^ceil(b) after
// I^{ceil(b)-b}, the Caputo derivative (L1 scheme), and a weak-form residual
// check for the relaxation kernel equation (D_t^b + lambda) w = h.
// Signals are piecewise linear between samples; all quadrature weights are
// exact for piecewise-linear data, so the operators are causal.

#include "fracsource/linalg.hpp"

#include <optional>
#include <vector>

namespace fracsource {

struct TimeGrid {
    double dt = 0.0;
    std::size_t steps = 0;  // M; samples are t_j = j dt for j = 0..M

    static TimeGrid make(double t_end, double dt);

    std::size_t samples() const { return steps + 1; }
    double t_end() const { return dt * double(steps); }
    double time(std::size_t j) const { return dt * double(j); }
};

struct TimeSignal {
    TimeGrid grid;
    std::vector<double> values;
    std::optional<double> active_horizon;  // T0 marker when the signal is mu

    static TimeSignal zero(const TimeGrid& g);
    static TimeSignal sampled(const TimeGrid& g,
                              const std::function<double(double)>& f);

    std::size_t size() const { return values.size(); }
    double max_abs() const;
    double l1_norm() const;  // trapezoid of |f|
};

// fractional integral of order b >= 0 (product-trapezoid weights, exact on
// piecewise-linear input; b = 0 is the identity)
TimeSignal rl_integral(const TimeSignal& f, double b);

// D_t^b f for b in (0,1) u (1,2); b = 1, 2 fall back to plain finite
// differences. Interior accuracy O(dt); documented boundary treatment is
// one-sided differences.
TimeSignal rl_derivative(const TimeSignal& f, double b);

// Caputo derivative, b in (0,2]: L1 scheme for b in (0,1), second-difference
// composition for b in (1,2), finite differences at b = 1, 2. Initial values
// are taken from the samples (zero initial data in the governing problem).
TimeSignal caputo_derivative(const TimeSignal& f, double b);

// L1 scheme weights b_k = (k+1)^{1-b} - k^{1-b} for a fixed order
std::vector<double> l1_weights(double b, std::size_t count);

// Relaxation kernel K(s) = s^{b-1} E_{b,b}(-lambda s^b) machinery: exact cell
// moments via s^b E_{b,b+1} and s^{b+1} E_{b,b+2}, used by the convolution
// w = K * h and by the forward Duhamel solvers.
class RelaxationKernel {
public:
    RelaxationKernel(double b, double lambda, const TimeGrid& grid);

    // integral of K over (t_k, t_{k+1})
    double cell_mass(std::size_t k) const { return mass_[k]; }
    // integral of (s - t_k) K(s) over (t_k, t_{k+1})
    double cell_first_moment(std::size_t k) const { return moment_[k]; }
    double order() const { return b_; }
    double lambda() const { return lambda_; }

    // w(t_j) = int_0^{t_j} K(t_j - tau) h(tau) dtau, h piecewise linear
    std::vector<double> convolve(const std::vector<double>& h) const;

private:
    double b_, lambda_;
    TimeGrid grid_;
    std::vector<double> mass_, moment_;
};

struct RelaxationResidualReport {
    double max_residual = 0.0;        // max over test functions at dt
    double max_residual_half = 0.0;   // same at dt/2
    double observed_rate = 0.0;       // log2(max/max_half)
    std::size_t test_functions = 0;
};

// Weak-form residual of (D_t^b + lambda) w = h against a fixed family of
// smooth compactly supported test functions, evaluated at dt and dt/2.
RelaxationResidualReport verify_relaxation_ode(const TimeSignal& h, double b,
                                               double lambda);

// smooth bump supported on (center - halfwidth, center + halfwidth) with
// closed-form first and second derivatives (weak-form pairings)
struct BumpFunction {
    double center = 0.0, halfwidth = 1.0;
    double value(double t) const;
    double d1(double t) const;
    double d2(double t) const;
};

}  // namespace fracsource
