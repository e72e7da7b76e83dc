#include "fracsource/fractional_time.hpp"

#include "fracsource/special_functions.hpp"

#include <cmath>

namespace fracsource {

TimeGrid TimeGrid::make(double t_end, double dt) {
    if (!(dt > 0.0)) throw ValidationError("time grid: dt must be positive");
    TimeGrid g;
    g.dt = dt;
    g.steps = std::size_t(std::llround(t_end / dt));
    if (g.steps < 2) throw ValidationError("time grid: needs at least 2 steps");
    return g;
}

TimeSignal TimeSignal::zero(const TimeGrid& g) {
    TimeSignal s;
    s.grid = g;
    s.values.assign(g.samples(), 0.0);
    return s;
}

TimeSignal TimeSignal::sampled(const TimeGrid& g,
                               const std::function<double(double)>& f) {
    TimeSignal s;
    s.grid = g;
    s.values.resize(g.samples());
    for (std::size_t j = 0; j < s.values.size(); ++j) s.values[j] = f(g.time(j));
    return s;
}

double TimeSignal::max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double TimeSignal::l1_norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        s += 0.5 * (std::abs(values[i]) + std::abs(values[i + 1]));
    return s * grid.dt;
}

// ---------------------------------------------------------------------------

TimeSignal rl_integral(const TimeSignal& f, double b) {
    if (b < 0.0) throw Error("rl_integral: order must be >= 0");
    if (b == 0.0) return f;
    const std::size_t n = f.size();
    const double dt = f.grid.dt;
    // product-trapezoid weights, exact for piecewise-linear signals
    const double scale = std::pow(dt, b) / gamma_fn(b + 2.0);
    std::vector<double> interior(n, 0.0);  // d_m for m >= 1
    for (std::size_t m = 1; m < n; ++m)
        interior[m] = std::pow(double(m + 1), b + 1.0) -
                      2.0 * std::pow(double(m), b + 1.0) +
                      std::pow(double(m - 1), b + 1.0);
    TimeSignal out;
    out.grid = f.grid;
    out.values.assign(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        const double jd = double(j);
        double acc =
            (std::pow(jd - 1.0, b + 1.0) - std::pow(jd, b) * (jd - b - 1.0)) *
            f.values[0];
        for (std::size_t k = 1; k < j; ++k) acc += interior[j - k] * f.values[k];
        acc += f.values[j];
        out.values[j] = scale * acc;
    }
    return out;
}

namespace {

std::vector<double> first_difference(const std::vector<double>& g, double dt) {
    const std::size_t n = g.size();
    std::vector<double> d(n, 0.0);
    if (n < 3) return d;
    d[0] = (-3.0 * g[0] + 4.0 * g[1] - g[2]) / (2.0 * dt);
    for (std::size_t k = 1; k + 1 < n; ++k)
        d[k] = (g[k + 1] - g[k - 1]) / (2.0 * dt);
    d[n - 1] = (3.0 * g[n - 1] - 4.0 * g[n - 2] + g[n - 3]) / (2.0 * dt);
    return d;
}

std::vector<double> second_difference(const std::vector<double>& g, double dt) {
    const std::size_t n = g.size();
    std::vector<double> d(n, 0.0);
    if (n < 4) return d;
    const double idt2 = 1.0 / (dt * dt);
    d[0] = (2.0 * g[0] - 5.0 * g[1] + 4.0 * g[2] - g[3]) * idt2;
    for (std::size_t k = 1; k + 1 < n; ++k)
        d[k] = (g[k + 1] - 2.0 * g[k] + g[k - 1]) * idt2;
    d[n - 1] = (2.0 * g[n - 1] - 5.0 * g[n - 2] + 4.0 * g[n - 3] - g[n - 4]) * idt2;
    return d;
}

}  // namespace

TimeSignal rl_derivative(const TimeSignal& f, double b) {
    if (!(b > 0.0) || b >= 2.0)
        throw Error("rl_derivative: order must lie in (0,2)");
    TimeSignal out;
    out.grid = f.grid;
    if (b == 1.0) {
        out.values = first_difference(f.values, f.grid.dt);
        return out;
    }
    const double ib = std::ceil(b) - b;
    TimeSignal g = rl_integral(f, ib);
    if (b < 1.0)
        out.values = first_difference(g.values, f.grid.dt);
    else
        out.values = second_difference(g.values, f.grid.dt);
    return out;
}

std::vector<double> l1_weights(double b, std::size_t count) {
    std::vector<double> w(count);
    for (std::size_t k = 0; k < count; ++k)
        w[k] = std::pow(double(k + 1), 1.0 - b) - std::pow(double(k), 1.0 - b);
    return w;
}

TimeSignal caputo_derivative(const TimeSignal& f, double b) {
    if (!(b > 0.0) || b > 2.0)
        throw Error("caputo_derivative: order must lie in (0,2]");
    TimeSignal out;
    out.grid = f.grid;
    const double dt = f.grid.dt;
    const std::size_t n = f.size();
    if (b == 1.0) {
        out.values = first_difference(f.values, dt);
        return out;
    }
    if (b == 2.0) {
        out.values = second_difference(f.values, dt);
        return out;
    }
    if (b < 1.0) {
        const auto w = l1_weights(b, n);
        const double scale = std::pow(dt, -b) / gamma_fn(2.0 - b);
        out.values.assign(n, 0.0);
        for (std::size_t j = 1; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < j; ++k)
                acc += w[k] * (f.values[j - k] - f.values[j - k - 1]);
            out.values[j] = scale * acc;
        }
        return out;
    }
    // b in (1,2): I^{2-b} applied to the discrete second derivative
    TimeSignal fpp;
    fpp.grid = f.grid;
    fpp.values = second_difference(f.values, dt);
    return rl_integral(fpp, 2.0 - b);
}

// ---------------------------------------------------------------------------

RelaxationKernel::RelaxationKernel(double b, double lambda, const TimeGrid& grid)
    : b_(b), lambda_(lambda), grid_(grid) {
    if (!(b > 0.0) || b > 2.0)
        throw Error("relaxation kernel: order must lie in (0,2]");
    if (lambda < 0.0) throw Error("relaxation kernel: lambda must be >= 0");
    const std::size_t n = grid.samples();
    // antiderivatives F(s) = s^b E_{b,b+1}(-lambda s^b) and
    // G(s) = s^{b+1} E_{b,b+2}(-lambda s^b) with G' = F, F' = K
    std::vector<double> F(n), G(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = grid.time(k);
        const double x = lambda * std::pow(s, b);
        F[k] = std::pow(s, b) * mittag_leffler_neg(b, b + 1.0, x);
        G[k] = std::pow(s, b + 1.0) * mittag_leffler_neg(b, b + 2.0, x);
    }
    mass_.resize(n - 1);
    moment_.resize(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double s0 = grid.time(k), s1 = grid.time(k + 1);
        mass_[k] = F[k + 1] - F[k];
        moment_[k] = s1 * F[k + 1] - s0 * F[k] - (G[k + 1] - G[k]) - s0 * mass_[k];
    }
}

std::vector<double> RelaxationKernel::convolve(const std::vector<double>& h) const {
    const std::size_t n = h.size();
    if (n != grid_.samples())
        throw Error("relaxation kernel convolve: length mismatch");
    const double dt = grid_.dt;
    std::vector<double> w(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t m = 0; m < j; ++m) {
            const double hr = h[j - m];      // value at the sigma = t_m edge
            const double hl = h[j - m - 1];  // value at the sigma = t_{m+1} edge
            acc += hr * mass_[m] - (hr - hl) * moment_[m] / dt;
        }
        w[j] = acc;
    }
    return w;
}

// ---------------------------------------------------------------------------

double BumpFunction::value(double t) const {
    const double r = (t - center) / halfwidth;
    if (std::abs(r) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

double BumpFunction::d1(double t) const {
    const double r = (t - center) / halfwidth;
    if (std::abs(r) >= 1.0) return 0.0;
    const double u = 1.0 / (1.0 - r * r);
    return value(t) * (-2.0 * r * u * u) / halfwidth;
}

double BumpFunction::d2(double t) const {
    const double r = (t - center) / halfwidth;
    if (std::abs(r) >= 1.0) return 0.0;
    const double u = 1.0 / (1.0 - r * r);
    const double v = value(t);
    return v * (-2.0 * u * u - 8.0 * r * r * u * u * u + 4.0 * r * r * u * u * u * u) /
           (halfwidth * halfwidth);
}

namespace {

double weak_residual_at(const TimeSignal& h, double b, double lambda,
                        const TimeGrid& grid) {
    // w = K * h with the exact product quadrature
    RelaxationKernel kern(b, lambda, grid);
    // resample h onto `grid` by linear interpolation (signals are
    // piecewise-linear by convention)
    std::vector<double> hv(grid.samples());
    for (std::size_t j = 0; j < hv.size(); ++j) {
        const double t = grid.time(j);
        const double s = t / h.grid.dt;
        const std::size_t i =
            std::min<std::size_t>(std::size_t(s), h.size() - 2);
        const double f = s - double(i);
        hv[j] = h.values[i] * (1.0 - f) + h.values[i + 1] * f;
    }
    auto w = kern.convolve(hv);

    // I^{ceil(b)-b} w for the integration-by-parts pairing
    TimeSignal ws;
    ws.grid = grid;
    ws.values = w;
    TimeSignal iw = rl_integral(ws, std::ceil(b) - b);

    const double T = grid.t_end();
    const int order = int(std::ceil(b));
    double worst = 0.0;
    for (int q = 0; q < 5; ++q) {
        BumpFunction chi{T * (0.30 + 0.12 * q), T * 0.18};
        // <D^b w, chi> = (-1)^order <I^{ceil-b} w, chi^{(order)}>
        double pairing = 0.0, mass_part = 0.0, rhs_part = 0.0, scale = 0.0;
        for (std::size_t j = 0; j < grid.samples(); ++j) {
            const double t = grid.time(j);
            const double tw = (j == 0 || j + 1 == grid.samples()) ? 0.5 : 1.0;
            const double chd = order == 1 ? -chi.d1(t) : chi.d2(t);
            pairing += tw * iw.values[j] * chd;
            mass_part += tw * w[j] * chi.value(t);
            rhs_part += tw * hv[j] * chi.value(t);
            scale += tw * std::abs(hv[j] * chi.value(t));
        }
        const double dt = grid.dt;
        const double res =
            std::abs(pairing * dt + lambda * mass_part * dt - rhs_part * dt);
        const double den = std::max(scale * dt, 1e-30);
        worst = std::max(worst, res / den);
    }
    return worst;
}

}  // namespace

RelaxationResidualReport verify_relaxation_ode(const TimeSignal& h, double b,
                                               double lambda) {
    if (!(b > 0.0) || b >= 2.0)
        throw Error("verify_relaxation_ode: order must lie in (0,2)");
    RelaxationResidualReport rep;
    rep.test_functions = 5;
    rep.max_residual = weak_residual_at(h, b, lambda, h.grid);
    TimeGrid half;
    half.dt = h.grid.dt / 2.0;
    half.steps = h.grid.steps * 2;
    rep.max_residual_half = weak_residual_at(h, b, lambda, half);
    if (rep.max_residual_half > 0.0 && rep.max_residual > 0.0)
        rep.observed_rate = std::log2(rep.max_residual / rep.max_residual_half);
    return rep;
}

}  // namespace fracsource
