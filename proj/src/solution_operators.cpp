#include "fracsource/solution_operators.hpp"

#include <algorithm>
#include <cmath>

namespace fracsource {

OrderField OrderField::constant(double alpha) {
    if (!(alpha > 0.0) || alpha > 2.0)
        throw ValidationError("order: constant alpha must lie in (0, 2]");
    OrderField f;
    f.constant_ = alpha;
    f.alpha_min_ = f.alpha_max_ = alpha;
    return f;
}

OrderField OrderField::piecewise(const DiscreteOperator& op,
                                 std::vector<Subdomain> parts) {
    if (parts.empty())
        throw ValidationError("order: piecewise field needs subdomains");
    std::sort(parts.begin(), parts.end(),
              [](const Subdomain& a, const Subdomain& b) { return a.lo < b.lo; });
    // partition checks: contiguous cover of the domain, disjoint
    const double x0 = op.mesh.x0, x1 = op.mesh.x1;
    const double tol = op.mesh.hx * 1e-9;
    if (std::abs(parts.front().lo - x0) > tol ||
        std::abs(parts.back().hi - x1) > tol)
        throw ValidationError(
            "(vo) subdomain partition must cover the whole domain");
    for (std::size_t i = 0; i + 1 < parts.size(); ++i)
        if (std::abs(parts[i].hi - parts[i + 1].lo) > tol)
            throw ValidationError(
                "(vo) subdomains must tile the domain without gaps or overlaps");
    double amin = 2.0, amax = 0.0;
    for (const auto& p : parts) {
        if (!(p.alpha > 0.0) || p.alpha >= 1.0)
            throw ValidationError(
                "(vo) variable-order values must lie in (0, 1); got alpha = " +
                std::to_string(p.alpha));
        amin = std::min(amin, p.alpha);
        amax = std::max(amax, p.alpha);
    }
    if (!(amax < std::min(2.0 * amin, 1.0)))
        throw ValidationError(
            "(vo) admissibility violated: alpha_max = " + std::to_string(amax) +
            " must be < min(2 alpha_min, 1) = " +
            std::to_string(std::min(2.0 * amin, 1.0)));

    OrderField f;
    f.parts_ = parts;
    f.alpha_min_ = amin;
    f.alpha_max_ = amax;
    f.per_node_.resize(op.active);
    for (std::size_t k = 0; k < op.active; ++k) {
        const double x = op.mesh.nodes[op.active_nodes[k]];
        double val = -1.0;
        for (const auto& p : parts) {
            if (x >= p.lo - tol && x < p.hi + tol) {
                val = p.alpha;
                break;
            }
        }
        if (val < 0.0)
            throw ValidationError("(vo) partition does not cover node at x = " +
                                  std::to_string(x));
        f.per_node_[k] = val;
    }
    return f;
}

double OrderField::constant_value() const {
    if (!constant_) throw Error("order field is not constant");
    return *constant_;
}

double OrderField::alpha_at(std::size_t k) const {
    if (constant_) return *constant_;
    return per_node_.at(k);
}

std::vector<double> OrderField::interfaces() const {
    std::vector<double> xs;
    for (std::size_t i = 0; i + 1 < parts_.size(); ++i) xs.push_back(parts_[i].hi);
    return xs;
}

std::vector<double> OrderField::node_values(const DiscreteOperator& op) const {
    std::vector<double> v(op.active);
    for (std::size_t k = 0; k < op.active; ++k)
        v[k] = constant_ ? *constant_ : per_node_.at(k);
    return v;
}

// ---------------------------------------------------------------------------

Contour build_contour(double s0, double delta, double theta, double truncation,
                      std::size_t n_arc, std::size_t n_leg) {
    if (!(theta > std::numbers::pi / 2.0) || !(theta < std::numbers::pi))
        throw ValidationError("contour: angle must lie in (pi/2, pi)");
    if (!(delta > 0.0) || !(truncation > delta))
        throw ValidationError("contour: requires 0 < delta < R");
    Contour c;
    c.shift = s0;
    c.radius = delta;
    c.angle = theta;
    c.truncation = truncation;

    const std::size_t arc_panels = std::max<std::size_t>(1, (n_arc + 7) / 8);
    const std::size_t leg_panels = std::max<std::size_t>(1, (n_leg + 7) / 8);

    const auto push = [&](cplx p, cplx w) {
        c.nodes.push_back(p);
        c.weights.push_back(w);
    };

    // lower leg, inward from R to delta: p = s0 + r e^{-i theta}
    const double u0 = std::log(delta), u1 = std::log(truncation);
    const cplx eim = std::polar(1.0, -theta), eip = std::polar(1.0, theta);
    {
        const double w = (u1 - u0) / double(leg_panels);
        for (std::size_t pnl = 0; pnl < leg_panels; ++pnl) {
            const double mid = u1 - (double(pnl) + 0.5) * w;  // inward ordering
            for (int q = 0; q < 8; ++q) {
                const double u = mid - 0.5 * w * kGL8Nodes[q];
                const double r = std::exp(u);
                // dp = -e^{-i theta} r du (r decreasing)
                push(cplx(s0, 0.0) + r * eim,
                     -0.5 * w * kGL8Weights[q] * r * eim);
            }
        }
    }
    // arc p = s0 + delta e^{i phi}, phi from -theta to theta
    {
        const double w = 2.0 * theta / double(arc_panels);
        for (std::size_t pnl = 0; pnl < arc_panels; ++pnl) {
            const double mid = -theta + (double(pnl) + 0.5) * w;
            for (int q = 0; q < 8; ++q) {
                const double phi = mid + 0.5 * w * kGL8Nodes[q];
                const cplx e = std::polar(delta, phi);
                push(cplx(s0, 0.0) + e, 0.5 * w * kGL8Weights[q] * cplx(0.0, 1.0) * e);
            }
        }
    }
    // upper leg, outward from delta to R
    {
        const double w = (u1 - u0) / double(leg_panels);
        for (std::size_t pnl = 0; pnl < leg_panels; ++pnl) {
            const double mid = u0 + (double(pnl) + 0.5) * w;
            for (int q = 0; q < 8; ++q) {
                const double u = mid + 0.5 * w * kGL8Nodes[q];
                const double r = std::exp(u);
                push(cplx(s0, 0.0) + r * eip, 0.5 * w * kGL8Weights[q] * r * eip);
            }
        }
    }
    return c;
}

Contour contour_for_time(double t, const ContourParams& params) {
    if (!(t > 0.0)) throw Error("contour_for_time: t must be positive");
    const double delta = params.delta_scale / t;
    const double R = (40.0 + std::log(1.0 / params.target_eps)) /
                     (t * std::abs(std::cos(params.theta)));
    return build_contour(params.shift, delta, params.theta,
                         std::max(R, 2.0 * delta), params.n_arc, params.n_leg);
}

// ---------------------------------------------------------------------------

TriMatrixZ resolvent_matrix(const DiscreteOperator& op, const OrderField& alpha,
                            cplx p) {
    if (!alpha.is_constant() && alpha.active_size() != op.active)
        throw Error("resolvent: order field does not match operator");
    TriMatrixZ m;
    m.sub.assign(op.op_l.sub.begin(), op.op_l.sub.end());
    m.diag.assign(op.op_l.diag.begin(), op.op_l.diag.end());
    m.sup.assign(op.op_l.sup.begin(), op.op_l.sup.end());
    if (alpha.is_constant()) {
        const cplx pa = std::pow(p, alpha.constant_value());
        for (std::size_t k = 0; k < op.active; ++k)
            m.diag[k] += pa * op.rho_active[k];
    } else {
        for (std::size_t k = 0; k < op.active; ++k)
            m.diag[k] += std::pow(p, alpha.alpha_at(k)) * op.rho_active[k];
    }
    return m;
}

ComplexField resolvent_solve(const DiscreteOperator& op, const OrderField& alpha,
                             cplx p, const ComplexField& rhs) {
    if (rhs.size() != op.active) throw Error("resolvent: rhs size mismatch");
    auto m = resolvent_matrix(op, alpha, p);
    return solve_tridiag(m, rhs);
}

ComplexField resolvent_solve(const DiscreteOperator& op, const OrderField& alpha,
                             cplx p, const SpatialField& rhs) {
    ComplexField z(rhs.begin(), rhs.end());
    return resolvent_solve(op, alpha, p, z);
}

// ---------------------------------------------------------------------------

SSpectralResult apply_S_spectral(const EigenSystem& eig, double alpha, double t,
                                 const SpatialField& psi) {
    if (!(alpha > 0.0) || alpha > 2.0)
        throw Error("apply_S_spectral: alpha must lie in (0, 2]");
    if (!(t > 0.0)) throw Error("apply_S_spectral: t must be positive");
    const std::size_t m = eig.modes.empty() ? 0 : eig.modes.front().size();
    if (psi.size() != m) throw Error("apply_S_spectral: field size mismatch");

    SSpectralResult out;
    out.value.assign(m, 0.0);
    const double ta = std::pow(t, alpha);
    const double tfac = std::pow(t, alpha - 1.0);
    double psi_norm2 = 0.0, captured2 = 0.0;
    for (std::size_t k = 0; k < m; ++k)
        psi_norm2 += eig.quad_weights[k] * eig.rho_active[k] * psi[k] * psi[k];
    for (std::size_t n = 0; n < eig.size(); ++n) {
        const double c = eig.inner_rho(psi, eig.modes[n]);
        captured2 += c * c;
        double kernel;
        if (alpha == 2.0) {
            // t E_{2,2}(-t^2 l) = sin(t sqrt l)/sqrt l
            const double sl = std::sqrt(eig.lambdas[n]);
            kernel = std::sin(t * sl) / sl;
        } else if (alpha == 1.0) {
            kernel = std::exp(-eig.lambdas[n] * t);
        } else {
            kernel = tfac * mittag_leffler_neg(alpha, alpha, ta * eig.lambdas[n]);
        }
        for (std::size_t k = 0; k < m; ++k)
            out.value[k] += kernel * c * eig.modes[n][k];
    }
    // tail bound: the uncaptured rho-norm mass of psi times the kernel
    // envelope at the first omitted eigenvalue
    const double resid2 = std::max(0.0, psi_norm2 - captured2);
    if (eig.size() < m && psi_norm2 > 0.0) {
        const double lam_next = eig.lambdas.back();
        const double env =
            alpha == 2.0 ? t : tfac / (1.0 + ta * lam_next) * 2.0;
        out.tail_bound = std::sqrt(resid2 / psi_norm2) * env;
    }
    return out;
}

SContourResult apply_S_contour(const DiscreteOperator& op,
                               const OrderField& alpha, const Contour& contour,
                               double t, const SpatialField& psi) {
    if (psi.size() != op.active) throw Error("apply_S_contour: size mismatch");
    ComplexField rho_psi(op.active);
    for (std::size_t k = 0; k < op.active; ++k)
        rho_psi[k] = psi[k] * op.rho_active[k];

    ComplexField acc(op.active, cplx{});
    for (std::size_t q = 0; q < contour.size(); ++q) {
        const cplx p = contour.nodes[q];
        const cplx w = contour.weights[q] * std::exp(t * p);
        auto sol = resolvent_solve(op, alpha, p, rho_psi);
        for (std::size_t k = 0; k < op.active; ++k) acc[k] += w * sol[k];
    }
    SContourResult out;
    out.value.resize(op.active);
    double re2 = 0.0, im2 = 0.0;
    const cplx itwopi = cplx(0.0, 2.0 * std::numbers::pi);
    for (std::size_t k = 0; k < op.active; ++k) {
        const cplx v = acc[k] / itwopi;
        out.value[k] = v.real();
        re2 += v.real() * v.real();
        im2 += v.imag() * v.imag();
    }
    out.imag_norm_ratio = re2 > 0.0 ? std::sqrt(im2 / re2) : std::sqrt(im2);
    return out;
}

double probe_shift(const DiscreteOperator& op, const OrderField& alpha,
                   double t, const ContourParams& params) {
    if (!op.has_convection) return 0.0;
    double s0 = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
        ContourParams trial = params;
        trial.shift = s0;
        Contour c = contour_for_time(t, trial);
        bool ok = true;
        // probe a subsample of nodes for factorization health
        for (std::size_t q = 0; q < c.size() && ok; q += 7) {
            try {
                TriFactorZ f(resolvent_matrix(op, alpha, c.nodes[q]));
                if (f.min_pivot_ratio() < 1e-13) ok = false;
            } catch (const NumericalError&) {
                ok = false;
            }
        }
        if (ok) return s0;
        s0 = s0 == 0.0 ? 0.5 : 2.0 * s0;
    }
    throw NumericalError("probe_shift: no usable shift found");
}

// ---------------------------------------------------------------------------

namespace {

// ||S(t)|| in the weighted L2 norm via power iteration on S^T S
double operator_norm_at(const DiscreteOperator& op, const OrderField& alpha,
                        double t, const ContourParams& params,
                        DeterministicRng& rng) {
    Contour contour = contour_for_time(t, params);
    const std::size_t m = op.active;
    std::vector<double> sqw(m);
    for (std::size_t k = 0; k < m; ++k) sqw[k] = std::sqrt(op.quad_weights[k]);

    // factorizations are reused across the 50 iterations
    std::vector<TriFactorZ> factors;
    factors.reserve(contour.size());
    std::vector<cplx> expw(contour.size());
    for (std::size_t q = 0; q < contour.size(); ++q) {
        factors.emplace_back(resolvent_matrix(op, alpha, contour.nodes[q]));
        expw[q] = contour.weights[q] * std::exp(t * contour.nodes[q]) /
                  cplx(0.0, 2.0 * std::numbers::pi);
    }
    const auto apply_s = [&](const std::vector<double>& v, bool transposed) {
        ComplexField rhs(m);
        if (!transposed) {
            for (std::size_t k = 0; k < m; ++k)
                rhs[k] = v[k] / sqw[k] * op.rho_active[k];
        } else {
            for (std::size_t k = 0; k < m; ++k) rhs[k] = v[k] * sqw[k];
        }
        ComplexField acc(m, cplx{});
        for (std::size_t q = 0; q < contour.size(); ++q) {
            auto sol = transposed ? factors[q].solve_transposed(rhs)
                                  : factors[q].solve(rhs);
            for (std::size_t k = 0; k < m; ++k) acc[k] += expw[q] * sol[k];
        }
        std::vector<double> out(m);
        if (!transposed) {
            for (std::size_t k = 0; k < m; ++k) out[k] = acc[k].real() * sqw[k];
        } else {
            for (std::size_t k = 0; k < m; ++k)
                out[k] = acc[k].real() * op.rho_active[k] / sqw[k];
        }
        return out;
    };

    std::vector<double> v(m);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    double norm_sq = 0.0;
    for (int it = 0; it < 50; ++it) {
        auto sv = apply_s(v, false);
        auto stsv = apply_s(sv, true);
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            num += v[k] * stsv[k];
            den += v[k] * v[k];
        }
        norm_sq = num / den;
        double nn = 0.0;
        for (double x : stsv) nn += x * x;
        nn = std::sqrt(nn);
        if (nn == 0.0) return 0.0;
        for (std::size_t k = 0; k < m; ++k) v[k] = stsv[k] / nn;
    }
    return std::sqrt(std::max(norm_sq, 0.0));
}

double fit_slope(const std::vector<double>& ts, const std::vector<double>& ns,
                 double lo, double hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] < lo || ts[i] > hi || ns[i] <= 0.0) continue;
        const double x = std::log(ts[i]), y = std::log(ns[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return 0.0;
    return (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
}

}  // namespace

OperatorNormReport operator_norm_estimate(const DiscreteOperator& op,
                                          const OrderField& alpha,
                                          const std::vector<double>& t_grid,
                                          const ContourParams& params,
                                          std::uint64_t seed) {
    if (t_grid.size() < 4)
        throw Error("operator_norm_estimate: need at least 4 time samples");
    OperatorNormReport rep;
    rep.times = t_grid;
    rep.norms.resize(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        DeterministicRng rng(seed + i);
        rep.norms[i] = operator_norm_at(op, alpha, t_grid[i], params, rng);
    }
    rep.exponent_small = 2.0 * alpha.alpha_min() - alpha.alpha_max() - 1.0;
    rep.exponent_large = 2.0 * alpha.alpha_max() - alpha.alpha_min() - 1.0;
    const double tmin = *std::min_element(t_grid.begin(), t_grid.end());
    const double tmax = *std::max_element(t_grid.begin(), t_grid.end());
    rep.small_t_slope = fit_slope(t_grid, rep.norms, tmin, tmin * 12.0);
    rep.large_t_slope = fit_slope(t_grid, rep.norms, tmax / 12.0, tmax);
    // single fitted C: the largest ratio of the measured norm to the envelope
    double c = 0.0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double env = std::max(
            {std::pow(t_grid[i], rep.exponent_small),
             std::pow(t_grid[i], rep.exponent_large), 1.0});
        c = std::max(c, rep.norms[i] / env);
    }
    rep.envelope_constant = c;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double env = std::max(
            {std::pow(t_grid[i], rep.exponent_small),
             std::pow(t_grid[i], rep.exponent_large), 1.0});
        if (rep.norms[i] > c * env * (1.0 + 1e-12)) rep.envelope_violations++;
    }
    return rep;
}

}  // namespace fracsource
