#include "fracsource/grid_elliptic.hpp"

#include <algorithm>
#include <cmath>

namespace fracsource {

SpatialMesh SpatialMesh::uniform(double x0, double x1, std::size_t node_count) {
    if (node_count < 3) throw ValidationError("mesh: node count must be >= 3");
    if (!(x1 > x0)) throw ValidationError("mesh: requires x1 > x0");
    SpatialMesh m;
    m.dimension = 1;
    m.x0 = x0;
    m.x1 = x1;
    m.node_count = node_count;
    m.hx = (x1 - x0) / double(node_count - 1);
    m.nodes.resize(node_count);
    for (std::size_t i = 0; i < node_count; ++i)
        m.nodes[i] = x0 + double(i) * m.hx;
    m.nodes.back() = x1;
    return m;
}

CoefficientSet CoefficientSet::constant(const SpatialMesh& mesh, double a,
                                        double b, double c, double rho,
                                        double kappa, BoundaryCondition bc) {
    CoefficientSet s;
    const std::size_t n = mesh.node_count;
    s.a.assign(n, a);
    s.b.assign(n, b);
    s.c.assign(n, c);
    s.rho.assign(n, rho);
    s.a_mid.assign(n - 1, a);
    s.kappa = kappa;
    s.bc = bc;
    return s;
}

void CoefficientSet::validate(const SpatialMesh& mesh) const {
    const std::size_t n = mesh.node_count;
    if (a.size() != n || b.size() != n || c.size() != n || rho.size() != n ||
        a_mid.size() != n - 1)
        throw ValidationError("coefficients: field length does not match mesh");
    if (!(kappa > 0.0))
        throw ValidationError("coefficients: ellipticity constant must be positive");
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] < kappa)
            throw ValidationError(
                "coefficients: ellipticity violated, a(x) < kappa at node " +
                std::to_string(i));
        if (!allow_zero_c && c[i] < kappa)
            throw ValidationError("coefficients: c(x) < kappa at node " +
                                  std::to_string(i));
        if (allow_zero_c && c[i] < 0.0)
            throw ValidationError("coefficients: c(x) negative at node " +
                                  std::to_string(i));
    }
    double rmin = rho[0], rmax = rho[0];
    for (double r : rho) {
        rmin = std::min(rmin, r);
        rmax = std::max(rmax, r);
    }
    if (!(rmin > 0.0))
        throw ValidationError(
            "(eq-rho) weight rho must satisfy 0 < rho_min <= rho <= rho_max; got "
            "min " + std::to_string(rmin));
    (void)rmax;
}

DiscreteOperator assemble_operator(const SpatialMesh& mesh,
                                   const CoefficientSet& coeffs) {
    coeffs.validate(mesh);
    DiscreteOperator op;
    op.mesh = mesh;
    op.coeffs = coeffs;
    const double h = mesh.hx;
    const std::size_t n = mesh.node_count;

    if (coeffs.bc == BoundaryCondition::Dirichlet) {
        op.active = n - 2;
        for (std::size_t i = 1; i + 1 < n; ++i) op.active_nodes.push_back(i);
    } else {
        op.active = n;
        for (std::size_t i = 0; i < n; ++i) op.active_nodes.push_back(i);
    }
    const std::size_t m = op.active;
    op.op_l.sub.assign(m, 0.0);
    op.op_l.diag.assign(m, 0.0);
    op.op_l.sup.assign(m, 0.0);
    op.wa_diag.assign(m, 0.0);
    op.wa_off.assign(m, 0.0);
    op.quad_weights.assign(m, h);
    op.rho_active.resize(m);
    op.c_active.resize(m);
    op.b_active.resize(m);

    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = op.active_nodes[k];
        op.rho_active[k] = coeffs.rho[i];
        op.c_active[k] = coeffs.c[i];
        op.b_active[k] = coeffs.b[i];
        if (coeffs.b[i] != 0.0) op.has_convection = true;

        double aL, aR, w;
        if (coeffs.bc == BoundaryCondition::Neumann && i == 0) {
            // ghost node eliminated through a grad u . nu = 0: the exterior
            // half cell mirrors the first interior one
            aL = 0.0;
            aR = coeffs.a_mid[0];
            w = h / 2.0;
            op.op_l.diag[k] = 2.0 * aR / (h * h) + coeffs.c[i];
            op.op_l.sup[k] = -2.0 * aR / (h * h);
        } else if (coeffs.bc == BoundaryCondition::Neumann && i == n - 1) {
            aL = coeffs.a_mid[n - 2];
            aR = 0.0;
            w = h / 2.0;
            op.op_l.diag[k] = 2.0 * aL / (h * h) + coeffs.c[i];
            op.op_l.sub[k] = -2.0 * aL / (h * h);
        } else {
            aL = coeffs.a_mid[i - 1];
            aR = coeffs.a_mid[i];
            w = h;
            op.op_l.diag[k] = (aL + aR) / (h * h) + coeffs.c[i];
            if (k > 0) op.op_l.sub[k] = -aL / (h * h);
            if (k + 1 < m) op.op_l.sup[k] = -aR / (h * h);
            // central-difference convection
            if (coeffs.b[i] != 0.0) {
                if (k > 0) op.op_l.sub[k] -= coeffs.b[i] / (2.0 * h);
                if (k + 1 < m) op.op_l.sup[k] += coeffs.b[i] / (2.0 * h);
            }
        }
        op.quad_weights[k] = w;
        op.wa_diag[k] = w * ((aL + aR) / (h * h) * (w == h ? 1.0 : 2.0) + coeffs.c[i]);
        // symmetric off-diagonal of W*A couples k and k+1
        if (k + 1 < m) {
            const std::size_t icell = op.active_nodes[k];  // cell (i, i+1)
            op.wa_off[k] = -coeffs.a_mid[icell] / h;
        }
    }
    return op;
}

namespace {

template <typename T>
std::vector<T> tri_apply(const TriMatrix<T>& m, const std::vector<T>& u) {
    return m.apply(u);
}

}  // namespace

SpatialField DiscreteOperator::apply_L(const SpatialField& u) const {
    return op_l.apply(u);
}

ComplexField DiscreteOperator::apply_L(const ComplexField& u) const {
    TriMatrixZ z;
    z.sub.assign(op_l.sub.begin(), op_l.sub.end());
    z.diag.assign(op_l.diag.begin(), op_l.diag.end());
    z.sup.assign(op_l.sup.begin(), op_l.sup.end());
    return z.apply(u);
}

SpatialField DiscreteOperator::apply_A(const SpatialField& u) const {
    // A = W^{-1} (W A); W A is the stored symmetric tridiagonal
    const std::size_t m = active;
    SpatialField y(m);
    for (std::size_t k = 0; k < m; ++k) {
        double v = wa_diag[k] * u[k];
        if (k > 0) v += wa_off[k - 1] * u[k - 1];
        if (k + 1 < m) v += wa_off[k] * u[k + 1];
        y[k] = v / quad_weights[k];
    }
    return y;
}

double DiscreteOperator::inner_rho(const SpatialField& u,
                                   const SpatialField& v) const {
    double s = 0.0;
    for (std::size_t k = 0; k < active; ++k)
        s += quad_weights[k] * rho_active[k] * u[k] * v[k];
    return s;
}

double DiscreteOperator::inner(const SpatialField& u,
                               const SpatialField& v) const {
    double s = 0.0;
    for (std::size_t k = 0; k < active; ++k) s += quad_weights[k] * u[k] * v[k];
    return s;
}

double DiscreteOperator::norm_rho(const SpatialField& u) const {
    return std::sqrt(inner_rho(u, u));
}

double DiscreteOperator::norm(const SpatialField& u) const {
    return std::sqrt(inner(u, u));
}

double DiscreteOperator::energy_form(const SpatialField& u) const {
    // sum over cells of a_mid * (du/dx)^2 * h plus c-weighted mass term;
    // Dirichlet boundary cells contribute with the zero boundary value.
    const double h = mesh.hx;
    double pot = 0.0;
    if (coeffs.bc == BoundaryCondition::Dirichlet) {
        const std::size_t m = active;
        pot += coeffs.a_mid.front() * (u[0] * u[0]) / h;
        for (std::size_t k = 0; k + 1 < m; ++k) {
            const double du = u[k + 1] - u[k];
            pot += coeffs.a_mid[active_nodes[k]] * du * du / h;
        }
        pot += coeffs.a_mid.back() * (u[m - 1] * u[m - 1]) / h;
    } else {
        for (std::size_t k = 0; k + 1 < active; ++k) {
            const double du = u[k + 1] - u[k];
            pot += coeffs.a_mid[k] * du * du / h;
        }
    }
    for (std::size_t k = 0; k < active; ++k)
        pot += c_active[k] * u[k] * u[k] * quad_weights[k];
    return pot;
}

std::vector<double> DiscreteOperator::active_coords() const {
    std::vector<double> x(active);
    for (std::size_t k = 0; k < active; ++k) x[k] = mesh.nodes[active_nodes[k]];
    return x;
}

double EigenSystem::inner_rho(const SpatialField& u,
                              const SpatialField& v) const {
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k)
        s += quad_weights[k] * rho_active[k] * u[k] * v[k];
    return s;
}

EigenSystem eigensystem(const DiscreteOperator& op, std::size_t n_modes) {
    if (op.has_convection)
        throw ValidationError(
            "eigensystem requires a self-adjoint operator (b == 0)");
    const std::size_t m = op.active;
    if (n_modes == 0 || n_modes > m)
        throw Error("eigensystem: requested modes exceed matrix dimension");

    // symmetrize: T = D^{-1/2} (W A) D^{-1/2} with D = diag(w_k rho_k)
    std::vector<double> dscale(m);
    for (std::size_t k = 0; k < m; ++k)
        dscale[k] = std::sqrt(op.quad_weights[k] * op.rho_active[k]);
    std::vector<double> d(m), e(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
        d[k] = op.wa_diag[k] / (dscale[k] * dscale[k]);
        if (k + 1 < m) e[k] = op.wa_off[k] / (dscale[k] * dscale[k + 1]);
    }

    EigenSystem sys;
    sys.quad_weights = op.quad_weights;
    sys.rho_active = op.rho_active;
    sys.modes.resize(n_modes);

    double scale = 0.0;
    for (std::size_t k = 0; k < m; ++k)
        scale = std::max(scale,
                         std::abs(d[k]) + 2.0 * std::abs(k + 1 < m ? e[k] : 0.0));

    const auto t_apply = [&](const std::vector<double>& v) {
        std::vector<double> y(m);
        for (std::size_t k = 0; k < m; ++k) {
            double s = d[k] * v[k];
            if (k > 0) s += e[k - 1] * v[k - 1];
            if (k + 1 < m) s += e[k] * v[k + 1];
            y[k] = s;
        }
        return y;
    };
    // one inverse-iteration sweep plus a Rayleigh update pushes the residual
    // of a computed pair down to the rounding floor of the matrix scale
    const auto refine = [&](double& lam, std::vector<double>& v) {
        TriMatrixD shifted;
        shifted.diag.resize(m);
        shifted.sub.assign(m, 0.0);
        shifted.sup.assign(m, 0.0);
        const double sh = lam + scale * 1e-14;
        for (std::size_t k = 0; k < m; ++k) {
            shifted.diag[k] = d[k] - sh;
            if (k + 1 < m) {
                shifted.sup[k] = e[k];
                shifted.sub[k + 1] = e[k];
            }
        }
        try {
            auto w = solve_tridiag(shifted, v);
            double nrm = 0.0;
            for (double x : w) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm > 0.0) {
                for (auto& x : w) x /= nrm;
                auto tw = t_apply(w);
                double rq = 0.0;
                for (std::size_t k = 0; k < m; ++k) rq += w[k] * tw[k];
                lam = rq;
                v = std::move(w);
            }
        } catch (const NumericalError&) {
            // exactly singular shift: the pair is already converged
        }
    };

    std::vector<double> lam(n_modes);
    std::vector<std::vector<double>> psi(n_modes);

    if (m <= 512 || n_modes * 4 > m) {
        auto dv = d;
        auto ev = e;
        std::vector<double> vecs;
        sym_tridiag_eig(dv, ev, &vecs);
        for (std::size_t j = 0; j < n_modes; ++j) {
            lam[j] = dv[j];
            psi[j].resize(m);
            for (std::size_t k = 0; k < m; ++k) psi[j][k] = vecs[k * m + j];
        }
    } else {
        // eigenvalues by QL without vectors, vectors by inverse iteration
        auto dv = d;
        auto ev = e;
        sym_tridiag_eig(dv, ev, nullptr);
        for (std::size_t j = 0; j < n_modes; ++j) {
            lam[j] = dv[j];
            DeterministicRng rng(911 + j);
            std::vector<double> v(m);
            for (auto& x : v) x = rng.uniform(-1, 1);
            TriMatrixD shifted;
            shifted.diag.resize(m);
            shifted.sub.assign(m, 0.0);
            shifted.sup.assign(m, 0.0);
            const double sh = dv[j] + scale * 1e-13;
            for (std::size_t k = 0; k < m; ++k) {
                shifted.diag[k] = d[k] - sh;
                if (k + 1 < m) {
                    shifted.sup[k] = e[k];
                    shifted.sub[k + 1] = e[k];
                }
            }
            for (int it = 0; it < 3; ++it) {
                v = solve_tridiag(shifted, std::move(v));
                for (std::size_t p = 0; p < j; ++p) {
                    if (std::abs(dv[p] - dv[j]) < 1e-8 * (1.0 + std::abs(dv[j]))) {
                        double dot = 0.0;
                        for (std::size_t k = 0; k < m; ++k) dot += psi[p][k] * v[k];
                        for (std::size_t k = 0; k < m; ++k) v[k] -= dot * psi[p][k];
                    }
                }
                double nrm = 0.0;
                for (double x : v) nrm += x * x;
                nrm = std::sqrt(nrm);
                if (nrm == 0.0)
                    throw NumericalError("eigensystem: inverse iteration collapsed");
                for (auto& x : v) x /= nrm;
            }
            psi[j] = std::move(v);
        }
    }

    for (std::size_t j = 0; j < n_modes; ++j) {
        refine(lam[j], psi[j]);
        double best = 0.0;
        for (double x : psi[j])
            if (std::abs(x) > std::abs(best)) best = x;
        if (best < 0.0)
            for (auto& x : psi[j]) x = -x;
        SpatialField phi(m);
        for (std::size_t k = 0; k < m; ++k) phi[k] = psi[j][k] / dscale[k];
        sys.modes[j] = std::move(phi);
    }
    sys.lambdas = lam;
    return sys;
}

namespace {

// cumulative travel time integral Q(x_i) = int_{x0}^{x_i} sqrt(rho/a)
std::vector<double> cumulative_metric(const SpatialMesh& mesh,
                                      const CoefficientSet& coeffs) {
    const std::size_t n = mesh.node_count;
    std::vector<double> slow(n), q(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        slow[i] = std::sqrt(coeffs.rho[i] / coeffs.a[i]);
    for (std::size_t i = 1; i < n; ++i)
        q[i] = q[i - 1] + 0.5 * (slow[i] + slow[i - 1]) * mesh.hx;
    return q;
}

double metric_at(const SpatialMesh& mesh, const std::vector<double>& q,
                 double x) {
    if (x <= mesh.x0) return q.front();
    if (x >= mesh.x1) return q.back();
    const double s = (x - mesh.x0) / mesh.hx;
    const std::size_t i = std::min<std::size_t>(std::size_t(s), mesh.node_count - 2);
    const double f = s - double(i);
    return q[i] * (1.0 - f) + q[i + 1] * f;
}

}  // namespace

double riemannian_distance(const SpatialMesh& mesh, const CoefficientSet& coeffs,
                           double x, const std::vector<std::size_t>& omega) {
    if (mesh.dimension != 1)
        throw ValidationError("riemannian_distance: only 1D meshes supported");
    if (omega.empty())
        throw ValidationError("riemannian_distance: omega must be nonempty");
    const auto q = cumulative_metric(mesh, coeffs);
    const double qx = metric_at(mesh, q, x);
    double best = 1e300;
    for (std::size_t i : omega) best = std::min(best, std::abs(q[i] - qx));
    return best;
}

double control_time(const SpatialMesh& mesh, const CoefficientSet& coeffs,
                    const std::vector<std::size_t>& omega, double t0) {
    const auto q = cumulative_metric(mesh, coeffs);
    if (omega.empty())
        throw ValidationError("control_time: omega must be nonempty");
    double qlo = 1e300, qhi = -1e300;
    for (std::size_t i : omega) {
        qlo = std::min(qlo, q[i]);
        qhi = std::max(qhi, q[i]);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < mesh.node_count; ++i) {
        double d = 0.0;
        if (q[i] < qlo) d = qlo - q[i];
        else if (q[i] > qhi) d = q[i] - qhi;
        worst = std::max(worst, d);
    }
    return t0 + worst;
}

std::vector<std::size_t> interval_node_set(const SpatialMesh& mesh, double lo,
                                           double hi) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < mesh.node_count; ++i)
        if (mesh.nodes[i] > lo && mesh.nodes[i] < hi) idx.push_back(i);
    return idx;
}

std::vector<std::size_t> interval_node_set_closed(const SpatialMesh& mesh,
                                                  double lo, double hi) {
    const double tol = mesh.hx * 1e-9;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < mesh.node_count; ++i)
        if (mesh.nodes[i] >= lo - tol && mesh.nodes[i] <= hi + tol)
            idx.push_back(i);
    return idx;
}

}  // namespace fracsource
