#pragma once

// 1D uniform-mesh discretization of the elliptic operator
//   A u = -(a u')' + c u,      L u = A u + b u'
// with Dirichlet or Neumann boundary handling, the rho-weighted eigensystem
// of the self-adjoint part, and travel-time geometry helpers.

#include "fracsource/linalg.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace fracsource {

using SpatialField = std::vector<double>;
using ComplexField = std::vector<cplx>;

enum class BoundaryCondition { Dirichlet, Neumann };

struct SpatialMesh {
    int dimension = 1;
    double x0 = 0.0, x1 = 1.0;
    std::size_t node_count = 0;  // total nodes including both endpoints
    double hx = 0.0;
    std::vector<double> nodes;

    static SpatialMesh uniform(double x0, double x1, std::size_t node_count);

    std::size_t interior_count() const { return node_count - 2; }
};

// Nodal coefficient samples on the full mesh. `a_mid[i]` is the flux
// coefficient on the cell (x_i, x_{i+1}); by default the arithmetic mean of
// the nodal samples.
struct CoefficientSet {
    std::vector<double> a, b, c, rho;
    std::vector<double> a_mid;
    double kappa = 0.0;
    BoundaryCondition bc = BoundaryCondition::Dirichlet;
    bool allow_zero_c = false;  // test mode: skip the c >= kappa check

    static CoefficientSet constant(const SpatialMesh& mesh, double a, double b,
                                   double c, double rho, double kappa,
                                   BoundaryCondition bc);

    // Throws ValidationError naming the violated admissibility condition.
    void validate(const SpatialMesh& mesh) const;
};

// Assembled tridiagonal operators over the active nodes (interior nodes for
// Dirichlet, all nodes for Neumann). `wa_*` is the symmetric finite-volume
// form W*A used by the eigensolver and energy functionals; `quad_weights`
// holds the diagonal of W.
struct DiscreteOperator {
    SpatialMesh mesh;
    CoefficientSet coeffs;
    std::size_t active = 0;
    std::vector<std::size_t> active_nodes;  // mesh indices of active unknowns

    TriMatrixD op_l;  // L = A + b d/dx (central differences)
    std::vector<double> wa_diag, wa_off;  // symmetric W*A tridiagonal
    std::vector<double> quad_weights;     // W diagonal (h, boundary h/2)
    std::vector<double> rho_active, c_active, b_active;
    bool has_convection = false;

    SpatialField apply_L(const SpatialField& u) const;
    ComplexField apply_L(const ComplexField& u) const;
    SpatialField apply_A(const SpatialField& u) const;

    double inner_rho(const SpatialField& u, const SpatialField& v) const;
    double inner(const SpatialField& u, const SpatialField& v) const;
    double norm_rho(const SpatialField& u) const;
    double norm(const SpatialField& u) const;

    // quadratic form <A u, u> evaluated flux-wise (exact summation by parts)
    double energy_form(const SpatialField& u) const;

    // coordinates of the active nodes
    std::vector<double> active_coords() const;
};

struct EigenSystem {
    std::vector<double> lambdas;             // ascending
    std::vector<SpatialField> modes;         // rho-orthonormal nodal vectors
    std::vector<double> quad_weights;        // copy of the FV weights
    std::vector<double> rho_active;

    std::size_t size() const { return lambdas.size(); }
    double inner_rho(const SpatialField& u, const SpatialField& v) const;
};

DiscreteOperator assemble_operator(const SpatialMesh& mesh,
                                   const CoefficientSet& coeffs);

// First n_modes rho-orthonormal eigenpairs of A phi = lambda rho phi via the
// symmetrized tridiagonal problem. Requires b == 0.
EigenSystem eigensystem(const DiscreteOperator& op, std::size_t n_modes);

// Travel-time distance from point x to the index set omega in the metric
// sqrt(rho/a): the infimum over omega nodes of |integral of sqrt(rho/a)|,
// evaluated by composite trapezoid on the mesh.
double riemannian_distance(const SpatialMesh& mesh, const CoefficientSet& coeffs,
                           double x, const std::vector<std::size_t>& omega);

// T* = T0 + sup_x dist(x, omega): the observability threshold.
double control_time(const SpatialMesh& mesh, const CoefficientSet& coeffs,
                    const std::vector<std::size_t>& omega, double t0);

// Index set of mesh nodes strictly inside the open interval (lo, hi).
std::vector<std::size_t> interval_node_set(const SpatialMesh& mesh, double lo,
                                           double hi);

// Closure variant (nodes in [lo, hi] up to rounding); distances to an open
// set are attained on its closure, so the geometry helpers use this one.
std::vector<std::size_t> interval_node_set_closed(const SpatialMesh& mesh,
                                                  double lo, double hi);

}  // namespace fracsource
