#pragma once

// Solution operators for rho d_t^alpha u + L u = f: the spectral kernel sum
// for constant order and b == 0, and the contour-integral operator
//   S(t) psi = (1/2 pi i) oint e^{tp} (L + p^alpha rho)^{-1} (rho psi) dp
// over a truncated sectorial contour, valid for piecewise-constant variable
// order and for convection operators (with a probed shift).

#include "fracsource/fractional_time.hpp"
#include "fracsource/grid_elliptic.hpp"
#include "fracsource/special_functions.hpp"

#include <optional>
#include <vector>

namespace fracsource {

// piecewise-constant spatial order alpha(x), or a single constant in (0,2]
class OrderField {
public:
    struct Subdomain {
        double lo, hi;   // coordinate interval
        double alpha;    // order on it, in (0,1)
    };

    static OrderField constant(double alpha);
    // validates the admissibility condition (vo): partition covers the
    // domain, 0 < a_1 < ... < a_N, and a_max < min(2 a_min, 1)
    static OrderField piecewise(const DiscreteOperator& op,
                                std::vector<Subdomain> parts);

    bool is_constant() const { return constant_.has_value(); }
    double constant_value() const;
    double alpha_at(std::size_t active_index) const;
    double alpha_min() const { return alpha_min_; }
    double alpha_max() const { return alpha_max_; }
    const std::vector<Subdomain>& subdomains() const { return parts_; }
    // interior interface coordinates between subdomains
    std::vector<double> interfaces() const;
    std::size_t active_size() const { return per_node_.size(); }

    // nodal values over the operator's active nodes (constant order is
    // broadcast)
    std::vector<double> node_values(const DiscreteOperator& op) const;

private:
    std::optional<double> constant_;
    std::vector<Subdomain> parts_;
    std::vector<double> per_node_;
    double alpha_min_ = 0.0, alpha_max_ = 0.0;
};

struct Contour {
    double shift = 0.0;   // s0
    double radius = 0.0;  // delta
    double angle = 0.0;   // theta in (pi/2, pi)
    double truncation = 0.0;  // R
    std::vector<cplx> nodes;
    std::vector<cplx> weights;  // dp line elements times quadrature weights

    std::size_t size() const { return nodes.size(); }

    // (1/2 pi i) sum of w f(p) over the nodes
    template <typename F>
    cplx integrate(F&& f) const {
        cplx acc = 0.0;
        for (std::size_t q = 0; q < nodes.size(); ++q)
            acc += weights[q] * f(nodes[q]);
        return acc / cplx(0.0, 2.0 * std::numbers::pi);
    }
};

// Gauss-Legendre panels: uniform in angle on the arc, uniform in log r on
// the legs; node counts are rounded up to whole panels of 8.
Contour build_contour(double s0, double delta, double theta, double truncation,
                      std::size_t n_arc, std::size_t n_leg);

// default contour for time t: delta = 1/t, R = (40 + ln(1/eps)) / (t |cos
// theta|), theta = 3 pi / 4
struct ContourParams {
    double theta = 2.356194490192345;  // 3 pi / 4
    double delta_scale = 1.0;          // delta = delta_scale / t
    double target_eps = 1e-12;
    std::size_t n_arc = 64;
    std::size_t n_leg = 256;
    double shift = 0.0;
};

Contour contour_for_time(double t, const ContourParams& params);

// solves (L + p^{alpha(x)} rho(x)) w = rhs with the boundary rows already
// encoded in op; principal branch of p^alpha
ComplexField resolvent_solve(const DiscreteOperator& op, const OrderField& alpha,
                             cplx p, const ComplexField& rhs);
ComplexField resolvent_solve(const DiscreteOperator& op, const OrderField& alpha,
                             cplx p, const SpatialField& rhs);

// factorization helper for multi-right-hand-side sweeps
TriMatrixZ resolvent_matrix(const DiscreteOperator& op, const OrderField& alpha,
                            cplx p);

struct SContourResult {
    SpatialField value;
    double imag_norm_ratio = 0.0;  // conjugate-symmetry diagnostic
};

// spectral kernel sum: S(t) psi = t^{a-1} sum E_{a,a}(-t^a l_n) c_n phi_n
// with c_n = (psi, phi_n)_rho; requires constant order, b == 0.
struct SSpectralResult {
    SpatialField value;
    double tail_bound = 0.0;  // relative rho-norm bound on the truncated tail
};

SSpectralResult apply_S_spectral(const EigenSystem& eig, double alpha, double t,
                                 const SpatialField& psi);

// contour evaluation of the same operator (general order / convection)
SContourResult apply_S_contour(const DiscreteOperator& op,
                               const OrderField& alpha, const Contour& contour,
                               double t, const SpatialField& psi);

// probes the smallest shift s0 (doubling from 0) for which every contour
// factorization succeeds; needed when b != 0
double probe_shift(const DiscreteOperator& op, const OrderField& alpha,
                   double t, const ContourParams& params);

struct OperatorNormReport {
    std::vector<double> times;
    std::vector<double> norms;
    double small_t_slope = 0.0;
    double large_t_slope = 0.0;
    double envelope_constant = 0.0;  // fitted C for max(t^{e1}, t^{e2}, 1)
    double exponent_small = 0.0;     // 2 a_min - a_max - 1
    double exponent_large = 0.0;     // 2 a_max - a_min - 1
    int envelope_violations = 0;     // with the fitted C (0 by construction)
};

// power-iteration estimate of ||S(t)|| over a log-spaced time grid with
// log-log slope fits on both tails
OperatorNormReport operator_norm_estimate(const DiscreteOperator& op,
                                          const OrderField& alpha,
                                          const std::vector<double>& t_grid,
                                          const ContourParams& params,
                                          std::uint64_t seed);

}  // namespace fracsource
