#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "fracsource/special_functions.hpp"
#include "oracle_utils.hpp"

#include <cmath>
#include <numbers>

using namespace fracsource;
using fracsource::testing::ml_series_oracle;

namespace {
// Reference values computed once with a 200+ digit arbitrary-precision
// Taylor/asymptotic evaluation and frozen here.
struct Frozen {
    double alpha, beta, re, im, expect_re, expect_im;
};
const Frozen kFrozenMl[] = {
    {0.5, 0.5, -3.0, 0.0, 2.71861300035864356902e-2, 0.0},
    {0.5, 0.5, -5.0, 0.0, 1.066639488241315509702e-2, 0.0},
    {0.5, 1.0, -4.5, 0.0, 1.224848042738414175492e-1, 0.0},
    {0.4, 0.4, -2.0, 0.0, 4.260064404578175510901e-2, 0.0},
    {0.7, 1.0, -5.0, 0.0, 7.756935776476980169216e-2, 0.0},
    {0.9, 0.9, -8.0, 0.0, 2.580814304573615923206e-3, 0.0},
    {0.55, 0.55, -6.0, 0.0, 7.882574506691591635672e-3, 0.0},
    {0.6, 0.6, -30.0, 0.0, 3.077602711710753652622e-4, 0.0},
    {0.5, 0.5, -9.0, 0.0, 3.420067207784129629242e-3, 0.0},
    {0.5, 0.5, -25.0, 0.0, 4.502727317223133579649e-4, 0.0},
    {1.5, 1.5, -20.0, 0.0, 6.198501246861341928127e-3, 0.0},
    {1.5, 1.5, -150.0, 0.0, -1.880346052726913244588e-5, 0.0},
    {1.0, 0.7, -7.0, 0.0, -4.232297912450020834199e-2, 0.0},
    {1.0, 2.5, -18.0, 0.0, 6.089329466100637445673e-2, 0.0},
    {0.4, 0.4, -50.0, 0.0, 1.060151169501606585059e-4, 0.0},
    {1.3, 1.3, -60.0, 0.0, -8.877878466838873464787e-5, 0.0},
    {0.45, 1.0, -1.7, 0.0, 3.007456375464593505565e-1, 0.0},
    {0.75, 1.5, 0.0, 4.47, 6.174953423783348513206e-3, 1.744231533117047563186e-1},
    {0.5, 0.5, -2.0, 1.0, 3.420654360537302725578e-2, 3.249699648968696472739e-2},
    {0.8, 1.0, 1.5, 2.5, -3.189444562312151165864, -1.747759853729640944432},
};
}  // namespace

TEST_CASE("gamma against high-precision frozen values") {
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gamma_fn(0.5) ==
          doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-14));
    struct {
        double x, expect;
    } cases[] = {
        {4.7, 15.43141160004743171196},
        {0.001, 999.423772484595466115},
        {170.0, 4.269068009004705274939e+304},
        {7.25, 1155.381013919989687203},
        {0.1, 9.513507698668731836292},
        {33.33, 8.314267860264524536136e+35},
        {1.461632, 0.8856031944108977052836},
    };
    for (const auto& c : cases)
        CHECK(std::abs(gamma_fn(c.x) - c.expect) <= 1e-13 * c.expect);
}

TEST_CASE("gamma identities: recurrence, reflection, duplication") {
    for (double x : {0.3, 1.7, 4.2, 11.5, 60.25}) {
        CHECK(gamma_fn(x + 1.0) == doctest::Approx(x * gamma_fn(x)).epsilon(4e-14));
        // duplication: Gamma(x) Gamma(x+1/2) = 2^{1-2x} sqrt(pi) Gamma(2x)
        const double lhs = std::log(gamma_fn(x)) + std::log(gamma_fn(x + 0.5));
        const double rhs = (1.0 - 2.0 * x) * std::log(2.0) +
                           0.5 * std::log(std::numbers::pi) +
                           std::log(gamma_fn(2.0 * x));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
    }
    // reflection for negative arguments
    CHECK(gamma_fn(-0.5) ==
          doctest::Approx(-2.0 * std::sqrt(std::numbers::pi)).epsilon(1e-13));
    CHECK_THROWS_AS(gamma_fn(-3.0), Error);
    CHECK_THROWS_AS(gamma_fn(0.0), Error);
}

TEST_CASE("reciprocal gamma vanishes at poles and matches 1/gamma") {
    CHECK(reciprocal_gamma(0.0) == 0.0);
    CHECK(reciprocal_gamma(-1.0) == 0.0);
    CHECK(reciprocal_gamma(-7.0) == 0.0);
    for (double x : {0.2, 1.0, 2.5, -0.5, -3.3, 20.0})
        CHECK(reciprocal_gamma(x) ==
              doctest::Approx(1.0 / gamma_fn(x)).epsilon(1e-13));
}

TEST_CASE("complex gamma via identities") {
    const cplx z(1.3, 0.8);
    // recurrence
    const cplx lhs = gamma_fn(z + cplx(1.0, 0.0));
    const cplx rhs = z * gamma_fn(z);
    CHECK(std::abs(lhs - rhs) / std::abs(rhs) < 1e-13);
    // reflection
    const cplx p = gamma_fn(z) * gamma_fn(cplx(1.0, 0.0) - z);
    const cplx q = std::numbers::pi / std::sin(std::numbers::pi * z);
    CHECK(std::abs(p - q) / std::abs(q) < 1e-13);
    // conjugate symmetry
    const cplx g = gamma_fn(cplx(2.2, -1.1));
    const cplx gc = gamma_fn(cplx(2.2, 1.1));
    CHECK(std::abs(g - std::conj(gc)) < 1e-13 * std::abs(g));
    // agreement with the real path
    CHECK(std::abs(gamma_fn(cplx(4.7, 0.0)) - gamma_fn(4.7)) < 1e-13 * gamma_fn(4.7));
}

TEST_CASE("lower incomplete gamma") {
    // a = 1: gamma(1, x) = 1 - e^{-x}
    for (double x : {0.1, 0.7, 2.0, 9.0, 40.0})
        CHECK(lower_incomplete_gamma(1.0, x) ==
              doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-14));
    // large x limit -> Gamma(a)
    CHECK(lower_incomplete_gamma(0.5, 60.0) ==
          doctest::Approx(gamma_fn(0.5)).epsilon(1e-14));
    // fine quadrature for a fractional a; substitution t = u^{1/a} removes
    // the endpoint singularity so the panels converge
    const double a = 0.65;
    auto num = gauss_panels(
        [&](double u) {
            return (1.0 / a) * std::exp(-std::pow(u, 1.0 / a));
        },
        0.0, std::pow(2.5, a), 400);
    CHECK(lower_incomplete_gamma(a, 2.5) == doctest::Approx(num).epsilon(1e-9));
}

TEST_CASE("mittag-leffler classical identities") {
    // E_{1,1}(z) = exp(z) on |z| <= 5 (acceptance-grade bound)
    for (double re = -5.0; re <= 5.0; re += 1.25) {
        for (double im = -4.0; im <= 4.0; im += 2.0) {
            const cplx z(re, im);
            if (std::abs(z) > 5.0) continue;
            const cplx e = std::exp(z);
            CHECK(std::abs(mittag_leffler(1.0, 1.0, z) - e) <=
                  1e-10 * std::exp(std::abs(z)));
        }
    }
    CHECK(std::abs(mittag_leffler(1.0, 1.0, cplx(1.0, 0.0)) -
                   cplx(2.718281828459045, 0.0)) < 1e-12);
    // E_{2,1}(-t^2) = cos t over [0, 10]
    for (double t = 0.0; t <= 10.0; t += 0.37) {
        const double v =
            mittag_leffler(2.0, 1.0, cplx(-t * t, 0.0)).real();
        CHECK(std::abs(v - std::cos(t)) < 1e-10);
    }
    const double half_pi = std::numbers::pi / 2.0;
    CHECK(std::abs(mittag_leffler(2.0, 1.0, cplx(-half_pi * half_pi, 0.0)).real()) <
          1e-12);
    // E_{2,2}(-t^2) = sin(t)/t
    for (double t : {0.5, 2.0, 7.7})
        CHECK(mittag_leffler(2.0, 2.0, cplx(-t * t, 0.0)).real() ==
              doctest::Approx(std::sin(t) / t).epsilon(1e-12));
}

TEST_CASE("mittag-leffler against frozen high-precision values") {
    for (const auto& c : kFrozenMl) {
        const cplx got = mittag_leffler(c.alpha, c.beta, cplx(c.re, c.im));
        const cplx expect(c.expect_re, c.expect_im);
        const double rel = std::abs(got - expect) / std::abs(expect);
        INFO("alpha=", c.alpha, " beta=", c.beta, " z=(", c.re, ",", c.im, ") rel=",
             rel);
        CHECK(rel < 1e-10);
    }
}

TEST_CASE("mittag-leffler against the extended-precision series oracle") {
    // spec example: E_{0.5,0.5}(-3) vs a 10^4-term extended-precision oracle
    const cplx oracle = ml_series_oracle(0.5, 0.5, cplx(-3.0, 0.0));
    const cplx got = mittag_leffler(0.5, 0.5, cplx(-3.0, 0.0));
    CHECK(std::abs(got - oracle) / std::abs(oracle) < 1e-10);

    DeterministicRng rng(17);
    for (int i = 0; i < 60; ++i) {
        const double alpha = rng.uniform(0.4, 1.6);
        const double beta = rng.uniform(0.3, 1.0 + alpha * 0.9);
        const double x = rng.uniform(0.05, 4.0);
        // keep the oracle inside its long-double headroom
        if (std::pow(x, 1.0 / alpha) > 20.0) continue;
        const cplx z(-x, 0.0);
        const cplx oracle_v = ml_series_oracle(alpha, beta, z);
        const cplx got_v = mittag_leffler(alpha, beta, z);
        INFO("alpha=", alpha, " beta=", beta, " x=", x);
        CHECK(std::abs(got_v - oracle_v) <=
              1e-10 * std::max(1.0, std::abs(oracle_v)));
    }
}

TEST_CASE("regime consistency in overlap zones") {
    // near the series/contour frontier the two independent evaluations agree
    for (double alpha : {0.5, 0.8, 1.2}) {
        for (double mult : {0.7, 1.0, 1.3}) {
            const double x = std::pow(13.0 * mult, alpha);
            const cplx z(-x, 0.0);
            auto full = mittag_leffler_full({alpha, alpha}, z);
            const cplx oracle_v = ml_series_oracle(alpha, alpha, z);
            CHECK(std::abs(full.value - oracle_v) /
                      std::max(std::abs(oracle_v), 1e-30) <
                  1e-8);
        }
    }
}

TEST_CASE("recurrence E_{a,b}(z) = z E_{a,a+b}(z) + 1/Gamma(b)") {
    DeterministicRng rng(5);
    for (int i = 0; i < 40; ++i) {
        const double alpha = rng.uniform(0.4, 1.9);
        const double beta = rng.uniform(0.3, 1.2);
        const double x = rng.uniform(0.1, 6.0);
        const cplx z(-x, rng.uniform(-0.5, 0.5));
        const cplx lhs = mittag_leffler(alpha, beta, z);
        const cplx rhs =
            z * mittag_leffler(alpha, alpha + beta, z) + reciprocal_gamma(beta);
        INFO("alpha=", alpha, " beta=", beta, " z=", z.real(), "+", z.imag(), "i");
        CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("complete monotonicity consequence on the negative axis") {
    for (double alpha : {0.4, 0.7, 1.0}) {
        double prev = 1e300;
        for (double x = 0.0; x <= 60.0; x += 0.5) {
            const double v = mittag_leffler_neg(alpha, alpha, x);
            CHECK(v > 0.0);
            CHECK(v <= prev * (1.0 + 1e-12));
            prev = v;
        }
    }
}

TEST_CASE("ml_bound_check reports a modest envelope constant") {
    // alpha = 1: max_s (1+s) e^{-s} = 1 at s = 0
    std::vector<double> ts, lams{1.0, 10.0, 100.0};
    for (double t = 1e-3; t <= 10.0; t *= 1.6) ts.push_back(t);
    auto rep1 = ml_bound_check(1.0, ts, lams);
    CHECK(rep1.fitted_constant <= 1.0 + 1e-9);
    CHECK(rep1.fitted_constant > 0.5);

    auto rep = ml_bound_check(0.5, ts, lams);
    CHECK(rep.fitted_constant < 2.0);
    CHECK(rep.samples == ts.size() * lams.size());
    // t -> 0 limit: E_{a,a}(0) = 1/Gamma(a)
    CHECK(mittag_leffler_neg(0.5, 0.5, 0.0) ==
          doctest::Approx(1.0 / gamma_fn(0.5)).epsilon(1e-14));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(mittag_leffler(0.0, 1.0, cplx(1.0, 0.0)), Error);
    CHECK_THROWS_AS(mittag_leffler(2.5, 1.0, cplx(1.0, 0.0)), Error);
    CHECK_THROWS_AS(mittag_leffler(0.5, 0.0, cplx(1.0, 0.0)), Error);
}
