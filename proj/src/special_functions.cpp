#include "fracsource/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fracsource {

namespace {

constexpr double kPi = std::numbers::pi;

// sin(pi x) without the catastrophic loss near integer x; exact zeros at
// integers so reciprocal_gamma vanishes identically at the poles
double sin_pi(double x) {
    double r = std::remainder(x, 2.0);  // r in [-1, 1]
    if (r == 0.0 || r == 1.0 || r == -1.0) return 0.0;
    return std::sin(kPi * r);
}

// Stirling series coefficients B_{2n} / (2n (2n-1)) as exact rationals
constexpr double kStirling[7] = {
    1.0 / 12.0,       -1.0 / 360.0,      1.0 / 1260.0, -1.0 / 1680.0,
    1.0 / 1188.0,     -691.0 / 360360.0, 1.0 / 156.0,
};

double stirling_log_gamma(double x) {
    // requires x >= 10
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    double corr = 0.0;
    double p = inv;
    for (double c : kStirling) {
        corr += c * p;
        p *= inv2;
    }
    return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2.0 * kPi) + corr;
}

cplx stirling_log_gamma(cplx z) {
    const cplx inv = 1.0 / z;
    const cplx inv2 = inv * inv;
    cplx corr = 0.0;
    cplx p = inv;
    for (double c : kStirling) {
        corr += c * p;
        p *= inv2;
    }
    return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * kPi) + corr;
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0)) throw Error("log_gamma requires x > 0");
    double shift = 0.0;
    while (x < 10.0) {
        shift += std::log(x);
        x += 1.0;
    }
    return stirling_log_gamma(x) - shift;
}

double gamma_fn(double x) {
    if (x > 0.0) {
        if (x > 171.6) throw Error("gamma overflow for x > 171.6");
        return std::exp(log_gamma(x));
    }
    if (x == std::floor(x))
        throw Error("gamma pole at non-positive integer x = " + std::to_string(x));
    // reflection
    return kPi / (sin_pi(x) * std::exp(log_gamma(1.0 - x)));
}

double reciprocal_gamma(double x) {
    if (x > 0.5) {
        if (x > 171.6) return 0.0;  // Gamma overflows, reciprocal underflows
        return std::exp(-log_gamma(x));
    }
    // entire function: sin(pi x) Gamma(1-x) / pi, zero at poles of Gamma
    const double s = sin_pi(x);
    if (s == 0.0) return 0.0;
    const double lg = log_gamma(1.0 - x);
    if (lg > 700.0) {
        // Gamma(1-x) overflows; combine in log space
        const double mag = lg + std::log(std::abs(s) / kPi);
        if (mag > 700.0) throw Error("reciprocal_gamma overflow");
        return std::copysign(std::exp(mag), s);
    }
    return s * std::exp(lg) / kPi;
}

cplx gamma_fn(cplx z) {
    if (z.imag() == 0.0) return cplx(gamma_fn(z.real()), 0.0);
    if (z.real() < 0.5) {
        // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        const cplx s = std::sin(kPi * z);
        return kPi / (s * gamma_fn(1.0 - z));
    }
    cplx shift = 0.0;
    cplx w = z;
    while (w.real() < 12.0) {
        shift += std::log(w);
        w += 1.0;
    }
    return std::exp(stirling_log_gamma(w) - shift);
}

double lower_incomplete_gamma(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw Error("lower_incomplete_gamma: bad args");
    if (x == 0.0) return 0.0;
    const double lg = log_gamma(a);
    if (x < a + 1.0) {
        // series for P(a,x)
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-16)
                return sum * std::exp(-x + a * std::log(x));
        }
        throw NumericalError("lower_incomplete_gamma: series failed");
    }
    // continued fraction for Q(a,x) (modified Lentz)
    const double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        const double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) {
            const double q = std::exp(-x + a * std::log(x) - lg) * h;
            return std::exp(lg) * (1.0 - q);
        }
    }
    throw NumericalError("lower_incomplete_gamma: continued fraction failed");
}

// ---------------------------------------------------------------------------
// Mittag-Leffler
// ---------------------------------------------------------------------------

namespace {

struct Attempt {
    cplx value;
    double err = 1e300;
    bool usable = false;
};

Attempt ml_series(double alpha, double beta, cplx z) {
    Attempt out;
    cplx sum = reciprocal_gamma(beta);
    cplx comp = 0.0;  // Kahan compensation
    cplx zk = 1.0;
    double max_term = std::abs(sum);
    double last = 0.0;
    for (int k = 1; k <= 300; ++k) {
        zk *= z;
        const double azk = std::abs(zk);
        if (azk > 1e290) return out;  // overflow ahead: series hopeless here
        const cplx term = zk * reciprocal_gamma(alpha * k + beta);
        const cplx y = term - comp;
        const cplx t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        const double mag = std::abs(term);
        max_term = std::max(max_term, mag);
        last = mag;
        if (mag < 1e-17 * std::max(1.0, std::abs(sum)) && k > 4) {
            out.value = sum;
            const double denom = std::max(std::abs(sum), 1e-300);
            out.err = (6.0e-16 * max_term + last) / denom;
            out.usable = true;
            return out;
        }
    }
    return out;
}

// branch (exponential) contributions for the large-|z| expansion; these are
// exactly the residues of the Hankel representation
cplx ml_branch_terms(double alpha, double beta, cplx z, bool& overflow) {
    cplx total = 0.0;
    const double r = std::pow(std::abs(z), 1.0 / alpha);
    for (int n = -1; n <= 1; ++n) {
        const double phi = std::arg(z) + 2.0 * kPi * n;
        // inclusive boundary with median weight: on |arg z| = alpha pi the
        // +pi and -pi images alias the same pole (e.g. alpha = 1 on the
        // negative axis), so each side carries half
        if (std::abs(phi) <= alpha * kPi * (1.0 + 1e-14)) {
            const double weight =
                std::abs(phi) < alpha * kPi * (1.0 - 1e-14) ? 1.0 : 0.5;
            const cplx w = std::polar(r, phi / alpha);
            if (w.real() > 700.0) {
                overflow = true;
                return 0.0;
            }
            total += weight * (1.0 / alpha) * std::pow(w, 1.0 - beta) * std::exp(w);
        }
    }
    return total;
}

Attempt ml_asymptotic(double alpha, double beta, cplx z) {
    Attempt out;
    bool overflow = false;
    const cplx branch = ml_branch_terms(alpha, beta, z, overflow);
    if (overflow) return out;
    const double lz = std::log(std::abs(z));
    const double argz = std::arg(z);
    double smallest_env = 1e300;
    cplx acc = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double x = beta - alpha * double(k);  // argument of 1/Gamma
        // sine-free envelope of |term| in log space; near-pole terms are
        // genuinely tiny but must not drive the truncation logic
        double lenv;
        if (x < 0.5)
            lenv = log_gamma(1.0 - x) - std::log(kPi) - double(k) * lz;
        else
            lenv = -log_gamma(x) - double(k) * lz;
        if (lenv > smallest_env + 0.7 && k > 3) break;  // past optimal point
        if (lenv > 600.0) break;
        smallest_env = std::min(smallest_env, lenv);
        double rgv;
        if (x < 0.5) {
            const double s = sin_pi(x);
            if (s == 0.0) continue;
            rgv = std::exp(lenv) * s;  // already includes |z|^{-k}
            acc -= std::polar(1.0, -argz * double(k)) * rgv;
        } else {
            rgv = std::exp(lenv);
            acc -= std::polar(1.0, -argz * double(k)) * rgv;
        }
    }
    out.value = branch + acc;
    const double denom = std::max(std::abs(out.value), 1e-300);
    out.err = std::exp(std::min(smallest_env, 600.0)) / denom + 4.4e-16;
    out.usable = true;
    return out;
}

// Hankel-type contour evaluation with explicit residues for the branch
// poles inside the sector. Handles every alpha in (0,2], any beta (reduced
// through the recurrence when beta >= 1 + alpha).
Attempt ml_contour_core(double alpha, double beta, cplx z, double leg_width,
                        int arc_panels) {
    Attempt out;

    // poles of 1 / (s^alpha - z)
    std::vector<cplx> poles;
    const double rp = std::pow(std::abs(z), 1.0 / alpha);
    for (int n = -1; n <= 1; ++n) {
        const double phi = (std::arg(z) + 2.0 * kPi * n) / alpha;
        if (std::abs(phi) < kPi) poles.push_back(std::polar(rp, phi));
    }

    // contour angle away from every pole ray
    const double candidates[3] = {0.75 * kPi, 0.85 * kPi, 0.62 * kPi};
    double theta = 0.0;
    for (double cand : candidates) {
        double margin = 1e300;
        for (const cplx& p : poles)
            margin = std::min(margin, std::abs(std::abs(std::arg(p)) - cand));
        if (margin > 0.08) {
            theta = cand;
            break;
        }
    }
    if (theta == 0.0) return out;

    double delta = 0.5;
    for (const cplx& p : poles)
        if (std::abs(std::arg(p)) < theta)
            delta = std::min(delta, std::abs(p) / 3.0);
    delta = std::max(delta, 1e-4);

    cplx residues = 0.0;
    for (const cplx& p : poles)
        if (std::abs(std::arg(p)) < theta && std::abs(p) > delta)
            residues += (1.0 / alpha) * std::pow(p, 1.0 - beta) * std::exp(p);

    const double R = 46.0 / std::abs(std::cos(theta));
    double abs_sum = 0.0;  // cancellation tracker
    const auto integrand = [&](cplx s, cplx ds) {
        const cplx v =
            std::exp(s) * std::pow(s, alpha - beta) / (std::pow(s, alpha) - z) * ds;
        abs_sum += std::abs(v);
        return v;
    };
    cplx arc = gauss_panels(
        [&](double phi) {
            const cplx s = std::polar(delta, phi);
            return integrand(s, cplx(0.0, 1.0) * s);
        },
        -theta, theta, arc_panels);
    const double u0 = std::log(delta), u1 = std::log(R);
    const int leg_panels = std::max(10, int((u1 - u0) / leg_width) + 1);
    const cplx eip = std::polar(1.0, theta), eim = std::polar(1.0, -theta);
    cplx legs = gauss_panels(
        [&](double u) {
            const double rr = std::exp(u);
            const cplx sp = rr * eip, sm = rr * eim;
            // +theta leg runs outward, -theta leg runs inward
            return integrand(sp, sp) - integrand(sm, sm);
        },
        u0, u1, leg_panels);

    out.value = residues + (arc + legs) / cplx(0.0, 2.0 * kPi);
    if (z.imag() == 0.0) out.value = cplx(out.value.real(), 0.0);
    const double denom = std::max(std::abs(out.value), 1e-300);
    out.err =
        2.2e-16 * (std::abs(residues) + abs_sum / (2.0 * kPi)) / denom + 1e-15;
    out.usable = true;
    return out;
}

Attempt ml_contour(double alpha, double beta, cplx z) {
    if (beta >= 1.0 + alpha) {
        // reduce beta through E_{a,B}(z) = (E_{a,B-a}(z) - 1/Gamma(B-a)) / z
        Attempt inner = ml_contour(alpha, beta - alpha, z);
        Attempt out;
        if (!inner.usable) return out;
        out.value = (inner.value - reciprocal_gamma(beta - alpha)) / z;
        out.err = inner.err * std::max(1.0, std::abs(inner.value) /
                                                std::max(std::abs(out.value), 1e-300));
        out.usable = true;
        return out;
    }
    Attempt coarse = ml_contour_core(alpha, beta, z, 0.45, 8);
    Attempt fine = ml_contour_core(alpha, beta, z, 0.30, 12);
    if (!fine.usable) return coarse;
    if (coarse.usable) {
        const double denom = std::max(std::abs(fine.value), 1e-300);
        fine.err += std::abs(fine.value - coarse.value) / denom;
    }
    return fine;
}

// alpha == 1, z on (or essentially on) the negative real axis, beta != 1:
// E_{1,b}(z) = e^z / Gamma(b) * M(b-1, b, -z), a series with one sign change
Attempt ml_kummer(double beta, double x /* = -z >= 0 */) {
    Attempt out;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 2000; ++k) {
        term *= x / double(k);
        const double contrib = term * (beta - 1.0) / (beta - 1.0 + double(k));
        sum += contrib;
        if (term < 1e-17 * std::max(1.0, std::abs(sum)) && double(k) > x) break;
    }
    out.value = std::exp(-x) * reciprocal_gamma(beta) * sum;
    out.err = 1e-14;
    out.usable = true;
    return out;
}

}  // namespace

MlResult mittag_leffler_full(const MLParams& params, cplx z) {
    const double alpha = params.alpha, beta = params.beta;
    if (!(alpha > 0.0) || alpha > 2.0)
        throw Error("mittag_leffler: alpha must lie in (0, 2]");
    if (!(beta > 0.0)) throw Error("mittag_leffler: beta must be positive");

    MlResult res;
    if (z == cplx(0.0, 0.0)) {
        res.value = reciprocal_gamma(beta);
        res.regime = MlRegime::Zero;
        return res;
    }
    if (alpha == 2.0 && (beta == 1.0 || beta == 2.0)) {
        const cplx w = std::sqrt(z);
        if (beta == 1.0) {
            res.value = std::cosh(w);
        } else {
            res.value = (std::abs(w) < 1e-8) ? cplx(1.0, 0.0) + z / 6.0
                                             : std::sinh(w) / w;
        }
        res.regime = MlRegime::ClosedForm;
        res.err_estimate = 1e-15;
        return res;
    }
    if (alpha == 1.0 && beta == std::floor(beta) && std::abs(z) > 5.0) {
        // E_{1,m}(z) = (e^z - sum_{j<m-1} z^j/j!) / z^{m-1}
        const int m = int(beta);
        cplx acc = std::exp(z);
        cplx zj = 1.0;
        double fact = 1.0;
        for (int j = 0; j <= m - 2; ++j) {
            acc -= zj / fact;
            zj *= z;
            fact *= double(j + 1);
        }
        res.value = m == 1 ? acc : acc / std::pow(z, double(m - 1));
        res.regime = MlRegime::ClosedForm;
        res.err_estimate = 1e-14;
        return res;
    }
    if (alpha == 1.0 && beta != 1.0 && z.real() < 0.0 &&
        std::abs(z.imag()) <= 1e-12 * std::abs(z.real())) {
        auto a = ml_kummer(beta, -z.real());
        res.value = a.value;
        res.err_estimate = a.err;
        res.regime = MlRegime::Series;
        return res;
    }

    // regime selection: Taylor series for small arguments, optimally
    // truncated expansion for large ones, Hankel contour in between; the
    // first regime whose error estimate clears the target wins.
    const double xr = std::pow(std::abs(z), 1.0 / alpha);
    Attempt series, asym;
    if (xr <= 14.0 || std::abs(z) <= 5.0) {
        series = ml_series(alpha, beta, z);
        if (series.usable && series.err <= 5e-11) {
            res.value = series.value;
            res.err_estimate = series.err;
            res.regime = MlRegime::Series;
            return res;
        }
    }
    if (xr >= 8.0) {
        asym = ml_asymptotic(alpha, beta, z);
        if (asym.usable && asym.err <= 5e-11) {
            res.value = asym.value;
            res.err_estimate = asym.err;
            res.regime = MlRegime::Asymptotic;
            return res;
        }
    }
    Attempt c = ml_contour(alpha, beta, z);

    const Attempt* best = nullptr;
    MlRegime regime = MlRegime::Contour;
    if (c.usable) {
        best = &c;
        regime = MlRegime::Contour;
    }
    if (series.usable && (!best || series.err < best->err)) {
        best = &series;
        regime = MlRegime::Series;
    }
    if (asym.usable && (!best || asym.err < best->err)) {
        best = &asym;
        regime = MlRegime::Asymptotic;
    }
    if (!best) {
        res.converged = false;
        res.err_estimate = 1.0;
        throw NumericalError("mittag_leffler: no evaluation regime converged");
    }
    res.value = best->value;
    res.err_estimate = best->err;
    res.regime = regime;
    res.converged = best->err <= 1e-8;
    return res;
}

cplx mittag_leffler(double alpha, double beta, cplx z) {
    auto r = mittag_leffler_full({alpha, beta}, z);
    if (!r.converged)
        throw NumericalError("mittag_leffler: regimes disagree beyond 1e-8");
    return r.value;
}

double mittag_leffler_neg(double alpha, double beta, double x) {
    if (x < 0.0) throw Error("mittag_leffler_neg expects x >= 0");
    return mittag_leffler(alpha, beta, cplx(-x, 0.0)).real();
}

const char* ml_regime_name(MlRegime r) {
    switch (r) {
        case MlRegime::Zero: return "zero";
        case MlRegime::Series: return "series";
        case MlRegime::Asymptotic: return "asymptotic";
        case MlRegime::Contour: return "integral";
        case MlRegime::ClosedForm: return "closed-form";
    }
    return "unknown";
}

MlBoundReport ml_bound_check(double alpha, const std::vector<double>& t_grid,
                             const std::vector<double>& lambda_grid) {
    if (!(alpha > 0.0) || alpha >= 2.0)
        throw Error("ml_bound_check: alpha must lie in (0, 2)");
    MlBoundReport rep;
    for (double lam : lambda_grid) {
        if (!(lam > 0.0)) throw Error("ml_bound_check: lambda must be positive");
        for (double t : t_grid) {
            const double x = std::pow(t, alpha) * lam;
            const double v = std::abs(mittag_leffler_neg(alpha, alpha, x));
            const double ratio = v * (1.0 + x);
            if (ratio > rep.fitted_constant) {
                rep.fitted_constant = ratio;
                rep.max_ratio_t = t;
                rep.max_ratio_lambda = lam;
            }
            rep.samples++;
        }
    }
    return rep;
}

}  // namespace fracsource
