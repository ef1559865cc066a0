#include "eistwist/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace eistwist {

namespace {

constexpr double pi = std::numbers::pi;

bool near_nonpositive_integer(cplx s, double tol = 1e-12) {
    if (std::abs(s.imag()) > tol) return false;
    double r = s.real();
    if (r > 0.5) return false;
    return std::abs(r - std::round(r)) < tol;
}

// Lanczos, g = 7, 9 coefficients.
constexpr double lanczos_g = 7.0;
constexpr double lanczos_c[9] = {
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
};

cplx gamma_core(cplx z) {
    // valid for Re z >= 0.5
    z -= 1.0;
    cplx x = lanczos_c[0];
    for (int i = 1; i < 9; ++i) x += lanczos_c[i] / (z + static_cast<double>(i));
    cplx t = z + lanczos_g + 0.5;
    return std::sqrt(2.0 * pi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

cplx log_gamma_core(cplx z) {
    z -= 1.0;
    cplx x = lanczos_c[0];
    for (int i = 1; i < 9; ++i) x += lanczos_c[i] / (z + static_cast<double>(i));
    cplx t = z + lanczos_g + 0.5;
    return 0.5 * std::log(2.0 * pi) + (z + 0.5) * std::log(t) - t + std::log(x);
}

// Bernoulli numbers B_2 .. B_30.
constexpr double bernoulli2k[15] = {
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
};

} // namespace

cplx ensure_finite(cplx z, const char* what) {
    if (!is_finite(z)) throw NonFiniteError(std::string("non-finite value in ") + what);
    return z;
}

cplx complex_gamma(cplx s) {
    if (near_nonpositive_integer(s)) throw PoleError("gamma pole at non-positive integer");
    if (s.real() >= 0.5) return ensure_finite(gamma_core(s), "complex_gamma");
    // reflection: Gamma(s) = pi / (sin(pi s) Gamma(1 - s))
    cplx sinpis = std::sin(pi * s);
    return ensure_finite(pi / (sinpis * gamma_core(1.0 - s)), "complex_gamma(reflection)");
}

cplx log_gamma(cplx s) {
    if (s.real() <= 0.0) throw DomainError("log_gamma requires Re s > 0");
    return ensure_finite(log_gamma_core(s), "log_gamma");
}

cplx hurwitz_zeta(cplx s, double a) {
    if (a <= 0.0) throw DomainError("hurwitz_zeta requires a > 0");
    if (std::abs(s - cplx(1.0, 0.0)) < 1e-13) throw PoleError("zeta pole at s = 1");

    const int M = std::max(40, static_cast<int>(std::ceil(1.4 * std::abs(s.imag()))));
    cplx acc(0.0, 0.0);
    for (int k = 0; k < M; ++k) acc += std::pow(cplx(a + k, 0.0), -s);
    const double q = a + M;
    acc += std::pow(cplx(q, 0.0), 1.0 - s) / (s - 1.0);
    acc += 0.5 * std::pow(cplx(q, 0.0), -s);

    // Euler-Maclaurin correction, stopping when terms stop improving.
    cplx rising = s;                              // (s)_{2j-1} for j = 1 is s
    cplx qpow = std::pow(cplx(q, 0.0), -s - 1.0); // q^{-s-2j+1} at j = 1
    double fact = 2.0;                            // (2j)! at j = 1
    double prev_mag = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= 15; ++j) {
        cplx term = (bernoulli2k[j - 1] / fact) * rising * qpow;
        double mag = std::abs(term);
        if (mag > prev_mag) break; // divergent tail reached
        acc += term;
        if (mag < 1e-17 * (1.0 + std::abs(acc))) break;
        prev_mag = mag;
        // advance to j+1: multiply rising by (s+2j-1)(s+2j), qpow by q^{-2},
        // fact by (2j+1)(2j+2)
        rising *= (s + cplx(2.0 * j - 1.0, 0.0)) * (s + cplx(2.0 * j, 0.0));
        qpow /= q * q;
        fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
    }
    return ensure_finite(acc, "hurwitz_zeta");
}

cplx riemann_zeta(cplx s) {
    // Left of the strip the Euler-Maclaurin tail cancels catastrophically;
    // route through the functional equation instead. With z = 1-s:
    // zeta(s) = 2 (2 pi)^{-z} cos(pi z / 2) Gamma(z) zeta(z).
    if (s.real() < -0.5) {
        cplx z = 1.0 - s;
        return ensure_finite(2.0 * std::pow(cplx(2.0 * pi, 0.0), -z) * std::cos(0.5 * pi * z) *
                                 complex_gamma(z) * hurwitz_zeta(z, 1.0),
                             "riemann_zeta(reflection)");
    }
    return hurwitz_zeta(s, 1.0);
}

cplx completed_zeta(cplx z) {
    if (z.real() < 0.5) z = 1.0 - z; // xi(z) = xi(1-z)
    return ensure_finite(std::pow(cplx(pi, 0.0), -z / 2.0) * complex_gamma(z / 2.0) * riemann_zeta(z),
                         "completed_zeta");
}

// ---------------------------------------------------------------------------
// K-Bessel
// ---------------------------------------------------------------------------

namespace {

// Trapezoid on [0,T] of exp(-x cosh t) cosh(nu t); the integrand is even in t
// and decays doubly exponentially, so plain refinement converges
// geometrically. Good whenever |Im nu| is moderate (phase cancellation stays
// above roundoff).
cplx bessel_k_de(cplx nu, double x) {
    // pick T: x cosh T - |Re nu| T >= x + 60
    double T = 1.0;
    const double renu = std::abs(nu.real());
    while (x * std::cosh(T) - renu * T < x + 60.0 && T < 60.0) T += 0.25;

    auto g = [&](double t) -> cplx { return std::exp(-x * std::cosh(t)) * std::cosh(nu * t); };

    double h = 0.25;
    cplx prev(0.0, 0.0);
    cplx curr(0.0, 0.0);
    // level 0
    {
        cplx sum = 0.5 * g(0.0);
        for (double t = h; t <= T; t += h) sum += g(t);
        curr = sum * h;
    }
    for (int level = 1; level <= 7; ++level) {
        prev = curr;
        h *= 0.5;
        cplx sum(0.0, 0.0);
        for (double t = h; t <= T; t += 2.0 * h) sum += g(t); // new midpoints only
        curr = 0.5 * prev + sum * h;
        if (level >= 3 && std::abs(curr - prev) <= 1e-15 * (std::abs(curr) + 1e-300)) break;
    }
    return curr;
}

// Power-series route K = (pi/2)(I_{-nu} - I_nu)/sin(pi nu). Used for large
// |Im nu| where it is far from integer orders; reports its own roundoff
// estimate via the largest intermediate term.
struct SeriesResult {
    cplx value;
    double rel_err;
};

SeriesResult bessel_k_series(cplx nu, double x) {
    // I_v(x) = sum_k (x/2)^{v+2k} / (k! Gamma(v+k+1)) via term recurrence.
    auto iseries = [&](cplx v, double& maxmag) -> cplx {
        // first term (x/2)^v / Gamma(v+1); Gamma via reflection-safe route
        cplx lg;
        if (v.real() > -0.5) {
            lg = log_gamma_core(v + 1.0);
        } else {
            // log Gamma(v+1) = log(pi / (sin(pi(v+1)) Gamma(-v))) -- fine for
            // |Im v| >= 4 (never near the poles of either factor)
            lg = std::log(pi) - std::log(std::sin(pi * (v + 1.0))) - log_gamma_core(-v);
        }
        cplx term = std::exp(v * std::log(cplx(0.5 * x, 0.0)) - lg);
        cplx sum = term;
        maxmag = std::abs(term);
        const double x24 = 0.25 * x * x;
        for (int k = 0; k < 400; ++k) {
            term *= x24 / ((k + 1.0) * (v + cplx(k + 1.0, 0.0)));
            sum += term;
            maxmag = std::max(maxmag, std::abs(term));
            if (std::abs(term) < 1e-18 * std::abs(sum)) break;
        }
        return sum;
    };
    double m1 = 0.0, m2 = 0.0;
    cplx ip = iseries(nu, m1);
    cplx im = iseries(-nu, m2);
    cplx sn = std::sin(pi * nu);
    cplx k = 0.5 * pi * (im - ip) / sn;
    double scale = std::max(m1, m2);
    double rel = 1e-16 * scale / (std::abs(im - ip) + 1e-300);
    return {k, rel};
}

SeriesResult bessel_k_asymptotic(cplx nu, double x) {
    // K ~ sqrt(pi/2x) e^{-x} sum a_k, a_k = a_{k-1} (4nu^2 - (2k-1)^2)/(8kx)
    cplx nu4 = 4.0 * nu * nu;
    cplx a(1.0, 0.0);
    cplx sum = a;
    double last = 1.0;
    bool converged = false;
    for (int k = 1; k <= 60; ++k) {
        double odd = 2.0 * k - 1.0;
        a *= (nu4 - odd * odd) / (8.0 * k * x);
        double mag = std::abs(a);
        if (mag >= last) break; // asymptotic tail turned
        sum += a;
        last = mag;
        if (mag < 1e-17 * std::abs(sum)) {
            converged = true;
            break;
        }
    }
    cplx pref = std::sqrt(pi / (2.0 * x)) * std::exp(-x);
    return {pref * sum, converged ? 1e-14 : last / (std::abs(sum) + 1e-300)};
}

} // namespace

cplx bessel_k(cplx nu, double x) {
    if (!(x > 0.0)) throw DomainError("bessel_k requires x > 0");
    // evenness in the order is exact: normalize to a canonical half-plane
    if (nu.real() < 0.0 || (nu.real() == 0.0 && nu.imag() < 0.0)) nu = -nu;

    if (std::abs(nu.imag()) <= 4.0) return ensure_finite(bessel_k_de(nu, x), "bessel_k");

    SeriesResult best{cplx(0, 0), std::numeric_limits<double>::infinity()};
    SeriesResult a = bessel_k_asymptotic(nu, x);
    if (a.rel_err < best.rel_err) best = a;
    if (x < 300.0) {
        SeriesResult s = bessel_k_series(nu, x);
        if (s.rel_err < best.rel_err) best = s;
    }
    return ensure_finite(best.value, "bessel_k");
}

cplx whittaker_w(cplx s, long long n, cplx z) {
    if (n == 0) throw DomainError("whittaker_w requires n != 0");
    double y = z.imag();
    if (!(y > 0.0)) throw DomainError("whittaker_w requires Im z > 0");
    double x = z.real();
    double absn = static_cast<double>(std::abs(n));
    cplx k = bessel_k(s - 0.5, 2.0 * pi * absn * y);
    cplx phase = std::polar(1.0, 2.0 * pi * static_cast<double>(n) * x);
    return ensure_finite(2.0 * std::sqrt(absn * y) * k * phase, "whittaker_w");
}

// ---------------------------------------------------------------------------
// Double-exponential quadrature
// ---------------------------------------------------------------------------

namespace {

struct DeNode {
    double x;
    double w;
};

// abscissae/weights for one refinement level; finite -> tanh-sinh,
// half-infinite -> exp-sinh
void de_nodes(double a, double b, double h, bool odd_only, std::vector<DeNode>& out) {
    const double tmax = 4.3;
    const bool infinite = std::isinf(b);
    auto push = [&](double t) {
        double sh = 0.5 * pi * std::sinh(t);
        double ch = 0.5 * pi * std::cosh(t);
        if (infinite) {
            double x = a + std::exp(sh);
            double w = ch * std::exp(sh);
            if (is_finite(x) && is_finite(w) && x > a) out.push_back({x, w});
        } else {
            double th = std::tanh(sh);
            double x = 0.5 * (a + b) + 0.5 * (b - a) * th;
            double sech = 1.0 / std::cosh(sh);
            double w = 0.5 * (b - a) * ch * sech * sech;
            if (is_finite(x) && is_finite(w) && x > a && x < b) out.push_back({x, w});
        }
    };
    if (!odd_only) push(0.0);
    for (double t = h; t <= tmax; t += (odd_only ? 2.0 * h : h)) {
        push(t);
        push(-t);
    }
}

} // namespace

QuadratureResult integrate_de(const std::function<cplx(double)>& f, double a, double b,
                              double target_abs_err, std::size_t max_evals) {
    if (!(target_abs_err > 0.0)) throw DomainError("integrate_de requires target_abs_err > 0");
    QuadratureResult res;
    std::vector<DeNode> nodes;
    double h = 1.0;
    cplx total(0.0, 0.0);

    // level 0
    nodes.clear();
    de_nodes(a, b, h, false, nodes);
    for (const auto& nd : nodes) {
        cplx v = f(nd.x);
        if (!is_finite(v)) throw NonFiniteError("integrand returned non-finite value");
        total += v * nd.w;
        ++res.evaluations;
    }
    cplx estimate = total * h;
    double err = std::numeric_limits<double>::infinity();

    for (int level = 1; level <= 12; ++level) {
        h *= 0.5;
        nodes.clear();
        de_nodes(a, b, h, true, nodes);
        if (res.evaluations + nodes.size() > max_evals)
            throw MaxEvaluationsError("integrate_de: refinement budget exhausted");
        for (const auto& nd : nodes) {
            cplx v = f(nd.x);
            if (!is_finite(v)) throw NonFiniteError("integrand returned non-finite value");
            total += v * nd.w;
            ++res.evaluations;
        }
        cplx next = total * h;
        err = std::abs(next - estimate);
        estimate = next;
        if (level >= 2 && err <= target_abs_err) {
            res.value = estimate;
            res.abs_error_estimate = std::max(err * 0.1, 1e-16 * std::abs(estimate));
            return res;
        }
    }
    if (err <= target_abs_err) {
        res.value = estimate;
        res.abs_error_estimate = err;
        return res;
    }
    throw MaxEvaluationsError("integrate_de: target accuracy not reached within level budget");
}

} // namespace eistwist
