#ifndef EISTWIST_SPECIAL_HPP
#define EISTWIST_SPECIAL_HPP

// Complex special functions and quadrature kernels shared by every other
// module: Gamma (Lanczos), Hurwitz/Riemann zeta (Euler-Maclaurin, valid well
// left of the critical strip), modified Bessel K of complex order, the
// Whittaker factor attached to nonzero Fourier modes, and double-exponential
// quadrature on finite and half-infinite intervals.

#include <complex>
#include <cstddef>
#include <functional>

#include "eistwist/errors.hpp"

namespace eistwist {

using cplx = std::complex<double>;

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Throws NonFiniteError instead of letting a NaN/Inf escape into a value type.
cplx ensure_finite(cplx z, const char* what);

struct QuadratureResult {
    cplx value{0.0, 0.0};
    double abs_error_estimate = 0.0;
    std::size_t evaluations = 0;
};

// Gamma. Lanczos g=7 with reflection; relative error ~1e-13 in the working
// box |Im s| <= 50, 0.1 <= |s| <= 50.
cplx complex_gamma(cplx s);     // PoleError at non-positive integers
cplx log_gamma(cplx s);         // requires Re s > 0

// Hurwitz zeta((s, a)) by Euler-Maclaurin; a > 0, s != 1. Accurate for
// Re s > -25 at the |Im s| <= 60 scale this project uses.
cplx hurwitz_zeta(cplx s, double a);
cplx riemann_zeta(cplx s);

// Completed zeta xi(z) = pi^{-z/2} Gamma(z/2) zeta(z), evaluated through the
// reflection xi(z) = xi(1-z) when Re z < 1/2 so trivial zeros and Gamma poles
// never collide numerically.
cplx completed_zeta(cplx z);

// K_nu(x) for complex order, x > 0. Even in nu by construction. Double
// exponential quadrature of int_0^inf exp(-x cosh t) cosh(nu t) dt for
// moderate |Im nu|; I-series difference / asymptotic series otherwise.
cplx bessel_k(cplx nu, double x);

// W_s(nz) = 2 sqrt(|n| y) K_{s-1/2}(2 pi |n| y) e^{2 pi i n x},  z = x + iy.
cplx whittaker_w(cplx s, long long n, cplx z);

// Double-exponential quadrature: tanh-sinh on (a,b), exp-sinh on (a,inf)
// (pass b = +infinity). Deterministic node set per refinement level.
QuadratureResult integrate_de(const std::function<cplx(double)>& f, double a, double b,
                              double target_abs_err, std::size_t max_evals = (std::size_t{1} << 20));

} // namespace eistwist

#endif
