#include "eistwist/eisenstein.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace eistwist {

namespace {

constexpr double pi = std::numbers::pi;

double totient_small(long long n) {
    double r = static_cast<double>(n);
    long long m = n;
    for (long long p = 2; p * p <= m; ++p) {
        if (m % p) continue;
        while (m % p == 0) m /= p;
        r -= r / static_cast<double>(p);
    }
    if (m > 1) r -= r / static_cast<double>(m);
    return r;
}

long long totient_exact(long long n) { return std::llround(totient_small(n)); }

bool is_square(long long v, long long& root) {
    if (v < 0) return false;
    root = std::llround(std::sqrt(static_cast<double>(v)));
    for (long long r = std::max<long long>(0, root - 2); r <= root + 2; ++r) {
        if (r * r == v) {
            root = r;
            return true;
        }
    }
    return false;
}

// sum_{k > K} (A + B log(2 + scale k)) k^{-p}, p > 1 (and p > 2 when B > 0)
double log_linear_tail(double A, double B, double K, double scale, double p) {
    if (A == 0.0 && B == 0.0) return 0.0;
    double i0 = std::pow(K, 1.0 - p) / (p - 1.0);
    double head = (A + B * std::log(2.0 + scale * K)) * i0;
    if (B > 0.0) {
        if (p <= 2.0) return std::numeric_limits<double>::infinity();
        double i1 = std::pow(K, 2.0 - p) / (p - 2.0);
        head += (B / K) * i1; // log(2+st) <= log(2+sK) + (t-K)/K for t >= K
    }
    return head;
}

double beta_integral(double sigma) {
    // int (1+t^2)^{-sigma} dt = sqrt(pi) Gamma(sigma - 1/2) / Gamma(sigma)
    return std::sqrt(pi) * std::exp(std::lgamma(sigma - 0.5) - std::lgamma(sigma));
}

cplx power_cs(double base, cplx s) {
    // base^s for base > 0
    double lb = std::log(base);
    if (s.imag() == 0.0) return cplx(std::exp(s.real() * lb), 0.0);
    return std::exp(s * lb);
}

} // namespace

cplx ScatteringRational::eval(cplx x) const {
    cplx num(0.0, 0.0), den(0.0, 0.0);
    for (std::size_t j = p.size(); j-- > 0;) num = num * x + static_cast<double>(p[j]);
    for (std::size_t j = q.size(); j-- > 0;) den = den * x + static_cast<double>(q[j]);
    return num / den;
}

EisensteinEvaluator::EisensteinEvaluator(std::shared_ptr<ModularSymbols> syms, EvalOptions opt)
    : syms_(std::move(syms)), level_(syms_->level()), cusps_(cusp_set(level_)), opt_(opt) {}

void EisensteinEvaluator::require_one_cusp(const char* what) const {
    if (cusps_.size() != 1)
        throw UnsupportedLevelError(std::string(what) +
                                    ": implemented for one-cusp levels (1 and primes); "
                                    "multi-cusp composite levels are structural only");
}

// ---------------------------------------------------------------------------
// direct coset sums
// ---------------------------------------------------------------------------

EvalResult EisensteinEvaluator::eval_sum(cplx z, cplx s, bool twisted, double tol) const {
    double y = z.imag();
    if (!(y > 0.0)) throw DomainError("eval: point must lie in the upper half-plane");
    const double sigma = s.real();
    if (!twisted && sigma <= 1.0)
        throw ConvergenceRegionError("classical series requires Re s > 1");
    if (twisted && sigma <= 2.0)
        throw ConvergenceRegionError("twisted series requires Re s > 2");
    if (!(tol > 0.0)) throw DomainError("eval: tolerance must be positive");

    const bool zero_weights = twisted && syms_->is_zero();
    if (twisted && !zero_weights && !syms_->envelope_ready()) syms_->fit_envelope();

    double x = z.real() - std::round(z.real()); // width-1 cusp: reduce mod 1

    EvalResult out;
    if (!twisted) out.value = power_cs(y, s);
    if (zero_weights) return out; // every term carries weight zero

    const int N = level_;
    const double rtN = std::sqrt(static_cast<double>(N));
    const double Bint = beta_integral(sigma);
    const double ysig = std::pow(y, sigma);

    const double fam_budget = 0.25 * tol;
    // per-row truncation budgets proportional to the row's own decay k^{1-2s},
    // normalized so they sum to tol/2 across both families
    const double zeta_norm =
        hurwitz_zeta(cplx(2.0 * sigma - 1.0, 0.0), 1.0).real() * (N > 1 ? 2.0 : 1.0);
    auto row_budget = [&](long long k) {
        return 0.5 * tol * std::pow(static_cast<double>(k), 1.0 - 2.0 * sigma) / zeta_norm;
    };

    auto env = [&](double q_scale) {
        return twisted ? syms_->envelope_bound(q_scale) : 1.0;
    };

    // family c-tail beyond index K: C(k) = step k, D-grid spacing h
    auto family_tail = [&](double step, double h, double env_scale, double K) {
        double A, B;
        if (twisted) {
            // envelope A + B log(2 + env_scale k); query the engine's fit
            double e1 = syms_->envelope_bound(env_scale);
            double e2 = syms_->envelope_bound(env_scale * 2.0);
            B = std::max(0.0, (e2 - e1) / std::log(2.0));
            A = std::max(0.0, e1 - B * std::log(2.0 + env_scale));
        } else {
            A = 1.0;
            B = 0.0;
        }
        double t1 = (Bint / h) * std::pow(step * y, 1.0 - 2.0 * sigma) *
                    log_linear_tail(A, B, K, env_scale, 2.0 * sigma - 1.0);
        double t2 = std::pow(step * y, -2.0 * sigma) *
                    log_linear_tail(A, B, K, env_scale, 2.0 * sigma);
        return ysig * (t1 + t2);
    };

    struct Family {
        bool fricke;
        double step;      // C(k) = step * k
        double h;         // D spacing
        double env_scale; // reduced denominator of psi keys is env_scale * k
    };
    std::vector<Family> fams;
    fams.push_back({false, static_cast<double>(N), 1.0, static_cast<double>(N)});
    if (N > 1) fams.push_back({true, rtN, rtN, 1.0});

    for (const auto& fam : fams) {
        for (long long k = 1;; ++k) {
            double C = fam.step * k;
            if (C > opt_.c_ceiling) {
                double rem = family_tail(fam.step, fam.h, fam.env_scale, static_cast<double>(k - 1));
                if (rem > fam_budget)
                    throw TailTooLargeError("eval: certified tail exceeds tolerance at the ceiling");
                out.tail_bound += rem;
                break;
            }
            if (fam.fricke && std::gcd(k, static_cast<long long>(N)) != 1) {
                // no admissible rows at this u
            } else {
                // process row k
                const double Cy = C * y;
                const double rowbar = env(fam.env_scale * k);
                const long long m = fam.fricke ? k : k * N; // residue modulus
                const double row_tol = row_budget(k);

                auto side_tail = [&](double T) {
                    // one-sided tail beyond |t| = T: with a = Cy,
                    // int_T^inf (t^2+a^2)^{-sigma} dt = a^{1-2sigma} G(T/a),
                    // G(x) <= x^{1-2sigma}/(2sigma-1) for x >= 1, else B/2
                    double xr = T / Cy;
                    double g = (xr >= 1.0)
                                   ? std::pow(xr, 1.0 - 2.0 * sigma) / (2.0 * sigma - 1.0)
                                   : 0.5 * Bint;
                    double integral = std::pow(Cy, 1.0 - 2.0 * sigma) * g / fam.h;
                    double peak = std::pow(T * T + Cy * Cy, -sigma);
                    return ysig * rowbar * (integral + peak);
                };

                // closed-form half-width: integral part (Cy-independent after
                // the algebra collapses) and the peak part
                double rt = 0.5 * row_tol / (ysig * rowbar);
                double t_int =
                    std::pow(0.5 * rt * (2.0 * sigma - 1.0) * fam.h, 1.0 / (1.0 - 2.0 * sigma));
                double peak_arg = std::pow(0.5 * rt, -1.0 / sigma) - Cy * Cy;
                double t_peak = peak_arg > 0.0 ? std::sqrt(peak_arg) : 0.0;
                double T = std::max({t_int, t_peak, fam.h});
                long long lo = static_cast<long long>(std::floor((-T - C * x) / fam.h));
                long long hi = static_cast<long long>(std::ceil((T - C * x) / fam.h));
                if (hi - lo > 80000000) throw TailTooLargeError("eval: runaway row window");
                out.tail_bound += side_tail(std::abs(C * x + fam.h * (hi + 1))) +
                                  side_tail(std::abs(C * x + fam.h * (lo - 1)));

                if (hi - lo + 1 >= m) {
                    // wide window: psi depends on the index only through its
                    // residue mod m, so hoist the weight and stride
                    for (long long r = 0; r < m; ++r) {
                        if (m > 1 && std::gcd(r, m) != 1) continue;
                        cplx weight(1.0, 0.0);
                        if (twisted) {
                            long long a_key = fam.fricke
                                                  ? mod_inverse((r % m) * (N % m), m)
                                                  : mod_inverse(r, m);
                            weight = syms_->psi_endpoint(a_key, m);
                            if (weight == cplx(0.0, 0.0)) continue;
                        }
                        long long j = lo + ((r - lo) % m + m) % m;
                        cplx sub(0.0, 0.0);
                        std::size_t cnt = 0;
                        for (; j <= hi; j += m) {
                            double t = C * x + fam.h * j;
                            sub += power_cs(y / (t * t + Cy * Cy), s);
                            ++cnt;
                        }
                        out.value += weight * sub;
                        out.terms += cnt;
                    }
                } else {
                    for (long long j = lo; j <= hi; ++j) {
                        if (m > 1 && std::gcd(((j % m) + m) % m, m) != 1) continue;
                        double t = C * x + fam.h * j;
                        cplx term = power_cs(y / (t * t + Cy * Cy), s);
                        if (twisted) {
                            long long a_key = fam.fricke
                                                  ? mod_inverse((j % m) * (N % m), m)
                                                  : mod_inverse(j, m);
                            term *= syms_->psi_endpoint(a_key, m);
                        }
                        out.value += term;
                        ++out.terms;
                    }
                }
            }
            double rem = family_tail(fam.step, fam.h, fam.env_scale, static_cast<double>(k));
            if (rem <= fam_budget) {
                out.tail_bound += rem;
                break;
            }
        }
    }
    ensure_finite(out.value, "eval_sum");
    return out;
}

EvalResult EisensteinEvaluator::classical(cplx z, cplx s, double tol) const {
    return eval_sum(z, s, false, tol);
}

EvalResult EisensteinEvaluator::twisted(cplx z, cplx s, double tol) const {
    return eval_sum(z, s, true, tol);
}

EvalResult EisensteinEvaluator::completed(cplx z, cplx w, double tol) const {
    require_one_cusp("completed");
    if (syms_->is_zero()) {
        EvalResult r;
        r.terms = 1;
        return r; // psi == 0: both the twist and its scattering correction vanish
    }
    cplx phi_f = phi_twisted(w, tol * 0.1);
    cplx phi_c = phi_classical_closed(1.0 - w);
    EvalResult ef = eval_sum(z, w, true, tol * 0.3);
    EvalResult ec = eval_sum(z, w, false, tol * 0.3 / std::max(1.0, std::abs(phi_f * phi_c)));
    EvalResult out;
    out.value = ef.value - 0.5 * phi_f * phi_c * ec.value;
    out.tail_bound = ef.tail_bound + 0.5 * std::abs(phi_f * phi_c) * ec.tail_bound +
                     0.5 * std::abs(phi_c) * std::abs(ec.value) * (tol * 0.1);
    out.terms = ef.terms + ec.terms;
    return out;
}

// ---------------------------------------------------------------------------
// Kloosterman sums and Fourier coefficients
// ---------------------------------------------------------------------------

cplx EisensteinEvaluator::kloosterman(const CEntry& e, long long m, long long n,
                                      bool twisted) const {
    cplx acc(0.0, 0.0);
    for (const auto& rep : double_coset_reps(level_, e)) {
        cplx w(1.0, 0.0);
        if (twisted) {
            if (syms_->is_zero()) continue;
            Rational r = rep.element.image_of_infinity();
            w = syms_->psi_endpoint(r.num, r.den);
        }
        double ang = 2.0 * pi *
                     (static_cast<double>(((n * rep.a_res + m * rep.d_res) % rep.modulus + rep.modulus) %
                                          rep.modulus)) /
                     static_cast<double>(rep.modulus);
        acc += w * std::polar(1.0, ang);
    }
    return acc;
}

cplx EisensteinEvaluator::kloosterman(double c, long long m, long long n, bool twisted) const {
    auto e = match_c(level_, c);
    if (!e) return cplx(0.0, 0.0); // empty class
    return kloosterman(*e, m, n, twisted);
}

FourierCoefficient EisensteinEvaluator::fourier_series(long long n, cplx s, bool twisted,
                                                       double tol) const {
    require_one_cusp("fourier_series");
    if (n == 0) throw DomainError("fourier_series handles n != 0; use the constant-term routes");
    const double sigma = s.real();
    if (twisted && sigma <= 2.0)
        throw ConvergenceRegionError("twisted c-series requires Re s > 2");
    if (!twisted && sigma <= 1.0)
        throw ConvergenceRegionError("classical c-series requires Re s > 1");
    if (twisted && !syms_->is_zero() && !syms_->envelope_ready()) syms_->fit_envelope();

    const int N = level_;
    const double rtN = std::sqrt(static_cast<double>(N));
    cplx series(0.0, 0.0);
    double tail = 0.0;

    struct Fam {
        bool fricke;
        double step;
        double env_scale;
    };
    std::vector<Fam> fams{{false, static_cast<double>(N), static_cast<double>(N)}};
    if (N > 1) fams.push_back({true, rtN, 1.0});

    for (const auto& fam : fams) {
        for (long long k = 1;; ++k) {
            double c = fam.step * k;
            if (c > opt_.c_ceiling)
                throw TailTooLargeError("fourier_series: ceiling reached before the tail closed");
            if (!(fam.fricke && std::gcd(k, static_cast<long long>(N)) != 1)) {
                // S(n, 0, f; c): the first argument rides the gamma_d phase,
                // which is the slot the unfolding produces for the n-th mode
                cplx S = kloosterman(CEntry{fam.fricke, k, c}, n, 0, twisted);
                series += S / power_cs(c, 2.0 * s);
            }
            // |S(n,0;c)| <= count(c) env(c) <= (step-normalized) k env
            double A, B;
            if (twisted && !syms_->is_zero()) {
                double e1 = syms_->envelope_bound(fam.env_scale);
                double e2 = syms_->envelope_bound(fam.env_scale * 2.0);
                B = std::max(0.0, (e2 - e1) / std::log(2.0));
                A = std::max(0.0, e1 - B * std::log(2.0 + fam.env_scale));
            } else if (twisted) {
                A = B = 0.0;
            } else {
                A = 1.0;
                B = 0.0;
            }
            // count <= step * k (integer family) or k (fricke family)
            double count_scale = fam.fricke ? 1.0 : static_cast<double>(N);
            double rem = count_scale * std::pow(fam.step, -2.0 * sigma) *
                         log_linear_tail(A, B, static_cast<double>(k), fam.env_scale,
                                         2.0 * sigma - 1.0);
            if (rem <= 0.5 * tol) {
                tail += rem;
                break;
            }
        }
    }

    cplx pref = power_cs(pi, s) / complex_gamma(s) *
                power_cs(static_cast<double>(std::llabs(n)), s - 1.0);
    FourierCoefficient out;
    out.n = n;
    out.s = s;
    out.value = pref * series;
    out.method = "kloosterman-series";
    out.error_estimate = std::abs(pref) * tail;
    out.note = "c-set read as C_{ab}";
    return out;
}

FourierCoefficient EisensteinEvaluator::fourier_quadrature(long long n, cplx s, double y,
                                                           bool twisted, double inner_tol) const {
    require_one_cusp("fourier_quadrature");
    if (n == 0) throw DomainError("fourier_quadrature handles n != 0");
    cplx wfac = 2.0 * std::sqrt(std::abs(static_cast<double>(n)) * y) *
                bessel_k(s - 0.5, 2.0 * pi * std::abs(static_cast<double>(n)) * y);
    if (std::abs(wfac) < 1e-13)
        throw DomainError("fourier_quadrature: Whittaker factor below 1e-13 at this height");

    const int M = opt_.quadrature_grid;
    cplx acc(0.0, 0.0);
    double tails = 0.0;
    double maxmod = 0.0;
    for (int j = 0; j < M; ++j) {
        double xj = static_cast<double>(j) / M;
        EvalResult e = eval_sum(cplx(xj, y), s, twisted, inner_tol);
        acc += e.value * std::polar(1.0, -2.0 * pi * static_cast<double>(n) * xj);
        tails += e.tail_bound;
        maxmod = std::max(maxmod, std::abs(e.value));
    }
    acc /= static_cast<double>(M);
    tails /= static_cast<double>(M);
    double alias = maxmod * std::exp(-2.0 * pi * (M - std::abs(static_cast<double>(n))) * y);

    FourierCoefficient out;
    out.n = n;
    out.s = s;
    out.value = acc / wfac;
    out.method = "quadrature";
    out.error_estimate = (tails + alias) / std::abs(wfac);
    return out;
}

ConstantTermPairQ EisensteinEvaluator::constant_term_quadrature(cplx s, double y, bool twisted,
                                                                bool completed_series,
                                                                double inner_tol) const {
    require_one_cusp("constant_term_quadrature");
    const int M = opt_.quadrature_grid;
    auto average = [&](double height, double& tails, double& maxmod) {
        cplx acc(0.0, 0.0);
        for (int j = 0; j < M; ++j) {
            double xj = static_cast<double>(j) / M;
            EvalResult e = completed_series ? completed(cplx(xj, height), s, inner_tol)
                                            : eval_sum(cplx(xj, height), s, twisted, inner_tol);
            acc += e.value;
            tails += e.tail_bound / M;
            maxmod = std::max(maxmod, std::abs(e.value));
        }
        return acc / static_cast<double>(M);
    };
    double tails = 0.0, maxmod = 0.0;
    cplx i1 = average(y, tails, maxmod);
    cplx i2 = average(2.0 * y, tails, maxmod);
    double alias = maxmod * std::exp(-2.0 * pi * M * y);

    // [y^s, y^{1-s}; (2y)^s, (2y)^{1-s}] [a; b] = [i1; i2]
    cplx m11 = power_cs(y, s), m12 = power_cs(y, 1.0 - s);
    cplx m21 = power_cs(2.0 * y, s), m22 = power_cs(2.0 * y, 1.0 - s);
    cplx det = m11 * m22 - m12 * m21;
    double norm = std::max(std::abs(m11) + std::abs(m12), std::abs(m21) + std::abs(m22));
    double norminv = std::max(std::abs(m22) + std::abs(m12), std::abs(m21) + std::abs(m11)) /
                     std::abs(det);
    if (norm * norminv > 1e6)
        throw IllConditionedError("constant-term two-height solve is ill-conditioned");

    ConstantTermPairQ out;
    out.coeff_exp_s = (i1 * m22 - i2 * m12) / det;
    out.coeff_exp_one_minus_s = (m11 * i2 - m21 * i1) / det;
    out.error_estimate = (tails + alias) * norminv;
    return out;
}

// ---------------------------------------------------------------------------
// scattering
// ---------------------------------------------------------------------------

const std::vector<std::uint32_t>& EisensteinEvaluator::totient_sieve() const {
    std::lock_guard lock(memo_mutex_);
    if (totient_.empty()) {
        std::size_t L = opt_.sieve_limit;
        totient_.resize(L + 1);
        for (std::size_t i = 0; i <= L; ++i) totient_[i] = static_cast<std::uint32_t>(i);
        for (std::size_t p = 2; p <= L; ++p) {
            if (totient_[p] != p) continue; // not prime
            for (std::size_t j = p; j <= L; j += p) totient_[j] -= totient_[j] / p;
        }
    }
    return totient_;
}

void EisensteinEvaluator::verify_counts_once() const {
    {
        std::lock_guard lock(memo_mutex_);
        if (counts_verified_) return;
    }
    // exact double-coset enumeration must reproduce the totient counts on a
    // sizable range before the sieve is trusted for the series tails
    const int N = level_;
    double cap = std::min(opt_.c_ceiling, static_cast<double>(40 * N));
    for (const auto& e : c_lattice(N, cap)) {
        std::size_t got = double_coset_reps(N, e).size();
        long long q = e.fricke ? e.index : e.index * N;
        std::size_t want = static_cast<std::size_t>(totient_exact(q));
        if (got != want)
            throw ValidationFailureError("double-coset count disagrees with the totient formula");
    }
    std::lock_guard lock(memo_mutex_);
    counts_verified_ = true;
}

cplx EisensteinEvaluator::phi_series_direct(cplx s, bool twisted, double tol,
                                            double* err_out) const {
    require_one_cusp("scattering");
    const int N = level_;
    const double sigma = s.real();
    const double rtN = std::sqrt(static_cast<double>(N));

    if (twisted) {
        if (sigma <= 2.0)
            throw ContinuationUnavailableError("twisted scattering needs Re s > 2 (no continuation)");
        if (syms_->is_zero()) {
            if (err_out) *err_out = 0.0;
            return cplx(0.0, 0.0);
        }
        if (!syms_->envelope_ready()) syms_->fit_envelope();
        cplx series(0.0, 0.0);
        double tail = 0.0;
        struct Fam {
            bool fricke;
            double step;
            double env_scale;
        };
        std::vector<Fam> fams{{false, static_cast<double>(N), static_cast<double>(N)},
                              {true, rtN, 1.0}};
        for (const auto& fam : fams) {
            for (long long k = 1;; ++k) {
                double c = fam.step * k;
                if (c > opt_.c_ceiling)
                    throw TailTooLargeError("twisted scattering: ceiling reached");
                if (!(fam.fricke && std::gcd(k, static_cast<long long>(N)) != 1))
                    series += kloosterman(CEntry{fam.fricke, k, c}, 0, 0, true) / power_cs(c, 2.0 * s);
                double e1 = syms_->envelope_bound(fam.env_scale);
                double e2 = syms_->envelope_bound(fam.env_scale * 2.0);
                double B = std::max(0.0, (e2 - e1) / std::log(2.0));
                double A = std::max(0.0, e1 - B * std::log(2.0 + fam.env_scale));
                double count_scale = fam.fricke ? 1.0 : static_cast<double>(N);
                double rem = count_scale * std::pow(fam.step, -2.0 * sigma) *
                             log_linear_tail(A, B, static_cast<double>(k), fam.env_scale,
                                             2.0 * sigma - 1.0);
                if (rem <= 0.5 * tol) {
                    tail += rem;
                    break;
                }
            }
        }
        // constant-term prefactor sqrt(pi) Gamma(s - 1/2)/Gamma(s); the
        // cross-check against quadrature extraction validates the prefactor
        cplx pref = std::sqrt(pi) * complex_gamma(s - 0.5) / complex_gamma(s);
        if (err_out) *err_out = std::abs(pref) * tail;
        return pref * series;
    }

    // classical direct sum, Re s > 1, with Abel tails over the sieved totient
    if (sigma <= 1.0) throw ConvergenceRegionError("classical scattering direct sum needs Re s > 1");
    verify_counts_once();
    const auto& phi = totient_sieve();
    const std::size_t L = phi.size() - 1;

    auto tail_abel = [&](const std::vector<double>& partial, double Phi_end, cplx twos,
                         double& err) {
        // sum_{k > K} phi-coeff(k) k^{-2s} with summatory ~ C t^2
        double K = static_cast<double>(partial.size());
        double C = Phi_end / (K * K);
        // fluctuation envelope fitted on the top octave of the sieve range
        double ce = 0.0;
        for (std::size_t i = partial.size() / 2; i < partial.size(); i += 97) {
            double t = static_cast<double>(i + 1);
            double e = std::abs(partial[i] - C * t * t) / (t * std::log(2.0 + t));
            ce = std::max(ce, e);
        }
        ce *= 2.0;
        cplx main = 2.0 * C * power_cs(K, 2.0 - twos) / (twos - 2.0);
        double sg = twos.real();
        err += std::abs(twos) * ce * std::pow(K, 1.0 - sg) *
               (std::log(K) / (sg - 1.0) + 1.0 / ((sg - 1.0) * (sg - 1.0)));
        err += ce * std::log(2.0 + K) / K * std::abs(power_cs(K, 2.0 - twos)) *
               std::abs(2.0 / (twos - 2.0)); // uncertainty in C
        return main;
    };

    double err = 0.0;
    cplx twos = 2.0 * s;

    // integer family: N^{-2s} sum_k phi(N k) k^{-2s}
    std::size_t KN = L / static_cast<std::size_t>(N);
    cplx sumN(0.0, 0.0);
    std::vector<double> partN(KN);
    double runN = 0.0;
    for (std::size_t k = 1; k <= KN; ++k) {
        double ph = static_cast<double>(phi[k * static_cast<std::size_t>(N)]);
        sumN += ph * power_cs(static_cast<double>(k), -twos);
        runN += ph;
        partN[k - 1] = runN;
    }
    sumN += tail_abel(partN, runN, twos, err);
    sumN *= power_cs(static_cast<double>(N), -twos);

    // Fricke family: N^{-s} sum'_{u coprime N} phi(u) u^{-2s}
    cplx sumU(0.0, 0.0);
    if (N > 1) {
        std::vector<double> partU(L);
        double runU = 0.0;
        for (std::size_t u = 1; u <= L; ++u) {
            double ph = (std::gcd(u, static_cast<std::size_t>(N)) == 1)
                            ? static_cast<double>(phi[u])
                            : 0.0;
            if (ph != 0.0) sumU += ph * power_cs(static_cast<double>(u), -twos);
            runU += ph;
            partU[u - 1] = runU;
        }
        sumU += tail_abel(partU, runU, twos, err);
        sumU *= power_cs(static_cast<double>(N), -s);
    }

    cplx pref = std::sqrt(pi) * complex_gamma(s - 0.5) / complex_gamma(s);
    if (err_out) *err_out = std::abs(pref) * err;
    return pref * (sumN + sumU);
}

ScatteringData EisensteinEvaluator::scattering_direct(cplx s, bool twisted, double tol) const {
    double err = 0.0;
    cplx v = phi_series_direct(s, twisted, tol, &err);
    ScatteringData out;
    out.kind = twisted ? ScatteringData::Kind::twisted : ScatteringData::Kind::classical;
    out.certificate = ScatteringData::Certificate::direct_sum;
    out.s = s;
    out.m = 1;
    out.entries = {v};
    out.error_estimate = err;
    return out;
}

// N = 1 direct sum is a single family; the general expression keeps both
namespace {

// exact T and D Dirichlet coefficients for the frequency-matching solve
long long t_coeff(long long mu, int N) {
    long long root = 0;
    long long acc = 0;
    if (N == 1) {
        if (is_square(mu, root)) acc += totient_exact(root);
        return acc;
    }
    long long n2 = static_cast<long long>(N) * N;
    if (mu % n2 == 0 && is_square(mu / n2, root) && root >= 1)
        acc += totient_exact(static_cast<long long>(N) * root);
    if (mu % N == 0 && is_square(mu / N, root) && root >= 1 &&
        std::gcd(root, static_cast<long long>(N)) == 1)
        acc += totient_exact(root);
    return acc;
}

long long d_coeff(long long mu) {
    long long root = 0;
    if (is_square(mu, root) && root >= 1) return totient_exact(root);
    return 0;
}

} // namespace

const ScatteringRational& EisensteinEvaluator::scattering_rational() const {
    {
        std::lock_guard lock(memo_mutex_);
        if (rational_ready_) return rational_;
    }
    require_one_cusp("scattering_rational");
    const int N = level_;
    ScatteringRational rat;

    if (N == 1) {
        // T == D termwise: the quotient is identically 1
        for (long long m = 1; m <= 300; ++m) {
            if (t_coeff(m * m, 1) != d_coeff(m * m))
                throw ValidationFailureError("level-1 scattering data mismatch");
        }
        rat.p = {1};
        rat.q = {1};
        rat.verified_frequencies = 300;
    } else {
        const int J = 3;
        // frequencies N^j m^2
        std::vector<long long> freqs;
        for (int j = 0; j <= 6; ++j) {
            long long nj = 1;
            for (int t = 0; t < j; ++t) nj *= N;
            for (long long m = 1; m <= 12; ++m) freqs.push_back(nj * m * m);
        }
        std::sort(freqs.begin(), freqs.end());
        freqs.erase(std::unique(freqs.begin(), freqs.end()), freqs.end());
        if (freqs.size() > 120) freqs.resize(120);

        auto row_of = [&](long long lam, std::array<double, 6>& coef, double& rhs) {
            // sum_j beta_j T(lam/N^j) - sum_j alpha_j D(lam/N^j) = -T(lam)
            coef.fill(0.0);
            long long div = lam;
            for (int j = 1; j <= J; ++j) {
                if (div % N != 0) break;
                div /= N;
                coef[j - 1] = -static_cast<double>(d_coeff(div));     // alpha_j
                coef[3 + j - 1] = static_cast<double>(t_coeff(div, N)); // beta_j
            }
            rhs = -static_cast<double>(t_coeff(lam, N));
        };

        // normal equations over the first frequencies
        std::array<std::array<long double, 6>, 6> ata{};
        std::array<long double, 6> atb{};
        for (std::size_t i = 0; i < std::min<std::size_t>(freqs.size(), 60); ++i) {
            std::array<double, 6> c{};
            double b = 0.0;
            row_of(freqs[i], c, b);
            for (int r = 0; r < 6; ++r) {
                atb[r] += static_cast<long double>(c[r]) * b;
                for (int cc = 0; cc < 6; ++cc)
                    ata[r][cc] += static_cast<long double>(c[r]) * c[cc];
            }
        }
        // Gaussian elimination with free variables pinned to zero
        std::array<long double, 6> sol{};
        {
            std::array<std::array<long double, 7>, 6> m{};
            for (int r = 0; r < 6; ++r) {
                for (int c = 0; c < 6; ++c) m[r][c] = ata[r][c];
                m[r][6] = atb[r];
            }
            std::array<int, 6> where{};
            where.fill(-1);
            int row = 0;
            for (int col = 0; col < 6 && row < 6; ++col) {
                int piv = row;
                for (int r = row; r < 6; ++r)
                    if (std::abs(static_cast<double>(m[r][col])) >
                        std::abs(static_cast<double>(m[piv][col])))
                        piv = r;
                if (std::abs(static_cast<double>(m[piv][col])) < 1e-7) continue;
                std::swap(m[piv], m[row]);
                for (int r = 0; r < 6; ++r) {
                    if (r == row) continue;
                    long double f = m[r][col] / m[row][col];
                    for (int c = col; c <= 6; ++c) m[r][c] -= f * m[row][c];
                }
                where[col] = row;
                ++row;
            }
            for (int col = 0; col < 6; ++col)
                sol[col] = (where[col] >= 0) ? m[where[col]][6] / m[where[col]][col] : 0.0L;
        }
        std::array<long long, 6> isol{};
        for (int i = 0; i < 6; ++i) {
            isol[i] = std::llround(static_cast<double>(sol[i]));
            if (std::abs(static_cast<double>(sol[i]) - static_cast<double>(isol[i])) > 1e-5)
                throw ValidationFailureError("scattering rational solve: non-integer coefficients");
        }
        // exact verification on every generated frequency
        for (long long lam : freqs) {
            long long lhs = t_coeff(lam, N);
            long long div = lam;
            for (int j = 1; j <= J; ++j) {
                if (div % N != 0) break;
                div /= N;
                lhs += isol[3 + j - 1] * t_coeff(div, N);
                lhs -= isol[j - 1] * d_coeff(div);
            }
            if (lhs != 0)
                throw ValidationFailureError("scattering rational solve: exact verification failed");
        }
        rat.p = {0, isol[0], isol[1], isol[2]};
        rat.q = {1, isol[3], isol[4], isol[5]};
        rat.verified_frequencies = static_cast<int>(freqs.size());
    }

    std::lock_guard lock(memo_mutex_);
    rational_ = rat;
    rational_ready_ = true;
    return rational_;
}

cplx EisensteinEvaluator::phi_classical_closed(cplx s) const {
    const auto& rat = scattering_rational();
    cplx x = power_cs(static_cast<double>(level_), -s);
    return completed_zeta(2.0 * s - 1.0) / completed_zeta(2.0 * s) * rat.eval(x);
}

ScatteringData EisensteinEvaluator::scattering_closed(cplx s) const {
    ScatteringData out;
    out.kind = ScatteringData::Kind::classical;
    out.certificate = ScatteringData::Certificate::closed_form;
    out.s = s;
    out.m = 1;
    out.entries = {phi_classical_closed(s)};
    out.error_estimate = 1e-12 * std::abs(out.entries[0]);
    return out;
}

cplx EisensteinEvaluator::phi_twisted(cplx w, double tol) const {
    {
        std::lock_guard lock(memo_mutex_);
        auto it = phi_twisted_memo_.find({w.real(), w.imag()});
        if (it != phi_twisted_memo_.end()) return it->second;
    }
    cplx v = phi_series_direct(w, true, tol, nullptr);
    std::lock_guard lock(memo_mutex_);
    phi_twisted_memo_[{w.real(), w.imag()}] = v;
    return v;
}

double EisensteinEvaluator::validate_scattering(double re_lo, double re_hi, int points,
                                                double tol) const {
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
        double re = re_lo + (re_hi - re_lo) * i / std::max(1, points - 1);
        cplx s(re, 0.0);
        double err = 0.0;
        cplx direct = phi_series_direct(s, false, tol, &err);
        cplx closed = phi_classical_closed(s);
        worst = std::max(worst, std::abs(direct - closed));
    }
    return worst;
}

} // namespace eistwist
