#ifndef EISTWIST_EISENSTEIN_HPP
#define EISTWIST_EISENSTEIN_HPP

// Classical and twisted Eisenstein series on Gamma* at the infinity cusp:
// direct coset sums with certified truncation tails, Fourier coefficients by
// two independent routes (unit-interval quadrature and twisted Kloosterman
// c-series), scattering entries phi(s) / phi(s; f), and the completed series
// E~(z, w; f) = E(z, w; f) - 1/2 phi(w; f) phi(1-w) E(z, w).
//
// The classical scattering entry is evaluated two ways: a direct c-series
// backed by exact double-coset counts (with an Abel tail over a sieved
// totient summatory), and a closed form zeta(2s-1)/zeta(2s) times a rational
// function of N^{-s} whose integer coefficients are solved from the exact
// small-c data and re-verified frequency by frequency. The closed form is the
// continuation path used outside the convergence half-plane.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "eistwist/group.hpp"
#include "eistwist/newform.hpp"
#include "eistwist/special.hpp"

namespace eistwist {

struct EvalResult {
    cplx value{0.0, 0.0};
    double tail_bound = 0.0;
    std::size_t terms = 0;
};

struct FourierCoefficient {
    int a_index = 0;
    int b_index = 0;
    long long n = 0;
    cplx s{0.0, 0.0};
    cplx value{0.0, 0.0};
    std::string method;       // "quadrature" or "kloosterman-series"
    double error_estimate = 0.0;
    std::string note;         // records convention audits
};

struct ConstantTermPairQ {
    cplx coeff_exp_s{0.0, 0.0};       // coefficient of y^s
    cplx coeff_exp_one_minus_s{0.0, 0.0}; // coefficient of y^{1-s}
    double error_estimate = 0.0;
};

struct ScatteringData {
    enum class Kind { classical, twisted };
    enum class Certificate { direct_sum, closed_form };
    Kind kind = Kind::classical;
    Certificate certificate = Certificate::direct_sum;
    cplx s{0.0, 0.0};
    int m = 1;                 // number of cusps
    std::vector<cplx> entries; // m*m, row-major; scalar in the one-cusp case
    double error_estimate = 0.0;
    cplx scalar() const { return entries.at(0); }
};

// P(x)/Q(x) with integer coefficients, certified by exact frequency matching
struct ScatteringRational {
    std::vector<long long> p; // numerator, p[0] = 0 by construction
    std::vector<long long> q; // denominator, q[0] = 1
    int verified_frequencies = 0;
    cplx eval(cplx x) const;
};

struct EvalOptions {
    double c_ceiling = 8192.0;     // hard truncation ceiling for coset sums
    int quadrature_grid = 64;      // x-points for Fourier extraction
    double series_tol = 1e-9;      // default c-series tolerance
    std::size_t sieve_limit = 1000000; // totient sieve for scattering tails
};

class EisensteinEvaluator {
  public:
    EisensteinEvaluator(std::shared_ptr<ModularSymbols> syms, EvalOptions opt = {});

    int level() const { return level_; }
    const std::vector<CuspData>& cusps() const { return cusps_; }
    ModularSymbols& symbols() { return *syms_; }
    const EvalOptions& options() const { return opt_; }

    // direct coset sums at the infinity cusp
    EvalResult classical(cplx z, cplx s, double tol) const;
    EvalResult twisted(cplx z, cplx s, double tol) const;
    // completed series; one-cusp levels only
    EvalResult completed(cplx z, cplx w, double tol) const;

    // S_{oo oo}(m, n, f; c) (twisted) or with unit weights (classical)
    cplx kloosterman(const CEntry& e, long long m, long long n, bool twisted) const;
    cplx kloosterman(double c, long long m, long long n, bool twisted) const; // off-lattice: 0

    // phi(n, s; .) by the c-series of Kloosterman sums (n != 0)
    FourierCoefficient fourier_series(long long n, cplx s, bool twisted, double tol) const;
    // phi(n, s; .) by unit-interval quadrature at height y (n != 0)
    FourierCoefficient fourier_quadrature(long long n, cplx s, double y, bool twisted,
                                          double inner_tol) const;
    // n = 0 two-height solve (heights y and 2y) on E, or on E~ when completed
    ConstantTermPairQ constant_term_quadrature(cplx s, double y, bool twisted, bool completed,
                                               double inner_tol) const;

    // scattering entries (one-cusp levels)
    ScatteringData scattering_direct(cplx s, bool twisted, double tol) const;
    ScatteringData scattering_closed(cplx s) const; // classical, anywhere off poles
    const ScatteringRational& scattering_rational() const;

    // convenience scalars used throughout dds
    cplx phi_classical_closed(cplx s) const;
    cplx phi_twisted(cplx w, double tol) const; // cached per w

    // max |(i) - (ii)| over a real-part grid; used by the self-certification
    double validate_scattering(double re_lo, double re_hi, int points, double tol) const;

  private:
    std::shared_ptr<ModularSymbols> syms_;
    int level_;
    std::vector<CuspData> cusps_;
    EvalOptions opt_;

    mutable std::mutex memo_mutex_;
    mutable std::map<std::pair<double, double>, cplx> phi_twisted_memo_;
    mutable ScatteringRational rational_;
    mutable bool rational_ready_ = false;
    mutable std::vector<std::uint32_t> totient_;
    mutable bool counts_verified_ = false;

    void require_one_cusp(const char* what) const;
    const std::vector<std::uint32_t>& totient_sieve() const;
    void verify_counts_once() const;
    EvalResult eval_sum(cplx z, cplx s, bool twisted, double tol) const;
    cplx phi_series_direct(cplx s, bool twisted, double tol, double* err_out) const;
};

} // namespace eistwist

#endif
