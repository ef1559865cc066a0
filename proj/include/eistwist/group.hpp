#ifndef EISTWIST_GROUP_HPP
#define EISTWIST_GROUP_HPP

// Exact arithmetic in the Fricke extension Gamma* = <Gamma_0(N), W_N> of a
// squarefree level N. Elements are stored as an integer matrix in Gamma_0(N)
// together with a flag marking right multiplication by W_N; sqrt(N) only
// appears when an element is realized over the reals. Cusp data carries an
// exact stabilizer certificate. Enumeration of Gamma_infty cosets and of
// Gamma_infty double cosets (the index sets of the Eisenstein and Kloosterman
// sums) is provided at the infinity cusp, which covers level 1 and all prime
// levels completely.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "eistwist/special.hpp"

namespace eistwist {

long long mod_inverse(long long x, long long m); // m >= 1; m == 1 returns 0

struct Rational {
    long long num = 1;
    long long den = 0; // den == 0 encodes the cusp at infinity
    bool is_infinity() const { return den == 0; }
    bool operator==(const Rational&) const = default;
};
Rational make_rational(long long num, long long den); // reduced, den >= 0

struct Mat2 {
    long long a = 1, b = 0, c = 0, d = 1;
    long long det() const { return a * d - b * c; }
    bool operator==(const Mat2&) const = default;
};
Mat2 mat_mul(const Mat2& x, const Mat2& y);
Mat2 mat_inv_unimodular(const Mat2& m); // adjugate; requires det == 1

class GroupElement {
  public:
    GroupElement(Mat2 m, int level, bool fricke);

    static GroupElement identity(int level);
    static GroupElement translation(int level, long long m); // (1, m; 0, 1)
    static GroupElement lower(int level, long long m);       // (1, 0; m N, 1)
    static GroupElement fricke_w(int level);                 // W_N

    const Mat2& mat() const { return mat_; }
    int level() const { return level_; }
    bool fricke() const { return fricke_; }
    bool is_identity() const;

    GroupElement inverse() const;
    std::array<double, 4> real_matrix() const;     // (a, b; c, d) over R
    cplx mobius(cplx z) const;
    Rational image_of_infinity() const;            // gamma(infinity)

    bool operator==(const GroupElement&) const = default;
    std::uint64_t hash_key() const;

  private:
    Mat2 mat_;
    int level_;
    bool fricke_;
    void canonicalize();
};

GroupElement multiply(const GroupElement& x, const GroupElement& y);
GroupElement invert(const GroupElement& x);
bool is_parabolic(const GroupElement& x); // IdentityInputError on the identity

// ---------------------------------------------------------------------------
// Cusps
// ---------------------------------------------------------------------------

struct CuspData {
    int index = 0;
    int level = 1;
    Rational representative;    // infinity for index 0
    long long width = 1;        // h with sigma = base * diag(sqrt h, 1/sqrt h)
    Mat2 scaling_base;          // in SL_2(Z), maps infinity to the representative
    Mat2 stabilizer_generator;  // generator of the Gamma*-stabilizer (lies in Gamma_0(N))

    bool is_infinity() const { return representative.is_infinity(); }
    std::array<double, 4> sigma() const;
    // exact checks: generator is parabolic, lies in Gamma_0(N), conjugates to
    // the unit translation under sigma, and the width is minimal
    bool certificate_ok() const;
};

std::vector<CuspData> cusp_set(int N); // UnsupportedLevelError unless N squarefree

// ---------------------------------------------------------------------------
// Enumeration at the infinity cusp
// ---------------------------------------------------------------------------

// Lattice of possible lower-left entries c > 0 of Gamma* (cusp pair oo,oo):
// integers N k, and u sqrt(N) for u coprime to N.
struct CEntry {
    bool fricke = false;
    long long index = 0; // k or u
    double value = 0.0;
};
std::vector<CEntry> c_lattice(int N, double c_max);
std::optional<CEntry> match_c(int N, double c, double tol = 1e-9);

struct CosetRep {
    GroupElement element;
    double bottom_c = 0.0, bottom_d = 1.0; // real bottom row of the element
    long long psi_den = 0, psi_num = 1;    // element(infinity) reduced; den 0 = infinity
};

CosetRep identity_coset(int N);
// one coset per d (resp. v) in [dlo, dhi] with the right coprimality; for the
// Fricke family the real bottom row is sqrt(N) (u, v)
std::vector<CosetRep> coset_rows(int N, const CEntry& e, long long dlo, long long dhi);

struct DoubleCosetRep {
    GroupElement element;
    long long modulus = 1; // c (integer family) or u (Fricke family)
    long long a_res = 0;   // phase e^{2 pi i (n a_res + m d_res)/modulus}
    long long d_res = 0;
};

std::vector<DoubleCosetRep> double_coset_reps(int N, const CEntry& e);
// real-valued c matched against the lattice; values outside it yield {}
std::vector<DoubleCosetRep> double_coset_reps(int N, const CuspData& a, const CuspData& b, double c);

} // namespace eistwist

#endif
