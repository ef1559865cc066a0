#ifndef EISTWIST_NEWFORM_HPP
#define EISTWIST_NEWFORM_HPP

// The weight-2 newform driving the twist. The canonical instance is the
// level-37 form attached to the curve y^2 + y = x^3 - x (analytic rank 1,
// Fricke eigenvalue +1), with coefficients generated internally by point
// counting plus the Hecke recursion. On top of it: q-expansion evaluation
// with certified tails, the period integral F(z) = int_z^{ioo} f, the
// modular-symbol homomorphism psi(gamma) = int_{ioo}^{gamma ioo} f, and the
// central L-value. Psi values are memoized in a cache that can persist to
// disk with a checksummed header.

#include <cstdint>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "eistwist/group.hpp"
#include "eistwist/special.hpp"

namespace eistwist {

// trace of Frobenius by exhaustive point counting over F_p; the prime of bad
// reduction (37) is refused and supplied from the table instead
long long ap_oracle(long long p);

struct NewformData {
    int level = 37;
    int fricke_eigenvalue = 1;
    std::vector<long long> an; // 1-indexed; an[0] unused

    std::size_t n_max() const { return an.empty() ? 0 : an.size() - 1; }
    std::uint64_t coefficient_hash() const;

    static NewformData canonical_level37(std::size_t n_max);
    // JSON: {"level": N, "fricke_eigenvalue": e, "coefficients": [a_1, ...]};
    // cross-checked against the point-count oracle when the level is 37
    static NewformData from_file(const std::string& path);

    void validate() const; // a_1, multiplicativity, Hecke recursion, |a_n| <= n, eigenvalue
};

// f(z) = sum a_n e^{2 pi i n z}, tail certified below 1e-12 from |a_n| <= n
cplx evaluate_f(const NewformData& nf, cplx z);
// F(z) = int_z^{ioo} f = -(1/2 pi i) sum (a_n/n) e^{2 pi i n z}
cplx period_to_infinity(const NewformData& nf, cplx z);
// L_f(1) = 2 pi int_0^infty f(iy) dy, split at 1/sqrt(N) with the Fricke
// substitution applied to the lower half
cplx l_value_at_1(const NewformData& nf);

struct PsiCache {
    std::unordered_map<std::uint64_t, cplx> values;
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;

    static std::uint64_t key(long long num, long long den);
    // returns false when the file is absent, malformed, checksum-corrupt, or
    // belongs to different newform data; the caller then recomputes
    bool load(const std::string& path, const NewformData& nf);
    void save(const std::string& path, const NewformData& nf) const; // atomic
};

// psi engine over a fixed newform (or the zero homomorphism for control runs)
class ModularSymbols {
  public:
    explicit ModularSymbols(std::shared_ptr<const NewformData> nf);
    static ModularSymbols zero(int level);

    int level() const { return level_; }
    bool is_zero() const { return nf_ == nullptr; }
    const NewformData* newform() const { return nf_.get(); }

    cplx psi(const GroupElement& g);
    // psi of the symbol with endpoint num/den (den == 0 means infinity)
    cplx psi_endpoint(long long num, long long den);
    // second base point on the isometric circle; used by independence checks
    cplx psi_endpoint_alt(long long num, long long den);

    // growth envelope |psi| <= A + B log(2 + q) over reduced denominators q,
    // fitted once on a deterministic probe grid (psi is periodic in the
    // numerator, so row tails only need the denominator scale)
    void fit_envelope();
    bool envelope_ready() const { return env_fitted_; }
    double envelope_bound(double q_scale) const;

    PsiCache& cache() { return cache_; }
    bool load_cache(const std::string& path);
    void save_cache(const std::string& path) const;

  private:
    ModularSymbols(); // zero homomorphism; see zero()
    std::shared_ptr<const NewformData> nf_;
    int level_ = 1;
    PsiCache cache_;
    mutable std::unique_ptr<std::shared_mutex> mutex_;
    bool env_fitted_ = false;
    double env_a_ = 0.0, env_b_ = 0.0;

    cplx compute_endpoint(long long num, long long den, double angle) const;
};

} // namespace eistwist

#endif
