#include "eistwist/newform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <cstring>
#include <numbers>
#include <numeric>

#include "json.hpp"

namespace eistwist {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double tail_target = 1e-12;

bool is_prime(long long p) {
    if (p < 2) return false;
    for (long long d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

std::vector<int> smallest_prime_factor(std::size_t n) {
    std::vector<int> spf(n + 1, 0);
    for (std::size_t i = 2; i <= n; ++i) {
        if (spf[i] == 0) {
            for (std::size_t j = i; j <= n; j += i)
                if (spf[j] == 0) spf[j] = static_cast<int>(i);
        }
    }
    return spf;
}

// minimal number of q-expansion terms certifying the tail bound at height y,
// using |a_n| <= n; returns 0 when no admissible count <= n_max exists
std::size_t terms_needed(double y, std::size_t n_max, double target) {
    const double x = std::exp(-2.0 * pi * y);
    if (x >= 1.0) return 0;
    const double one_minus = -std::expm1(-2.0 * pi * y);
    // tail(M) = sum_{n>M} n x^n <= x^{M+1} (M + 1/(1-x)) / (1-x)
    std::size_t lo = 1, hi = n_max;
    auto ok = [&](std::size_t m) {
        double md = static_cast<double>(m);
        double logtail = (md + 1.0) * std::log(x) + std::log((md + 1.0 / one_minus) / one_minus);
        return logtail <= std::log(target);
    };
    if (!ok(hi)) return 0;
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (ok(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

} // namespace

long long ap_oracle(long long p) {
    if (p == 37) throw UnsupportedPrimeError("ap_oracle: 37 is the bad prime; use the table");
    if (!is_prime(p)) throw DomainError("ap_oracle: argument must be prime");
    if (p == 2) {
        // y^2 + y = x^3 - x over F_2: every (x, y) satisfies it
        return 2 + 1 - 5;
    }
    // #affine = sum_x (1 + chi(4 f(x) + 1)) after completing the square
    std::vector<signed char> chi(static_cast<std::size_t>(p), -1);
    for (long long t = 1; t < p; ++t) chi[static_cast<std::size_t>((t * t) % p)] = 1;
    chi[0] = 0;
    long long s = 0;
    for (long long x = 0; x < p; ++x) {
        long long f = ((x * x % p) * x % p - x % p + p) % p;
        long long v = (4 * f + 1) % p;
        s += chi[static_cast<std::size_t>(v)];
    }
    return -s; // a_p = p + 1 - (p + s + 1)
}

std::uint64_t NewformData::coefficient_hash() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    mix(static_cast<std::uint64_t>(level));
    mix(static_cast<std::uint64_t>(fricke_eigenvalue + 7));
    for (long long a : an) mix(static_cast<std::uint64_t>(a));
    return h;
}

NewformData NewformData::canonical_level37(std::size_t n_max) {
    if (n_max < 37) throw ConfigError("canonical_level37: n_max too small");
    NewformData nf;
    nf.level = 37;
    nf.fricke_eigenvalue = 1;
    nf.an.assign(n_max + 1, 0);
    nf.an[1] = 1;

    auto spf = smallest_prime_factor(n_max);
    for (std::size_t p = 2; p <= n_max; ++p) {
        if (spf[p] != static_cast<int>(p)) continue; // not prime
        long long ap = (p == 37) ? -1 : ap_oracle(static_cast<long long>(p));
        nf.an[p] = ap;
        // prime powers
        if (p == 37) {
            long long v = -1;
            for (std::size_t q = 37 * 37; q <= n_max; q *= 37) {
                v *= -1;
                nf.an[q] = (v == 1) ? 1 : -1; // a_{37^k} = (-1)^k
            }
        } else {
            std::size_t pk = p * p;
            long long prev2 = 1, prev = ap;
            while (pk <= n_max) {
                long long cur = ap * prev - static_cast<long long>(p) * prev2;
                nf.an[pk] = cur;
                prev2 = prev;
                prev = cur;
                if (pk > n_max / p) break;
                pk *= p;
            }
        }
    }
    // multiplicativity for composites
    for (std::size_t n = 2; n <= n_max; ++n) {
        std::size_t p = static_cast<std::size_t>(spf[n]);
        if (nf.an[n] != 0 || p == n) continue;
        std::size_t pe = 1, m = n;
        while (m % p == 0) {
            m /= p;
            pe *= p;
        }
        if (m == 1) continue; // prime power, already set
        nf.an[n] = nf.an[pe] * nf.an[m];
    }
    nf.validate();
    return nf;
}

void NewformData::validate() const {
    if (fricke_eigenvalue != 1)
        throw PreconditionError("NewformData: Fricke eigenvalue must be +1 (psi must extend to Gamma*)");
    if (an.size() < 2 || an[1] != 1) throw ValidationFailureError("NewformData: a_1 must be 1");
    const std::size_t nmax = n_max();
    auto spf = smallest_prime_factor(nmax);
    for (std::size_t n = 1; n <= nmax; ++n) {
        if (std::abs(an[n]) > static_cast<long long>(n))
            throw ValidationFailureError("NewformData: |a_n| <= n violated");
        std::size_t p = static_cast<std::size_t>(spf[n]);
        if (n < 2 || p == n) continue;
        std::size_t pe = 1, m = n;
        while (m % p == 0) {
            m /= p;
            pe *= p;
        }
        if (m > 1 && an[n] != an[pe] * an[m])
            throw ValidationFailureError("NewformData: multiplicativity violated");
    }
    // Hecke recursion at prime squares for good primes
    for (std::size_t p = 2; p * p <= nmax; ++p) {
        if (spf[p] != static_cast<int>(p)) continue;
        if (static_cast<int>(p) == level || level % static_cast<int>(p) == 0) continue;
        if (an[p * p] != an[p] * an[p] - static_cast<long long>(p))
            throw ValidationFailureError("NewformData: Hecke recursion violated at p^2");
    }
}

NewformData NewformData::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open newform file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("newform file parse error: ") + e.what());
    }
    NewformData nf;
    try {
        nf.level = j.at("level").get<int>();
        nf.fricke_eigenvalue = j.at("fricke_eigenvalue").get<int>();
        auto coeffs = j.at("coefficients");
        nf.an.assign(coeffs.size() + 1, 0);
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            if (!coeffs[i].is_number_integer())
                throw ConfigError("newform coefficients must be integers");
            nf.an[i + 1] = coeffs[i].get<long long>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("newform file schema error: ") + e.what());
    }
    nf.validate();
    if (nf.level == 37) {
        for (long long p = 2; p < std::min<long long>(200, static_cast<long long>(nf.n_max()) + 1); ++p) {
            if (!is_prime(p) || p == 37) continue;
            if (nf.an[static_cast<std::size_t>(p)] != ap_oracle(p))
                throw ValidationFailureError("newform file disagrees with the point-count oracle");
        }
    }
    return nf;
}

// ---------------------------------------------------------------------------
// series
// ---------------------------------------------------------------------------

cplx evaluate_f(const NewformData& nf, cplx z) {
    double y = z.imag();
    if (!(y > 0.0)) throw DomainError("evaluate_f requires Im z > 0");
    std::size_t M = terms_needed(y, nf.n_max(), tail_target);
    if (M == 0) throw TruncationInsufficientError("evaluate_f: certified tail unreachable at this height");
    cplx q = std::exp(cplx(0.0, 2.0 * pi) * z);
    cplx qn(1.0, 0.0);
    cplx acc(0.0, 0.0);
    for (std::size_t n = 1; n <= M; ++n) {
        qn *= q;
        if (nf.an[n] != 0) acc += static_cast<double>(nf.an[n]) * qn;
    }
    return ensure_finite(acc, "evaluate_f");
}

cplx period_to_infinity(const NewformData& nf, cplx z) {
    double y = z.imag();
    if (!(y > 0.0)) throw DomainError("period_to_infinity requires Im z > 0");
    std::size_t M = terms_needed(y, nf.n_max(), tail_target);
    if (M == 0)
        throw TruncationInsufficientError("period_to_infinity: certified tail unreachable at this height");
    cplx q = std::exp(cplx(0.0, 2.0 * pi) * z);
    cplx qn(1.0, 0.0);
    cplx acc(0.0, 0.0);
    for (std::size_t n = 1; n <= M; ++n) {
        qn *= q;
        if (nf.an[n] != 0) acc += (static_cast<double>(nf.an[n]) / static_cast<double>(n)) * qn;
    }
    return ensure_finite(acc / cplx(0.0, -2.0 * pi), "period_to_infinity");
}

cplx l_value_at_1(const NewformData& nf) {
    // 2 pi int_0^infty f(iy) dy, split at 1/sqrt(N); the substitution
    // y -> 1/(Ny) plus Fricke invariance with eigenvalue +1 turns the lower
    // half into minus the upper half
    const double y0 = 1.0 / std::sqrt(static_cast<double>(nf.level));
    double upper = 0.0;
    for (std::size_t n = 1; n <= nf.n_max(); ++n) {
        if (nf.an[n] == 0) continue;
        double t = std::exp(-2.0 * pi * static_cast<double>(n) * y0);
        if (t < 1e-300) break;
        upper += static_cast<double>(nf.an[n]) / (2.0 * pi * static_cast<double>(n)) * t;
    }
    double lower = 0.0;
    for (std::size_t n = 1; n <= nf.n_max(); ++n) {
        if (nf.an[n] == 0) continue;
        double t = std::exp(-2.0 * pi * static_cast<double>(n) * y0);
        if (t < 1e-300) break;
        lower -= static_cast<double>(nf.an[n]) / (2.0 * pi * static_cast<double>(n)) * t;
    }
    return cplx(2.0 * pi * (upper + lower), 0.0);
}

// ---------------------------------------------------------------------------
// PsiCache persistence
// ---------------------------------------------------------------------------

namespace {

constexpr std::uint32_t psi_cache_magic = 0x45505343u; // "EPSC"
constexpr std::uint32_t psi_cache_version = 1u;

std::uint64_t fnv_bytes(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

template <typename T>
void put_raw(std::string& out, const T& v) {
    out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get_raw(const std::string& in, std::size_t& pos, T& v) {
    if (pos + sizeof(T) > in.size()) return false;
    std::memcpy(&v, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return true;
}

} // namespace

std::uint64_t PsiCache::key(long long num, long long den) {
    return static_cast<std::uint64_t>(den) * 0x100000000ull +
           static_cast<std::uint64_t>(((num % den) + den) % den);
}

bool PsiCache::load(const std::string& path, const NewformData& nf) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 8) return false;
    std::string payload = bytes.substr(0, bytes.size() - 8);
    std::uint64_t checksum = 0;
    std::size_t cpos = bytes.size() - 8;
    std::memcpy(&checksum, bytes.data() + cpos, 8);
    if (fnv_bytes(payload) != checksum) return false;

    std::size_t pos = 0;
    std::uint32_t magic = 0, version = 0;
    std::uint32_t level = 0;
    std::int32_t eigen = 0;
    std::uint64_t hash = 0, count = 0;
    if (!get_raw(payload, pos, magic) || magic != psi_cache_magic) return false;
    if (!get_raw(payload, pos, version) || version != psi_cache_version) return false;
    if (!get_raw(payload, pos, level) || level != static_cast<std::uint32_t>(nf.level)) return false;
    if (!get_raw(payload, pos, eigen) || eigen != nf.fricke_eigenvalue) return false;
    if (!get_raw(payload, pos, hash) || hash != nf.coefficient_hash()) return false;
    if (!get_raw(payload, pos, count)) return false;
    std::unordered_map<std::uint64_t, cplx> loaded;
    loaded.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::uint64_t k = 0;
        double re = 0, im = 0;
        if (!get_raw(payload, pos, k) || !get_raw(payload, pos, re) || !get_raw(payload, pos, im))
            return false;
        loaded.emplace(k, cplx(re, im));
    }
    values = std::move(loaded);
    return true;
}

void PsiCache::save(const std::string& path, const NewformData& nf) const {
    std::string payload;
    put_raw(payload, psi_cache_magic);
    put_raw(payload, psi_cache_version);
    put_raw(payload, static_cast<std::uint32_t>(nf.level));
    put_raw(payload, static_cast<std::int32_t>(nf.fricke_eigenvalue));
    put_raw(payload, nf.coefficient_hash());
    put_raw(payload, static_cast<std::uint64_t>(values.size()));
    std::vector<std::uint64_t> keys;
    keys.reserve(values.size());
    for (const auto& [k, v] : values) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    for (std::uint64_t k : keys) {
        const cplx& v = values.at(k);
        put_raw(payload, k);
        put_raw(payload, v.real());
        put_raw(payload, v.imag());
    }
    std::uint64_t checksum = fnv_bytes(payload);
    put_raw(payload, checksum);

    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write psi cache: " + tmp);
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot move psi cache into place: " + ec.message());
}

// ---------------------------------------------------------------------------
// ModularSymbols
// ---------------------------------------------------------------------------

ModularSymbols::ModularSymbols() : mutex_(std::make_unique<std::shared_mutex>()) {}

ModularSymbols::ModularSymbols(std::shared_ptr<const NewformData> nf)
    : nf_(std::move(nf)), level_(nf_ ? nf_->level : 1),
      mutex_(std::make_unique<std::shared_mutex>()) {
    if (!nf_) throw PreconditionError("ModularSymbols: newform required (use zero() for controls)");
}

ModularSymbols ModularSymbols::zero(int level) {
    ModularSymbols s{};
    s.level_ = level;
    s.env_fitted_ = true;
    return s;
}

cplx ModularSymbols::psi(const GroupElement& g) {
    if (g.level() != level_) throw PreconditionError("psi: element level mismatch");
    Rational r = g.image_of_infinity();
    if (r.is_infinity()) return cplx(0.0, 0.0);
    return psi_endpoint(r.num, r.den);
}

cplx ModularSymbols::compute_endpoint(long long num, long long den, double angle) const {
    // den > 0, gcd(num, den) = 1. Consider the admissible routes and their
    // Fricke path-split alternates; evaluate the cheapest certifiable one.
    struct Candidate {
        double foot, negDC, absC;
    };
    std::vector<Candidate> cands;
    const int N = level_;
    const double rtN = std::sqrt(static_cast<double>(N));

    auto ext_gcd = [](long long a, long long b, long long& x, long long& y) {
        long long old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
        while (r != 0) {
            long long q = old_r / r;
            std::swap(old_r -= q * r, r);
            std::swap(old_s -= q * s, s);
            std::swap(old_t -= q * t, t);
        }
        x = old_s * old_r;
        y = old_t * old_r; // a x + b y = 1 when gcd = 1
    };

    auto add_gamma0 = [&](long long p, long long q) {
        // (p, b; q, d), p d - b q = 1, N | q
        long long d, negb;
        ext_gcd(p, q, d, negb); // p d + q (negb) = 1 -> b = -negb
        double foot = static_cast<double>(p) / static_cast<double>(q);
        cands.push_back({foot, -static_cast<double>(d) / static_cast<double>(q),
                         static_cast<double>(std::abs(q))});
        // Fricke path split: psi(p/q) = psi(gamma'(0)) since <f, W_N> = 0;
        // gamma'(0) = b/d with the d-lift of minimal absolute value
        long long b = -negb;
        long long dmod = ((d % q) + q) % q;
        if (2 * dmod > q) dmod -= q;
        long long mshift = (d - dmod) / q; // d - m q = dmod
        long long bshift = b - mshift * p;
        if (dmod != 0 && N > 1) {
            long long dd = dmod, bb = bshift;
            if (dd < 0) {
                dd = -dd;
                bb = -bb;
            }
            if (std::gcd(dd, static_cast<long long>(N)) == 1) {
                // endpoint bb/dd through the Fricke family: |C| = dd sqrt(N);
                // g = (xx, bb; yy, dd) with xx dd - bb yy = 1 and N | yy
                long long xx, tt;
                ext_gcd(dd, static_cast<long long>(N) * bb, xx, tt); // dd xx + N bb tt = 1
                long long yy = -tt * static_cast<long long>(N);
                double footF = static_cast<double>(bb) / static_cast<double>(dd);
                double negDC = static_cast<double>(yy) / (static_cast<double>(dd) * N);
                cands.push_back({footF, negDC, static_cast<double>(dd) * rtN});
            }
        }
    };

    auto add_fricke = [&](long long p, long long q) {
        // g W with g = (x, p; y, q), x q - p y = 1, N | y; real matrix
        // (p rtN, -x/rtN; q rtN, -y/rtN)
        if (N == 1) return;
        if (std::gcd(q, static_cast<long long>(N)) != 1) return;
        long long x, t;
        ext_gcd(q, static_cast<long long>(N) * p, x, t); // q x + N p t = 1
        long long y = -t * static_cast<long long>(N);    // x q - p y = 1
        double foot = static_cast<double>(p) / static_cast<double>(q);
        // -D/C = (y/rtN) / (q rtN) = y / (q N)
        cands.push_back({foot, static_cast<double>(y) / (static_cast<double>(q) * N),
                         static_cast<double>(q) * rtN});
        // path split through W_N: psi(p/q) = psi(g(infinity)) = P(x'/y') with
        // the y-lift of minimal absolute value (g and gW share psi because
        // <f, W_N> = 0); this endpoint rides the integer family, |C| = |y'|
        long long step = static_cast<long long>(N) * q;
        long long ymod = ((y % step) + step) % step;
        if (2 * ymod > step) ymod -= step;
        long long mshift = (y - ymod) / step; // y - m N q = ymod
        long long xshift = x - mshift * static_cast<long long>(N) * p;
        if (ymod != 0 && std::abs(ymod) < static_cast<double>(q) * rtN) {
            long long yy = ymod, xx = xshift;
            if (yy < 0) {
                yy = -yy;
                xx = -xx;
            }
            // route (xx, b; yy, d) in Gamma_0(N): xx d - b yy = 1
            long long d2, negb2;
            ext_gcd(xx, yy, d2, negb2);
            cands.push_back({static_cast<double>(xx) / static_cast<double>(yy),
                             -static_cast<double>(d2) / static_cast<double>(yy),
                             static_cast<double>(yy)});
        }
    };

    if (den % N == 0)
        add_gamma0(num, den);
    else if (std::gcd(den, static_cast<long long>(N)) == 1)
        add_fricke(num, den);
    else
        throw UnsupportedCuspError("psi_endpoint: denominator shares a proper factor with N");

    std::sort(cands.begin(), cands.end(),
              [](const Candidate& a, const Candidate& b) { return a.absC < b.absC; });

    const double sin_a = std::sin(angle), cos_a = std::cos(angle);
    for (const auto& c : cands) {
        double h = sin_a / c.absC;
        if (terms_needed(h, nf_->n_max(), tail_target) == 0) continue;
        cplx z0(c.foot + cos_a / c.absC, h);
        cplx w0(c.negDC - cos_a / c.absC, h);
        return period_to_infinity(*nf_, w0) - period_to_infinity(*nf_, z0);
    }
    throw TruncationInsufficientError("psi_endpoint: no admissible base point at this n_max");
}

cplx ModularSymbols::psi_endpoint(long long num, long long den) {
    if (den == 0) return cplx(0.0, 0.0);
    if (is_zero()) return cplx(0.0, 0.0);
    Rational r = make_rational(num, den);
    if (r.is_infinity()) return cplx(0.0, 0.0);
    const std::uint64_t k = PsiCache::key(r.num, r.den);
    {
        std::shared_lock lock(*mutex_);
        auto it = cache_.values.find(k);
        if (it != cache_.values.end()) {
            ++cache_.hits;
            return it->second;
        }
    }
    cplx v = compute_endpoint(r.num, r.den, pi / 3.0);
    if (env_fitted_) {
        double bound = envelope_bound(static_cast<double>(r.den));
        if (std::abs(v) > 10.0 * bound)
            throw EnvelopeViolationError("psi value exceeds 10x the fitted growth envelope");
    }
    {
        std::unique_lock lock(*mutex_);
        ++cache_.misses;
        cache_.values.emplace(k, v);
    }
    return v;
}

cplx ModularSymbols::psi_endpoint_alt(long long num, long long den) {
    if (den == 0 || is_zero()) return cplx(0.0, 0.0);
    Rational r = make_rational(num, den);
    if (r.is_infinity()) return cplx(0.0, 0.0);
    return compute_endpoint(r.num, r.den, pi / 4.0);
}

void ModularSymbols::fit_envelope() {
    if (env_fitted_) return;
    // deterministic probe grid over both denominator families
    std::vector<std::pair<double, double>> samples; // (log(2+q), |psi|)
    const int N = level_;
    auto probe_den = [&](long long q) {
        int taken = 0;
        for (long long a = 1; a < q && taken < 24; ++a) {
            if (std::gcd(a, q) != 1) continue;
            samples.emplace_back(std::log(2.0 + static_cast<double>(q)),
                                 std::abs(psi_endpoint(a, q)));
            ++taken;
        }
        if (q == 1) samples.emplace_back(std::log(3.0), std::abs(psi_endpoint(0, 1)));
    };
    for (long long k = 1; k <= 8; ++k) probe_den(k * N);
    if (N > 1) {
        for (long long u = 1; u <= 15; ++u) {
            if (std::gcd(u, static_cast<long long>(N)) == 1) probe_den(u);
        }
    }
    if (samples.size() < 3) throw EnvelopeViolationError("envelope fit failed: too few samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [x, y] : samples) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = static_cast<double>(samples.size());
    double denom = n * sxx - sx * sx;
    double slope = denom > 1e-12 ? (n * sxy - sx * sy) / denom : 0.0;
    env_b_ = std::max(0.0, slope);
    double amax = 0.05;
    for (auto& [x, y] : samples) amax = std::max(amax, y - env_b_ * x);
    env_a_ = amax + 0.1;
    if (!std::isfinite(env_a_) || !std::isfinite(env_b_))
        throw EnvelopeViolationError("envelope fit failed: non-finite coefficients");
    env_fitted_ = true;
}

double ModularSymbols::envelope_bound(double q_scale) const {
    if (is_zero()) return 0.0;
    if (!env_fitted_) throw PreconditionError("envelope_bound: envelope not fitted");
    return env_a_ + env_b_ * std::log(2.0 + std::max(0.0, q_scale));
}

bool ModularSymbols::load_cache(const std::string& path) {
    if (is_zero()) return false;
    std::unique_lock lock(*mutex_);
    return cache_.load(path, *nf_);
}

void ModularSymbols::save_cache(const std::string& path) const {
    if (is_zero()) return;
    std::shared_lock lock(*mutex_);
    cache_.save(path, *nf_);
}

} // namespace eistwist
