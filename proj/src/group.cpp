#include "eistwist/group.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace eistwist {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw PreconditionError(msg);
}

bool squarefree(int n) {
    if (n < 1) return false;
    for (int p = 2; static_cast<long long>(p) * p <= n; ++p) {
        if (n % (p * p) == 0) return false;
    }
    return true;
}

// W_N g W_N^{-1} for g in Gamma_0(N); stays in Gamma_0(N)
Mat2 fricke_conj(const Mat2& g, int N) {
    return Mat2{g.d, -g.c / N, -g.b * N, g.a};
}

} // namespace

long long mod_inverse(long long x, long long m) {
    require(m >= 1, "mod_inverse: modulus must be positive");
    if (m == 1) return 0;
    long long a = ((x % m) + m) % m;
    long long t = 0, newt = 1, r = m, newr = a;
    while (newr != 0) {
        long long q = r / newr;
        std::swap(t -= q * newt, newt);
        std::swap(r -= q * newr, newr);
    }
    require(r == 1, "mod_inverse: arguments not coprime");
    return ((t % m) + m) % m;
}

Rational make_rational(long long num, long long den) {
    if (den == 0) return Rational{1, 0};
    long long g = std::gcd(std::abs(num), std::abs(den));
    num /= g;
    den /= g;
    if (den < 0) {
        num = -num;
        den = -den;
    }
    return Rational{num, den};
}

Mat2 mat_mul(const Mat2& x, const Mat2& y) {
    return Mat2{x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
                x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

Mat2 mat_inv_unimodular(const Mat2& m) {
    require(m.det() == 1, "mat_inv_unimodular: determinant must be 1");
    return Mat2{m.d, -m.b, -m.c, m.a};
}

// ---------------------------------------------------------------------------
// GroupElement
// ---------------------------------------------------------------------------

GroupElement::GroupElement(Mat2 m, int level, bool fricke)
    : mat_(m), level_(level), fricke_(fricke) {
    require(level >= 1, "GroupElement: level must be positive");
    require(m.det() == 1, "GroupElement: determinant must be 1");
    require(m.c % level == 0, "GroupElement: lower-left entry must be divisible by N");
    canonicalize();
}

void GroupElement::canonicalize() {
    if (level_ == 1 && fricke_) {
        // W_1 = S lies in PSL_2(Z); fold it into the integer part
        mat_ = mat_mul(mat_, Mat2{0, -1, 1, 0});
        fricke_ = false;
    }
    // projective sign: make the encoded real bottom row positive
    bool flip;
    if (!fricke_) {
        flip = (mat_.c < 0) || (mat_.c == 0 && mat_.d < 0);
    } else {
        // real bottom row is sqrt(N) (d, -c/N)
        flip = (mat_.d < 0) || (mat_.d == 0 && -mat_.c < 0);
    }
    if (flip) mat_ = Mat2{-mat_.a, -mat_.b, -mat_.c, -mat_.d};
}

GroupElement GroupElement::identity(int level) { return GroupElement(Mat2{}, level, false); }

GroupElement GroupElement::translation(int level, long long m) {
    return GroupElement(Mat2{1, m, 0, 1}, level, false);
}

GroupElement GroupElement::lower(int level, long long m) {
    return GroupElement(Mat2{1, 0, m * level, 1}, level, false);
}

GroupElement GroupElement::fricke_w(int level) { return GroupElement(Mat2{}, level, true); }

bool GroupElement::is_identity() const {
    return !fricke_ && mat_ == Mat2{1, 0, 0, 1};
}

GroupElement GroupElement::inverse() const {
    if (!fricke_) return GroupElement(mat_inv_unimodular(mat_), level_, false);
    // (g W)^{-1} = W^{-1} g^{-1} = conj(g^{-1}) W projectively
    return GroupElement(fricke_conj(mat_inv_unimodular(mat_), level_), level_, true);
}

std::array<double, 4> GroupElement::real_matrix() const {
    if (!fricke_) {
        return {static_cast<double>(mat_.a), static_cast<double>(mat_.b),
                static_cast<double>(mat_.c), static_cast<double>(mat_.d)};
    }
    double rt = std::sqrt(static_cast<double>(level_));
    return {mat_.b * rt, -mat_.a / rt, mat_.d * rt, -mat_.c / rt};
}

cplx GroupElement::mobius(cplx z) const {
    auto m = real_matrix();
    return (m[0] * z + m[1]) / (m[2] * z + m[3]);
}

Rational GroupElement::image_of_infinity() const {
    if (!fricke_) return make_rational(mat_.a, mat_.c);
    return make_rational(mat_.b, mat_.d);
}

std::uint64_t GroupElement::hash_key() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    mix(static_cast<std::uint64_t>(mat_.a));
    mix(static_cast<std::uint64_t>(mat_.b));
    mix(static_cast<std::uint64_t>(mat_.c));
    mix(static_cast<std::uint64_t>(mat_.d));
    mix(static_cast<std::uint64_t>(level_));
    mix(fricke_ ? 2u : 1u);
    return h;
}

GroupElement multiply(const GroupElement& x, const GroupElement& y) {
    require(x.level() == y.level(), "multiply: level mismatch");
    const int N = x.level();
    if (!x.fricke()) {
        return GroupElement(mat_mul(x.mat(), y.mat()), N, y.fricke());
    }
    // x = g1 W: g1 W g2 (W) = g1 conj(g2) W (W); W^2 = -I is projectively trivial
    Mat2 m = mat_mul(x.mat(), fricke_conj(y.mat(), N));
    return GroupElement(m, N, !y.fricke());
}

GroupElement invert(const GroupElement& x) { return x.inverse(); }

bool is_parabolic(const GroupElement& x) {
    if (x.is_identity()) throw IdentityInputError("is_parabolic: identity input");
    if (!x.fricke()) return std::abs(x.mat().a + x.mat().d) == 2;
    // real trace is (bN - c)/sqrt(N); |trace| = 2 iff (bN - c)^2 = 4N
    __int128 t = static_cast<__int128>(x.mat().b) * x.level() - x.mat().c;
    return t * t == static_cast<__int128>(4) * x.level();
}

// ---------------------------------------------------------------------------
// Cusps
// ---------------------------------------------------------------------------

namespace {

// P^1(Z/N) point (c : d), canonicalized over unit scaling
struct P1Point {
    long long c, d;
    bool operator<(const P1Point& o) const { return c != o.c ? c < o.c : d < o.d; }
    bool operator==(const P1Point& o) const { return c == o.c && d == o.d; }
};

P1Point p1_canonical(long long c, long long d, int N) {
    c = ((c % N) + N) % N;
    d = ((d % N) + N) % N;
    P1Point best{N, N};
    for (long long u = 1; u < N; ++u) {
        if (std::gcd(u, static_cast<long long>(N)) != 1) continue;
        P1Point p{(c * u) % N, (d * u) % N};
        if (p < best) best = p;
    }
    return best;
}

// SL_2(Z) matrix with first column (p, q)
Mat2 column_to_sl2(long long p, long long q) {
    if (q == 0) return Mat2{p > 0 ? 1 : -1, 0, 0, p > 0 ? 1 : -1}; // infinity
    // solve p d - b q = 1
    long long g = std::gcd(std::abs(p), std::abs(q));
    require(g == 1, "column_to_sl2: column must be primitive");
    long long d = 0, b = 0;
    // extended gcd on (p, q)
    long long old_r = p, r = q, old_s = 1, s = 0, old_t = 0, t = 1;
    while (r != 0) {
        long long quot = old_r / r;
        std::swap(old_r -= quot * r, r);
        std::swap(old_s -= quot * s, s);
        std::swap(old_t -= quot * t, t);
    }
    // old_r = +-1 = old_s p + old_t q
    d = old_s * old_r;
    b = -old_t * old_r;
    Mat2 m{p, b, q, d};
    require(m.det() == 1, "column_to_sl2: construction failed");
    return m;
}

// Gamma_0(N)-cusp class of a rational, as the T-orbit id of its bottom row in
// P^1(Z/N)
P1Point cusp_class_point(const Rational& r, int N, const std::map<P1Point, int>& orbit_of,
                         const std::vector<P1Point>& orbit_min) {
    Mat2 g = r.is_infinity() ? Mat2{} : column_to_sl2(r.num, r.den);
    P1Point p = p1_canonical(g.c, g.d, N);
    auto it = orbit_of.find(p);
    require(it != orbit_of.end(), "cusp_class_point: point not classified");
    return orbit_min[static_cast<std::size_t>(it->second)];
}

Rational fricke_image(const Rational& r, int N) {
    if (r.is_infinity()) return make_rational(0, 1); // W(infinity) = 0
    if (r.num == 0) return Rational{1, 0};           // W(0) = infinity
    return make_rational(-r.den, N * r.num);
}

long long cusp_width(long long q, int N) {
    // minimal h with N | q^2 h
    long long g = std::gcd(q * q, static_cast<long long>(N));
    return N / g;
}

} // namespace

std::array<double, 4> CuspData::sigma() const {
    double rh = std::sqrt(static_cast<double>(width));
    return {scaling_base.a * rh, scaling_base.b / rh, scaling_base.c * rh, scaling_base.d / rh};
}

bool CuspData::certificate_ok() const {
    const Mat2& s = stabilizer_generator;
    if (s.det() != 1) return false;
    if (s.c % level != 0) return false;
    if (std::abs(s.a + s.d) != 2) return false;
    // base^{-1} s base == +-T^{+-width}, so sigma^{-1} s sigma == +-T^{+-1}
    Mat2 conj = mat_mul(mat_mul(mat_inv_unimodular(scaling_base), s), scaling_base);
    Mat2 pos{1, width, 0, 1}, neg{1, -width, 0, 1};
    Mat2 mpos{-1, -width, 0, -1}, mneg{-1, width, 0, -1};
    if (!(conj == pos || conj == neg || conj == mpos || conj == mneg)) return false;
    // minimality of the width
    for (long long h = 1; h < width; ++h) {
        if (width % h != 0) continue;
        Mat2 cand = mat_mul(mat_mul(scaling_base, Mat2{1, h, 0, 1}), mat_inv_unimodular(scaling_base));
        if (cand.c % level == 0) return false;
    }
    return true;
}

std::vector<CuspData> cusp_set(int N) {
    if (!squarefree(N)) throw UnsupportedLevelError("cusp_set: level must be squarefree");

    std::vector<CuspData> out;
    if (N == 1) {
        CuspData inf{0, 1, Rational{1, 0}, 1, Mat2{}, Mat2{1, 1, 0, 1}};
        require(inf.certificate_ok(), "cusp_set: infinity certificate failed");
        out.push_back(inf);
        return out;
    }

    // T-orbits on P^1(Z/N) classify Gamma_0(N)-cusps
    std::set<P1Point> points;
    for (long long c = 0; c < N; ++c) {
        for (long long d = 0; d < N; ++d) {
            if (std::gcd(std::gcd(c, d), static_cast<long long>(N)) != 1) continue;
            points.insert(p1_canonical(c, d, N));
        }
    }
    std::map<P1Point, int> orbit_of;
    std::vector<P1Point> orbit_min;
    for (const auto& p : points) {
        if (orbit_of.count(p)) continue;
        int id = static_cast<int>(orbit_min.size());
        P1Point mn = p;
        P1Point cur = p;
        while (true) {
            orbit_of[cur] = id;
            P1Point nxt = p1_canonical(cur.c, cur.c + cur.d, N); // right action of T
            if (nxt == p) break;
            if (nxt < mn) mn = nxt;
            cur = nxt;
        }
        orbit_min.push_back(mn);
    }

    // deterministic Gamma_0(N)-class representatives: infinity, then p/q by
    // increasing q then p (denominators up to N reach every class)
    std::map<P1Point, Rational> rep_of_class;
    rep_of_class[cusp_class_point(Rational{1, 0}, N, orbit_of, orbit_min)] = Rational{1, 0};
    for (long long q = 1; q <= N && rep_of_class.size() < orbit_min.size(); ++q) {
        for (long long p = 0; p < std::max<long long>(q, 1); ++p) {
            if (std::gcd(p, q) != 1) continue;
            Rational r = make_rational(p, q);
            P1Point key = cusp_class_point(r, N, orbit_of, orbit_min);
            if (!rep_of_class.count(key)) rep_of_class[key] = r;
        }
    }
    require(rep_of_class.size() == orbit_min.size(), "cusp_set: class representatives incomplete");

    // glue Gamma_0(N)-classes under the Fricke involution
    std::map<P1Point, P1Point> glued_to;
    for (const auto& [key, r] : rep_of_class) {
        glued_to[key] = cusp_class_point(fricke_image(r, N), N, orbit_of, orbit_min);
    }

    std::set<P1Point> done;
    std::vector<Rational> reps;
    // infinity's Gamma*-class first
    P1Point inf_key = cusp_class_point(Rational{1, 0}, N, orbit_of, orbit_min);
    auto emit = [&](P1Point key) {
        if (done.count(key)) return;
        P1Point partner = glued_to[key];
        done.insert(key);
        done.insert(partner);
        Rational r1 = rep_of_class[key], r2 = rep_of_class[partner];
        // prefer infinity, else the smaller-height representative
        Rational pick = r1;
        if (r2.is_infinity() || (!r1.is_infinity() &&
                                 (r2.den < r1.den || (r2.den == r1.den && r2.num < r1.num))))
            pick = r2;
        if (r1.is_infinity()) pick = r1;
        reps.push_back(pick);
    };
    emit(inf_key);
    for (const auto& [key, r] : rep_of_class) emit(key);

    for (std::size_t i = 0; i < reps.size(); ++i) {
        const Rational& r = reps[i];
        CuspData cd;
        cd.index = static_cast<int>(i);
        cd.level = N;
        cd.representative = r;
        if (r.is_infinity()) {
            cd.width = 1;
            cd.scaling_base = Mat2{};
            cd.stabilizer_generator = Mat2{1, 1, 0, 1};
        } else {
            cd.width = cusp_width(r.den, N);
            cd.scaling_base = column_to_sl2(r.num, r.den);
            cd.stabilizer_generator = mat_mul(mat_mul(cd.scaling_base, Mat2{1, cd.width, 0, 1}),
                                              mat_inv_unimodular(cd.scaling_base));
        }
        require(cd.certificate_ok(), "cusp_set: stabilizer certificate failed");
        out.push_back(cd);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Enumeration at the infinity cusp
// ---------------------------------------------------------------------------

std::vector<CEntry> c_lattice(int N, double c_max) {
    require(c_max > 0, "c_lattice: c_max must be positive");
    std::vector<CEntry> out;
    for (long long k = 1; static_cast<double>(k) * N <= c_max; ++k) {
        out.push_back(CEntry{false, k, static_cast<double>(k) * N});
    }
    if (N > 1) {
        double rt = std::sqrt(static_cast<double>(N));
        for (long long u = 1; static_cast<double>(u) * rt <= c_max; ++u) {
            if (std::gcd(u, static_cast<long long>(N)) != 1) continue;
            out.push_back(CEntry{true, u, static_cast<double>(u) * rt});
        }
    }
    std::sort(out.begin(), out.end(), [](const CEntry& x, const CEntry& y) { return x.value < y.value; });
    return out;
}

std::optional<CEntry> match_c(int N, double c, double tol) {
    if (c <= 0) return std::nullopt;
    long long k = std::llround(c / N);
    if (k >= 1 && std::abs(c - static_cast<double>(k) * N) < tol)
        return CEntry{false, k, static_cast<double>(k) * N};
    if (N > 1) {
        double rt = std::sqrt(static_cast<double>(N));
        long long u = std::llround(c / rt);
        if (u >= 1 && std::abs(c - u * rt) < tol && std::gcd(u, static_cast<long long>(N)) == 1)
            return CEntry{true, u, u * rt};
    }
    return std::nullopt;
}

CosetRep identity_coset(int N) {
    CosetRep r{GroupElement::identity(N), 0.0, 1.0, 0, 1};
    return r;
}

std::vector<CosetRep> coset_rows(int N, const CEntry& e, long long dlo, long long dhi) {
    std::vector<CosetRep> out;
    if (!e.fricke) {
        const long long c = e.index * N;
        for (long long d = dlo; d <= dhi; ++d) {
            if (std::gcd(std::abs(d), c) != 1) continue;
            long long a = mod_inverse(d, c);
            long long b = (a * d - 1) / c;
            CosetRep r{GroupElement(Mat2{a, b, c, d}, N, false), static_cast<double>(c),
                       static_cast<double>(d), c, a % c};
            out.push_back(std::move(r));
        }
    } else {
        const long long u = e.index;
        const double rt = std::sqrt(static_cast<double>(N));
        for (long long v = dlo; v <= dhi; ++v) {
            if (std::gcd(std::abs(v), u) != 1) continue;
            long long b = mod_inverse((v % u) * (N % u), u); // b N v = 1 mod u
            long long a = (1 - b * N * v) / u;
            CosetRep r{GroupElement(Mat2{a, b, -N * v, u}, N, true), u * rt, v * rt, u,
                       ((b % u) + u) % u};
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::vector<DoubleCosetRep> double_coset_reps(int N, const CEntry& e) {
    std::vector<DoubleCosetRep> out;
    if (!e.fricke) {
        const long long c = e.index * N;
        for (long long d = 0; d < c; ++d) {
            if (std::gcd(d, c) != 1) continue;
            long long a = mod_inverse(d, c);
            long long b = (a * d - 1) / c;
            out.push_back(DoubleCosetRep{GroupElement(Mat2{a, b, c, d}, N, false), c, a, d});
        }
    } else {
        const long long u = e.index;
        if (u == 1) {
            out.push_back(DoubleCosetRep{GroupElement::fricke_w(N), 1, 0, 0});
            return out;
        }
        for (long long b = 0; b < u; ++b) {
            if (std::gcd(b, u) != 1) continue;
            long long v = mod_inverse((b % u) * (N % u), u); // b N v = 1 mod u
            long long a = (1 - b * N * v) / u;
            out.push_back(
                DoubleCosetRep{GroupElement(Mat2{a, b, -N * v, u}, N, true), u, b, v});
        }
    }
    return out;
}

std::vector<DoubleCosetRep> double_coset_reps(int N, const CuspData& a, const CuspData& b, double c) {
    if (!a.is_infinity() || !b.is_infinity())
        throw UnsupportedCuspError("double_coset_reps: only the infinity cusp is enumerable");
    require(a.level == N && b.level == N, "double_coset_reps: level mismatch");
    auto e = match_c(N, c);
    if (!e) return {}; // c not realizable: empty class, not a failure
    return double_coset_reps(N, *e);
}

} // namespace eistwist
