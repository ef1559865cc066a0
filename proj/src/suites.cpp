#include "eistwist/suites.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace eistwist {

namespace {

constexpr double pi = std::numbers::pi;
using nlohmann::json;

std::string fmt_cplx(cplx z) {
    std::ostringstream os;
    os.precision(6);
    os << "(" << z.real() << (z.imag() < 0 ? "" : "+") << z.imag() << "i)";
    return os.str();
}

GroupElement word_sample(std::mt19937& rng, int N, int maxlen, double c_cap) {
    std::uniform_int_distribution<int> pick(0, 4);
    std::uniform_int_distribution<int> len(1, maxlen);
    for (int attempt = 0; attempt < 400; ++attempt) {
        GroupElement g = GroupElement::identity(N);
        int L = len(rng);
        for (int i = 0; i < L; ++i) {
            switch (pick(rng)) {
                case 0: g = multiply(g, GroupElement::translation(N, 1)); break;
                case 1: g = multiply(g, GroupElement::translation(N, -1)); break;
                case 2: g = multiply(g, GroupElement::lower(N, 1)); break;
                case 3: g = multiply(g, GroupElement::lower(N, -1)); break;
                default: g = multiply(g, GroupElement::fricke_w(N)); break;
            }
        }
        auto rm = g.real_matrix();
        if (std::abs(rm[2]) <= c_cap) return g;
    }
    return GroupElement::identity(N);
}

struct SuiteContext {
    RunConfig cfg;
    std::shared_ptr<ModularSymbols> syms;
    std::unique_ptr<EisensteinEvaluator> ev;
    std::string cache_path;

    explicit SuiteContext(const RunConfig& c) : cfg(c) {
        cfg.validate();
        if (cfg.level == 1) {
            syms = std::make_shared<ModularSymbols>(ModularSymbols::zero(1));
        } else if (cfg.newform_source == "internal-oracle") {
            if (cfg.level != 37)
                throw ConfigError("internal-oracle newform is pinned to level 37");
            syms = std::make_shared<ModularSymbols>(
                std::make_shared<NewformData>(NewformData::canonical_level37(cfg.n_max)));
        } else {
            NewformData nf = NewformData::from_file(cfg.newform_source);
            if (nf.level != cfg.level)
                throw ConfigError("newform file level disagrees with the configured level");
            syms = std::make_shared<ModularSymbols>(std::make_shared<NewformData>(std::move(nf)));
        }
        EvalOptions opt;
        opt.c_ceiling = cfg.c_ceiling;
        opt.quadrature_grid = cfg.quadrature_grid;
        ev = std::make_unique<EisensteinEvaluator>(syms, opt);

        std::error_code ec;
        std::filesystem::create_directories(cfg.cache_dir, ec);
        cache_path = cfg.cache_dir + "/psi_N" + std::to_string(cfg.level) + ".bin";
        if (!syms->is_zero()) syms->load_cache(cache_path); // corrupt/missing: recompute
    }

    void persist() const {
        if (!syms->is_zero()) syms->save_cache(cache_path);
    }
};

std::vector<json> run_parallel(std::vector<std::function<json()>>& tasks, int workers) {
    std::vector<json> results(tasks.size());
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            try {
                results[i] = tasks[i]();
            } catch (const std::exception& e) {
                results[i] = make_failed_check("task", "unknown", e.what());
            }
        }
    };
    int n = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
    std::vector<std::thread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    return results;
}

// wraps a check body so that computation errors become failed records
json guarded(const std::string& identity, const std::string& point,
             const std::function<json()>& body) {
    try {
        return body();
    } catch (const std::exception& e) {
        return make_failed_check(identity, point, e.what());
    }
}

// ---------------------------------------------------------------------------
// suite bodies
// ---------------------------------------------------------------------------

void suite_group(SuiteContext& ctx, SuiteReport& rep) {
    const int N = ctx.cfg.level;
    double tol = ctx.cfg.tolerance_for("group");

    rep.checks.push_back(guarded("group laws: associativity and inverses", "1000 random triples", [&] {
        std::mt19937 rng(2024);
        int bad = 0;
        for (int i = 0; i < 1000; ++i) {
            GroupElement x = word_sample(rng, N, 4, 1e12);
            GroupElement y = word_sample(rng, N, 4, 1e12);
            GroupElement z = word_sample(rng, N, 4, 1e12);
            if (!(multiply(multiply(x, y), z) == multiply(x, multiply(y, z)))) ++bad;
            if (!multiply(x, invert(x)).is_identity()) ++bad;
        }
        return make_check("group laws: associativity and inverses", "1000 random triples",
                          cplx(bad, 0), cplx(0, 0), bad, 0.5);
    }));

    rep.checks.push_back(guarded("cusp certificates", "level " + std::to_string(N), [&] {
        auto cusps = cusp_set(N);
        int bad = 0;
        for (const auto& cd : cusps) {
            if (!cd.certificate_ok()) ++bad;
        }
        return make_check("cusp certificates", "level " + std::to_string(N),
                          cplx(static_cast<double>(cusps.size()), 0), cplx(0, 0), bad, 0.5);
    }));

    rep.checks.push_back(guarded("coset exactness", "level 1, c <= 10", [&] {
        int bad = 0;
        for (long long c = 1; c <= 10; ++c) {
            std::set<long long> brute;
            for (long long d = -10; d <= 10; ++d)
                if (std::gcd(std::abs(d), c) == 1) brute.insert(d);
            std::set<long long> mine;
            for (const auto& r : coset_rows(1, CEntry{false, c, double(c)}, -10, 10))
                mine.insert(static_cast<long long>(r.bottom_d));
            if (mine != brute) ++bad;
        }
        return make_check("coset exactness", "level 1, c <= 10", cplx(0, 0), cplx(0, 0), bad, 0.5);
    }));

    rep.checks.push_back(guarded("double-coset counts", "totient comparison", [&] {
        int bad = 0;
        for (const auto& e : c_lattice(N, std::min(ctx.cfg.c_ceiling, 40.0 * N))) {
            long long q = e.fricke ? e.index : e.index * N;
            double r = static_cast<double>(q);
            long long m = q;
            for (long long p = 2; p * p <= m; ++p) {
                if (m % p) continue;
                while (m % p == 0) m /= p;
                r -= r / static_cast<double>(p);
            }
            if (m > 1) r -= r / static_cast<double>(m);
            if (double_coset_reps(N, e).size() != static_cast<std::size_t>(std::llround(r))) ++bad;
        }
        return make_check("double-coset counts", "totient comparison", cplx(0, 0), cplx(0, 0), bad,
                          0.5);
    }));

    rep.checks.push_back(guarded("coset disjointness", "c <= 5", [&] {
        std::vector<CosetRep> all;
        all.push_back(identity_coset(N));
        for (const auto& e : c_lattice(N, 5.0 * N)) {
            auto rows = coset_rows(N, e, -3, 3);
            all.insert(all.end(), rows.begin(), rows.end());
        }
        int bad = 0;
        for (std::size_t i = 0; i < all.size(); ++i)
            for (std::size_t j = i + 1; j < all.size(); ++j) {
                auto rm = multiply(all[i].element, invert(all[j].element)).real_matrix();
                if (std::abs(rm[2]) < 1e-9) ++bad;
            }
        return make_check("coset disjointness", "c <= 5", cplx(0, 0), cplx(0, 0), bad, 0.5);
    }));
    (void)tol;
}

void suite_psi(SuiteContext& ctx, SuiteReport& rep) {
    const int N = ctx.cfg.level;
    const double tol = ctx.cfg.tolerance_for("psi");
    auto& ms = *ctx.syms;

    if (N == 37 && !ms.is_zero()) {
        rep.checks.push_back(guarded("coefficient integrity", "a_p vs point count, p < 200", [&] {
            const NewformData* nf = ms.newform();
            int bad = 0;
            for (long long p = 2; p < 200; ++p) {
                bool isp = true;
                for (long long d = 2; d * d <= p; ++d)
                    if (p % d == 0) isp = false;
                if (!isp || p == 37) continue;
                if (nf->an[static_cast<std::size_t>(p)] != ap_oracle(p)) ++bad;
            }
            return make_check("coefficient integrity", "a_p vs point count, p < 200", cplx(0, 0),
                              cplx(0, 0), bad, 0.5);
        }));
        rep.checks.push_back(guarded("central L-value", "L_f(1)", [&] {
            cplx l = l_value_at_1(*ms.newform());
            return make_check("central L-value", "L_f(1)", l, cplx(0, 0), std::abs(l), 1e-8);
        }));
    }

    std::vector<std::function<json()>> tasks;
    tasks.push_back([&] {
        return guarded("psi homomorphism", "100 random pairs", [&] {
            std::mt19937 rng(2718);
            double worst = 0.0;
            int done = 0;
            while (done < 100) {
                GroupElement a = word_sample(rng, N, 6, 1e9);
                GroupElement b = word_sample(rng, N, 6, 1e9);
                try {
                    cplx r = ms.psi(multiply(a, b)) - ms.psi(a) - ms.psi(b);
                    worst = std::max(worst, std::abs(r));
                    ++done;
                } catch (const TruncationInsufficientError&) {
                    continue;
                }
            }
            return make_check("psi homomorphism", "100 random pairs", cplx(worst, 0), cplx(0, 0),
                              worst, tol);
        });
    });
    tasks.push_back([&] {
        return guarded("parabolic vanishing", "20 random parabolics", [&] {
            std::mt19937 rng(314);
            std::uniform_int_distribution<int> kd(1, 3);
            double worst = 0.0;
            int done = 0;
            while (done < 20) {
                GroupElement h = word_sample(rng, N, 4, 1e9);
                GroupElement p = multiply(multiply(h, GroupElement::translation(N, kd(rng))), invert(h));
                if (p.is_identity()) continue;
                try {
                    worst = std::max(worst, std::abs(ms.psi(p)));
                    ++done;
                } catch (const TruncationInsufficientError&) {
                    continue;
                }
            }
            return make_check("parabolic vanishing", "20 random parabolics", cplx(worst, 0),
                              cplx(0, 0), worst, tol);
        });
    });
    tasks.push_back([&] {
        return guarded("psi antisymmetry", "40 random elements", [&] {
            std::mt19937 rng(161803);
            double worst = 0.0;
            int done = 0;
            while (done < 40) {
                GroupElement g = word_sample(rng, N, 5, 1e9);
                if (g.is_identity()) continue;
                try {
                    worst = std::max(worst, std::abs(ms.psi(g) + ms.psi(invert(g))));
                    ++done;
                } catch (const TruncationInsufficientError&) {
                    continue;
                }
            }
            return make_check("psi antisymmetry", "40 random elements", cplx(worst, 0), cplx(0, 0),
                              worst, 1e-10);
        });
    });
    tasks.push_back([&] {
        return guarded("base-point independence", "5 endpoints", [&] {
            double worst = 0.0;
            if (!ms.is_zero()) {
                for (auto [p, q] : std::vector<std::pair<long long, long long>>{
                         {3, 2 * N}, {1, N}, {1, 2}, {2, 5}, {4, 3 * N}}) {
                    worst = std::max(worst, std::abs(ms.psi_endpoint(p, q) - ms.psi_endpoint_alt(p, q)));
                }
            }
            return make_check("base-point independence", "5 endpoints", cplx(worst, 0), cplx(0, 0),
                              worst, 1e-10);
        });
    });
    tasks.push_back([&] {
        return guarded("psi at the Fricke element", "W_N", [&] {
            cplx v = ms.psi(GroupElement::fricke_w(N));
            return make_check("psi at the Fricke element", "W_N", v, cplx(0, 0), std::abs(v), 1e-8);
        });
    });
    auto results = run_parallel(tasks, ctx.cfg.workers);
    for (auto& r : results) rep.checks.push_back(std::move(r));
}

void suite_eisenstein(SuiteContext& ctx, SuiteReport& rep) {
    const int N = ctx.cfg.level;
    const double tol = ctx.cfg.tolerance_for("eisenstein");
    auto& ev = *ctx.ev;

    if (N == 1) {
        rep.checks.push_back(guarded("classical control", "E(i,2) vs lattice sum", [&] {
            double lattice = 0.0;
            for (long m = -2000; m <= 2000; ++m)
                for (long n = -2000; n <= 2000; ++n) {
                    if (m == 0 && n == 0) continue;
                    double r2 = double(m) * m + double(n) * n;
                    lattice += 1.0 / (r2 * r2);
                }
            double z4 = 0.0;
            for (long k = 1; k <= 100000; ++k) z4 += std::pow(double(k), -4.0);
            double oracle = lattice / (2.0 * z4);
            cplx got = ev.classical({0.0, 1.0}, {2.0, 0.0}, 1e-6).value;
            double resid = std::abs(got.real() - oracle) / oracle;
            return make_check("classical control", "E(i,2) vs lattice sum", got, cplx(oracle, 0),
                              resid, 1e-6);
        }));
    }

    rep.checks.push_back(guarded("translation invariance", "z vs z+1", [&] {
        cplx z(0.37, 0.81), s(2.5, 0.0);
        cplx a = ev.classical(z, s, 1e-10).value;
        cplx b = ev.classical(z + 1.0, s, 1e-10).value;
        double resid = std::abs(a - b);
        return make_check("translation invariance", "z = 0.37+0.81i", a, b, resid, 1e-11);
    }));

    if (N > 1) {
        std::vector<std::function<json()>> tasks;
        // transformation law at random gamma over the configured s values
        for (double sre : {2.5, 3.0, 3.5}) {
            tasks.push_back([&, sre] {
                return guarded("transformation law", "s = " + std::to_string(sre), [&] {
                    std::mt19937 rng(987 + static_cast<int>(10 * sre));
                    cplx s(sre, 0.0);
                    double worst_ratio = 0.0;
                    int done = 0;
                    while (done < 10) {
                        GroupElement g = word_sample(rng, N, 4, 600.0);
                        if (g.is_identity()) continue;
                        cplx z(-0.231, 0.9);
                        cplx gz = g.mobius(z);
                        if (gz.imag() < 0.04 || std::abs(gz.real()) > 40.0) continue;
                        try {
                            auto l1 = ev.twisted(gz, s, 1e-7);
                            auto l2 = ev.twisted(z, s, 1e-7);
                            auto cl = ev.classical(z, s, 1e-7);
                            cplx psi_inv = ctx.syms->psi(invert(g));
                            double resid = std::abs(l1.value - l2.value - psi_inv * cl.value);
                            double budget = 10.0 * (l1.tail_bound + l2.tail_bound +
                                                    std::abs(psi_inv) * cl.tail_bound) +
                                            1e-12;
                            worst_ratio = std::max(worst_ratio, resid / budget);
                            ++done;
                        } catch (const TruncationInsufficientError&) {
                            continue;
                        }
                    }
                    return make_check("transformation law", "s = " + std::to_string(sre),
                                      cplx(worst_ratio, 0), cplx(0, 0), worst_ratio, 1.0);
                });
            });
        }
        // Fricke invariance of the completed series at five balanced points
        const std::vector<cplx> pts = {{0.08, 0.145}, {-0.11, 0.12}, {0.03, 0.16},
                                       {0.14, 0.09},  {-0.05, 0.155}};
        for (cplx z : pts) {
            tasks.push_back([&, z] {
                return guarded("completed Fricke invariance", fmt_cplx(z), [&] {
                    cplx w(2.5, 0.0);
                    cplx wz = -1.0 / (static_cast<double>(N) * z);
                    cplx a = ev.completed(z, w, 1e-9).value;
                    cplx b = ev.completed(wz, w, 1e-9).value;
                    double scale = std::max({std::abs(a), std::abs(b), 1e-12});
                    double resid = std::abs(a - b) / scale;
                    return make_check("completed Fricke invariance", fmt_cplx(z), a, b, resid, tol);
                });
            });
        }
        auto results = run_parallel(tasks, ctx.cfg.workers);
        for (auto& r : results) rep.checks.push_back(std::move(r));
    } else {
        rep.checks.push_back(guarded("twisted degenerate control", "psi == 0", [&] {
            cplx v = ev.twisted({0.3, 0.9}, {2.5, 0.0}, 1e-10).value;
            return make_check("twisted degenerate control", "psi == 0", v, cplx(0, 0), std::abs(v),
                              1e-15);
        }));
    }
}

void suite_fourier(SuiteContext& ctx, SuiteReport& rep) {
    const double tol = ctx.cfg.tolerance_for("fourier");
    auto& ev = *ctx.ev;
    const bool twisted = ctx.cfg.level > 1;

    std::vector<std::function<json()>> tasks;
    for (long long n : ctx.cfg.fourier_modes) {
        for (double sre : ctx.cfg.fourier_s) {
            tasks.push_back([&, n, sre] {
                std::string pt = "n = " + std::to_string(n) + ", s = " + std::to_string(sre);
                return guarded("two-method fourier", pt, [&] {
                    cplx s(sre, 0.0);
                    auto series = ev.fourier_series(n, s, twisted, 1e-12);
                    double y = 0.5 / std::sqrt(static_cast<double>(std::llabs(n)));
                    auto quad = ev.fourier_quadrature(n, s, y, twisted, 3e-12);
                    double scale = std::max(std::abs(series.value), 1e-300);
                    double resid = std::abs(series.value - quad.value) / scale;
                    return make_check("two-method fourier", pt, series.value, quad.value, resid, tol);
                });
            });
        }
    }
    tasks.push_back([&] {
        return guarded("twisted constant term shape", "y^s coefficient", [&] {
            auto ct = ev.constant_term_quadrature({2.5, 0.0}, 0.8, twisted, false, 1e-9);
            return make_check("twisted constant term shape", "y^s coefficient", ct.coeff_exp_s,
                              cplx(0, 0), std::abs(ct.coeff_exp_s), 1e-7);
        });
    });
    auto results = run_parallel(tasks, ctx.cfg.workers);
    for (auto& r : results) rep.checks.push_back(std::move(r));
}

void suite_scattering(SuiteContext& ctx, SuiteReport& rep) {
    const double tol = ctx.cfg.tolerance_for("scattering");
    auto& ev = *ctx.ev;

    rep.checks.push_back(guarded("closed form vs direct sum", "Re s in [1.5, 3], 20 points", [&] {
        double worst = ev.validate_scattering(1.5, 3.0, 20, 1e-12);
        return make_check("closed form vs direct sum", "Re s in [1.5, 3], 20 points",
                          cplx(worst, 0), cplx(0, 0), worst, tol);
    }));

    rep.checks.push_back(guarded("scattering involution", "phi(s) phi(1-s) = 1", [&] {
        double worst = 0.0;
        for (double sre : {1.6, 2.0, 2.4, 2.8, 3.2}) {
            cplx prod = ev.phi_classical_closed({sre, 0.0}) * ev.phi_classical_closed({1.0 - sre, 0.0});
            worst = std::max(worst, std::abs(prod - 1.0));
        }
        return make_check("scattering involution", "5 points", cplx(worst, 0), cplx(0, 0), worst,
                          tol);
    }));

    rep.checks.push_back(guarded("rational certificate", "frequency matching", [&] {
        const auto& rat = ev.scattering_rational();
        bool ok = rat.verified_frequencies >= 60;
        return make_check("rational certificate",
                          "verified frequencies = " + std::to_string(rat.verified_frequencies),
                          cplx(rat.verified_frequencies, 0), cplx(60, 0), ok ? 0.0 : 1.0, 0.5);
    }));

    rep.checks.push_back(guarded("constant-term identities", "w = w0", [&] {
        cplx w(ctx.cfg.w_re, ctx.cfg.w_im);
        if (w.real() <= 2.0) w = cplx(2.6, 0.0);
        LambdaTransform lt(ev, w, 1e-10);
        auto closed = lt.constant_terms();
        auto quad = lt.constant_terms_quadrature(0.8, 1e-9);
        double resid = std::max(std::abs(quad.b_w - closed.b_w), std::abs(quad.a_w - closed.a_w));
        return make_check("constant-term identities", "b = phi_f/2, a = -phi_f phi(1-w)/2",
                          quad.b_w, closed.b_w, resid, 1e-6);
    }));
}

void suite_lambda(SuiteContext& ctx, SuiteReport& rep) {
    const double tol = ctx.cfg.tolerance_for("lambda");
    auto& ev = *ctx.ev;
    cplx w(ctx.cfg.w_re, ctx.cfg.w_im);
    LambdaTransform lt(ev, w, 1e-10);

    rep.checks.push_back(guarded("oracle equivalence", "direct vs continued, 6 points", [&] {
        double worst = 0.0;
        double base = std::max(4.2, 1.2 + w.real() + 0.5);
        for (cplx s : {cplx(base, 0.0), cplx(base + 0.4, 0.5), cplx(base + 0.9, -0.8),
                       cplx(base + 1.3, 0.0), cplx(base + 0.2, -0.3), cplx(base + 0.7, 1.0)}) {
            LambdaValue d = lt.direct(s);
            LambdaValue c = lt.continued(s);
            double scale = std::max(std::abs(c.total), 1e-300);
            if (ctx.syms->is_zero()) scale = 1.0;
            worst = std::max(worst, std::abs(d.total - c.total) / scale);
        }
        return make_check("oracle equivalence", "direct vs continued, 6 points", cplx(worst, 0),
                          cplx(0, 0), worst, tol);
    }));

    rep.checks.push_back(guarded("s functional equation", "configured grid", [&] {
        FeReport fe = lt.check_fe(ctx.cfg.s_grid, tol);
        double worst = 0.0;
        for (const auto& row : fe.rows) worst = std::max(worst, row.residual);
        return make_check("s functional equation", "configured grid", cplx(worst, 0), cplx(0, 0),
                          worst, tol);
    }));

    rep.checks.push_back(guarded("corrupted-level control", "N replaced by N+1", [&] {
        if (ctx.syms->is_zero()) {
            // the zero instance cannot distinguish levels; record as passing
            // control with zero sensitivity
            return make_check("corrupted-level control", "degenerate zero instance", cplx(0, 0),
                              cplx(0, 0), 0.0, 1.0);
        }
        FeReport bad = lt.check_fe({ctx.cfg.s_grid.front(), ctx.cfg.s_grid.back()}, tol, 1);
        return make_check("corrupted-level control", "N replaced by N+1",
                          cplx(bad.rows.front().residual, 0), cplx(0, 0), bad.pass ? 1.0 : 0.0, 0.5);
    }));

    rep.checks.push_back(guarded("pole residues", "four locations vs circle oracle", [&] {
        double worst = 0.0;
        for (cplx s0 : {w, 1.0 - w, -w, w - 1.0}) {
            worst = std::max(worst, std::abs(lt.residue_at(s0) - lt.residue_circle_oracle(s0)));
        }
        return make_check("pole residues", "four locations vs circle oracle", cplx(worst, 0),
                          cplx(0, 0), worst, 1e-6);
    }));

    rep.checks.push_back(guarded("regular-part holomorphy", "Cauchy-Riemann, 5 points", [&] {
        double worst = 0.0;
        for (cplx s : {cplx(0.8, 0.3), cplx(-1.1, 0.6), cplx(2.2, -0.4), cplx(0.1, 1.2),
                       cplx(3.3, 0.9)}) {
            double h = 1e-4;
            cplx dre = (lt.continued(s + cplx(h, 0)).regular_part -
                        lt.continued(s - cplx(h, 0)).regular_part) /
                       (2.0 * h);
            cplx dim = (lt.continued(s + cplx(0, h)).regular_part -
                        lt.continued(s - cplx(0, h)).regular_part) /
                       (2.0 * h);
            worst = std::max(worst, std::abs(dre - dim / cplx(0.0, 1.0)));
        }
        return make_check("regular-part holomorphy", "Cauchy-Riemann, 5 points", cplx(worst, 0),
                          cplx(0, 0), worst, 1e-6);
    }));
}

} // namespace

SuiteReport run_suite(const std::string& name, const RunConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteContext ctx(cfg);
    SuiteReport rep;
    rep.suite = name;

    if (name == "group") {
        suite_group(ctx, rep);
    } else if (name == "psi") {
        suite_psi(ctx, rep);
    } else if (name == "eisenstein") {
        suite_eisenstein(ctx, rep);
    } else if (name == "fourier") {
        suite_fourier(ctx, rep);
    } else if (name == "scattering") {
        suite_scattering(ctx, rep);
    } else if (name == "lambda") {
        suite_lambda(ctx, rep);
    } else if (name == "all") {
        suite_group(ctx, rep);
        suite_psi(ctx, rep);
        suite_eisenstein(ctx, rep);
        suite_fourier(ctx, rep);
        suite_scattering(ctx, rep);
        suite_lambda(ctx, rep);
    } else {
        throw ConfigError("unknown suite: " + name);
    }
    ctx.persist();
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.cache_hits = ctx.syms->is_zero() ? 0 : ctx.syms->cache().hits;
    rep.cache_misses = ctx.syms->is_zero() ? 0 : ctx.syms->cache().misses;
    return rep;
}

std::vector<std::string> emit_tables(const std::string& kind, const RunConfig& cfg) {
    SuiteContext ctx(cfg);
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.out_dir);
    std::vector<std::string> written;
    const bool twisted = cfg.level > 1;

    if (kind == "fourier") {
        // level 1 converges slowly in the c-direction; its table runs at
        // correspondingly relaxed tolerances
        const double series_tol = twisted ? 1e-12 : 1e-10;
        const double quad_tol = twisted ? 3e-12 : 1e-8;
        std::vector<CsvRow> rows;
        for (long long n : cfg.fourier_modes) {
            for (double sre : cfg.fourier_s) {
                cplx s(sre, 0.0);
                auto series = ctx.ev->fourier_series(n, s, twisted, series_tol);
                CsvRow r1{twisted ? "twisted" : "classical", 0, 0, n, s, series.value,
                          series.method, series.error_estimate};
                rows.push_back(r1);
                double y = (twisted ? 0.5 : 0.8) / std::sqrt(static_cast<double>(std::llabs(n)));
                auto quad = ctx.ev->fourier_quadrature(n, s, y, twisted, quad_tol);
                CsvRow r2{twisted ? "twisted" : "classical", 0, 0, n, s, quad.value, quad.method,
                          quad.error_estimate};
                rows.push_back(r2);
            }
        }
        std::string path = cfg.out_dir + "/fourier.csv";
        write_csv(path, rows);
        written.push_back(path);
    } else if (kind == "scattering") {
        std::vector<CsvRow> rows;
        for (int i = 0; i < 20; ++i) {
            double sre = 1.5 + 1.5 * i / 19.0;
            cplx s(sre, 0.0);
            auto direct = ctx.ev->scattering_direct(s, false, 1e-12);
            rows.push_back(CsvRow{"classical", 0, 0, 0, s, direct.scalar(), "direct-sum",
                                  direct.error_estimate});
            auto closed = ctx.ev->scattering_closed(s);
            rows.push_back(CsvRow{"classical", 0, 0, 0, s, closed.scalar(), "closed-form",
                                  closed.error_estimate});
            if (twisted && sre > 2.0) {
                auto tw = ctx.ev->scattering_direct(s, true, 1e-12);
                rows.push_back(
                    CsvRow{"twisted", 0, 0, 0, s, tw.scalar(), "direct-sum", tw.error_estimate});
            }
        }
        std::string path = cfg.out_dir + "/scattering.csv";
        write_csv(path, rows);
        written.push_back(path);
    } else if (kind == "lambda-grid") {
        cplx w(cfg.w_re, cfg.w_im);
        LambdaTransform lt(*ctx.ev, w, 1e-10);
        FeReport fe = lt.check_fe(cfg.s_grid, cfg.tolerance_for("lambda"));
        std::vector<std::array<double, 3>> triples;
        std::vector<CsvRow> rows;
        for (const auto& row : fe.rows) {
            triples.push_back({row.s.real(), row.s.imag(), row.residual});
            rows.push_back(CsvRow{"lambda-fe", 0, 0, 0, row.s, row.lhs, "continued", row.residual});
        }
        std::string p1 = cfg.out_dir + "/lambda_grid.csv";
        std::string p2 = cfg.out_dir + "/lambda_fe_heatmap.csv";
        write_csv(p1, rows);
        write_triples_csv(p2, triples);
        written.push_back(p1);
        written.push_back(p2);
    } else {
        throw ConfigError("unknown table kind: " + kind);
    }
    ctx.persist();
    return written;
}

nlohmann::json cusp_table(int level) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& cd : cusp_set(level)) {
        nlohmann::json j;
        j["index"] = cd.index;
        j["representative"] =
            cd.is_infinity() ? "infinity"
                             : std::to_string(cd.representative.num) + "/" +
                                   std::to_string(cd.representative.den);
        j["width"] = cd.width;
        j["scaling_base"] = {cd.scaling_base.a, cd.scaling_base.b, cd.scaling_base.c,
                             cd.scaling_base.d};
        j["stabilizer"] = {cd.stabilizer_generator.a, cd.stabilizer_generator.b,
                           cd.stabilizer_generator.c, cd.stabilizer_generator.d};
        j["certificate_ok"] = cd.certificate_ok();
        out.push_back(j);
    }
    return out;
}

} // namespace eistwist
