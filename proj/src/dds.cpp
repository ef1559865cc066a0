#include "eistwist/dds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace eistwist {

namespace {

constexpr double pi = std::numbers::pi;

cplx cpow(double base, cplx e) {
    double lb = std::log(base);
    if (e.imag() == 0.0) return cplx(std::exp(e.real() * lb), 0.0);
    return std::exp(e * lb);
}

} // namespace

LambdaTransform::LambdaTransform(EisensteinEvaluator& ev, cplx w, double sample_tol)
    : ev_(ev), w_(w) {
    if (!(w.real() > 2.0))
        throw ConvergenceRegionError("LambdaTransform requires Re w > 2");

    // scalar constant term of E~ from the scattering entries; for newforms
    // with vanishing central L-value the twisted entry vanishes identically,
    // so these are zero up to series roundoff
    if (ev_.symbols().is_zero()) {
        a_ = b_ = cplx(0.0, 0.0);
        ab_error_ = 0.0;
    } else {
        ScatteringData tw = ev_.scattering_direct(w, true, 1e-12);
        cplx phi_f = tw.scalar();
        cplx phi_c = ev_.phi_classical_closed(1.0 - w);
        b_ = 0.5 * phi_f;
        a_ = -0.5 * phi_f * phi_c;
        ab_error_ = 0.5 * tw.error_estimate * (1.0 + std::abs(phi_c));
    }
    closed_pair_ = ConstantTermPair{a_, b_, w_, ab_error_};

    // shared node set: trapezoid in t with y = y0 + exp((pi/2) sinh t) on
    // (y0, Ycut]; both routes must use identical nodes and cutoffs so that
    // constant-term and evaluation systematics cancel in route differences
    const int N = ev_.level();
    const double y0 = 1.0 / std::sqrt(static_cast<double>(N));
    const double ycut = 5.0; // integrand is below 1e-18 of scale beyond this
    const double h = 1.0 / 16.0;
    const long kmin = -64; // t = -4: y - y0 ~ 2e-19
    const long kmax = static_cast<long>(std::floor(
        std::asinh(std::log(ycut - y0) / (0.5 * pi)) / h));
    const bool zero = ev_.symbols().is_zero();

    for (long k = kmin; k <= kmax; ++k) {
        double t = k * h;
        double u = 0.5 * pi * std::sinh(t);
        double y = y0 + std::exp(u);
        if (y > ycut) continue;
        Node nd;
        nd.y = y;
        nd.weight = 0.5 * pi * std::cosh(t) * std::exp(u) / y; // dy/y measure
        int tz = 0;
        long kk = k;
        while (kk != 0 && (kk & 1) == 0 && tz < levels_) {
            ++tz;
            kk >>= 1;
        }
        nd.level = (k == 0) ? 0 : levels_ - tz;
        if (zero) {
            nd.f = nd.g = cplx(0.0, 0.0);
            nd.tol_f = nd.tol_g = 0.0;
        } else {
            // the g-samples only feed the direct route, whose kernel carries
            // N^{-s} y^{-s-1} with Re s > 1 + Re w; that headroom funds much
            // looser evaluations at the low substituted points
            nd.tol_f = sample_tol;
            nd.tol_g = sample_tol * std::max(1.0, y * y * y) * (N > 1 ? 30.0 : 1.0);
            cplx sub = a_ * cpow(y, w_) + b_ * cpow(y, 1.0 - w_);
            nd.f = ev_.completed(cplx(0.0, y), w_, nd.tol_f).value - sub;
            nd.g = ev_.completed(cplx(0.0, 1.0 / (N * y)), w_, nd.tol_g).value - sub;
        }
        nodes_.push_back(nd);
    }
}

ConstantTermPair LambdaTransform::constant_terms_quadrature(double y, double inner_tol) const {
    auto q = ev_.constant_term_quadrature(w_, y, false, true, inner_tol);
    ConstantTermPair out;
    out.a_w = q.coeff_exp_s;
    out.b_w = q.coeff_exp_one_minus_s;
    out.w = w_;
    out.error_estimate = q.error_estimate;
    return out;
}

cplx LambdaTransform::integrate(cplx s, bool with_mirror_kernel, bool use_g, int level,
                                double* err) const {
    // sum of value * y^{s-1} (+ N^{-s} mirror when requested) over the node
    // subset belonging to the requested refinement level
    const double hstep = (1.0 / 16.0) * std::pow(2.0, levels_ - level);
    cplx nm = cpow(static_cast<double>(ev_.level()), -s);
    cplx acc(0.0, 0.0);
    for (const auto& nd : nodes_) {
        if (nd.level > level) continue;
        cplx val = use_g ? nd.g : nd.f;
        cplx kern = cpow(nd.y, s);
        if (with_mirror_kernel) kern += nm * cpow(nd.y, -s);
        acc += val * kern * nd.weight;
    }
    acc *= hstep;
    if (err) {
        // one-level Richardson gap as the discretization estimate
        cplx coarse(0.0, 0.0);
        for (const auto& nd : nodes_) {
            if (nd.level > level - 1) continue;
            cplx val = use_g ? nd.g : nd.f;
            cplx kern = cpow(nd.y, s);
            if (with_mirror_kernel) kern += nm * cpow(nd.y, -s);
            coarse += val * kern * nd.weight;
        }
        coarse *= 2.0 * hstep;
        *err = std::abs(acc - coarse);
    }
    return acc;
}

std::array<cplx, 4> LambdaTransform::pole_terms_for(cplx s, cplx a, cplx b) const {
    const double rtN = std::sqrt(static_cast<double>(ev_.level()));
    return {a * cpow(rtN, -s - w_) / (s - w_), b * cpow(rtN, w_ - 1.0 - s) / (s + w_ - 1.0),
            -a * cpow(rtN, -s - w_) / (s + w_), -b * cpow(rtN, -s + w_ - 1.0) / (s - w_ + 1.0)};
}

LambdaValue LambdaTransform::assemble(cplx s, bool direct_route, int level) const {
    LambdaValue out;
    out.s = s;
    out.w = w_;
    double e1 = 0.0, e2 = 0.0;
    if (direct_route) {
        cplx upper = integrate(s, false, false, level, &e1);
        cplx lower = cpow(static_cast<double>(ev_.level()), -s) *
                     integrate(-s, false, true, level, &e2);
        out.regular_part = upper + lower;
    } else {
        out.regular_part = integrate(s, true, false, level, &e1);
    }
    out.pole_terms = pole_terms_for(s, a_, b_);
    out.total = out.regular_part;
    for (const auto& t : out.pole_terms) out.total += t;

    // discretization gaps, per-node sample tolerances, and the constant-term
    // systematic (shared between the routes, so it cancels in comparisons)
    double amp = 0.0, node_err = 0.0;
    const double nfac = std::pow(static_cast<double>(ev_.level()), -s.real());
    for (const auto& nd : nodes_) {
        if (nd.level > level) continue;
        double kp = std::pow(nd.y, s.real());
        double km = std::pow(nd.y, -s.real());
        amp += nd.weight * (kp + km) *
               (std::pow(nd.y, w_.real()) + std::pow(nd.y, 1.0 - w_.real()));
        if (direct_route)
            node_err += nd.weight * (nd.tol_f * kp + nd.tol_g * nfac * km);
        else
            node_err += nd.weight * nd.tol_f * (kp + nfac * km);
    }
    double hs = (1.0 / 16.0) * std::pow(2.0, levels_ - level);
    out.quadrature_error = e1 + e2 + (ab_error_ * amp + node_err) * hs;
    return out;
}

LambdaValue LambdaTransform::direct(cplx s) const {
    double need = std::max(1.0 + w_.real(), 2.0 - w_.real());
    if (!(s.real() > need))
        throw ConvergenceRegionError("lambda_direct: Re s outside the defining region");
    return assemble(s, true, levels_);
}

LambdaValue LambdaTransform::continued(cplx s) const {
    for (cplx p : {w_, 1.0 - w_, -w_, w_ - 1.0}) {
        if (std::abs(s - p) < 1e-8)
            throw PoleHitError("lambda_continued: s within the pole guard radius");
    }
    return assemble(s, false, levels_);
}

cplx LambdaTransform::residue_at(cplx s0) const {
    const double rtN = std::sqrt(static_cast<double>(ev_.level()));
    if (std::abs(s0 - w_) < 1e-6) return a_ * cpow(rtN, -2.0 * w_);
    if (std::abs(s0 - (1.0 - w_)) < 1e-6) return b_ * cpow(rtN, 2.0 * w_ - 2.0);
    if (std::abs(s0 + w_) < 1e-6) return -a_;
    if (std::abs(s0 - (w_ - 1.0)) < 1e-6) return -b_;
    throw DomainError("residue_at: s0 is not one of the four pole locations");
}

cplx LambdaTransform::residue_circle_oracle(cplx s0, double radius, int points) const {
    cplx acc(0.0, 0.0);
    for (int j = 0; j < points; ++j) {
        cplx ds = std::polar(radius, 2.0 * pi * j / points);
        acc += ds * continued(s0 + ds).total;
    }
    return acc / static_cast<double>(points);
}

cplx LambdaTransform::fe_w_residual(cplx phi_w, cplx lambda_s_one_minus_w, cplx lambda_s_w) {
    return phi_w * lambda_s_one_minus_w - lambda_s_w;
}

FeReport LambdaTransform::check_fe(const std::vector<cplx>& s_grid, double tol,
                                   int corrupt_level) const {
    FeReport rep;
    const double pref_base = static_cast<double>(ev_.level() + corrupt_level);
    for (cplx s : s_grid) {
        FeCheckRow row;
        row.s = s;
        row.w = w_;
        row.tolerance = tol;
        // two quadrature levels keep the sides numerically independent
        row.lhs = cpow(pref_base, s) * assemble(s, false, levels_).total;
        row.rhs = assemble(-s, false, levels_ - 1).total;
        // residuals are relative to the value scale: the series values are
        // small, and the corrupted-level control must be able to fail
        double scale = std::max(std::abs(row.lhs), std::abs(row.rhs));
        row.residual = scale > 1e-30 ? std::abs(row.lhs - row.rhs) / scale
                                     : std::abs(row.lhs - row.rhs);
        row.pass = row.residual < tol;
        rep.rows.push_back(row);
        rep.pass = rep.pass && row.pass;
    }
    return rep;
}

} // namespace eistwist
