#include "traplab/scattering.hpp"

#include <algorithm>
#include <cmath>

namespace traplab {

namespace {

// RK4 on u'' = c(r) u (+ optional u'/r drift for the d = 2 radial form),
// integrating piecewise between potential breakpoints with graded steps
// near the start. The equation is linear, so scale is normalized afterwards.
struct OdeProfile {
    std::vector<double> r, u, du;
};

template <typename Rhs>
void rk4_span(OdeProfile& p, double r0, double r1, double& u, double& du, Rhs rhs, double h0,
              bool store, OdeProfile* out) {
    double r = r0;
    // graded start: tiny steps growing geometrically until h0 is reached
    double h = std::min(h0, std::max(1e-8, 1e-4 * h0));
    while (r < r1 - 1e-15) {
        h = std::min(h * 1.05, h0);
        double step = std::min(h, r1 - r);
        auto f = [&](double rr, double uu, double dd, double& ku, double& kd) {
            ku = dd;
            kd = rhs(rr, uu, dd);
        };
        double k1u, k1d, k2u, k2d, k3u, k3d, k4u, k4d;
        f(r, u, du, k1u, k1d);
        f(r + 0.5 * step, u + 0.5 * step * k1u, du + 0.5 * step * k1d, k2u, k2d);
        f(r + 0.5 * step, u + 0.5 * step * k2u, du + 0.5 * step * k2d, k3u, k3d);
        f(r + step, u + step * k3u, du + step * k3d, k4u, k4d);
        u += step / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
        du += step / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
        r += step;
        if (store && out) {
            out->r.push_back(r);
            out->u.push_back(u);
            out->du.push_back(du);
        }
    }
}

std::vector<double> integration_cuts(const PairPotential& v, double lo, double hi) {
    std::vector<double> cuts = {lo, hi};
    for (double b : v.breakpoints())
        if (b > lo && b < hi) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    return cuts;
}

// Integrate the d = 3 scattering equation out to R_max; returns the profile,
// normalized so u'(R_max) = 1.
OdeProfile solve_d3(const PairPotential& v, double R_max, int steps_per_unit) {
    double a = v.hard_core_radius();
    OdeProfile prof;
    double u, du, start;
    if (a > 0.0) {
        start = a;
        u = 0.0;
        du = 1.0;
        prof.r.push_back(a);
        prof.u.push_back(0.0);
        prof.du.push_back(1.0);
    } else {
        start = 1e-9;
        u = start;  // free solution u = r near the origin
        du = 1.0;
        prof.r.push_back(start);
        prof.u.push_back(u);
        prof.du.push_back(du);
    }
    auto rhs = [&](double r, double uu, double) { return 0.5 * v(r) * uu; };
    auto cuts = integration_cuts(v, start, R_max);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double span = cuts[i + 1] - cuts[i];
        double h0 = std::min(span / 64.0, 1.0 / steps_per_unit);
        rk4_span(prof, cuts[i], cuts[i + 1], u, du, rhs, h0, true, &prof);
    }
    if (!(du > 0.0)) throw solver_error("alpha_d3: u'(R_max) <= 0; potential too attractive?");
    double norm = du;
    for (auto& x : prof.u) x /= norm;
    for (auto& x : prof.du) x /= norm;
    return prof;
}

double extract_alpha_d3(const OdeProfile& prof, double R_max, double ladder_tol, double* spread) {
    // alpha(r) = r - u/u' sampled on a radius ladder near the horizon
    std::vector<double> alphas;
    for (double frac : {0.60, 0.70, 0.80, 0.90, 1.00}) {
        double target = frac * R_max;
        std::size_t j = static_cast<std::size_t>(
            std::lower_bound(prof.r.begin(), prof.r.end(), target) - prof.r.begin());
        if (j >= prof.r.size()) j = prof.r.size() - 1;
        alphas.push_back(prof.r[j] - prof.u[j] / prof.du[j]);
    }
    double lo = *std::min_element(alphas.begin(), alphas.end());
    double hi = *std::max_element(alphas.begin(), alphas.end());
    *spread = hi - lo;
    if (*spread > ladder_tol * std::max(1.0, std::abs(alphas.back())))
        throw solver_error("alpha_d3: extraction ladder spread exceeds tolerance (not converged)");
    return alphas.back();
}

ScatteringSolution alpha_d3_capped(const PairPotential& v, const ScatteringOptions& opts) {
    // Tail must decay: ∫_{a+1}^inf v r^2 dr < inf, checked numerically.
    {
        double lo = v.hard_core_radius() + 1.0;
        double prev = -1.0, shell_lo = lo;
        for (int k = 0; k < 60; ++k) {
            double p = integrate_radial(v, 3, shell_lo, 2.0 * shell_lo);
            if (k > 4 && prev > 0.0 && p / prev >= 0.999)
                throw domain_error("alpha_d3: tail integral of v diverges (infinite alpha)");
            if (p < 1e-14) break;
            prev = p;
            shell_lo *= 2.0;
        }
    }
    double R_max = opts.R_max;
    if (R_max <= 0.0) R_max = 10.0 * (v.hard_core_radius() + std::max(v.range_hint(), 0.1));

    ScatteringSolution sol;
    double alpha_prev = kInf;
    for (int doubling = 0; doubling < 12; ++doubling) {
        OdeProfile prof = solve_d3(v, R_max, 4000);
        double spread = 0.0;
        double alpha = extract_alpha_d3(prof, R_max, opts.ladder_tol, &spread);
        if (std::abs(alpha - alpha_prev) <= opts.stable_tol * std::max(1.0, std::abs(alpha)) ||
            opts.R_max > 0.0) {
            sol.alpha = alpha;
            sol.R_max = R_max;
            sol.residual = spread;
            sol.r_samples = std::move(prof.r);
            sol.u_samples = std::move(prof.u);
            return sol;
        }
        alpha_prev = alpha;
        R_max *= 2.0;
    }
    throw solver_error("alpha_d3: horizon doubling did not stabilize alpha");
}

}  // namespace

ScatteringSolution alpha_d3(const PairPotential& v, const ScatteringOptions& opts) {
    if (v.is_zero()) {
        ScatteringSolution sol;
        sol.alpha = 0.0;
        sol.R_max = opts.R_max > 0.0 ? opts.R_max : 1.0;
        sol.r_samples = {0.0, sol.R_max};
        sol.u_samples = {0.0, sol.R_max};
        return sol;
    }
    if (v.hard_core_radius() > 0.0) {
        // Capped M-ladder with linear extrapolation in 1/sqrt(M): for the
        // plateau of height M the exact value is a - tanh(sqrt(M/2) a)/sqrt(M/2),
        // so alpha(M) = a - sqrt(2/M) + O(exp(-sqrt(2M) a)).
        ScatteringSolution sol;
        std::vector<double> x, al;
        for (double M : {1e2, 1e3, 1e4}) {
            ScatteringSolution s = alpha_d3_capped(v.capped(M), opts);
            sol.ladder.emplace_back(M, s.alpha);
            x.push_back(1.0 / std::sqrt(M));
            al.push_back(s.alpha);
            sol.r_samples = std::move(s.r_samples);
            sol.u_samples = std::move(s.u_samples);
            sol.R_max = s.R_max;
            sol.residual = std::max(sol.residual, s.residual);
        }
        std::size_t k = x.size();
        double slope = (al[k - 1] - al[k - 2]) / (x[k - 1] - x[k - 2]);
        sol.alpha = al[k - 1] - slope * x[k - 1];
        return sol;
    }
    return alpha_d3_capped(v, opts);
}

ScatteringSolution alpha_d2(const PairPotential& v, double R_star, double R) {
    if (v.is_zero())
        throw domain_error("alpha_d2: free equation is degenerate (no logarithmic regime)");

    // Non-compact support: truncate at {2, 4, 8} x scale and Richardson-
    // extrapolate log alpha over the geometric truncation ladder.
    bool compact =
        (v.kind() == PairKind::square_well || v.kind() == PairKind::capped_hard_core ||
         v.truncation() < kInf);
    if (!compact) {
        double base = std::max(v.range_hint() / 8.0, 0.125);
        std::vector<double> logs;
        ScatteringSolution last;
        for (double f : {2.0, 4.0, 8.0}) {
            double Rs = f * base;
            last = alpha_d2(v.truncated(Rs), Rs, (R > 0.0 ? R : 4.0 * Rs));
            logs.push_back(std::log(last.alpha));
        }
        double d1 = logs[1] - logs[0], d2 = logs[2] - logs[1];
        double la = logs[2];
        if (std::abs(d2) > 1e-14 && std::abs(d2) < std::abs(d1) && std::abs(d1 - d2) > 1e-300)
            la = logs[2] + d2 * d2 / (d1 - d2);
        last.alpha = std::exp(la);
        return last;
    }

    double a = v.hard_core_radius();
    if (R_star <= 0.0) R_star = std::max(v.range_hint(), a);
    if (R <= 0.0) R = 4.0 * R_star;
    if (!(R > R_star)) throw domain_error("alpha_d2: need R > R_star");

    // Regular solution of u'' + u'/r = v u / 2 from the origin (or the core
    // edge); hard cores are handled by the capped M-ladder like in d = 3.
    if (a > 0.0) {
        ScatteringSolution sol;
        std::vector<double> x, la;
        for (double M : {1e2, 1e3, 1e4}) {
            ScatteringSolution s = alpha_d2(v.capped(M), R_star, R);
            sol.ladder.emplace_back(M, s.alpha);
            x.push_back(1.0 / std::sqrt(M));
            la.push_back(std::log(s.alpha));
            sol.r_samples = std::move(s.r_samples);
            sol.u_samples = std::move(s.u_samples);
            sol.R_max = s.R_max;
            sol.residual = std::max(sol.residual, s.residual);
        }
        double slope = (la[2] - la[1]) / (x[2] - x[1]);
        sol.alpha = std::exp(la[2] - slope * x[2]);
        return sol;
    }

    OdeProfile prof;
    double r0 = 1e-7 * R_star;
    double u = 1.0;
    double du = 0.25 * r0 * v(r0);  // from (r u')' = r v u / 2 near 0
    if (!std::isfinite(du)) du = 0.0;
    prof.r.push_back(r0);
    prof.u.push_back(u);
    prof.du.push_back(du);
    auto rhs = [&](double r, double uu, double dd) { return 0.5 * v(r) * uu - dd / r; };
    auto cuts = integration_cuts(v, r0, R);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double span = cuts[i + 1] - cuts[i];
        double h0 = std::min(span / 64.0, 2.5e-4 * R);
        rk4_span(prof, cuts[i], cuts[i + 1], u, du, rhs, h0, true, &prof);
    }
    double uR = u;
    if (!(std::abs(uR) > 0.0)) throw solver_error("alpha_d2: u(R) = 0");
    for (auto& x : prof.u) x /= uR;
    for (auto& x : prof.du) x /= uR;

    // log alpha = (log r - u log R) / (1 - u), r-independent in the log regime
    std::vector<double> la;
    for (double frac : {0.30, 0.45, 0.60, 0.80}) {
        double target = R_star + frac * (R - R_star);
        std::size_t j = static_cast<std::size_t>(
            std::lower_bound(prof.r.begin(), prof.r.end(), target) - prof.r.begin());
        if (j >= prof.r.size()) j = prof.r.size() - 1;
        double ur = prof.u[j];
        if (std::abs(1.0 - ur) < 1e-12)
            throw domain_error("alpha_d2: degenerate profile (u == 1); no logarithmic regime");
        la.push_back((std::log(prof.r[j]) - ur * std::log(R)) / (1.0 - ur));
    }
    double lo = *std::min_element(la.begin(), la.end());
    double hi = *std::max_element(la.begin(), la.end());
    if (hi - lo > 1e-6 * std::max(1.0, std::abs(la.back())))
        throw solver_error("alpha_d2: log-alpha varies across the sampling radii (not in log regime)");
    ScatteringSolution sol;
    sol.alpha = std::exp(la.back());
    sol.R_max = R;
    sol.residual = hi - lo;
    sol.r_samples = std::move(prof.r);
    sol.u_samples = std::move(prof.u);
    return sol;
}

ScatteringInequalityReport inequality_report(const PairPotential& v,
                                             const ScatteringOptions& opts) {
    if (v.is_zero()) throw domain_error("inequality_report: v must not vanish (need v(0) > 0)");
    if (!(v(0.0) > 0.0) && !(v(1e-12) > 0.0))
        throw domain_error("inequality_report: need v(0) > 0");
    if (classify_pair(v, 3) != PairClass::soft_core)
        throw domain_error("inequality_report: requires a soft-core potential");

    ScatteringInequalityReport rep;
    ScatteringSolution sol = alpha_d3(v, opts);
    rep.alpha = sol.alpha;
    rep.alpha_tilde = alpha_tilde(v, 3);
    rep.strict_inequality = rep.alpha < rep.alpha_tilde;

    // (1/8pi) ∫ v(|x|) u(|x|)/|x| dx = alpha in d = 3, i.e.
    // ∫_0^inf v(r) u(r) r dr = 2 alpha with u'(inf) = 1.
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < sol.r_samples.size(); ++j) {
        double r0 = sol.r_samples[j], r1 = sol.r_samples[j + 1];
        double f0 = v(r0) * sol.u_samples[j] * r0;
        double f1 = v(r1) * sol.u_samples[j + 1] * r1;
        if (!std::isfinite(f0)) f0 = 0.0;
        if (!std::isfinite(f1)) f1 = 0.0;
        acc += 0.5 * (f0 + f1) * (r1 - r0);
    }
    rep.identity_lhs = 4.0 * kPi * acc;  // omega_3 ∫ v u r dr
    rep.identity_rhs = 8.0 * kPi * rep.alpha;
    rep.identity_residual =
        std::abs(rep.identity_lhs - rep.identity_rhs) / std::max(1e-300, std::abs(rep.identity_rhs));
    if (rep.identity_residual > 1e-3)
        throw solver_error("inequality_report: scattering identity residual exceeds 1e-3");
    return rep;
}

}  // namespace traplab
