#include "traplab/variational.hpp"

#include <algorithm>
#include <cmath>

#include "traplab/rng.hpp"

namespace traplab {

namespace {

std::vector<double> trap_values(const TrapPotential& W, const Grid& g) {
    std::vector<double> w(static_cast<std::size_t>(g.cells()));
    std::vector<double> x(g.dim);
    for (std::int64_t i = 0; i < g.cells(); ++i) {
        g.point(i, x);
        w[i] = W(x);
    }
    return w;
}

// Gaussian bump, normalized afterwards by the caller.
ScalarField gaussian_bump(const Grid& g, const std::vector<double>& center, double width) {
    ScalarField f(g);
    std::vector<double> x(g.dim);
    for (std::int64_t i = 0; i < g.cells(); ++i) {
        g.point(i, x);
        double r2 = 0.0;
        for (int k = 0; k < g.dim; ++k) {
            double dd = x[k] - center[k];
            r2 += dd * dd;
        }
        f.values[i] = std::exp(-0.5 * r2 / (width * width));
    }
    return f;
}

void mask_field(ScalarField& f, const std::vector<double>& trap) {
    for (std::size_t i = 0; i < f.values.size(); ++i)
        if (!std::isfinite(trap[i])) f.values[i] = 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gross-Pitaevskii
// ---------------------------------------------------------------------------

double gp_energy(const TrapPotential& W, double alpha, const ScalarField& phi) {
    const Grid& g = phi.grid;
    std::vector<double> w = trap_values(W, g);
    double trap = 0.0, quartic = 0.0;
    const double hvol = g.cell_volume();
    for (std::size_t i = 0; i < phi.values.size(); ++i) {
        double p2 = phi.values[i] * phi.values[i];
        if (p2 > 0.0 && !std::isfinite(w[i])) return kInf;
        if (std::isfinite(w[i])) trap += w[i] * p2;
        quartic += p2 * p2;
    }
    return kinetic_energy(phi) + trap * hvol + 4.0 * kPi * alpha * quartic * hvol;
}

GPResult gp_minimize(const TrapPotential& W, double alpha, const Grid& grid,
                     const GpOptions& opts) {
    if (!(alpha >= 0.0)) throw config_error("gp_minimize: alpha must be >= 0");
    W.validate();

    std::vector<double> w = trap_values(W, grid);
    std::vector<double> w_finite = w;
    std::vector<std::uint8_t> excl(w.size(), 0);
    for (std::size_t i = 0; i < w.size(); ++i)
        if (!std::isfinite(w[i])) {
            excl[i] = 1;
            w_finite[i] = 0.0;
        }
    GridOperator lin(grid, w_finite);
    lin.excluded = excl;

    auto energy = [&](const ScalarField& f, double* kin = nullptr, double* trap = nullptr,
                      double* quart = nullptr) {
        double t = 0.0, q = 0.0;
        const double hvol = grid.cell_volume();
        for (std::size_t i = 0; i < f.values.size(); ++i) {
            double p2 = f.values[i] * f.values[i];
            t += w_finite[i] * p2;
            q += p2 * p2;
        }
        double k = kinetic_energy(f);
        if (kin) *kin = k;
        if (trap) *trap = t * hvol;
        if (quart) *quart = 4.0 * kPi * alpha * q * hvol;
        return k + t * hvol + 4.0 * kPi * alpha * q * hvol;
    };

    // Trap-adapted Gaussian start: small deterministic width ladder.
    ScalarField phi(grid);
    {
        double best = kInf;
        std::vector<double> c0(grid.dim, 0.0);
        for (double s : {0.25, 0.4, 0.6, 0.9, 1.4, 2.2}) {
            ScalarField cand = gaussian_bump(grid, c0, s * grid.half_width / 4.0);
            mask_field(cand, w);
            cand.normalize_l2();
            double e = energy(cand);
            if (e < best) {
                best = e;
                phi = cand;
            }
        }
    }

    const double h = grid.spacing();
    double tau = opts.tau > 0.0 ? opts.tau : h * h / (4.0 * grid.dim);
    const double tau_max = 64.0 * tau;

    GPResult out;
    out.alpha = alpha;
    double E = energy(phi);
    double window_start_E = E;
    out.energy_trace.push_back(E);
    std::vector<double> grad(phi.values.size());

    int it = 0;
    bool converged = false;
    while (it < opts.max_iter && !converged) {
        // half-gradient: -Delta phi + W phi + 8 pi alpha phi^3
        lin.apply(phi.values.data(), grad.data());
        for (std::size_t i = 0; i < grad.size(); ++i)
            grad[i] += 8.0 * kPi * alpha * phi.values[i] * phi.values[i] * phi.values[i];

        int bt = 0;
        for (; bt <= opts.max_backtracks; ++bt) {
            ScalarField trial(grid);
            for (std::size_t i = 0; i < grad.size(); ++i)
                trial.values[i] = excl[i] ? 0.0 : phi.values[i] - tau * grad[i];
            trial.normalize_l2();
            double Et = energy(trial);
            if (Et <= E) {
                phi = std::move(trial);
                E = Et;
                tau = std::min(tau * 1.1, tau_max);
                break;
            }
            tau *= 0.5;
        }
        ++it;
        if (bt > opts.max_backtracks) {
            if (std::abs(window_start_E - E) <= opts.tol * std::max(1.0, std::abs(E))) {
                converged = true;
                break;
            }
            throw solver_error("gp_minimize: stalled (no energy decrease after max backtracks)");
        }
        if (it % opts.window == 0) {
            out.energy_trace.push_back(E);
            if (std::abs(window_start_E - E) <= opts.tol * std::max(1.0, std::abs(E)))
                converged = true;
            window_start_E = E;
        }
    }
    if (!converged) throw solver_error("gp_minimize: no convergence within max iterations");

    // Positive-start flow stays positive; |phi| is the documented fallback.
    double mn = *std::min_element(phi.values.begin(), phi.values.end());
    if (mn < 0.0) {
        for (double& v : phi.values) v = std::abs(v);
        phi.normalize_l2();
    }
    out.iterations = it;
    out.chi_gp = energy(phi, &out.kinetic, &out.trap, &out.quartic);
    out.energy_trace.push_back(out.chi_gp);
    out.phi = std::move(phi);
    return out;
}

// ---------------------------------------------------------------------------
// Hartree product states
// ---------------------------------------------------------------------------

namespace {

struct HartreeWork {
    const HartreeProblem* prob;
    std::vector<double> trap;            // W on the grid (may contain inf)
    std::vector<double> trap_finite;     // masked finite version
    std::vector<std::uint8_t> excl;
    std::unique_ptr<InteractionKernel> kernel;
    double hvol;
};

HartreeWork make_work(const HartreeProblem& prob) {
    if (prob.N < 1) throw config_error("hartree: N must be >= 1");
    prob.W.validate();
    if (!prob.tilt.empty() && static_cast<int>(prob.tilt.size()) != prob.N)
        throw config_error("hartree: tilt must have one field per particle");
    HartreeWork wk;
    wk.prob = &prob;
    wk.trap = trap_values(prob.W, prob.grid);
    wk.trap_finite = wk.trap;
    wk.excl.assign(wk.trap.size(), 0);
    for (std::size_t i = 0; i < wk.trap.size(); ++i)
        if (!std::isfinite(wk.trap[i])) {
            wk.excl[i] = 1;
            wk.trap_finite[i] = 0.0;
        }
    wk.hvol = prob.grid.cell_volume();
    if (prob.mode == HartreeMode::pair_kernel && !prob.v.is_zero()) {
        if (prob.v.hard_core_radius() > 0.0)
            throw config_error(
                "hartree: hard-core potentials enter only through cap(v, M); cap first");
        if (prob.v.kind() == PairKind::inverse_power && prob.v.gamma() >= 2.0 &&
            prob.v.cap_level() == kInf)
            throw config_error("hartree: inverse-power needs gamma < 2 (or a cap)");
        wk.kernel = std::make_unique<InteractionKernel>(prob.grid, prob.v);
    }
    if (prob.mode == HartreeMode::dirac && !(prob.dirac_lambda >= 0.0))
        throw config_error("hartree: dirac coupling must be >= 0");
    return wk;
}

// Effective single-particle potential U_i = W - f_i + sum_{j!=i} V h_j^2
// (pair mode) or W - f_i + lambda sum_{j!=i} h_j^2 (dirac mode).
std::vector<double> effective_potential(const HartreeWork& wk, const std::vector<ScalarField>& h,
                                        const std::vector<ScalarField>& Vrho, int i) {
    const HartreeProblem& prob = *wk.prob;
    std::vector<double> q = wk.trap_finite;
    if (!prob.tilt.empty())
        for (std::size_t c = 0; c < q.size(); ++c) q[c] -= prob.tilt[i].values[c];
    if (prob.mode == HartreeMode::pair_kernel) {
        if (wk.kernel)
            for (int j = 0; j < prob.N; ++j) {
                if (j == i) continue;
                for (std::size_t c = 0; c < q.size(); ++c) q[c] += Vrho[j].values[c];
            }
    } else {
        for (int j = 0; j < prob.N; ++j) {
            if (j == i) continue;
            for (std::size_t c = 0; c < q.size(); ++c)
                q[c] += prob.dirac_lambda * h[j].values[c] * h[j].values[c];
        }
    }
    return q;
}

}  // namespace

double product_state_energy(const HartreeProblem& prob, const std::vector<ScalarField>& h,
                            const InteractionKernel* kernel) {
    const Grid& g = prob.grid;
    const double hvol = g.cell_volume();
    std::vector<double> terms;
    std::vector<double> w = trap_values(prob.W, g);
    std::vector<std::uint8_t> excl(w.size(), 0);
    for (std::size_t i = 0; i < w.size(); ++i)
        if (!std::isfinite(w[i])) {
            excl[i] = 1;
            w[i] = 0.0;
        }
    GridOperator kin_op(g, std::vector<double>(w.size(), 0.0));
    kin_op.excluded = excl;

    const int N = prob.N;
    std::vector<DensityField> rho;
    rho.reserve(N);
    for (int i = 0; i < N; ++i) rho.push_back(density_from(h[i]));

    std::vector<double> y(w.size());
    for (int i = 0; i < N; ++i) {
        kin_op.apply(h[i].values.data(), y.data());
        double kin = inner(h[i].values, y, hvol);
        double trap = inner(w, rho[i].values, hvol);
        double tiltterm = prob.tilt.empty() ? 0.0 : -inner(prob.tilt[i].values, rho[i].values, hvol);
        terms.push_back(kin + trap + tiltterm);
    }
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            double pij;
            if (prob.mode == HartreeMode::pair_kernel) {
                if (!kernel) {
                    pij = 0.0;
                } else {
                    ScalarField vi = kernel->apply(rho[j]);
                    ScalarField vj = kernel->apply(rho[i]);
                    pij = 0.5 * (inner(rho[i].values, vi.values, hvol) +
                                 inner(rho[j].values, vj.values, hvol));
                }
            } else {
                pij = prob.dirac_lambda * inner(rho[i].values, rho[j].values, hvol);
            }
            terms.push_back(pij);
        }
    return sorted_sum(std::move(terms));
}

std::vector<double> product_state_multipliers(const HartreeProblem& prob,
                                              const std::vector<ScalarField>& h,
                                              const InteractionKernel* kernel) {
    HartreeWork wk = make_work(prob);
    if (kernel) wk.kernel.reset();  // caller-provided kernel wins
    const int N = prob.N;
    std::vector<ScalarField> Vrho(N, ScalarField(prob.grid));
    const InteractionKernel* K = kernel ? kernel : wk.kernel.get();
    if (prob.mode == HartreeMode::pair_kernel && K)
        for (int j = 0; j < N; ++j) Vrho[j] = K->apply(density_from(h[j]));
    std::vector<double> lam(N);
    std::vector<double> y(h[0].values.size());
    for (int i = 0; i < N; ++i) {
        std::vector<double> q = effective_potential(wk, h, Vrho, i);
        GridOperator op(prob.grid, std::move(q));
        op.excluded = wk.excl;
        op.apply(h[i].values.data(), y.data());
        lam[i] = inner(h[i].values, y, wk.hvol);
    }
    return lam;
}

ProductState hartree_minimize(const HartreeProblem& prob, const HartreeOptions& opts) {
    HartreeWork wk = make_work(prob);
    const int N = prob.N;
    const Grid& g = prob.grid;

    ProductState best;
    double best_energy = kInf;
    double best_lam_sum = kInf;

    for (int s = 0; s < std::max(1, opts.multistarts); ++s) {
        CounterRng rng(opts.seed, static_cast<std::uint64_t>(s));
        std::vector<ScalarField> h;
        h.reserve(N);
        for (int i = 0; i < N; ++i) {
            std::vector<double> center(g.dim);
            for (int k = 0; k < g.dim; ++k)
                center[k] = (N == 1) ? 0.0 : rng.uniform(-0.15, 0.15) * g.half_width;
            double width = g.half_width / 5.0 * rng.uniform(0.8, 1.2);
            ScalarField f = gaussian_bump(g, center, width);
            mask_field(f, wk.trap);
            f.normalize_l2();
            h.push_back(std::move(f));
        }
        std::vector<ScalarField> Vrho(N, ScalarField(g));
        if (prob.mode == HartreeMode::pair_kernel && wk.kernel)
            for (int j = 0; j < N; ++j) Vrho[j] = wk.kernel->apply(density_from(h[j]));

        std::vector<double> lam(N, 0.0);
        double E = product_state_energy(prob, h, wk.kernel.get());
        bool monotone = true;
        int sweep = 0;
        bool converged = false;
        const double inner_tol = opts.tol * opts.inner_tol_factor;
        for (; sweep < opts.max_sweeps; ++sweep) {
            for (int i = 0; i < N; ++i) {
                std::vector<double> q = effective_potential(wk, h, Vrho, i);
                GridOperator op(g, std::move(q));
                op.excluded = wk.excl;
                double rq_old = op.rayleigh(h[i].values);
                EigenResult res;
                try {
                    res = smallest_eigenpair(op, h[i].values, inner_tol, opts.inner_max_iter);
                } catch (const Error& e) {
                    throw solver_error(std::string("hartree: inner eigensolve failed: ") + e.what());
                }
                double guard = 10.0 * 2.2e-16 * (std::abs(rq_old) + std::abs(res.lambda) + 1.0);
                if (res.lambda > rq_old + guard) {
                    monotone = false;
                    throw solver_error("hartree: single-particle update increased the energy "
                                       "(monotonicity violation)");
                }
                lam[i] = res.lambda;
                double scale = 1.0 / std::sqrt(wk.hvol);
                for (std::size_t c = 0; c < res.vec.size(); ++c) h[i].values[c] = res.vec[c] * scale;
                // sign-fix: ground states are taken nonnegative
                double sum = 0.0;
                for (double vv : h[i].values) sum += vv;
                if (sum < 0.0)
                    for (double& vv : h[i].values) vv = -vv;
                if (prob.mode == HartreeMode::pair_kernel && wk.kernel)
                    Vrho[i] = wk.kernel->apply(density_from(h[i]));
            }
            double E_new = product_state_energy(prob, h, wk.kernel.get());
            if (std::abs(E - E_new) <= opts.tol * std::max(1.0, std::abs(E_new))) {
                E = E_new;
                converged = true;
                ++sweep;
                break;
            }
            E = E_new;
        }
        if (!converged) throw solver_error("hartree: sweeps did not converge");

        double lam_sum = sorted_sum(lam);
        bool better = (E < best_energy - 1e-15 * std::max(1.0, std::abs(E))) ||
                      (std::abs(E - best_energy) <= 1e-15 * std::max(1.0, std::abs(E)) &&
                       lam_sum < best_lam_sum);
        best.seed_energies.push_back(E);
        if (better) {
            best_energy = E;
            best_lam_sum = lam_sum;
            best.h = h;
            best.lambda = lam;
            best.chi_product = E / N;
            best.mode = prob.mode;
            best.dirac_lambda = prob.dirac_lambda;
            best.sweeps = sweep;
            best.monotone = monotone;
        }
    }
    return best;
}

std::vector<double> el_residual(const HartreeProblem& prob, const ProductState& state) {
    HartreeWork wk = make_work(prob);
    const int N = prob.N;
    std::vector<ScalarField> Vrho(N, ScalarField(prob.grid));
    if (prob.mode == HartreeMode::pair_kernel && wk.kernel)
        for (int j = 0; j < N; ++j) Vrho[j] = wk.kernel->apply(density_from(state.h[j]));
    std::vector<double> out(N);
    std::vector<double> y(state.h[0].values.size());
    for (int i = 0; i < N; ++i) {
        std::vector<double> q = effective_potential(wk, state.h, Vrho, i);
        GridOperator op(prob.grid, std::move(q));
        op.excluded = wk.excl;
        op.apply(state.h[i].values.data(), y.data());
        double s = 0.0;
        for (std::size_t c = 0; c < y.size(); ++c) {
            double r = y[c] - state.lambda[i] * state.h[i].values[c];
            s += r * r;
        }
        out[i] = std::sqrt(s * wk.hvol);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Canonical N-body ground state
// ---------------------------------------------------------------------------

GridOperator assemble_canonical_operator(const TrapPotential& W, const PairPotential& v, int N,
                                         const Grid& g, const std::vector<ScalarField>* tilt) {
    if (N < 1) throw config_error("canonical: N must be >= 1");
    Grid G(g.dim * N, g.half_width, g.n, g.bc);
    std::vector<double> w = trap_values(W, g);
    std::unique_ptr<InteractionKernel> kernel;
    if (N > 1 && !v.is_zero()) kernel = std::make_unique<InteractionKernel>(g, v);
    const double a = v.hard_core_radius();
    const double h = g.spacing();

    std::vector<double> q(static_cast<std::size_t>(G.cells()), 0.0);
    std::vector<std::uint8_t> excl(q.size(), 0);
    std::vector<int> m(G.dim);
    std::vector<int> off(g.dim);
    const std::int64_t pcells = g.cells();
    for (std::int64_t idx = 0; idx < G.cells(); ++idx) {
        G.unravel(idx, m);
        double acc = 0.0;
        bool out = false;
        // per-particle indices on the small grid
        for (int i = 0; i < N && !out; ++i) {
            std::int64_t pi = 0;
            for (int k = g.dim - 1; k >= 0; --k) pi = pi * g.n + m[i * g.dim + k];
            (void)pcells;
            double wi = w[pi];
            if (!std::isfinite(wi)) {
                out = true;
                break;
            }
            acc += wi;
            if (tilt && !tilt->empty()) acc -= (*tilt)[i].values[pi];
        }
        if (!out && N > 1) {
            for (int i = 0; i < N && !out; ++i)
                for (int j = i + 1; j < N && !out; ++j) {
                    double dist2 = 0.0;
                    for (int k = 0; k < g.dim; ++k) {
                        int o = m[i * g.dim + k] - m[j * g.dim + k];
                        if (g.bc == Bc::periodic) {
                            o = ((o % g.n) + g.n) % g.n;
                            if (o > g.n / 2) o -= g.n;
                        }
                        off[k] = o;
                        dist2 += (o * h) * (o * h);
                    }
                    if (a > 0.0 && dist2 <= a * a + 1e-15) {
                        out = true;
                        break;
                    }
                    if (kernel) {
                        double kv = kernel->at_offset(off);
                        if (!std::isfinite(kv)) {
                            out = true;
                            break;
                        }
                        acc += kv;
                    }
                }
        }
        if (out) {
            excl[idx] = 1;
            q[idx] = 0.0;
        } else {
            q[idx] = acc;
        }
    }
    GridOperator op(G, std::move(q));
    op.excluded = std::move(excl);
    return op;
}

CanonicalGroundState canonical_ground(const TrapPotential& W, const PairPotential& v, int N,
                                      const Grid& g, const CanonicalOptions& opts,
                                      const std::vector<ScalarField>* tilt) {
    if (g.dim * N > opts.max_dims)
        throw budget_error("canonical_ground: d*N exceeds the dimension budget");
    GridOperator op = assemble_canonical_operator(W, v, N, g, tilt);
    const Grid& G = op.grid;

    // positive separable start: product of identical Gaussians
    std::vector<double> start(static_cast<std::size_t>(G.cells()));
    std::vector<double> x(G.dim);
    const double s0 = g.half_width / 3.0;
    for (std::int64_t i = 0; i < G.cells(); ++i) {
        G.point(i, x);
        double r2 = 0.0;
        for (int k = 0; k < G.dim; ++k) r2 += x[k] * x[k];
        start[i] = std::exp(-0.5 * r2 / (s0 * s0));
    }
    EigenResult res = smallest_eigenpair(op, std::move(start), opts.tol, opts.max_iter);

    CanonicalGroundState out;
    out.N = N;
    out.eigenvalue = res.lambda;
    out.chi_N = res.lambda / N;
    out.iterations = res.iterations;
    out.excluded_mask = op.excluded;

    double sum = 0.0;
    for (double vv : res.vec) sum += vv;
    if (sum < 0.0)
        for (double& vv : res.vec) vv = -vv;
    double mx = 0.0;
    for (double vv : res.vec) mx = std::max(mx, std::abs(vv));
    for (double& vv : res.vec)
        if (vv < 0.0 && vv > -1e-8 * mx) vv = 0.0;
    out.h_star = ScalarField(G, std::move(res.vec));
    out.h_star.normalize_l2();
    return out;
}

// ---------------------------------------------------------------------------
// Tilt derivative check
// ---------------------------------------------------------------------------

TiltReport tilt_derivative_check(const HartreeProblem& prob, const std::vector<ScalarField>& g,
                                 const HartreeOptions& opts) {
    if (static_cast<int>(g.size()) != prob.N)
        throw config_error("tilt_derivative_check: need one g field per particle");
    ProductState base = hartree_minimize(prob, opts);
    double pairing = 0.0;
    for (int i = 0; i < prob.N; ++i)
        pairing += inner(g[i].values, density_from(base.h[i]).values, prob.grid.cell_volume());

    auto energy_at = [&](double t) {
        HartreeProblem p = prob;
        if (p.tilt.empty()) p.tilt.assign(p.N, ScalarField(p.grid));
        for (int i = 0; i < p.N; ++i)
            for (std::size_t c = 0; c < g[i].values.size(); ++c)
                p.tilt[i].values[c] += t * g[i].values[c];
        ProductState st = hartree_minimize(p, opts);
        return st.chi_product * p.N;
    };

    TiltReport rep;
    double d_coarse = (energy_at(1e-3) - energy_at(-1e-3)) / 2e-3;
    double d_fine = (energy_at(1e-4) - energy_at(-1e-4)) / 2e-4;
    rep.step_coarse = d_coarse;
    rep.step_fine = d_fine;
    rep.fd_derivative = (100.0 * d_fine - d_coarse) / 99.0;
    rep.pairing = pairing;
    // the tilt enters as W - f, so d/dt N chi = -sum <g_i, h_i^2>
    rep.rel_gap = std::abs(rep.fd_derivative + pairing) / std::max(1.0, std::abs(pairing));
    if (rep.rel_gap > 1e-3 &&
        std::abs(d_fine - d_coarse) > 1e-2 * std::max(1.0, std::abs(d_fine)))
        rep.nonsmooth_flag = true;  // (1.11) minimizers may be non-unique
    return rep;
}

// ---------------------------------------------------------------------------
// Rate functions
// ---------------------------------------------------------------------------

RateReport rate_canonical(const DensityField& mu, const TrapPotential& W, const PairPotential& v,
                          int N, double chi_N) {
    mu.check_valid(true);
    const Grid& G = mu.grid;
    if (G.dim % N != 0) throw domain_error("rate_canonical: grid dim not divisible by N");
    Grid g(G.dim / N, G.half_width, G.n, G.bc);
    GridOperator op = assemble_canonical_operator(W, v, N, g, nullptr);

    RateReport rep;
    rep.normalizer = N * chi_N;
    rep.kinetic = dv_rate(mu);
    const double hvol = G.cell_volume();
    // split q back into trap and interaction for the report
    GridOperator trap_only = assemble_canonical_operator(W, PairPotential::zero(), N, g, nullptr);
    double trap = 0.0, inter = 0.0;
    for (std::int64_t i = 0; i < G.cells(); ++i) {
        double m = mu.values[i];
        if (m == 0.0) continue;
        if (op.excluded[i]) {
            rep.rate = kInf;
            rep.interaction = kInf;
            return rep;
        }
        trap += trap_only.potential[i] * m;
        inter += (op.potential[i] - trap_only.potential[i]) * m;
    }
    rep.trap = trap * hvol;
    rep.interaction = inter * hvol;
    rep.rate = rep.kinetic + rep.trap + rep.interaction - rep.normalizer;
    return rep;
}

RateReport rate_hartree(const std::vector<DensityField>& mu, const TrapPotential& W,
                        const InteractionKernel& kernel, double chi_product) {
    const int N = static_cast<int>(mu.size());
    RateReport rep;
    rep.normalizer = N * chi_product;
    const Grid& g = mu[0].grid;
    std::vector<double> w = trap_values(W, g);
    const double hvol = g.cell_volume();
    for (int i = 0; i < N; ++i) {
        mu[i].check_valid(true);
        rep.kinetic += dv_rate(mu[i]);
        for (std::size_t c = 0; c < w.size(); ++c) {
            if (mu[i].values[c] == 0.0) continue;
            if (!std::isfinite(w[c])) {
                rep.rate = kInf;
                rep.trap = kInf;
                return rep;
            }
            rep.trap += w[c] * mu[i].values[c] * hvol;
        }
    }
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) rep.interaction += interaction_pairing(kernel, mu[i], mu[j]);
    rep.rate = rep.kinetic + rep.trap + rep.interaction - rep.normalizer;
    return rep;
}

RateReport rate_dirac(const std::vector<DensityField>& mu, const TrapPotential& W, double lambda,
                      double chi_dirac) {
    const int N = static_cast<int>(mu.size());
    RateReport rep;
    rep.normalizer = N * chi_dirac;
    const Grid& g = mu[0].grid;
    std::vector<double> w = trap_values(W, g);
    const double hvol = g.cell_volume();
    for (int i = 0; i < N; ++i) {
        mu[i].check_valid(true);
        rep.kinetic += dv_rate(mu[i]);
        for (std::size_t c = 0; c < w.size(); ++c)
            if (mu[i].values[c] != 0.0) rep.trap += w[c] * mu[i].values[c] * hvol;
    }
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            rep.interaction += lambda * inner(mu[i].values, mu[j].values, hvol);
    rep.rate = rep.kinetic + rep.trap + rep.interaction - rep.normalizer;
    return rep;
}

RateReport rate_mean_given_decomposition(const DensityField& mu,
                                         const std::vector<DensityField>& dec,
                                         const TrapPotential& W, const InteractionKernel& kernel,
                                         double chi_product) {
    const int N = static_cast<int>(dec.size());
    // the supplied decomposition must average to mu
    DensityField mean(mu.grid);
    for (const auto& d : dec)
        for (std::size_t c = 0; c < mean.values.size(); ++c) mean.values[c] += d.values[c] / N;
    for (std::size_t c = 0; c < mean.values.size(); ++c)
        if (std::abs(mean.values[c] - mu.values[c]) > 1e-8 * (1.0 + std::abs(mu.values[c])))
            throw domain_error("rate_mean: decomposition mean does not match mu");

    RateReport rep;
    rep.normalizer = chi_product;
    const Grid& g = mu.grid;
    std::vector<double> w = trap_values(W, g);
    const double hvol = g.cell_volume();
    for (std::size_t c = 0; c < w.size(); ++c)
        if (mu.values[c] != 0.0) rep.trap += w[c] * mu.values[c] * hvol;
    rep.interaction = 0.5 * N * interaction_pairing(kernel, mu, mu);
    for (int i = 0; i < N; ++i) {
        rep.kinetic += dv_rate(dec[i]) / N;
        rep.interaction -= 0.5 / N * interaction_pairing(kernel, dec[i], dec[i]);
    }
    rep.rate = rep.kinetic + rep.trap + rep.interaction - rep.normalizer;
    return rep;
}

}  // namespace traplab
