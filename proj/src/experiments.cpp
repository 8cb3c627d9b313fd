#include "traplab/experiments.hpp"

#include <cmath>
#include <thread>

namespace traplab {

SweepResult large_n_sweep(const LargeNSweepConfig& cfg) {
    if (cfg.d != 2 && cfg.d != 3) throw config_error("large_n_sweep: d must be 2 or 3");
    if (cfg.v.is_zero() || !(cfg.v(0.0) > 0.0))
        throw config_error("large_n_sweep: need a soft-core v with v(0) > 0");
    if (classify_pair(cfg.v, cfg.d) != PairClass::soft_core)
        throw config_error("large_n_sweep: v must be soft-core");
    for (std::size_t i = 1; i < cfg.N_list.size(); ++i)
        if (cfg.N_list[i] <= cfg.N_list[i - 1])
            throw config_error("large_n_sweep: N list must increase strictly");

    const double at = alpha_tilde(cfg.v, cfg.d);
    GPResult gp = gp_minimize(cfg.W, at, cfg.grid, cfg.gp);
    DensityField gp_density = density_from(gp.phi);

    SweepResult out;
    out.axis_name = "N";
    out.reference["chi_gp"] = gp.chi_gp;
    out.reference["alpha_tilde"] = at;

    const double h = cfg.grid.spacing();
    for (int N : cfg.N_list) {
        PairPotential vN = rescale_pair(cfg.v, RescaleScheme::thm114, N, cfg.d);
        // usable-N window at this grid: the kernel must stay resolved
        double range = vN.range_hint() * 3.0 / 8.0;  // ~3 sigma for the gaussian kind
        if (range < h)
            throw budget_error("large_n_sweep: support of v_N under one cell at N = " +
                               std::to_string(N) + "; refine the grid");
        HartreeProblem prob;
        prob.W = cfg.W;
        prob.v = vN;
        prob.N = N;
        prob.grid = cfg.grid;
        ProductState st = hartree_minimize(prob, cfg.hartree);

        DensityField phiN2(cfg.grid);
        for (int i = 0; i < N; ++i)
            for (std::size_t c = 0; c < phiN2.values.size(); ++c)
                phiN2.values[c] += st.h[i].values[c] * st.h[i].values[c] / N;

        SweepPoint pt;
        pt.axis = N;
        pt.values["chi_product"] = st.chi_product;
        pt.values["gap"] = std::abs(st.chi_product - gp.chi_gp);
        pt.values["tv"] = tv_distance(phiN2, gp_density);
        pt.values["sweeps"] = st.sweeps;
        out.points.push_back(std::move(pt));
    }
    return out;
}

SweepResult beta_sweep_canonical(const BetaSweepCanonicalConfig& cfg) {
    for (std::size_t i = 1; i < cfg.beta_list.size(); ++i)
        if (cfg.beta_list[i] <= cfg.beta_list[i - 1])
            throw config_error("beta_sweep: beta list must increase strictly");
    CanonicalGroundState gs = canonical_ground(cfg.W, cfg.v, cfg.N, cfg.grid, cfg.canonical);

    SweepResult out;
    out.axis_name = "beta";
    out.reference["chi_N"] = gs.chi_N;
    out.reference["eigenvalue"] = gs.eigenvalue;
    for (double beta : cfg.beta_list) {
        FkResult fk = fk_oracle(cfg.W, cfg.v, cfg.N, cfg.grid, beta);
        SweepPoint pt;
        pt.axis = beta;
        pt.values["fk_log"] = fk.log_value;
        pt.values["slope"] = fk.slope;
        pt.values["slope_gap"] = std::abs(fk.slope + gs.eigenvalue);
        if (cfg.run_thermo) {
            LatticeCanonical model{cfg.grid, cfg.N, beta, cfg.W, cfg.v};
            ThermoResult th = thermo_logZ_lattice(model, cfg.thermo);
            pt.values["thermo_logZ"] = th.logZ;
            pt.values["thermo_stderr"] = th.logZ_stderr;
            pt.values["thermo_minus_logZ_per_nbeta"] = th.minus_logZ_per_nbeta;
        }
        out.points.push_back(std::move(pt));
    }
    return out;
}

namespace {

struct TvEstimate {
    double tv = 0.0;
    double stderr_jack = 0.0;
    double acceptance = 0.0;
};

// Jackknife over chains of the tv distance between the chain-averaged
// occupation and a reference density.
TvEstimate tv_over_chains(const std::vector<std::vector<DensityField>>& chain_occ,
                          const std::vector<double>& chain_acc, const DensityField& ref) {
    const int C = static_cast<int>(chain_occ.size());
    auto tv_of = [&](int skip) {
        DensityField mean(ref.grid);
        int used = 0;
        for (int c = 0; c < C; ++c) {
            if (c == skip) continue;
            ++used;
            for (std::size_t i = 0; i < mean.values.size(); ++i)
                mean.values[i] += chain_occ[c][0].values[i];
        }
        for (auto& v : mean.values) v /= used;
        return tv_distance(mean, ref);
    };
    TvEstimate est;
    est.tv = tv_of(-1);
    std::vector<double> loo(C);
    double lm = 0.0;
    for (int c = 0; c < C; ++c) {
        loo[c] = tv_of(c);
        lm += loo[c] / C;
    }
    double var = 0.0;
    for (double l : loo) var += (l - lm) * (l - lm);
    est.stderr_jack = std::sqrt(var * (C - 1.0) / C);
    for (double a : chain_acc) est.acceptance += a / C;
    return est;
}

}  // namespace

OccupationSweepResult beta_sweep_hartree(const BetaSweepHartreeConfig& cfg) {
    HartreeProblem prob;
    prob.W = cfg.W;
    prob.v = cfg.v;
    prob.N = cfg.N;
    prob.grid = cfg.grid;
    ProductState st = hartree_minimize(prob, cfg.hartree);
    // symmetric reference: mean of the minimizer densities
    DensityField ref(cfg.grid);
    for (int i = 0; i < cfg.N; ++i)
        for (std::size_t c = 0; c < ref.values.size(); ++c)
            ref.values[c] += st.h[i].values[c] * st.h[i].values[c] / cfg.N;

    OccupationSweepResult out;
    out.reference_chi = st.chi_product;
    StartDistribution start;
    start.box_half_width = 0.5 * cfg.grid.half_width;

    for (double beta : cfg.beta_list) {
        const int C = cfg.chains;
        std::vector<std::vector<DensityField>> chain_occ(C);
        std::vector<double> chain_acc(C, 0.0);
        auto run_chain = [&](int c) {
            CounterRng rng(cfg.seed, 0x0CCull + c + static_cast<std::uint64_t>(beta * 1e3));
            PathEnsemble ens;
            ens.N = cfg.N;
            ens.d = cfg.grid.dim;
            ens.beta = beta;
            ens.dt = cfg.dt;
            ens.slices = static_cast<int>(std::llround(beta / cfg.dt));
            ens.pos.assign(cfg.N, std::vector<double>(
                                      static_cast<std::size_t>(ens.slices + 1) * ens.d));
            for (int i = 0; i < cfg.N; ++i) {
                std::vector<double> x0(ens.d);
                for (int a = 0; a < ens.d; ++a)
                    x0[a] = rng.uniform(-start.box_half_width, start.box_half_width);
                for (int k = 0; k <= ens.slices; ++k)
                    std::copy(x0.begin(), x0.end(), ens.at(i, k));
            }
            BrownianSamplerOptions so;
            so.model = cfg.model;
            BrownianSampler sampler(std::move(ens), cfg.W, cfg.v, cfg.grid, start, so);
            int burn = cfg.steps / 5;
            std::vector<DensityField> acc;
            long samples = 0;
            for (int s = 0; s < cfg.steps; ++s) {
                sampler.step(rng);
                if (s >= burn && s % 20 == 0) {
                    sampler.accumulate_occupation(acc, 1.0);
                    ++samples;
                }
            }
            // average over particles and samples
            DensityField mean(cfg.grid);
            for (auto& a : acc)
                for (std::size_t i = 0; i < mean.values.size(); ++i)
                    mean.values[i] += a.values[i] / (samples * cfg.N);
            chain_occ[c] = {std::move(mean)};
            chain_acc[c] = sampler.acceptance_rate();
        };
        if (cfg.threads > 1) {
            std::vector<std::thread> pool;
            for (int c = 0; c < C; ++c) pool.emplace_back(run_chain, c);
            for (auto& t : pool) t.join();
        } else {
            for (int c = 0; c < C; ++c) run_chain(c);
        }
        TvEstimate est = tv_over_chains(chain_occ, chain_acc, ref);
        out.points.push_back({beta, est.tv, est.stderr_jack, est.acceptance});
    }
    return out;
}

OccupationSweepResult beta_sweep_canonical_occupation(const BetaSweepCanonicalOccConfig& cfg) {
    CanonicalGroundState gs = canonical_ground(cfg.W, cfg.v, cfg.N, cfg.grid, cfg.canonical);
    DensityField ref = density_from(gs.h_star);

    Grid product_grid = gs.h_star.grid;
    OccupationSweepResult out;
    out.reference_chi = gs.chi_N;
    StartDistribution start;
    start.box_half_width = 0.5 * cfg.grid.half_width;

    for (double beta : cfg.beta_list) {
        const int C = cfg.chains;
        std::vector<std::vector<DensityField>> chain_occ(C);
        std::vector<double> chain_acc(C, 0.0);
        auto run_chain = [&](int c) {
            CounterRng rng(cfg.seed, 0xCA11ull + c + static_cast<std::uint64_t>(beta * 1e3));
            PathEnsemble ens;
            ens.N = cfg.N;
            ens.d = cfg.grid.dim;
            ens.beta = beta;
            ens.dt = cfg.dt;
            ens.slices = static_cast<int>(std::llround(beta / cfg.dt));
            ens.pos.assign(cfg.N, std::vector<double>(
                                      static_cast<std::size_t>(ens.slices + 1) * ens.d));
            for (int i = 0; i < cfg.N; ++i) {
                std::vector<double> x0(ens.d);
                for (int a = 0; a < ens.d; ++a)
                    x0[a] = rng.uniform(-start.box_half_width, start.box_half_width);
                for (int k = 0; k <= ens.slices; ++k)
                    std::copy(x0.begin(), x0.end(), ens.at(i, k));
            }
            BrownianSamplerOptions so;
            so.model = McModel::canonical;
            BrownianSampler sampler(std::move(ens), cfg.W, cfg.v, cfg.grid, start, so);
            int burn = cfg.steps / 5;
            DensityField mean(product_grid);
            long samples = 0;
            std::vector<double> joint(product_grid.dim);
            for (int s = 0; s < cfg.steps; ++s) {
                sampler.step(rng);
                if (s >= burn && s % 20 == 0) {
                    // bin the joint (dN-dimensional) occupation
                    const PathEnsemble& e = sampler.ensemble();
                    for (int k = 0; k <= e.slices; ++k) {
                        for (int i = 0; i < e.N; ++i)
                            for (int a = 0; a < e.d; ++a) joint[i * e.d + a] = e.at(i, k)[a];
                        std::int64_t idx = 0;
                        bool ok = true;
                        for (int q = product_grid.dim - 1; q >= 0 && ok; --q) {
                            double x = joint[q];
                            double j = std::floor((x - product_grid.coord(0)) /
                                                      product_grid.spacing() + 0.5);
                            int ji = static_cast<int>(j);
                            if (product_grid.bc == Bc::periodic) {
                                ji %= product_grid.n;
                                if (ji < 0) ji += product_grid.n;
                            } else if (ji < 0 || ji >= product_grid.n) {
                                ok = false;
                                break;
                            }
                            idx = idx * product_grid.n + ji;
                        }
                        if (ok) mean.values[idx] += e.weight(k);
                    }
                    ++samples;
                }
            }
            double mass = mean.mass();
            if (mass > 0.0)
                for (auto& v : mean.values) v /= mass;
            chain_occ[c] = {std::move(mean)};
            chain_acc[c] = sampler.acceptance_rate();
        };
        if (cfg.threads > 1) {
            std::vector<std::thread> pool;
            for (int c = 0; c < C; ++c) pool.emplace_back(run_chain, c);
            for (auto& t : pool) t.join();
        } else {
            for (int c = 0; c < C; ++c) run_chain(c);
        }
        TvEstimate est = tv_over_chains(chain_occ, chain_acc, ref);
        out.points.push_back({beta, est.tv, est.stderr_jack, est.acceptance});
    }
    return out;
}

DiracSweepResult lambda_sweep_dirac(const LambdaSweepDiracConfig& cfg) {
    if (!(cfg.p > cfg.d - 2))
        throw config_error("lambda_sweep_dirac: requires p > d - 2");
    DiracSweepResult out;
    for (double lambda : cfg.lambda_list) {
        HartreeProblem prob;
        prob.W = TrapPotential::power(cfg.p);
        prob.mode = HartreeMode::dirac;
        prob.dirac_lambda = lambda;
        prob.N = cfg.N;
        prob.grid = cfg.grid;
        ProductState st = hartree_minimize(prob, cfg.hartree);
        DensityField ref(cfg.grid);
        for (int i = 0; i < cfg.N; ++i)
            for (std::size_t c = 0; c < ref.values.size(); ++c)
                ref.values[c] += st.h[i].values[c] * st.h[i].values[c] / cfg.N;

        for (double beta : cfg.beta_list) {
            const int C = cfg.chains;
            std::vector<std::vector<DensityField>> chain_occ(C);
            std::vector<double> chain_acc(C, 0.0);
            auto run_chain = [&](int c) {
                CounterRng rng(cfg.seed,
                               0xD17Aull + c + static_cast<std::uint64_t>(beta) +
                                   static_cast<std::uint64_t>(lambda * 131));
                std::vector<WalkTrajectory> trajs;
                for (int i = 0; i < cfg.N; ++i) {
                    WalkTrajectory tr;
                    tr.d = cfg.d;
                    tr.beta = beta;
                    tr.rate_per_edge = 1.0;
                    tr.sites.push_back(Site{});
                    trajs.push_back(std::move(tr));
                }
                DiracSamplerOptions so;
                so.p = cfg.p;
                so.lambda = lambda;
                DiracSampler sampler(std::move(trajs), so);
                int burn = cfg.steps / 5;
                DensityField mean(cfg.grid);
                long samples = 0;
                for (int s = 0; s < cfg.steps; ++s) {
                    sampler.step(rng);
                    if (s >= burn && s % 10 == 0) {
                        for (int i = 0; i < cfg.N; ++i) {
                            OccupationHistogram h =
                                rescaled_L_density(sampler.trajectories()[i], cfg.p, cfg.grid);
                            for (std::size_t q = 0; q < mean.values.size(); ++q)
                                mean.values[q] += h.density.values[q];
                        }
                        ++samples;
                    }
                }
                for (auto& v : mean.values) v /= (samples * cfg.N);
                chain_occ[c] = {std::move(mean)};
                chain_acc[c] = sampler.acceptance_rate();
            };
            if (cfg.threads > 1) {
                std::vector<std::thread> pool;
                for (int c = 0; c < C; ++c) pool.emplace_back(run_chain, c);
                for (auto& t : pool) t.join();
            } else {
                for (int c = 0; c < C; ++c) run_chain(c);
            }
            TvEstimate est = tv_over_chains(chain_occ, chain_acc, ref);
            DiracSweepPoint pt;
            pt.lambda = lambda;
            pt.beta = beta;
            pt.tv = est.tv;
            pt.tv_stderr = est.stderr_jack;
            pt.acceptance = est.acceptance;
            pt.chi_dirac = st.chi_product;
            out.points.push_back(pt);
        }
    }
    return out;
}

std::vector<InequalityRow> inequality_report_run(const std::vector<InequalityInstance>& instances) {
    std::vector<InequalityRow> rows;
    for (const auto& inst : instances) {
        InequalityRow row;
        row.name = inst.name;
        if (inst.run_energies) {
            HartreeProblem prob;
            prob.W = inst.W;
            prob.v = inst.v;
            prob.N = inst.N;
            prob.grid = inst.grid;
            ProductState st = hartree_minimize(prob, inst.hartree);
            CanonicalGroundState gs =
                canonical_ground(inst.W, inst.v, inst.N, inst.grid, inst.canonical);
            row.chi_product = st.chi_product;
            row.chi_canonical = gs.chi_N;
            row.gap = st.chi_product - gs.chi_N;
            row.inequality_holds = st.chi_product >= gs.chi_N - 1e-6;
        }
        if (inst.run_scattering) {
            ScatteringInequalityReport rep = inequality_report(inst.v);
            row.alpha = rep.alpha;
            row.alpha_tilde = rep.alpha_tilde;
            row.identity_residual = rep.identity_residual;
            row.inequality_holds = inst.run_energies
                                       ? (row.inequality_holds && rep.strict_inequality)
                                       : rep.strict_inequality;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace traplab
