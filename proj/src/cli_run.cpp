#include "traplab/cli_run.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "traplab/experiments.hpp"

namespace traplab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text_atomic(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error(ErrorCode::generic, "cannot open " + tmp.string());
        out << text;
    }
    fs::rename(tmp, path);
}

struct RunContext {
    std::string problem;
    ConfigData cfg;
    fs::path out;
    std::uint64_t seed = 1;
    int threads = 1;
    json result;
    std::vector<std::string> files;
    std::map<std::string, double> headline;

    void add_file(const std::string& rel) { files.push_back(rel); }

    void write_result() {
        write_text_atomic(out / "result.json", result.dump(2) + "\n");
        add_file("result.json");
    }

    void write_csv(const std::string& rel, const std::string& header,
                   const std::vector<std::vector<double>>& rows) {
        std::ostringstream os;
        os << header << "\n";
        char buf[32];
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.17g", row[i]);
                os << (i ? "," : "") << buf;
            }
            os << "\n";
        }
        write_text_atomic(out / rel, os.str());
        add_file(rel);
    }
};

json field_meta(const ScalarField& f) {
    return json{{"dim", f.grid.dim}, {"n", f.grid.n}, {"R", f.grid.half_width}};
}

StartDistribution start_from_config(const ConfigData& cfg, const Grid& grid) {
    StartDistribution st;
    std::string kind = cfg.get("mc", "start", "uniform-box");
    st.kind = (kind == "point") ? StartDistribution::Kind::point
                                : StartDistribution::Kind::uniform_box;
    st.box_half_width = cfg.get_num("mc", "start_half_width", 0.5 * grid.half_width);
    st.point.assign(grid.dim, 0.0);
    return st;
}

// --- per-problem runners ----------------------------------------------------

void run_gp(RunContext& ctx) {
    Grid grid = grid_from_config(ctx.cfg);
    TrapPotential W = trap_from_config(ctx.cfg);
    GpOptions opts;
    opts.tol = ctx.cfg.get_num("gp", "tol", 1e-9);
    opts.max_iter = static_cast<int>(ctx.cfg.get_int("gp", "max_iter", 400000));
    double alpha = ctx.cfg.get_num("gp", "alpha", 0.0);
    GPResult res = gp_minimize(W, alpha, grid, opts);

    fs::create_directories(ctx.out / "fields");
    write_field((ctx.out / "fields" / "phi.field").string(), res.phi);
    ctx.add_file("fields/phi.field");
    std::vector<std::vector<double>> trace;
    for (std::size_t i = 0; i < res.energy_trace.size(); ++i)
        trace.push_back({static_cast<double>(i), res.energy_trace[i]});
    ctx.write_csv("energy_trace.csv", "window,energy", trace);

    ctx.result = json{{"chi_gp", res.chi_gp},
                      {"alpha", alpha},
                      {"iterations", res.iterations},
                      {"kinetic", res.kinetic},
                      {"trap", res.trap},
                      {"quartic", res.quartic},
                      {"phi", field_meta(res.phi)}};
    ctx.headline["chi_gp"] = res.chi_gp;
}

void run_hartree(RunContext& ctx) {
    HartreeProblem prob;
    prob.grid = grid_from_config(ctx.cfg);
    prob.W = trap_from_config(ctx.cfg);
    prob.N = static_cast<int>(ctx.cfg.get_int("hartree", "N", 2));
    std::string mode = ctx.cfg.get("hartree", "mode", "pair");
    if (mode == "dirac") {
        prob.mode = HartreeMode::dirac;
        prob.dirac_lambda = ctx.cfg.get_num("hartree", "lambda", 1.0);
    } else {
        prob.v = pair_from_config(ctx.cfg);
    }
    HartreeOptions opts;
    opts.tol = ctx.cfg.get_num("hartree", "tol", 1e-9);
    opts.max_sweeps = static_cast<int>(ctx.cfg.get_int("hartree", "max_sweeps", 600));
    opts.multistarts = static_cast<int>(ctx.cfg.get_int("hartree", "multistarts", 4));
    opts.seed = ctx.seed;
    ProductState st = hartree_minimize(prob, opts);
    std::vector<double> resid = el_residual(prob, st);

    fs::create_directories(ctx.out / "fields");
    for (int i = 0; i < prob.N; ++i) {
        std::string rel = "fields/h_" + std::to_string(i) + ".field";
        write_field((ctx.out / rel).string(), st.h[i]);
        ctx.add_file(rel);
    }
    ctx.result = json{{"chi_product", st.chi_product},
                      {"lambda", st.lambda},
                      {"el_residual", resid},
                      {"sweeps", st.sweeps},
                      {"seed_energies", st.seed_energies},
                      {"N", prob.N},
                      {"mode", mode}};
    ctx.headline["chi_product"] = st.chi_product;
}

void run_canonical(RunContext& ctx) {
    Grid grid = grid_from_config(ctx.cfg);
    TrapPotential W = trap_from_config(ctx.cfg);
    PairPotential v = pair_from_config(ctx.cfg);
    int N = static_cast<int>(ctx.cfg.get_int("canonical", "N", 2));
    CanonicalOptions opts;
    opts.tol = ctx.cfg.get_num("canonical", "tol", 1e-10);
    opts.max_dims = static_cast<int>(ctx.cfg.get_int("canonical", "max_dims", 6));
    CanonicalGroundState gs = canonical_ground(W, v, N, grid, opts);

    fs::create_directories(ctx.out / "fields");
    write_field((ctx.out / "fields" / "h_star.field").string(), gs.h_star);
    ctx.add_file("fields/h_star.field");
    ctx.result = json{{"chi_N", gs.chi_N},
                      {"eigenvalue", gs.eigenvalue},
                      {"iterations", gs.iterations},
                      {"N", N}};
    ctx.headline["chi_N"] = gs.chi_N;
}

void run_scattering(RunContext& ctx) {
    PairPotential v = pair_from_config(ctx.cfg);
    int d = static_cast<int>(ctx.cfg.get_int("scattering", "d", 3));
    json res;
    ScatteringSolution sol;
    if (d == 3) {
        ScatteringOptions opts;
        opts.R_max = ctx.cfg.get_num("scattering", "R_max", 0.0);
        sol = alpha_d3(v, opts);
        res["alpha"] = sol.alpha;
        if (ctx.cfg.get_bool("scattering", "run_inequality", false)) {
            ScatteringInequalityReport rep = inequality_report(v, opts);
            res["alpha_tilde"] = rep.alpha_tilde;
            res["identity_lhs"] = rep.identity_lhs;
            res["identity_rhs"] = rep.identity_rhs;
            res["identity_residual"] = rep.identity_residual;
            res["alpha_lt_alpha_tilde"] = rep.strict_inequality;
        }
    } else if (d == 2) {
        sol = alpha_d2(v, ctx.cfg.get_num("scattering", "R_star", 0.0),
                       ctx.cfg.get_num("scattering", "R", 0.0));
        res["alpha"] = sol.alpha;
    } else {
        throw config_error("scattering.d must be 2 or 3");
    }
    res["residual"] = sol.residual;
    res["R_max"] = sol.R_max;
    if (!sol.ladder.empty()) {
        json lad = json::array();
        for (auto& [M, a] : sol.ladder) lad.push_back(json{{"M", M}, {"alpha", a}});
        res["cap_ladder"] = lad;
    }
    std::vector<std::vector<double>> prof;
    for (std::size_t i = 0; i < sol.r_samples.size(); i += 8)
        prof.push_back({sol.r_samples[i], sol.u_samples[i]});
    ctx.write_csv("u_profile.csv", "r,u", prof);
    ctx.result = std::move(res);
    ctx.headline["alpha"] = sol.alpha;
}

void run_mc(RunContext& ctx, McModel default_model) {
    Grid grid = grid_from_config(ctx.cfg);
    TrapPotential W = trap_from_config(ctx.cfg);
    PairPotential v = pair_from_config(ctx.cfg);
    int N = static_cast<int>(ctx.cfg.get_int("mc", "N", 1));
    double beta = ctx.cfg.get_num("mc", "beta", 2.0);
    double dt = ctx.cfg.get_num("mc", "dt", 0.02);
    int steps = static_cast<int>(ctx.cfg.get_int("mc", "steps", 20000));
    int chains = static_cast<int>(ctx.cfg.get_int("mc", "chains", 4));
    std::string model_name = ctx.cfg.get("mc", "model", "");
    McModel model = default_model;
    if (model_name == "canonical") model = McModel::canonical;
    else if (model_name == "hartree") model = McModel::hartree;
    else if (model_name == "hartree-self") model = McModel::hartree_self;
    else if (!model_name.empty()) throw config_error("mc.model must be canonical|hartree|hartree-self");
    StartDistribution start = start_from_config(ctx.cfg, grid);

    std::vector<DensityField> chain_mean;
    std::vector<double> acc_rates;
    std::vector<std::vector<double>> u_chains;
    for (int c = 0; c < chains; ++c) {
        CounterRng rng(ctx.seed, 0x5151ull + c);
        PathEnsemble ens;
        ens.N = N;
        ens.d = grid.dim;
        ens.beta = beta;
        ens.dt = dt;
        ens.slices = static_cast<int>(std::llround(beta / dt));
        ens.pos.assign(N, std::vector<double>(static_cast<std::size_t>(ens.slices + 1) * ens.d));
        for (int i = 0; i < N; ++i) {
            std::vector<double> x0(ens.d);
            for (int a = 0; a < ens.d; ++a)
                x0[a] = rng.uniform(-start.box_half_width, start.box_half_width);
            for (int k = 0; k <= ens.slices; ++k) std::copy(x0.begin(), x0.end(), ens.at(i, k));
        }
        BrownianSamplerOptions so;
        so.model = model;
        BrownianSampler sampler(std::move(ens), W, v, grid, start, so);
        int burn = steps / 5;
        std::vector<DensityField> acc;
        long samples = 0;
        std::vector<double> us;
        for (int s = 0; s < steps; ++s) {
            sampler.step(rng);
            if (s >= burn && s % 20 == 0) {
                sampler.accumulate_occupation(acc, 1.0);
                ++samples;
                us.push_back(sampler.potential_energy());
            }
        }
        DensityField mean(grid);
        for (auto& a : acc)
            for (std::size_t i = 0; i < mean.values.size(); ++i)
                mean.values[i] += a.values[i] / (samples * N);
        chain_mean.push_back(std::move(mean));
        acc_rates.push_back(sampler.acceptance_rate());
        u_chains.push_back(std::move(us));
    }
    DensityField occ(grid);
    for (auto& m : chain_mean)
        for (std::size_t i = 0; i < occ.values.size(); ++i)
            occ.values[i] += m.values[i] / chains;

    fs::create_directories(ctx.out / "fields");
    write_field((ctx.out / "fields" / "occupation.field").string(), occ);
    ctx.add_file("fields/occupation.field");

    ctx.result = json{{"model", model == McModel::canonical
                                    ? "canonical"
                                    : (model == McModel::hartree ? "hartree" : "hartree-self")},
                      {"N", N},
                      {"beta", beta},
                      {"dt", dt},
                      {"steps", steps},
                      {"chains", chains},
                      {"acceptance", acc_rates},
                      {"rhat_U", split_rhat(u_chains)}};

    if (ctx.cfg.get_bool("mc", "thermo", false)) {
        if (model == McModel::canonical) {
            LatticeCanonical lat{grid, N, beta, W, v};
            ThermoOptions to;
            to.chains = chains;
            to.steps = steps;
            to.seed = ctx.seed;
            to.threads = ctx.threads;
            to.gauss_order = static_cast<int>(ctx.cfg.get_int("mc", "gauss_order", 8));
            ThermoResult th = thermo_logZ_lattice(lat, to);
            FkResult fk = fk_oracle(W, v, N, grid, beta);
            ctx.result["thermo"] = json{{"minus_logZ_per_nbeta", th.minus_logZ_per_nbeta},
                                        {"stderr", th.stderr_per_nbeta},
                                        {"logZ", th.logZ},
                                        {"logZ_stderr", th.logZ_stderr},
                                        {"fk_logZ", fk.log_value},
                                        {"fk_slope", fk.slope},
                                        {"node_rhat", th.node_rhat},
                                        {"node_acceptance", th.node_acceptance}};
            ctx.headline["thermo_minus_logZ_per_nbeta"] = th.minus_logZ_per_nbeta;
        } else {
            BrownianThermoSpec spec;
            spec.model = model;
            spec.W = W;
            spec.v = v;
            spec.bin_grid = grid;
            spec.start = start;
            spec.N = N;
            spec.beta = beta;
            spec.dt = dt;
            ThermoOptions to;
            to.chains = chains;
            to.steps = steps;
            to.seed = ctx.seed;
            to.threads = ctx.threads;
            ThermoResult th = thermo_logZ_brownian(spec, to);
            ctx.result["thermo"] = json{{"minus_logZ_per_nbeta", th.minus_logZ_per_nbeta},
                                        {"stderr", th.stderr_per_nbeta},
                                        {"logZ", th.logZ},
                                        {"logZ_stderr", th.logZ_stderr}};
            ctx.headline["thermo_minus_logZ_per_nbeta"] = th.minus_logZ_per_nbeta;
        }
    }
}

void run_rw_dirac(RunContext& ctx) {
    double p = ctx.cfg.get_num("dirac", "p", 2.0);
    double lambda = ctx.cfg.get_num("dirac", "lambda", 1.0);
    double beta = ctx.cfg.get_num("dirac", "beta", 500.0);
    int N = static_cast<int>(ctx.cfg.get_int("dirac", "N", 2));
    int steps = static_cast<int>(ctx.cfg.get_int("dirac", "steps", 20000));
    int chains = static_cast<int>(ctx.cfg.get_int("dirac", "chains", 4));
    Grid grid = grid_from_config(ctx.cfg);
    if (!(p > grid.dim - 2)) throw config_error("rw-dirac: requires p > d - 2");

    DensityField mean(grid);
    std::vector<double> acc_rates;
    std::vector<std::vector<double>> w_chains;
    long total_samples = 0;
    for (int c = 0; c < chains; ++c) {
        CounterRng rng(ctx.seed, 0xD1ACull + c);
        std::vector<WalkTrajectory> trajs;
        for (int i = 0; i < N; ++i) {
            WalkTrajectory tr;
            tr.d = grid.dim;
            tr.beta = beta;
            tr.rate_per_edge = 1.0;
            tr.sites.push_back(Site{});
            trajs.push_back(std::move(tr));
        }
        DiracSamplerOptions so;
        so.p = p;
        so.lambda = lambda;
        DiracSampler sampler(std::move(trajs), so);
        int burn = steps / 5;
        std::vector<double> ws;
        for (int s = 0; s < steps; ++s) {
            sampler.step(rng);
            if (s >= burn && s % 10 == 0) {
                for (int i = 0; i < N; ++i) {
                    OccupationHistogram h =
                        rescaled_L_density(sampler.trajectories()[i], p, grid);
                    for (std::size_t q = 0; q < mean.values.size(); ++q)
                        mean.values[q] += h.density.values[q];
                }
                ws.push_back(dirac_log_weight(sampler.trajectories(), p, lambda));
                ++total_samples;
            }
        }
        acc_rates.push_back(sampler.acceptance_rate());
        w_chains.push_back(std::move(ws));
    }
    for (auto& v : mean.values) v /= (total_samples * N);

    fs::create_directories(ctx.out / "fields");
    write_field((ctx.out / "fields" / "L_mean.field").string(), mean);
    ctx.add_file("fields/L_mean.field");
    ctx.result = json{{"p", p},
                      {"lambda", lambda},
                      {"beta", beta},
                      {"N", N},
                      {"xi_beta", xi_beta(beta, p)},
                      {"rate_scale", std::pow(beta, p / (2.0 + p))},
                      {"acceptance", acc_rates},
                      {"rhat_logweight", split_rhat(w_chains)}};
    ctx.headline["xi_beta"] = xi_beta(beta, p);
}

void run_sweep_large_n(RunContext& ctx) {
    LargeNSweepConfig cfg;
    cfg.grid = grid_from_config(ctx.cfg);
    cfg.W = trap_from_config(ctx.cfg);
    cfg.v = pair_from_config(ctx.cfg);
    cfg.d = cfg.grid.dim;
    cfg.N_list.clear();
    for (double n : ctx.cfg.get_list("sweep", "N_list")) cfg.N_list.push_back(static_cast<int>(n));
    if (cfg.N_list.empty()) cfg.N_list = {2, 4, 8, 16};
    cfg.hartree.seed = ctx.seed;
    cfg.hartree.multistarts = static_cast<int>(ctx.cfg.get_int("hartree", "multistarts", 2));
    cfg.hartree.tol = ctx.cfg.get_num("hartree", "tol", 1e-9);
    SweepResult res = large_n_sweep(cfg);

    std::vector<std::vector<double>> rows;
    for (const auto& pt : res.points)
        rows.push_back({pt.axis, pt.values.at("chi_product"), pt.values.at("gap"),
                        pt.values.at("tv")});
    ctx.write_csv("sweep.csv", "N,chi_product,gap,tv", rows);
    std::vector<std::vector<double>> gaps, tvs;
    for (const auto& pt : res.points) {
        gaps.push_back({pt.axis, pt.values.at("gap")});
        tvs.push_back({pt.axis, pt.values.at("tv")});
    }
    ctx.write_csv("gap_vs_N.csv", "N,gap", gaps);
    ctx.write_csv("tv_vs_N.csv", "N,tv", tvs);

    json pts = json::array();
    for (const auto& pt : res.points)
        pts.push_back(json{{"N", pt.axis},
                           {"chi_product", pt.values.at("chi_product")},
                           {"gap", pt.values.at("gap")},
                           {"tv", pt.values.at("tv")}});
    // Theorem 1.14 reference: the GP parameter is the integral surrogate
    // alpha~(v), not the scattering length alpha(v) of the Thm 1.13 regime.
    ctx.result = json{{"reference_chi_gp", res.reference.at("chi_gp")},
                      {"alpha_tilde", res.reference.at("alpha_tilde")},
                      {"reference_note", "GP parameter is alpha~(v) (integral), not alpha(v)"},
                      {"points", pts}};
    ctx.headline["chi_gp"] = res.reference.at("chi_gp");
}

void run_sweep_beta(RunContext& ctx) {
    std::string which = ctx.cfg.get("sweep", "model", "canonical");
    std::vector<double> betas = ctx.cfg.get_list("sweep", "beta_list");
    if (betas.empty()) betas = {1.0, 2.0, 4.0};
    if (which == "canonical") {
        BetaSweepCanonicalConfig cfg;
        cfg.grid = grid_from_config(ctx.cfg);
        cfg.W = trap_from_config(ctx.cfg);
        cfg.v = pair_from_config(ctx.cfg);
        cfg.N = static_cast<int>(ctx.cfg.get_int("canonical", "N", 1));
        cfg.beta_list = betas;
        cfg.run_thermo = ctx.cfg.get_bool("sweep", "thermo", false);
        cfg.thermo.seed = ctx.seed;
        cfg.thermo.threads = ctx.threads;
        SweepResult res = beta_sweep_canonical(cfg);
        std::vector<std::vector<double>> rows;
        for (const auto& pt : res.points)
            rows.push_back({pt.axis, pt.values.at("slope"), pt.values.at("slope_gap")});
        ctx.write_csv("sweep.csv", "beta,slope,slope_gap", rows);
        json pts = json::array();
        for (const auto& pt : res.points) pts.push_back(json{{"beta", pt.axis}, {"values", pt.values}});
        ctx.result = json{{"chi_N", res.reference.at("chi_N")},
                          {"eigenvalue", res.reference.at("eigenvalue")},
                          {"points", pts}};
        ctx.headline["chi_N"] = res.reference.at("chi_N");
    } else if (which == "hartree" || which == "canonical-occupation") {
        OccupationSweepResult res;
        if (which == "hartree") {
            BetaSweepHartreeConfig cfg;
            cfg.grid = grid_from_config(ctx.cfg);
            cfg.W = trap_from_config(ctx.cfg);
            cfg.v = pair_from_config(ctx.cfg);
            cfg.N = static_cast<int>(ctx.cfg.get_int("hartree", "N", 2));
            cfg.beta_list = betas;
            cfg.seed = ctx.seed;
            cfg.threads = ctx.threads;
            cfg.steps = static_cast<int>(ctx.cfg.get_int("sweep", "steps", 30000));
            cfg.chains = static_cast<int>(ctx.cfg.get_int("sweep", "chains", 4));
            cfg.dt = ctx.cfg.get_num("sweep", "dt", 0.02);
            cfg.hartree.seed = ctx.seed;
            res = beta_sweep_hartree(cfg);
        } else {
            BetaSweepCanonicalOccConfig cfg;
            cfg.grid = grid_from_config(ctx.cfg);
            cfg.W = trap_from_config(ctx.cfg);
            cfg.v = pair_from_config(ctx.cfg);
            cfg.N = static_cast<int>(ctx.cfg.get_int("canonical", "N", 1));
            cfg.beta_list = betas;
            cfg.seed = ctx.seed;
            cfg.threads = ctx.threads;
            cfg.steps = static_cast<int>(ctx.cfg.get_int("sweep", "steps", 30000));
            cfg.chains = static_cast<int>(ctx.cfg.get_int("sweep", "chains", 4));
            cfg.dt = ctx.cfg.get_num("sweep", "dt", 0.02);
            res = beta_sweep_canonical_occupation(cfg);
        }
        std::vector<std::vector<double>> rows;
        for (const auto& pt : res.points)
            rows.push_back({pt.beta, pt.tv, pt.tv_stderr, pt.acceptance});
        ctx.write_csv("sweep.csv", "beta,tv,tv_stderr,acceptance", rows);
        std::vector<std::vector<double>> tvrows;
        for (const auto& pt : res.points) tvrows.push_back({pt.beta, pt.tv});
        ctx.write_csv("tv_vs_beta.csv", "beta,tv", tvrows);
        json pts = json::array();
        for (const auto& pt : res.points)
            pts.push_back(json{{"beta", pt.beta},
                               {"tv", pt.tv},
                               {"tv_stderr", pt.tv_stderr},
                               {"acceptance", pt.acceptance}});
        ctx.result = json{{"reference_chi", res.reference_chi}, {"points", pts}, {"model", which}};
        ctx.headline["reference_chi"] = res.reference_chi;
    } else {
        throw config_error("sweep.model must be canonical|hartree|canonical-occupation");
    }
}

void run_sweep_lambda(RunContext& ctx) {
    LambdaSweepDiracConfig cfg;
    cfg.grid = grid_from_config(ctx.cfg);
    cfg.d = cfg.grid.dim;
    cfg.p = ctx.cfg.get_num("dirac", "p", 2.0);
    cfg.N = static_cast<int>(ctx.cfg.get_int("dirac", "N", 2));
    cfg.lambda_list = ctx.cfg.get_list("sweep", "lambda_list");
    if (cfg.lambda_list.empty()) cfg.lambda_list = {1.0};
    cfg.beta_list = ctx.cfg.get_list("sweep", "beta_list");
    if (cfg.beta_list.empty()) cfg.beta_list = {250.0, 1000.0, 4000.0};
    cfg.steps = static_cast<int>(ctx.cfg.get_int("sweep", "steps", 20000));
    cfg.chains = static_cast<int>(ctx.cfg.get_int("sweep", "chains", 4));
    cfg.seed = ctx.seed;
    cfg.threads = ctx.threads;
    cfg.hartree.seed = ctx.seed;
    DiracSweepResult res = lambda_sweep_dirac(cfg);
    std::vector<std::vector<double>> rows;
    for (const auto& pt : res.points)
        rows.push_back({pt.lambda, pt.beta, pt.tv, pt.tv_stderr, pt.acceptance, pt.chi_dirac});
    ctx.write_csv("sweep.csv", "lambda,beta,tv,tv_stderr,acceptance,chi_dirac", rows);
    json pts = json::array();
    for (const auto& pt : res.points)
        pts.push_back(json{{"lambda", pt.lambda},
                           {"beta", pt.beta},
                           {"tv", pt.tv},
                           {"tv_stderr", pt.tv_stderr},
                           {"chi_dirac", pt.chi_dirac}});
    ctx.result = json{{"points", pts}, {"rate_scale_exponent", cfg.p / (2.0 + cfg.p)}};
}

void run_report_inequalities(RunContext& ctx) {
    std::vector<InequalityInstance> instances;
    bool energies = ctx.cfg.get_bool("inequalities", "energies", false);
    bool scattering = ctx.cfg.get_bool("inequalities", "scattering", false);
    if (energies || scattering) {
        InequalityInstance inst;
        inst.name = "configured";
        inst.run_energies = energies;
        inst.run_scattering = scattering;
        if (energies) {
            inst.grid = grid_from_config(ctx.cfg);
            inst.W = trap_from_config(ctx.cfg);
            inst.N = static_cast<int>(ctx.cfg.get_int("hartree", "N", 2));
            inst.hartree.seed = ctx.seed;
        }
        inst.v = pair_from_config(ctx.cfg);
        instances.push_back(std::move(inst));
    }
    std::vector<InequalityRow> rows = inequality_report_run(instances);
    std::vector<std::vector<double>> csv;
    for (const auto& r : rows)
        csv.push_back({r.chi_product, r.chi_canonical, r.gap, r.alpha, r.alpha_tilde,
                       r.identity_residual, r.inequality_holds ? 1.0 : 0.0});
    ctx.write_csv("table.csv",
                  "chi_product,chi_canonical,gap,alpha,alpha_tilde,identity_residual,holds", csv);
    json jrows = json::array();
    for (const auto& r : rows)
        jrows.push_back(json{{"name", r.name},
                             {"chi_product", r.chi_product},
                             {"chi_canonical", r.chi_canonical},
                             {"gap", r.gap},
                             {"alpha", r.alpha},
                             {"alpha_tilde", r.alpha_tilde},
                             {"identity_residual", r.identity_residual},
                             {"holds", r.inequality_holds}});
    ctx.result = json{{"rows", jrows}};
}

}  // namespace

std::vector<Diagnostic> validate_subcommand(const std::string& problem,
                                            const std::string& config_path) {
    ConfigData cfg = parse_config_file(config_path);
    return validate_config(cfg, problem);
}

void run_subcommand(const std::string& problem, const std::string& config_path,
                    const std::string& out_dir, const RunOverrides& overrides) {
    auto t0 = std::chrono::steady_clock::now();
    ConfigData cfg = parse_config_file(config_path);
    std::vector<Diagnostic> diags = validate_config(cfg, problem);
    if (!diags.empty()) {
        std::string msg = "config invalid:";
        for (const auto& d : diags) msg += "\n  [" + d.where + "] " + d.message;
        throw config_error(msg);
    }

    RunContext ctx;
    ctx.problem = problem;
    ctx.cfg = cfg;
    ctx.out = out_dir;
    ctx.seed = static_cast<std::uint64_t>(cfg.get_int("run", "seed", 1));
    ctx.threads = static_cast<int>(cfg.get_int("run", "threads", 1));
    if (overrides.seed) ctx.seed = *overrides.seed;
    if (overrides.threads) ctx.threads = *overrides.threads;
    fs::create_directories(ctx.out);

    if (problem == "gp") run_gp(ctx);
    else if (problem == "hartree") run_hartree(ctx);
    else if (problem == "canonical") run_canonical(ctx);
    else if (problem == "scattering") run_scattering(ctx);
    else if (problem == "mc-canonical") run_mc(ctx, McModel::canonical);
    else if (problem == "mc-hartree") run_mc(ctx, McModel::hartree);
    else if (problem == "rw-dirac") run_rw_dirac(ctx);
    else if (problem == "sweep-large-n") run_sweep_large_n(ctx);
    else if (problem == "sweep-beta") run_sweep_beta(ctx);
    else if (problem == "sweep-lambda") run_sweep_lambda(ctx);
    else if (problem == "report-inequalities") run_report_inequalities(ctx);
    else throw config_error("unknown subcommand '" + problem + "'");

    ctx.write_result();

    auto t1 = std::chrono::steady_clock::now();
    json manifest = {
        {"tool", "traplab"},
        {"version", kToolVersion},
        {"problem", problem},
        {"config_hash", fnv1a_hash(cfg.canonical_text())},
        {"seed", ctx.seed},
        {"threads", ctx.threads},
        {"wall_time_ms",
         std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count()},
        {"files", ctx.files},
        {"headline", ctx.headline},
    };
    write_text_atomic(ctx.out / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace traplab
