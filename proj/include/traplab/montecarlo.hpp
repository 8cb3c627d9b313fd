#pragma once

#include <array>
#include <map>
#include <memory>

#include "traplab/eigensolve.hpp"
#include "traplab/fields.hpp"
#include "traplab/rng.hpp"

namespace traplab {

// log-uniform Metropolis acceptance shared by every sampler in this module;
// -inf always rejects, +0 always accepts.
bool metropolis_accept(double delta_log_weight, CounterRng& rng);

// ---------------------------------------------------------------------------
// Brownian path ensembles (generator -Delta: per-axis increment variance
// 2 dt over a step dt, so the Feynman-Kac kinetic functional is |grad h|^2).
// ---------------------------------------------------------------------------

struct StartDistribution {
    enum class Kind { point, uniform_box } kind = Kind::uniform_box;
    std::vector<double> point;
    double box_half_width = 1.0;
};

struct PathEnsemble {
    int N = 1;
    int d = 2;
    double beta = 1.0;
    double dt = 0.01;
    int slices = 100;  // beta / dt; positions at k dt, k = 0..slices
    std::vector<std::vector<double>> pos;  // [path][(slices+1)*d]

    double* at(int path, int k) { return pos[path].data() + static_cast<std::size_t>(k) * d; }
    const double* at(int path, int k) const {
        return pos[path].data() + static_cast<std::size_t>(k) * d;
    }
    // Trapezoidal time weight of slice k.
    double weight(int k) const { return dt * ((k == 0 || k == slices) ? 0.5 : 1.0); }
};

PathEnsemble sample_free_paths(int N, int d, double beta, double dt,
                               const StartDistribution& start, CounterRng& rng);

// Trap Hamiltonian H = sum_i int_0^beta W(B_s^i) ds, trapezoidal quadrature.
double hamiltonian_H(const PathEnsemble& ens, const TrapPotential& W);
// Same-time pair Hamiltonian G = sum_{i<j} int v(|B_s^i - B_s^j|) ds.
double hamiltonian_G(const PathEnsemble& ens, const PairPotential& v);
// Path-pair Hamiltonian K = beta sum_{i<j} <mu_i, V mu_j> via binned
// occupation measures; include_self adds the i = j terms.
double hamiltonian_K(const PathEnsemble& ens, const InteractionKernel& kernel,
                     bool include_self = false);
// O((beta/dt)^2) direct double sum of (1.24)-type K; test oracle only.
double hamiltonian_K_direct(const PathEnsemble& ens, const PairPotential& v,
                            bool include_self = false);

// Occupation histogram of one path on a grid; escaped weight reported.
struct OccupationHistogram {
    DensityField density;
    double escaped = 0.0;
};
OccupationHistogram occupation(const PathEnsemble& ens, int path, const Grid& grid);
// Mean of the N per-path histograms.
OccupationHistogram occupation_mean(const PathEnsemble& ens, const Grid& grid);

// ---------------------------------------------------------------------------
// Metropolis sampler for the transformed path measures
//   canonical    ~ exp(-H - G),
//   hartree      ~ exp(-H - K),
//   hartree_self ~ exp(-H - K + self-terms).
// Proposals are free-measure reversible (Brownian bridges on segments, tail
// regrow, whole-path shifts), so acceptance uses Hamiltonian deltas only.
// Paths are confined to the bin grid's box: leaving it is an infinite delta.
// ---------------------------------------------------------------------------

enum class McModel { canonical, hartree, hartree_self };
enum class McMove { bridge_segment, endpoint, whole_shift };

struct BrownianSamplerOptions {
    McModel model = McModel::canonical;
    double coupling = 1.0;       // s in exp(-s U) for thermodynamic integration
    int max_bridge_slices = 24;
    double shift_scale = 0.4;
    bool confine_to_grid = true;
};

class BrownianSampler {
public:
    BrownianSampler(PathEnsemble ens, const TrapPotential& W, const PairPotential& v,
                    const Grid& bin_grid, const StartDistribution& start,
                    const BrownianSamplerOptions& opts);
    ~BrownianSampler();
    BrownianSampler(BrownianSampler&&) noexcept;

    void step(CounterRng& rng);                   // random move mix
    void step(McMove move, CounterRng& rng);
    const PathEnsemble& ensemble() const;
    double potential_energy() const;              // U = H + G (or H + K)
    double acceptance_rate() const;
    long proposals() const;
    // accumulate the current occupation into a running mean histogram
    void accumulate_occupation(std::vector<DensityField>& acc, double w) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Continuous-time random walks.
// ---------------------------------------------------------------------------

using Site = std::array<int, 4>;

struct WalkTrajectory {
    int d = 2;
    double beta = 1.0;
    double rate_per_edge = 1.0;        // jump rate toward each of the 2d neighbors
    std::vector<Site> sites;           // sites[k] occupied on [t_k, t_{k+1})
    std::vector<double> jump_times;    // arrival time at sites[k+1]; strictly in (0, beta)
};

// Exact event-driven simulation; holding times Exp(2 d rate_per_edge).
WalkTrajectory simulate_walk(int d, double beta, double rate_per_edge, const Site& start,
                             CounterRng& rng);
std::vector<WalkTrajectory> ctrw_simulate(int N, double beta, int d, std::uint64_t seed);

// Local times l_beta(z); values sum to beta exactly by construction.
std::map<Site, double> local_times(const WalkTrajectory& traj);

// alpha_beta^{(i,j)} = beta^{-2} sum_z l_i(z) l_j(z).
double intersection_alpha(const WalkTrajectory& ti, const WalkTrajectory& tj);
double intersection_alpha(const std::map<Site, double>& li, const std::map<Site, double>& lj,
                          double beta);

// <L_i, L_j> for the rescaled densities L(x) = (xi^d/beta) l(floor(x xi)).
double rescaled_inner(const std::map<Site, double>& li, const std::map<Site, double>& lj,
                      double beta, double xi, int d);

// Exact overlap binning of L onto a grid; mass is conserved up to escape.
OccupationHistogram rescaled_L_density(const WalkTrajectory& traj, double p, const Grid& grid);
double xi_beta(double beta, double p);

// log-weight of the discrete Dirac model:
// -(1/beta) sum_i int W(S_t^i) dt - lambda beta^{(d+p)/(2+p)} sum_{i<j} alpha^{(i,j)},
// with W(z) = |z|^p evaluated exactly over holding intervals.
double dirac_log_weight(const std::vector<WalkTrajectory>& trajs, double p, double lambda);

struct DiracSamplerOptions {
    double p = 2.0;
    double lambda = 1.0;
    double window_frac = 0.2;
};

class DiracSampler {
public:
    DiracSampler(std::vector<WalkTrajectory> trajs, const DiracSamplerOptions& opts);
    ~DiracSampler();
    DiracSampler(DiracSampler&&) noexcept;
    void step(CounterRng& rng);
    const std::vector<WalkTrajectory>& trajectories() const;
    double acceptance_rate() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Lattice canonical ensemble: N continuous-time walks on the grid graph
// (rate 1/h^2 per edge, the generator of the discrete Laplacian), under
// exp(-s int q dt) with q = 𝔚 + 𝔳 assembled exactly as in the variational
// module, so thermo_logZ and fk_oracle target identical objects.
// ---------------------------------------------------------------------------

struct LatticeCanonical {
    Grid grid;                 // per-particle grid
    int N = 1;
    double beta = 1.0;
    TrapPotential W = TrapPotential::power(2.0);
    PairPotential v = PairPotential::zero();
};

class LatticeSampler {
public:
    LatticeSampler(const LatticeCanonical& model, double coupling, std::uint64_t seed,
                   std::uint64_t stream);
    ~LatticeSampler();
    LatticeSampler(LatticeSampler&&) noexcept;
    void step(CounterRng& rng);
    double potential_energy() const;  // U = int q dt along the current walks
    double acceptance_rate() const;
    const std::vector<WalkTrajectory>& walks() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Thermodynamic integration and the Feynman-Kac oracle.
// ---------------------------------------------------------------------------

struct ThermoOptions {
    int gauss_order = 8;
    int chains = 4;
    int steps = 20000;          // per chain per ladder node (20% burn-in)
    std::uint64_t seed = 1;
    int threads = 1;
    double overlap_sigmas = 8.0;  // neighbor-node overlap diagnostic
};

struct ThermoResult {
    double minus_logZ_per_nbeta = 0.0;  // (-1/(N beta)) log Z
    double stderr_per_nbeta = 0.0;
    double logZ = 0.0;
    double logZ_stderr = 0.0;
    std::vector<double> nodes, node_means, node_sds, node_rhat, node_acceptance;
};

ThermoResult thermo_logZ_lattice(const LatticeCanonical& model, const ThermoOptions& opts);

// Brownian-path variant (canonical or hartree models); carries the
// time-discretization bias of the path ensemble.
struct BrownianThermoSpec {
    McModel model = McModel::hartree;
    TrapPotential W = TrapPotential::power(2.0);
    PairPotential v = PairPotential::zero();
    Grid bin_grid;
    StartDistribution start;
    int N = 1;
    double beta = 1.0;
    double dt = 0.02;
};
ThermoResult thermo_logZ_brownian(const BrownianThermoSpec& spec, const ThermoOptions& opts);

// Exact lattice Feynman-Kac value log E_nu[e^{-beta <𝔚+𝔳, mu_beta>}] via
// Krylov exponential action on the canonical operator, plus the slope
// (log at 2 beta - log at beta) / beta for rate extraction.
struct FkResult {
    double log_value = 0.0;  // at beta
    double log_value_2beta = 0.0;
    double slope = 0.0;
};
FkResult fk_oracle(const TrapPotential& W, const PairPotential& v, int N, const Grid& grid,
                   double beta, std::int64_t max_states = 1000000);

// Split-Rhat over chains for scalar samples; ~1 at convergence.
double split_rhat(const std::vector<std::vector<double>>& chains);

}  // namespace traplab
