#pragma once

#include <optional>

#include "traplab/eigensolve.hpp"
#include "traplab/fields.hpp"

namespace traplab {

// ---------------------------------------------------------------------------
// Gross-Pitaevskii: chi = inf { |grad phi|^2 + <W, phi^2> + 4 pi alpha |phi|_4^4 }.
// ---------------------------------------------------------------------------

struct GpOptions {
    double tol = 1e-9;        // relative energy change per sweep window
    int window = 25;
    int max_iter = 400000;
    double tau = 0.0;         // 0 = h^2/(4 dim) stability default
    int max_backtracks = 60;
};

struct GPResult {
    ScalarField phi;  // L2-normalized, nonnegative
    double chi_gp = 0.0;
    double alpha = 0.0;
    int iterations = 0;
    std::vector<double> energy_trace;  // sampled once per window
    double kinetic = 0.0, trap = 0.0, quartic = 0.0;
};

GPResult gp_minimize(const TrapPotential& W, double alpha, const Grid& grid,
                     const GpOptions& opts = {});

double gp_energy(const TrapPotential& W, double alpha, const ScalarField& phi);

// ---------------------------------------------------------------------------
// Hartree product states (pair kernel or Dirac coupling), optional tilt.
// ---------------------------------------------------------------------------

enum class HartreeMode { pair_kernel, dirac };

struct HartreeProblem {
    TrapPotential W = TrapPotential::power(2.0);
    HartreeMode mode = HartreeMode::pair_kernel;
    PairPotential v = PairPotential::zero();  // pair_kernel mode
    double dirac_lambda = 0.0;                // dirac mode coupling
    int N = 1;
    Grid grid;
    std::vector<ScalarField> tilt;  // optional; f_i enters as W - f_i
};

struct HartreeOptions {
    double tol = 1e-9;           // relative sweep energy change
    int max_sweeps = 600;
    int multistarts = 4;
    std::uint64_t seed = 1;
    double inner_tol_factor = 1e-2;  // inner eigensolve tol = factor * tol
    int inner_max_iter = 6000;
};

struct ProductState {
    std::vector<ScalarField> h;    // each L2-normalized
    std::vector<double> lambda;    // per-particle multipliers (inner eigenvalues)
    double chi_product = 0.0;      // energy per particle
    HartreeMode mode = HartreeMode::pair_kernel;
    double dirac_lambda = 0.0;
    int sweeps = 0;
    std::vector<double> seed_energies;  // per multistart, total energy
    bool monotone = true;
};

ProductState hartree_minimize(const HartreeProblem& prob, const HartreeOptions& opts = {});

// Total (1.11)-type energy of an arbitrary product state for the problem;
// order-independent accumulation (exactly permutation invariant).
double product_state_energy(const HartreeProblem& prob, const std::vector<ScalarField>& h,
                            const InteractionKernel* kernel);

// lambda_i recomputed from its defining formula at the given state.
std::vector<double> product_state_multipliers(const HartreeProblem& prob,
                                              const std::vector<ScalarField>& h,
                                              const InteractionKernel* kernel);

// Discrete Euler-Lagrange residuals per particle:
// || (-Delta + W - f_i + sum_{j != i} V h_j^2) h_i - lambda_i h_i ||_2.
std::vector<double> el_residual(const HartreeProblem& prob, const ProductState& state);

// ---------------------------------------------------------------------------
// Canonical N-body ground state on the product grid.
// ---------------------------------------------------------------------------

struct CanonicalOptions {
    int max_dims = 6;
    double tol = 1e-10;
    int max_iter = 60000;
    std::uint64_t seed = 1;
};

struct CanonicalGroundState {
    ScalarField h_star;   // on the dN-dimensional grid, L2-normalized, >= 0
    double chi_N = 0.0;   // eigenvalue / N
    double eigenvalue = 0.0;
    int N = 1;
    int iterations = 0;
    std::vector<std::uint8_t> excluded_mask;
};

// Assembles -Delta + 𝔚 + 𝔳 - f on the product grid; 𝔳 uses the same
// cell-averaged kernel as the Hartree functional so the product-state
// inequality holds exactly in the discretization. Hard cores exclude cells
// with |x_i - x_j| <= a; {W = inf} cells are excluded too.
CanonicalGroundState canonical_ground(const TrapPotential& W, const PairPotential& v, int N,
                                      const Grid& per_particle_grid,
                                      const CanonicalOptions& opts = {},
                                      const std::vector<ScalarField>* tilt = nullptr);

GridOperator assemble_canonical_operator(const TrapPotential& W, const PairPotential& v, int N,
                                         const Grid& per_particle_grid,
                                         const std::vector<ScalarField>* tilt = nullptr);

// ---------------------------------------------------------------------------
// Tilt (Gateaux) derivative check.
// ---------------------------------------------------------------------------

struct TiltReport {
    double fd_derivative = 0.0;   // d/dt N chi^(x)(f + t g) at t = 0 (Richardson)
    double pairing = 0.0;         // sum_i <g_i, h_i^2> at the tilt-f minimizer
    double rel_gap = 0.0;         // |fd + pairing| / max(1, |pairing|)
    bool nonsmooth_flag = false;  // minimizer-set discontinuity suspected
    double step_coarse = 0.0, step_fine = 0.0;
};

TiltReport tilt_derivative_check(const HartreeProblem& prob, const std::vector<ScalarField>& g,
                                 const HartreeOptions& opts = {});

// ---------------------------------------------------------------------------
// Rate functions. All return the evaluated value and its components.
// ---------------------------------------------------------------------------

struct RateReport {
    double rate = 0.0;
    double kinetic = 0.0;      // sum of Donsker-Varadhan terms
    double trap = 0.0;         // <𝔚, mu>
    double interaction = 0.0;  // pair/Dirac pairing
    double normalizer = 0.0;   // N chi
};

// I_N(mu) + <𝔚, mu> + <𝔳, mu> - N chi_N on the product grid.
RateReport rate_canonical(const DensityField& mu, const TrapPotential& W, const PairPotential& v,
                          int N, double chi_N);

// sum_i I_1(mu_i) + sum_i <W, mu_i> + sum_{i<j} <mu_i, V mu_j> - N chi.
RateReport rate_hartree(const std::vector<DensityField>& mu, const TrapPotential& W,
                        const InteractionKernel& kernel, double chi_product);

// sum_i I_1(mu_i) + sum_i <W, mu_i> + lambda sum_{i<j} <dmu_i/dx, dmu_j/dx> - N chi.
RateReport rate_dirac(const std::vector<DensityField>& mu, const TrapPotential& W, double lambda,
                      double chi_dirac);

// Distribution-of-the-mean rate evaluated at a supplied decomposition
// (no inner optimization): <W, mu> + (N/2) <mu, V mu>
//   + (1/N) sum_i I_1(mu_i) - (1/2N) sum_i <mu_i, V mu_i> - chi.
RateReport rate_mean_given_decomposition(const DensityField& mu,
                                         const std::vector<DensityField>& decomposition,
                                         const TrapPotential& W, const InteractionKernel& kernel,
                                         double chi_product);

}  // namespace traplab
