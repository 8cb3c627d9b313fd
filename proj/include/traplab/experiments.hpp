#pragma once

#include "traplab/montecarlo.hpp"
#include "traplab/scattering.hpp"
#include "traplab/variational.hpp"

namespace traplab {

struct SweepPoint {
    double axis = 0.0;                       // N, beta or lambda
    std::map<std::string, double> values;    // named results for this point
};

struct SweepResult {
    std::string axis_name;
    std::vector<SweepPoint> points;
    std::map<std::string, double> reference;  // e.g. the GP value and alpha~
};

// Theorem-1.14 style study: v_N = N^{d-1} v(. N), Hartree minimization per N,
// reference chi^GP at alpha~(v), gap and tv(phi_N^2, (phi^GP)^2) per point.
struct LargeNSweepConfig {
    TrapPotential W = TrapPotential::power(2.0);
    PairPotential v = PairPotential::gaussian(1.0, 1.0);
    int d = 2;
    std::vector<int> N_list = {2, 4, 8, 16};
    Grid grid;
    HartreeOptions hartree;
    GpOptions gp;
};
SweepResult large_n_sweep(const LargeNSweepConfig& cfg);

// fk_oracle slopes (and optional thermo) against chi_N over a beta ladder.
struct BetaSweepCanonicalConfig {
    TrapPotential W = TrapPotential::power(2.0);
    PairPotential v = PairPotential::zero();
    int N = 1;
    Grid grid;
    std::vector<double> beta_list = {1.0, 2.0, 4.0};
    bool run_thermo = false;
    ThermoOptions thermo;
    CanonicalOptions canonical;
};
SweepResult beta_sweep_canonical(const BetaSweepCanonicalConfig& cfg);

// Occupation tv-distance to the Hartree minimizer densities over beta.
struct BetaSweepHartreeConfig {
    TrapPotential W = TrapPotential::power(2.0);
    PairPotential v = PairPotential::gaussian(4.0, 0.5);
    int N = 2;
    Grid grid;
    std::vector<double> beta_list = {1.0, 3.0, 9.0};
    double dt = 0.02;
    int chains = 4;
    int steps = 30000;
    std::uint64_t seed = 1;
    int threads = 1;
    HartreeOptions hartree;
    McModel model = McModel::hartree;  // hartree or canonical (N=1) reuse
};
struct OccupationSweepPoint {
    double beta = 0.0;
    double tv = 0.0;
    double tv_stderr = 0.0;  // jackknife over chains
    double acceptance = 0.0;
};
struct OccupationSweepResult {
    std::vector<OccupationSweepPoint> points;
    double reference_chi = 0.0;
};
OccupationSweepResult beta_sweep_hartree(const BetaSweepHartreeConfig& cfg);

// Canonical occupation sweep against the N-body ground-state density; the
// ensemble is the Brownian canonical model binned on the product grid.
struct BetaSweepCanonicalOccConfig {
    TrapPotential W = TrapPotential::power(2.0);
    PairPotential v = PairPotential::zero();
    int N = 1;
    Grid grid;
    std::vector<double> beta_list = {1.0, 3.0, 9.0};
    double dt = 0.02;
    int chains = 4;
    int steps = 30000;
    std::uint64_t seed = 1;
    int threads = 1;
    CanonicalOptions canonical;
};
OccupationSweepResult beta_sweep_canonical_occupation(const BetaSweepCanonicalOccConfig& cfg);

// Dirac-model occupation vs the (1.34) minimizers over (lambda, beta).
struct LambdaSweepDiracConfig {
    double p = 2.0;
    int d = 2;
    int N = 2;
    std::vector<double> lambda_list = {1.0};
    std::vector<double> beta_list = {250.0, 1000.0, 4000.0};
    Grid grid;               // comparison grid for rescaled local times
    int chains = 4;
    int steps = 20000;
    std::uint64_t seed = 1;
    int threads = 1;
    HartreeOptions hartree;
};
struct DiracSweepPoint {
    double lambda = 0.0, beta = 0.0;
    double tv = 0.0, tv_stderr = 0.0, acceptance = 0.0;
    double chi_dirac = 0.0;
};
struct DiracSweepResult {
    std::vector<DiracSweepPoint> points;
};
DiracSweepResult lambda_sweep_dirac(const LambdaSweepDiracConfig& cfg);

// (1.10) product-vs-canonical rows and alpha-vs-alpha~ rows.
struct InequalityInstance {
    std::string name;
    // product/canonical row
    bool run_energies = false;
    TrapPotential W = TrapPotential::power(2.0);
    PairPotential v = PairPotential::zero();
    int N = 2;
    Grid grid;
    HartreeOptions hartree;
    CanonicalOptions canonical;
    // scattering row
    bool run_scattering = false;
};
struct InequalityRow {
    std::string name;
    double chi_product = 0.0, chi_canonical = 0.0, gap = 0.0;
    double alpha = 0.0, alpha_tilde = 0.0, identity_residual = 0.0;
    bool inequality_holds = false;
};
std::vector<InequalityRow> inequality_report_run(const std::vector<InequalityInstance>& instances);

}  // namespace traplab
