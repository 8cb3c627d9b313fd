#pragma once

#include <vector>

#include "traplab/potentials.hpp"

namespace traplab {

struct ScatteringSolution {
    double alpha = 0.0;
    std::vector<double> r_samples;  // radial profile of the (normalized) solution
    std::vector<double> u_samples;
    double R_max = 0.0;
    double residual = 0.0;  // spread of alpha over the extraction ladder
    // Hard cores are solved through the capped M-ladder; entries (M, alpha_M)
    // of the extrapolation report.
    std::vector<std::pair<double, double>> ladder;
};

struct ScatteringOptions {
    double R_max = 0.0;           // 0 = automatic: 10 (a + range), doubled until stable
    double ladder_tol = 1e-6;     // allowed spread of alpha over the extraction radii
    double stable_tol = 1e-8;     // horizon-doubling stop criterion
};

// d = 3: u'' = v u / 2 on (0, inf), u(0) = 0 (u = 0 on [0, a] for hard
// cores), normalized so u'(R_max) = 1; alpha = lim r - u/u'. Hard cores run
// the documented M-ladder {1e2, 1e3, 1e4} and extrapolate linearly in
// 1/sqrt(M).
ScatteringSolution alpha_d3(const PairPotential& v, const ScatteringOptions& opts = {});

// d = 2: radial zero-energy equation u'' + u'/r = v u / 2 with the regular
// solution; in the force-free region u is proportional to log(r/alpha) and
// log alpha = (log r - u(r) log R) / (1 - u(r)) with u normalized by
// u(R) = 1. Potentials without compact support are truncated at
// {2, 4, 8} x range and extrapolated.
ScatteringSolution alpha_d2(const PairPotential& v, double R_star = 0.0, double R = 0.0);

struct ScatteringInequalityReport {
    double alpha = 0.0;
    double alpha_tilde = 0.0;
    bool strict_inequality = false;   // alpha < alpha~
    double identity_lhs = 0.0;        // ∫ v(|x|) u(|x|)/|x| dx   (d = 3)
    double identity_rhs = 0.0;        // 8 pi alpha
    double identity_residual = 0.0;   // relative
};

// d = 3 only; requires v >= 0 soft-core with v(0) > 0.
ScatteringInequalityReport inequality_report(const PairPotential& v,
                                             const ScatteringOptions& opts = {});

}  // namespace traplab
