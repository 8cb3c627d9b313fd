#include <doctest.h>

#include <cmath>

#include "traplab/scattering.hpp"

using namespace traplab;

namespace {

// closed-form scattering length of the square well in d = 3
double square_well_alpha(double c, double R0) {
    double kappa = std::sqrt(0.5 * c);
    return R0 - std::tanh(kappa * R0) / kappa;
}

}  // namespace

TEST_CASE("d3: zero potential has alpha = 0") {
    CHECK(alpha_d3(PairPotential::zero()).alpha == 0.0);
}

TEST_CASE("d3: square well matches the closed form") {
    ScatteringSolution s = alpha_d3(PairPotential::square_well(2.0, 1.0));
    CHECK(s.alpha == doctest::Approx(1.0 - std::tanh(1.0)).epsilon(1e-8));
    CHECK(s.residual < 1e-6);

    // a second strength, same oracle
    ScatteringSolution s2 = alpha_d3(PairPotential::square_well(7.3, 0.6));
    CHECK(s2.alpha == doctest::Approx(square_well_alpha(7.3, 0.6)).epsilon(1e-8));
}

TEST_CASE("d3: pure hard core extrapolates to alpha = a") {
    ScatteringSolution s = alpha_d3(PairPotential::capped_hard_core(kInf, 0.5));
    CHECK(s.alpha == doctest::Approx(0.5).epsilon(2e-4));
    CHECK(s.ladder.size() == 3);
    // ladder values increase toward a with the documented M ladder
    CHECK(s.ladder[0].second < s.ladder[1].second);
    CHECK(s.ladder[1].second < s.ladder[2].second);
}

TEST_CASE("d3: gp-xi rescaling scales alpha by xi") {
    PairPotential v = PairPotential::square_well(2.0, 1.0);
    double base = alpha_d3(v).alpha;
    for (double xi : {0.1, 0.5, 2.0}) {
        double scaled = alpha_d3(rescale_pair(v, RescaleScheme::gp_xi, xi, 3)).alpha;
        CHECK(scaled == doctest::Approx(xi * base).epsilon(1e-6));
    }
}

TEST_CASE("d3: alpha is monotone in the square-well strength") {
    double prev = 0.0;
    for (double c : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        double a = alpha_d3(PairPotential::square_well(c, 1.0)).alpha;
        CHECK(a > prev);
        prev = a;
    }
}

TEST_CASE("d3: u is convex, below r, with u' <= 1 for repulsive v") {
    ScatteringSolution s = alpha_d3(PairPotential::square_well(2.0, 1.0));
    for (std::size_t i = 1; i < s.r_samples.size(); ++i) {
        if (s.r_samples[i] < 1e-6) continue;
        CHECK(s.u_samples[i] < s.r_samples[i] + 1e-12);
        CHECK(s.u_samples[i] >= s.u_samples[i - 1] - 1e-12);  // nondecreasing
    }
    // convexity via second differences on a uniform subsample
    for (std::size_t i = 16; i + 16 < s.r_samples.size(); i += 16) {
        double d2 = s.u_samples[i + 16] - 2.0 * s.u_samples[i] +
                    s.u_samples[i - 16];
        CHECK(d2 >= -1e-8);
    }
}

TEST_CASE("d3: inequality report for the square well") {
    ScatteringInequalityReport rep = inequality_report(PairPotential::square_well(2.0, 1.0));
    CHECK(rep.alpha == doctest::Approx(1.0 - std::tanh(1.0)).epsilon(1e-6));
    CHECK(rep.alpha_tilde == doctest::Approx(2.0 / 6.0).epsilon(1e-9));
    CHECK(rep.strict_inequality);
    CHECK(rep.identity_residual < 1e-3);
}

TEST_CASE("d3: inequality report for the gaussian") {
    ScatteringInequalityReport rep = inequality_report(PairPotential::gaussian(1.0, 1.0));
    CHECK(rep.alpha > 0.0);
    CHECK(rep.alpha < rep.alpha_tilde);
    CHECK(rep.identity_residual < 1e-3);
}

TEST_CASE("d3: inequality report rejects the zero potential") {
    CHECK_THROWS_AS(inequality_report(PairPotential::zero()), Error);
}

TEST_CASE("d2: zero potential is degenerate") {
    CHECK_THROWS_AS(alpha_d2(PairPotential::zero()), Error);
}

TEST_CASE("d2: R-independence for the square well") {
    PairPotential v = PairPotential::square_well(2.0, 1.0);
    double a1 = alpha_d2(v, 1.0, 6.0).alpha;
    double a2 = alpha_d2(v, 1.0, 12.0).alpha;
    CHECK(a1 == doctest::Approx(a2).epsilon(1e-6));
    CHECK(a1 > 0.0);
    CHECK(a1 < 1.0);  // repulsive well keeps alpha below its radius
}

TEST_CASE("d2: hard-core ladder extrapolates to alpha = a") {
    ScatteringSolution s = alpha_d2(PairPotential::capped_hard_core(kInf, 0.5));
    CHECK(s.alpha == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("d2: gaussian truncation ladder converges") {
    ScatteringSolution s = alpha_d2(PairPotential::gaussian(2.0, 0.5));
    CHECK(s.alpha > 0.0);
    CHECK(s.alpha < 0.5 * 8.0);
    // truncating at the largest radius directly gives nearly the same value
    ScatteringSolution direct = alpha_d2(PairPotential::gaussian(2.0, 0.5).truncated(4.0), 4.0, 16.0);
    CHECK(s.alpha == doctest::Approx(direct.alpha).epsilon(1e-4));
}
