#include <doctest.h>

#include <cmath>

#include "traplab/potentials.hpp"

using namespace traplab;

TEST_CASE("trap potentials evaluate and validate") {
    TrapPotential W = TrapPotential::power(2.0);
    double x[2] = {3.0, 4.0};
    CHECK(W(std::span<const double>(x, 2)) == doctest::Approx(25.0));
    W.validate();

    TrapPotential box = TrapPotential::hard_box(1.5);
    double in[2] = {1.2, -1.4}, out[2] = {1.6, 0.0};
    CHECK(box(std::span<const double>(in, 2)) == 0.0);
    CHECK(box(std::span<const double>(out, 2)) == kInf);

    TrapPotential tab = TrapPotential::tabulated({0.0, 1.0, 2.0}, {0.0, 1.0, 4.0});
    double p[1] = {1.5};
    CHECK(tab(std::span<const double>(p, 1)) == doctest::Approx(2.5));
    tab.validate();

    CHECK_THROWS_AS(TrapPotential::power(-1.0), Error);
}

TEST_CASE("cap is a pointwise minimum") {
    TrapPotential W = TrapPotential::power(2.0).capped(4.0);
    double x[1] = {3.0};
    CHECK(W(std::span<const double>(x, 1)) == doctest::Approx(4.0));  // min(9, 4)

    PairPotential vz = PairPotential::zero().capped(5.0);
    CHECK(vz(0.7) == 0.0);

    PairPotential hc = PairPotential::capped_hard_core(kInf, 0.5);
    CHECK(hc(0.25) == kInf);
    CHECK(hc(0.75) == 0.0);
    PairPotential plateau = hc.capped(1e3);
    CHECK(plateau(0.25) == doctest::Approx(1e3));
    CHECK(plateau(0.5) == doctest::Approx(1e3));
    CHECK(plateau(0.500001) == 0.0);
    CHECK(plateau.hard_core_radius() == 0.0);
}

TEST_CASE("cap is monotone in M on a sampled radius ladder") {
    PairPotential v = PairPotential::inverse_power(2.0, 1.5);
    PairPotential v1 = v.capped(3.0), v2 = v.capped(7.0);
    for (double r = 0.01; r < 4.0; r += 0.13) {
        CHECK(v1(r) <= v2(r));
        CHECK(v2(r) <= v(r));
    }
}

TEST_CASE("classification follows the core radius and the unit-ball integral") {
    CHECK(classify_pair(PairPotential::gaussian(1.0, 1.0), 3) == PairClass::soft_core);
    CHECK(classify_pair(PairPotential::capped_hard_core(kInf, 0.5), 3) == PairClass::hard_core);
    CHECK(classify_pair(PairPotential::inverse_power(1.0, 3.0), 3) == PairClass::hard_core);
    CHECK(classify_pair(PairPotential::inverse_power(1.0, 1.5), 3) == PairClass::soft_core);
    CHECK(classify_pair(PairPotential::inverse_power(1.0, 2.5), 3) == PairClass::soft_core);
    CHECK(classify_pair(PairPotential::zero(), 2) == PairClass::soft_core);
    // capped cores are bounded, hence soft
    CHECK(classify_pair(PairPotential::capped_hard_core(1e3, 0.5), 3) == PairClass::soft_core);
}

TEST_CASE("classification is invariant under gp-xi rescaling") {
    for (double xi : {0.1, 0.5, 2.0}) {
        CHECK(classify_pair(rescale_pair(PairPotential::gaussian(2.0, 0.7), RescaleScheme::gp_xi,
                                         xi, 3),
                            3) == PairClass::soft_core);
        CHECK(classify_pair(rescale_pair(PairPotential::inverse_power(1.0, 3.0),
                                         RescaleScheme::gp_xi, xi, 3),
                            3) == PairClass::hard_core);
    }
}

TEST_CASE("alpha_tilde matches closed forms") {
    // square well: (1/8pi) * c * omega_3 R0^3/3 = c R0^3 / 6
    CHECK(alpha_tilde(PairPotential::square_well(6.0, 1.0), 3) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(alpha_tilde(PairPotential::zero(), 3) == 0.0);
    // gaussian in d = 2: c (2 pi sigma^2) / (8 pi) = c sigma^2 / 4
    CHECK(alpha_tilde(PairPotential::gaussian(2.0, 0.5), 2) ==
          doctest::Approx(2.0 * 0.25 / 4.0).epsilon(1e-9));
    // gaussian in d = 3: c (2 pi sigma^2)^{3/2} / (8 pi)
    double expect = std::pow(2.0 * kPi, 1.5) / (8.0 * kPi);
    CHECK(alpha_tilde(PairPotential::gaussian(1.0, 1.0), 3) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("alpha_tilde nonnegativity and zero only for the zero potential") {
    CHECK(alpha_tilde(PairPotential::gaussian(0.3, 2.0), 2) > 0.0);
    CHECK(alpha_tilde(PairPotential::square_well(1e-3, 0.1), 3) > 0.0);
}

TEST_CASE("alpha_tilde rejects divergent integrals and hard cores") {
    CHECK_THROWS_AS(alpha_tilde(PairPotential::inverse_power(1.0, 1.5), 3), Error);
    CHECK_THROWS_AS(alpha_tilde(PairPotential::capped_hard_core(kInf, 0.2), 3), Error);
}

TEST_CASE("rescaling schemes transform parameters correctly") {
    PairPotential sw = PairPotential::square_well(3.0, 1.0);
    // thm114, N = 2, d = 3: square-well(4c, R0/2)
    PairPotential swN = rescale_pair(sw, RescaleScheme::thm114, 2, 3);
    CHECK(swN(0.25) == doctest::Approx(12.0));
    CHECK(swN(0.51) == 0.0);

    // gp-xi identity at xi = 1
    PairPotential g = PairPotential::gaussian(2.0, 0.7);
    PairPotential g1 = rescale_pair(g, RescaleScheme::gp_xi, 1.0, 3);
    for (double r = 0.0; r < 3.0; r += 0.37) CHECK(g1(r) == doctest::Approx(g(r)));

    // hard-core radius scaling
    PairPotential hc = rescale_pair(PairPotential::capped_hard_core(kInf, 0.3),
                                    RescaleScheme::gp_xi, 0.1, 3);
    CHECK(hc.hard_core_radius() == doctest::Approx(0.03));

    // pointwise law: v_xi(r) = xi^{-2} v(r/xi)
    double xi = 0.5;
    PairPotential gx = rescale_pair(g, RescaleScheme::gp_xi, xi, 3);
    for (double r = 0.1; r < 2.0; r += 0.3)
        CHECK(gx(r) == doctest::Approx(g(r / xi) / (xi * xi)).epsilon(1e-12));

    // alpha~ under thm114 in d = 3 divides by N
    double base = alpha_tilde(g, 3);
    PairPotential gN = rescale_pair(g, RescaleScheme::thm114, 4, 3);
    CHECK(alpha_tilde(gN, 3) == doctest::Approx(base / 4.0).epsilon(1e-8));
}

TEST_CASE("alpha_tilde scaling covariance under gp-xi in d = 3") {
    PairPotential g = PairPotential::gaussian(1.3, 0.9);
    double base = alpha_tilde(g, 3);
    for (double xi : {0.1, 0.5, 2.0}) {
        double scaled = alpha_tilde(rescale_pair(g, RescaleScheme::gp_xi, xi, 3), 3);
        CHECK(scaled == doctest::Approx(xi * base).epsilon(1e-8));
    }
}

TEST_CASE("cutoff spec validation") {
    CHECK_THROWS_AS(PairPotential::gaussian(1.0, 1.0).capped(-1.0), Error);
    CHECK_NOTHROW(PairPotential::gaussian(1.0, 1.0).capped(0.5));
}
