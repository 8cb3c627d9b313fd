#include <doctest.h>

#include <cmath>

#include "traplab/fields.hpp"
#include "traplab/rng.hpp"

using namespace traplab;

namespace {

ScalarField random_field(const Grid& g, CounterRng& rng) {
    ScalarField f(g);
    for (auto& v : f.values) v = rng.uniform(-1.0, 1.0);
    return f;
}

DensityField random_density(const Grid& g, CounterRng& rng) {
    DensityField f(g);
    for (auto& v : f.values) v = rng.uniform(0.0, 1.0);
    f.normalize();
    return f;
}

ScalarField sampled_gaussian(const Grid& g) {
    ScalarField f(g);
    std::vector<double> x(g.dim);
    for (std::int64_t i = 0; i < g.cells(); ++i) {
        g.point(i, x);
        double r2 = 0.0;
        for (double c : x) r2 += c * c;
        f.values[i] = std::exp(-0.5 * r2);
    }
    f.normalize_l2();
    return f;
}

}  // namespace

TEST_CASE("laplacian of constants vanishes on the torus") {
    Grid g(2, 3.0, 16, Bc::periodic);
    ScalarField f(g);
    for (auto& v : f.values) v = 2.5;
    ScalarField lf = laplacian_apply(f);
    for (double v : lf.values) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("product sine mode is a discrete Dirichlet eigenfield") {
    Grid g(2, 2.0, 21, Bc::dirichlet);
    const double h = g.spacing();
    const int k = 3;
    ScalarField f(g);
    std::vector<double> x(2);
    for (std::int64_t i = 0; i < g.cells(); ++i) {
        g.point(i, x);
        f.values[i] = std::sin(k * kPi * (x[0] + g.half_width) / (2.0 * g.half_width)) *
                      std::sin(k * kPi * (x[1] + g.half_width) / (2.0 * g.half_width));
    }
    double eig = -(2.0 / (h * h)) * (1.0 - std::cos(k * kPi * h / (2.0 * g.half_width))) * 2;
    ScalarField lf = laplacian_apply(f);
    for (std::int64_t i = 0; i < g.cells(); ++i)
        CHECK(lf.values[i] == doctest::Approx(eig * f.values[i]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("laplacian is linear and symmetric") {
    for (Bc bc : {Bc::dirichlet, Bc::periodic}) {
        Grid g(2, 1.5, 10, bc);
        CounterRng rng(7, bc == Bc::periodic ? 1 : 2);
        ScalarField f = random_field(g, rng), gg = random_field(g, rng);
        ScalarField lin(g);
        for (std::size_t i = 0; i < lin.values.size(); ++i)
            lin.values[i] = 2.0 * f.values[i] - 3.0 * gg.values[i];
        ScalarField l1 = laplacian_apply(lin);
        ScalarField lf = laplacian_apply(f), lg = laplacian_apply(gg);
        for (std::size_t i = 0; i < lin.values.size(); ++i)
            CHECK(l1.values[i] ==
                  doctest::Approx(2.0 * lf.values[i] - 3.0 * lg.values[i]).epsilon(1e-10));
        // symmetry <f, L g> = <L f, g>
        CHECK(inner(f, lg) == doctest::Approx(inner(lf, gg)).epsilon(1e-10));
    }
}

TEST_CASE("kinetic energy: constants, scaling, operator identity") {
    Grid g(2, 2.0, 12, Bc::periodic);
    ScalarField c(g);
    for (auto& v : c.values) v = 1.3;
    CHECK(kinetic_energy(c) == 0.0);

    CounterRng rng(11, 0);
    ScalarField f = random_field(g, rng);
    double base = kinetic_energy(f);
    ScalarField f2 = f;
    for (auto& v : f2.values) v *= 3.0;
    CHECK(kinetic_energy(f2) == doctest::Approx(9.0 * base).epsilon(1e-12));
    // equals -<f, laplacian f> for both bcs
    CHECK(base == doctest::Approx(-inner(f, laplacian_apply(f))).epsilon(1e-10));
    Grid gd(2, 2.0, 12, Bc::dirichlet);
    ScalarField fd = random_field(gd, rng);
    CHECK(kinetic_energy(fd) == doctest::Approx(-inner(fd, laplacian_apply(fd))).epsilon(1e-10));
}

TEST_CASE("kinetic energy of the normalized gaussian approaches d/2 at order >= 1.8") {
    std::vector<double> errs;
    for (int n : {32, 64, 128}) {
        Grid g(2, 8.0, n, Bc::dirichlet);
        errs.push_back(std::abs(kinetic_energy(sampled_gaussian(g)) - 1.0));
    }
    CHECK(errs[2] < 5e-3);
    double order1 = std::log2(errs[0] / errs[1]);
    double order2 = std::log2(errs[1] / errs[2]);
    CHECK(order1 >= 1.8);
    CHECK(order2 >= 1.8);
}

TEST_CASE("dv_rate equals the kinetic energy of the square root") {
    Grid g(2, 6.0, 48, Bc::dirichlet);
    ScalarField h = sampled_gaussian(g);
    DensityField rho = density_from(h);
    CHECK(dv_rate(rho) == doctest::Approx(kinetic_energy(h)).epsilon(1e-12));
    // gaussian density ~ e^{-|x|^2} has rate d/2 up to grid error
    CHECK(dv_rate(rho) == doctest::Approx(1.0).epsilon(2e-3));

    DensityField uni(Grid(2, 2.0, 8, Bc::periodic));
    for (auto& v : uni.values) v = 1.0;
    uni.normalize();
    CHECK(dv_rate(uni) == 0.0);
}

TEST_CASE("dv_rate is nonnegative and translation invariant on the torus") {
    Grid g(2, 2.0, 10, Bc::periodic);
    CounterRng rng(3, 5);
    DensityField rho = random_density(g, rng);
    double r0 = dv_rate(rho);
    CHECK(r0 >= 0.0);
    // cyclic shift by (3, 7)
    DensityField shifted(g);
    std::vector<int> m(2);
    for (std::int64_t i = 0; i < g.cells(); ++i) {
        g.unravel(i, m);
        int mm[2] = {(m[0] + 3) % g.n, (m[1] + 7) % g.n};
        shifted.values[mm[0] + static_cast<std::int64_t>(g.n) * mm[1]] = rho.values[i];
    }
    CHECK(dv_rate(shifted) == doctest::Approx(r0).epsilon(1e-12));
}

TEST_CASE("interaction kernel: zero potential, point mass, fast-vs-direct") {
    PairPotential v = PairPotential::gaussian(2.0, 0.6);
    for (Bc bc : {Bc::dirichlet, Bc::periodic}) {
        Grid g(2, 2.0, 12, bc);
        InteractionKernel kernel(g, v);

        DensityField zero_rho(g);
        ScalarField out = kernel.apply(zero_rho);
        for (double x : out.values) CHECK(std::abs(x) < 1e-14);

        // unit point mass at a cell: field equals the kernel column
        DensityField pm(g);
        std::int64_t c0 = g.cells() / 2 + 3;
        pm.values[c0] = 1.0 / g.cell_volume();
        ScalarField col = kernel.apply(pm);
        std::vector<int> mc(2), mx(2);
        std::vector<int> off(2);
        g.unravel(c0, mc);
        for (std::int64_t i = 0; i < g.cells(); ++i) {
            g.unravel(i, mx);
            for (int k = 0; k < 2; ++k) off[k] = mx[k] - mc[k];
            CHECK(col.values[i] == doctest::Approx(kernel.at_offset(off)).epsilon(1e-9));
        }

        CounterRng rng(17, bc == Bc::periodic ? 0 : 1);
        DensityField rho = random_density(g, rng);
        ScalarField fast = kernel.apply(rho);
        ScalarField direct = kernel.apply_direct(rho);
        for (std::size_t i = 0; i < fast.values.size(); ++i)
            CHECK(fast.values[i] == doctest::Approx(direct.values[i]).epsilon(1e-10));
    }
}

TEST_CASE("pairing symmetry <rho1, V rho2> = <rho2, V rho1>") {
    Grid g(2, 2.0, 10, Bc::dirichlet);
    InteractionKernel kernel(g, PairPotential::square_well(1.5, 0.8));
    CounterRng rng(23, 1);
    DensityField a = random_density(g, rng), b = random_density(g, rng);
    CHECK(interaction_pairing(kernel, a, b) ==
          doctest::Approx(interaction_pairing(kernel, b, a)).epsilon(1e-11));
    // nonnegative kernel maps nonnegative densities to fields >= inf v = 0
    ScalarField f = kernel.apply(a);
    for (double x : f.values) CHECK(x >= -1e-14);
}

TEST_CASE("kernel cell averages integrate the singular origin") {
    Grid g(2, 1.0, 8, Bc::dirichlet);
    InteractionKernel kernel(g, PairPotential::inverse_power(1.0, 1.0));  // r^{-1}, soft in d=2
    int zero_off[2] = {0, 0};
    double k0 = kernel.at_offset(zero_off);
    CHECK(std::isfinite(k0));
    CHECK(k0 > 0.0);
    // the central average dominates a neighbor's pointwise value
    int one_off[2] = {1, 0};
    CHECK(k0 > kernel.at_offset(one_off));
}

TEST_CASE("periodize folds mass and preserves it") {
    Grid g(1, 4.0, 16, Bc::periodic);  // h = 0.5
    DensityField rho(g);
    CounterRng rng(5, 9);
    for (auto& v : rho.values) v = rng.uniform(0.0, 1.0);
    rho.normalize();
    DensityField folded = periodize(rho, 2.0);  // n_t = 8
    CHECK(folded.mass() == doctest::Approx(rho.mass()).epsilon(1e-14));

    // a field supported inside the target box is unchanged (same positions)
    DensityField inside(g);
    inside.values[8] = 2.0;  // x = 0
    DensityField f2 = periodize(inside, 2.0);
    CHECK(f2.mass() == doctest::Approx(inside.mass()).epsilon(1e-14));
    // x = 0 is index 4 on the folded torus [-2, 2), n = 8
    CHECK(f2.values[4] == doctest::Approx(2.0));

    // point mass just past +R_target moves to the -R_target edge
    DensityField past(g);
    // source index 12 sits at x = +2.0, i.e. just past the [-2, 2) target box
    past.values[12] = 1.0;
    DensityField f3 = periodize(past, 2.0);
    CHECK(f3.values[0] == doctest::Approx(1.0));  // folded onto the -2 edge
    CHECK(f3.mass() == doctest::Approx(past.mass()).epsilon(1e-14));

    CHECK_THROWS_AS(periodize(rho, 1.7), Error);  // misaligned target
}

TEST_CASE("tv distance basics") {
    Grid g(2, 2.0, 8, Bc::periodic);
    CounterRng rng(31, 0);
    DensityField a = random_density(g, rng), b = random_density(g, rng);
    CHECK(tv_distance(a, a) == 0.0);
    double t = tv_distance(a, b);
    CHECK(t > 0.0);
    CHECK(t <= 1.0);
    CHECK(t == doctest::Approx(tv_distance(b, a)));
}

TEST_CASE("field files roundtrip in binary and csv") {
    Grid g(2, 3.0, 8, Bc::dirichlet);
    CounterRng rng(41, 2);
    ScalarField f = random_field(g, rng);
    write_field("/tmp/traplab_test.field", f);
    LoadedField lf = read_field("/tmp/traplab_test.field");
    CHECK(lf.grid == g);
    CHECK(lf.kind == "scalar");
    for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(lf.values[i] == f.values[i]);

    write_field("/tmp/traplab_test.csv", f);
    LoadedField lc = read_field("/tmp/traplab_test.csv");
    CHECK(lc.grid == g);
    for (std::size_t i = 0; i < f.values.size(); ++i)
        CHECK(lc.values[i] == doctest::Approx(f.values[i]).epsilon(1e-15));
}
