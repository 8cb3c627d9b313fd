#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "traplab/eigensolve.hpp"
#include "traplab/rng.hpp"

using namespace traplab;

namespace {

// dense assembly of the same operator, for small grids only
Eigen::MatrixXd dense_operator(const GridOperator& op) {
    const std::int64_t n = op.cells();
    Eigen::MatrixXd A(n, n);
    std::vector<double> e(n, 0.0), y(n);
    for (std::int64_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        op.apply(e.data(), y.data());
        for (std::int64_t i = 0; i < n; ++i) A(i, j) = y[i];
        e[j] = 0.0;
    }
    return A;
}

GridOperator harmonic_operator(const Grid& g) {
    std::vector<double> q(static_cast<std::size_t>(g.cells()));
    std::vector<double> x(g.dim);
    for (std::int64_t i = 0; i < g.cells(); ++i) {
        g.point(i, x);
        double r2 = 0.0;
        for (double c : x) r2 += c * c;
        q[i] = r2;
    }
    return GridOperator(g, std::move(q));
}

std::vector<double> gaussian_start(const Grid& g) {
    std::vector<double> s(static_cast<std::size_t>(g.cells()));
    std::vector<double> x(g.dim);
    for (std::int64_t i = 0; i < g.cells(); ++i) {
        g.point(i, x);
        double r2 = 0.0;
        for (double c : x) r2 += c * c;
        s[i] = std::exp(-0.3 * r2);
    }
    return s;
}

}  // namespace

TEST_CASE("lopcg matches the dense smallest eigenvalue") {
    Grid g(2, 3.0, 8, Bc::dirichlet);
    GridOperator op = harmonic_operator(g);
    Eigen::MatrixXd A = dense_operator(op);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    EigenResult res = smallest_eigenpair(op, gaussian_start(g), 1e-11, 5000);
    CHECK(res.lambda == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-9));
    CHECK(res.residual <= 1e-10 * std::max(1.0, std::abs(res.lambda)));
    // rayleigh quotient consistency
    CHECK(op.rayleigh(res.vec) == doctest::Approx(res.lambda).epsilon(1e-10));
}

TEST_CASE("lopcg respects excluded cells") {
    Grid g(1, 2.0, 16, Bc::dirichlet);
    std::vector<double> q(16, 0.0);
    q[4] = kInf;  // wall splits the interval; ground state lives in the bigger part
    GridOperator op(g, std::move(q));
    EigenResult res = smallest_eigenpair(op, std::vector<double>(16, 1.0), 1e-11, 5000);
    CHECK(res.vec[4] == 0.0);
    Eigen::MatrixXd A = dense_operator(op);
    // remove the excluded row/col for the dense reference
    Eigen::MatrixXd B(15, 15);
    int bi = 0;
    for (int i = 0; i < 16; ++i) {
        if (i == 4) continue;
        int bj = 0;
        for (int j = 0; j < 16; ++j) {
            if (j == 4) continue;
            B(bi, bj++) = A(i, j);
        }
        ++bi;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
    CHECK(res.lambda == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-9));
}

TEST_CASE("expm_log_sum matches the dense matrix exponential") {
    Grid g(2, 2.0, 6, Bc::periodic);
    GridOperator op = harmonic_operator(g);
    Eigen::MatrixXd A = dense_operator(op);
    std::vector<double> w0(static_cast<std::size_t>(g.cells()), 1.0 / g.cells());

    for (double beta : {0.3, 1.0, 3.0}) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        Eigen::VectorXd v0(g.cells());
        for (std::int64_t i = 0; i < g.cells(); ++i) v0(i) = w0[i];
        Eigen::VectorXd wb = es.eigenvectors() *
                             ((-beta * es.eigenvalues().array()).exp().matrix().asDiagonal() *
                              (es.eigenvectors().transpose() * v0));
        double expect = std::log(wb.sum());
        CHECK(expm_log_sum(op, w0, beta) == doctest::Approx(expect).epsilon(1e-9));
    }
    CHECK(expm_log_sum(op, w0, 0.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("free evolution on the torus conserves total mass") {
    Grid g(2, 2.0, 8, Bc::periodic);
    GridOperator op(g, std::vector<double>(64, 0.0));
    CounterRng rng(4, 4);
    std::vector<double> w0(64);
    double s = 0.0;
    for (auto& v : w0) {
        v = rng.uniform(0.1, 1.0);
        s += v;
    }
    for (auto& v : w0) v /= s;
    for (double beta : {0.5, 2.0, 8.0})
        CHECK(std::abs(expm_log_sum(op, w0, beta)) < 1e-10);
}
