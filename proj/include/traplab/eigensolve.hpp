#pragma once

#include <functional>

#include "traplab/grid.hpp"

namespace traplab {

// Sparse operator A = -Laplacian + diag(q) on a grid, with excluded cells
// (hard walls, hard-core region) removed: components there are pinned to
// zero and neighbors see a Dirichlet wall.
struct GridOperator {
    Grid grid;
    std::vector<double> potential;   // q per cell; entries on excluded cells unused
    std::vector<std::uint8_t> excluded;

    GridOperator() = default;
    GridOperator(const Grid& g, std::vector<double> q);

    std::int64_t cells() const { return grid.cells(); }
    bool any_excluded() const;
    void apply(const double* x, double* y) const;
    std::vector<double> apply(const std::vector<double>& x) const;
    std::vector<double> diagonal() const;
    // <x, A x> / <x, x> (counting measure).
    double rayleigh(const std::vector<double>& x) const;
};

struct EigenResult {
    double lambda = 0.0;
    std::vector<double> vec;  // normalized in counting measure
    int iterations = 0;
    double residual = 0.0;
};

// Smallest eigenpair by locally optimal preconditioned CG iteration
// (Rayleigh-Ritz on span{x, preconditioned residual, previous direction})
// with a Jacobi preconditioner. Deterministic for a fixed start vector.
EigenResult smallest_eigenpair(const GridOperator& op, std::vector<double> start, double tol,
                               int max_iter);

// log(sum_z w(beta, z)) for w' = -A w, w(0) = w0 >= 0, by Lanczos
// approximation of the matrix exponential action with substeps and
// renormalization. Also usable for the slope diagnostics of the
// Feynman-Kac oracle.
double expm_log_sum(const GridOperator& op, const std::vector<double>& w0, double beta,
                    double tol = 1e-12);

}  // namespace traplab
