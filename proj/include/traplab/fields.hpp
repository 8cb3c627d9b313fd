#pragma once

#include <memory>

#include "traplab/grid.hpp"
#include "traplab/potentials.hpp"

namespace traplab {

// (2*dim+1)-point stencil of sum_i d^2/dx_i^2 with bc-appropriate boundary
// handling (zero ghost cells / wraparound).
ScalarField laplacian_apply(const ScalarField& f);

// Forward-difference Dirichlet energy sum_edges ((f(x+he)-f(x))/h)^2 h^dim.
// Equals -<f, laplacian f> h^dim analytically; manifestly nonnegative.
double kinetic_energy(const ScalarField& f);

// Donsker-Varadhan rate I(rho) = kinetic_energy(sqrt(rho)), cellwise sqrt.
double dv_rate(const DensityField& rho);

// ---------------------------------------------------------------------------
// Interaction operator V with kernel v(|.|): cell-averaged samples on the
// offset lattice. Convolutions run through FFTW (zero-padded under
// dirichlet, circular with min-image offsets under periodic); the direct
// double sum is kept as the oracle.
// ---------------------------------------------------------------------------

class InteractionKernel {
public:
    InteractionKernel(const Grid& grid, const PairPotential& v);
    ~InteractionKernel();
    InteractionKernel(InteractionKernel&&) noexcept;
    InteractionKernel& operator=(InteractionKernel&&) noexcept;
    InteractionKernel(const InteractionKernel&) = delete;
    InteractionKernel& operator=(const InteractionKernel&) = delete;

    const Grid& grid() const;
    // Cell-averaged v at a lattice offset (entries in [-(n-1), n-1] for
    // dirichlet, any integers under periodic min-image).
    double at_offset(std::span<const int> offset) const;
    double min_sample() const;
    // sum of samples * h^dim over the offset lattice (≈ integral of v).
    double sample_mass() const;

    ScalarField apply(const DensityField& rho) const;         // fast path
    ScalarField apply_direct(const DensityField& rho) const;  // O(cells^2) oracle

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// <rho1, V rho2> on a shared grid.
double interaction_pairing(const InteractionKernel& k, const DensityField& a,
                           const DensityField& b);

// Fold mass of rho into Lambda_{R_target}: cell A receives
// sum_k rho(A + 2 k R_target). Requires equal spacing and compatible offsets.
DensityField periodize(const DensityField& rho, double R_target);

// Total variation distance (1/2) sum |a-b| h^dim between two densities.
double tv_distance(const DensityField& a, const DensityField& b);

}  // namespace traplab
