#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "traplab/common.hpp"

namespace traplab {

enum class Bc { dirichlet, periodic };

// Uniform discretization of the box Lambda_R = [-R, R]^dim.
//
// Dirichlet: n interior points per axis, spacing 2R/(n+1); fields are
// implicitly zero outside the box. Periodic: n points per axis, spacing
// 2R/n, the +R face identified with -R.
struct Grid {
    int dim = 2;
    double half_width = 1.0;
    int n = 4;
    Bc bc = Bc::dirichlet;

    Grid() = default;
    Grid(int dim_, double R, int n_, Bc bc_);

    double spacing() const {
        return bc == Bc::periodic ? 2.0 * half_width / n : 2.0 * half_width / (n + 1);
    }
    double cell_volume() const;
    std::int64_t cells() const;

    // Coordinate of index j along one axis.
    double coord(int j) const {
        return bc == Bc::periodic ? -half_width + j * spacing()
                                  : -half_width + (j + 1) * spacing();
    }

    void unravel(std::int64_t idx, std::span<int> out) const;
    std::int64_t ravel(std::span<const int> multi) const;
    void point(std::int64_t idx, std::span<double> out) const;

    bool operator==(const Grid& o) const {
        return dim == o.dim && half_width == o.half_width && n == o.n && bc == o.bc;
    }
};

struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g) : grid(g), values(static_cast<std::size_t>(g.cells()), 0.0) {}
    ScalarField(const Grid& g, std::vector<double> v);

    double l2_norm() const;       // sqrt(sum f^2 h^dim)
    void normalize_l2();          // scale so l2_norm() == 1
};

// Nonnegative field; mass() = sum(values) * cell volume.
struct DensityField {
    Grid grid;
    std::vector<double> values;

    DensityField() = default;
    explicit DensityField(const Grid& g) : grid(g), values(static_cast<std::size_t>(g.cells()), 0.0) {}
    DensityField(const Grid& g, std::vector<double> v);

    double mass() const;
    void normalize();
    void check_valid(bool require_normalized = false) const;
};

// <f, g> = sum f g h^dim on a shared grid.
double inner(const ScalarField& f, const ScalarField& g);
double inner(std::span<const double> a, std::span<const double> b, double cell_volume);

// |h|^2 as a density on the same grid.
DensityField density_from(const ScalarField& h);

// --- file format -----------------------------------------------------------
//
// Binary (default): text header lines
//   TRAPLAB-FIELD 1
//   dim <d> / R <R> / n <n> / bc <dirichlet|periodic> / kind <scalar|density>
//   count <cells>
//   data
// followed by count little-endian doubles. Files ending in .csv use the
// same header packed into one leading comment line, then one value per line.

void write_field(const std::string& path, const Grid& g, std::span<const double> values,
                 const std::string& kind);
struct LoadedField {
    Grid grid;
    std::vector<double> values;
    std::string kind;
};
LoadedField read_field(const std::string& path);

inline void write_field(const std::string& path, const ScalarField& f) {
    write_field(path, f.grid, f.values, "scalar");
}
inline void write_field(const std::string& path, const DensityField& f) {
    write_field(path, f.grid, f.values, "density");
}

}  // namespace traplab
