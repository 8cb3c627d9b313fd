#include "traplab/grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace traplab {

Grid::Grid(int dim_, double R, int n_, Bc bc_) : dim(dim_), half_width(R), n(n_), bc(bc_) {
    if (dim < 1 || dim > 8) throw config_error("grid: dim must be in [1, 8]");
    if (!(half_width > 0.0)) throw config_error("grid: R must be > 0");
    if (n < 4) throw config_error("grid: n must be >= 4");
    double c = std::pow(static_cast<double>(n), dim);
    if (c > 4.0e8) throw budget_error("grid: too many cells (n^dim > 4e8)");
}

double Grid::cell_volume() const { return std::pow(spacing(), dim); }

std::int64_t Grid::cells() const {
    std::int64_t c = 1;
    for (int k = 0; k < dim; ++k) c *= n;
    return c;
}

void Grid::unravel(std::int64_t idx, std::span<int> out) const {
    for (int k = 0; k < dim; ++k) {
        out[k] = static_cast<int>(idx % n);
        idx /= n;
    }
}

std::int64_t Grid::ravel(std::span<const int> multi) const {
    std::int64_t idx = 0;
    for (int k = dim - 1; k >= 0; --k) idx = idx * n + multi[k];
    return idx;
}

void Grid::point(std::int64_t idx, std::span<double> out) const {
    for (int k = 0; k < dim; ++k) {
        out[k] = coord(static_cast<int>(idx % n));
        idx /= n;
    }
}

ScalarField::ScalarField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<std::int64_t>(values.size()) != g.cells())
        throw domain_error("scalar field: value count does not match grid");
}

double ScalarField::l2_norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s * grid.cell_volume());
}

void ScalarField::normalize_l2() {
    double nrm = l2_norm();
    if (!(nrm > 0.0)) throw domain_error("scalar field: cannot normalize zero field");
    for (double& v : values) v /= nrm;
}

DensityField::DensityField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<std::int64_t>(values.size()) != g.cells())
        throw domain_error("density field: value count does not match grid");
}

double DensityField::mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.cell_volume();
}

void DensityField::normalize() {
    double m = mass();
    if (!(m > 0.0)) throw domain_error("density field: cannot normalize zero mass");
    for (double& v : values) v /= m;
}

void DensityField::check_valid(bool require_normalized) const {
    for (double v : values)
        if (!(v >= 0.0)) throw domain_error("density field: negative cell value");
    if (require_normalized && std::abs(mass() - 1.0) > 1e-10)
        throw domain_error("density field: mass deviates from 1 beyond 1e-10");
}

double inner(std::span<const double> a, std::span<const double> b, double cell_volume) {
    if (a.size() != b.size()) throw domain_error("inner: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * cell_volume;
}

double inner(const ScalarField& f, const ScalarField& g) {
    if (!(f.grid == g.grid)) throw domain_error("inner: grid mismatch");
    return inner(f.values, g.values, f.grid.cell_volume());
}

DensityField density_from(const ScalarField& h) {
    DensityField rho(h.grid);
    for (std::size_t i = 0; i < h.values.size(); ++i) rho.values[i] = h.values[i] * h.values[i];
    return rho;
}

// --- file IO ----------------------------------------------------------------

namespace {

bool has_suffix(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

std::string bc_name(Bc bc) { return bc == Bc::periodic ? "periodic" : "dirichlet"; }

Bc bc_from(const std::string& s) {
    if (s == "periodic") return Bc::periodic;
    if (s == "dirichlet") return Bc::dirichlet;
    throw config_error("field file: unknown bc '" + s + "'");
}

}  // namespace

void write_field(const std::string& path, const Grid& g, std::span<const double> values,
                 const std::string& kind) {
    if (static_cast<std::int64_t>(values.size()) != g.cells())
        throw domain_error("write_field: value count does not match grid");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::generic, "write_field: cannot open " + path);
    char head[64];
    std::snprintf(head, sizeof head, "%.17g", g.half_width);
    if (has_suffix(path, ".csv")) {
        out << "# traplab-field dim=" << g.dim << " R=" << head << " n=" << g.n
            << " bc=" << bc_name(g.bc) << " kind=" << kind << "\n";
        char buf[32];
        for (double v : values) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << buf << "\n";
        }
        return;
    }
    out << "TRAPLAB-FIELD 1\n"
        << "dim " << g.dim << "\nR " << head << "\nn " << g.n << "\nbc " << bc_name(g.bc)
        << "\nkind " << kind << "\ncount " << values.size() << "\ndata\n";
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
}

LoadedField read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::generic, "read_field: cannot open " + path);
    LoadedField out;
    if (has_suffix(path, ".csv")) {
        std::string header;
        std::getline(in, header);
        int dim = 0, n = 0;
        char rbuf[64] = {0}, bcbuf[32] = {0}, kindbuf[32] = {0};
        if (std::sscanf(header.c_str(), "# traplab-field dim=%d R=%63s n=%d bc=%31s kind=%31s",
                        &dim, rbuf, &n, bcbuf, kindbuf) != 5)
            throw config_error("field csv: bad header in " + path);
        out.grid = Grid(dim, std::stod(rbuf), n, bc_from(bcbuf));
        out.kind = kindbuf;
        double v;
        while (in >> v) out.values.push_back(v);
        if (static_cast<std::int64_t>(out.values.size()) != out.grid.cells())
            throw config_error("field csv: value count mismatch in " + path);
        return out;
    }
    std::string magic;
    std::getline(in, magic);
    if (magic != "TRAPLAB-FIELD 1") throw config_error("field file: bad magic in " + path);
    int dim = 0, n = 0;
    double R = 0.0;
    std::size_t count = 0;
    std::string bc, kind;
    std::string key;
    while (in >> key) {
        if (key == "dim") in >> dim;
        else if (key == "R") in >> R;
        else if (key == "n") in >> n;
        else if (key == "bc") in >> bc;
        else if (key == "kind") in >> kind;
        else if (key == "count") in >> count;
        else if (key == "data") break;
        else throw config_error("field file: unknown header key '" + key + "'");
    }
    in.get();  // newline after 'data'
    out.grid = Grid(dim, R, n, bc_from(bc));
    out.kind = kind;
    if (static_cast<std::int64_t>(count) != out.grid.cells())
        throw config_error("field file: count mismatch in " + path);
    out.values.resize(count);
    in.read(reinterpret_cast<char*>(out.values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw config_error("field file: truncated data in " + path);
    return out;
}

}  // namespace traplab
