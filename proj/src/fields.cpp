#include "traplab/fields.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

namespace traplab {

namespace {

std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

// Multi-index walker: increments the first axis fastest.
struct MultiIndex {
    explicit MultiIndex(int dim) : m(dim, 0) {}
    std::vector<int> m;
    bool advance(int n) {
        for (std::size_t k = 0; k < m.size(); ++k) {
            if (++m[k] < n) return true;
            m[k] = 0;
        }
        return false;
    }
};

}  // namespace

ScalarField laplacian_apply(const ScalarField& f) {
    const Grid& g = f.grid;
    const int n = g.n;
    const double inv_h2 = 1.0 / (g.spacing() * g.spacing());
    ScalarField out(g);
    std::vector<std::int64_t> stride(g.dim);
    stride[0] = 1;
    for (int k = 1; k < g.dim; ++k) stride[k] = stride[k - 1] * n;

    MultiIndex mi(g.dim);
    std::int64_t idx = 0;
    do {
        double acc = 0.0;
        const double fc = f.values[idx];
        for (int k = 0; k < g.dim; ++k) {
            const int mk = mi.m[k];
            double up, dn;
            if (mk + 1 < n) up = f.values[idx + stride[k]];
            else up = (g.bc == Bc::periodic) ? f.values[idx - (n - 1) * stride[k]] : 0.0;
            if (mk > 0) dn = f.values[idx - stride[k]];
            else dn = (g.bc == Bc::periodic) ? f.values[idx + (n - 1) * stride[k]] : 0.0;
            acc += up + dn - 2.0 * fc;
        }
        out.values[idx] = acc * inv_h2;
        ++idx;
    } while (mi.advance(n));
    return out;
}

double kinetic_energy(const ScalarField& f) {
    const Grid& g = f.grid;
    const int n = g.n;
    double sum = 0.0;
    std::vector<std::int64_t> stride(g.dim);
    stride[0] = 1;
    for (int k = 1; k < g.dim; ++k) stride[k] = stride[k - 1] * n;

    MultiIndex mi(g.dim);
    std::int64_t idx = 0;
    do {
        const double fc = f.values[idx];
        for (int k = 0; k < g.dim; ++k) {
            const int mk = mi.m[k];
            double up;
            if (mk + 1 < n) up = f.values[idx + stride[k]];
            else up = (g.bc == Bc::periodic) ? f.values[idx - (n - 1) * stride[k]] : 0.0;
            double diff = up - fc;
            sum += diff * diff;
            // Dirichlet: the edge entering the box from the zero ghost cell.
            if (g.bc == Bc::dirichlet && mk == 0) sum += fc * fc;
        }
        ++idx;
    } while (mi.advance(n));
    const double h = g.spacing();
    return sum * std::pow(h, g.dim - 2);
}

double dv_rate(const DensityField& rho) {
    rho.check_valid();
    ScalarField root(rho.grid);
    for (std::size_t i = 0; i < rho.values.size(); ++i) root.values[i] = std::sqrt(rho.values[i]);
    return kinetic_energy(root);
}

// ---------------------------------------------------------------------------
// InteractionKernel
// ---------------------------------------------------------------------------

struct InteractionKernel::Impl {
    Grid grid;
    int n = 0;
    int ext = 0;             // offsets per axis: 2n-1 (dirichlet) or n (periodic)
    std::vector<double> samples;
    bool has_infinite = false;
    double min_sample = 0.0;

    // FFT workspace (padded circular convolution).
    int pad = 0;
    std::int64_t pad_cells = 0;
    std::int64_t hat_cells = 0;
    fftw_plan fwd = nullptr, bwd = nullptr;
    double* rbuf = nullptr;
    fftw_complex* cbuf = nullptr;
    std::vector<double> kernel_hat_re, kernel_hat_im;
    mutable std::mutex apply_mutex;

    ~Impl() {
        std::lock_guard<std::mutex> lk(fftw_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (rbuf) fftw_free(rbuf);
        if (cbuf) fftw_free(cbuf);
    }

    std::int64_t sample_index(std::span<const int> offset) const {
        std::int64_t idx = 0;
        for (int k = grid.dim - 1; k >= 0; --k) {
            int o = offset[k];
            if (grid.bc == Bc::periodic) {
                o = ((o % n) + n) % n;
            } else {
                o += n - 1;
                if (o < 0 || o >= ext) throw domain_error("kernel: offset out of range");
            }
            idx = idx * ext + o;
        }
        return idx;
    }
};

namespace {

// Mean of v over the offset cell by the 3^dim subcell-midpoint rule. A
// nonfinite sample of an integrable singularity is replaced by the radial
// average of v over the ball of radius h/6 around that point's distance.
double cell_average(const PairPotential& v, std::span<const double> center, double h, int dim,
                    double* singular_fallback, bool* saw_infinite) {
    int npts = 1;
    for (int k = 0; k < dim; ++k) npts *= 3;
    double acc = 0.0;
    for (int p = 0; p < npts; ++p) {
        int q = p;
        double r2 = 0.0;
        for (int k = 0; k < dim; ++k) {
            int dk = q % 3;
            q /= 3;
            double x = center[k] + (dk - 1) * (h / 3.0);
            r2 += x * x;
        }
        double val = v(std::sqrt(r2));
        if (!std::isfinite(val)) {
            if (*singular_fallback < 0.0) {
                // Average over B_{h/6}(0); finite exactly when v is soft-core.
                double rho = h / 6.0;
                RadialIntegral inside = origin_integral(v, dim, rho);
                if (!inside.converged) {
                    *saw_infinite = true;
                    return kInf;
                }
                double vol_over_area = std::pow(rho, dim) / dim;  // |B_rho| / omega_d
                *singular_fallback = inside.value / vol_over_area;
            }
            val = *singular_fallback;
        }
        acc += val;
    }
    return acc / npts;
}

}  // namespace

InteractionKernel::InteractionKernel(const Grid& grid, const PairPotential& v)
    : impl_(new Impl) {
    Impl& im = *impl_;
    im.grid = grid;
    im.n = grid.n;
    im.ext = (grid.bc == Bc::periodic) ? grid.n : 2 * grid.n - 1;
    const double h = grid.spacing();

    std::int64_t total = 1;
    for (int k = 0; k < grid.dim; ++k) total *= im.ext;
    im.samples.assign(static_cast<std::size_t>(total), 0.0);

    double fallback = -1.0;
    bool saw_inf = false;
    std::vector<double> center(grid.dim);
    std::vector<int> off(grid.dim, 0);
    MultiIndex mi(grid.dim);
    std::int64_t idx = 0;
    double mn = kInf;
    do {
        for (int k = 0; k < grid.dim; ++k) {
            int o = mi.m[k];
            if (grid.bc == Bc::periodic) {
                // min-image displacement on the torus
                if (o > im.n / 2) o -= im.n;
            } else {
                o -= im.n - 1;
            }
            center[k] = o * h;
            off[k] = o;
        }
        double s = cell_average(v, center, h, grid.dim, &fallback, &saw_inf);
        if (!std::isfinite(s)) saw_inf = true;
        im.samples[idx] = s;
        mn = std::min(mn, s);
        ++idx;
    } while (mi.advance(im.ext));
    im.has_infinite = saw_inf;
    im.min_sample = mn;

    if (!im.has_infinite) {
        im.pad = (grid.bc == Bc::periodic) ? grid.n : 2 * grid.n;
        im.pad_cells = 1;
        for (int k = 0; k < grid.dim; ++k) im.pad_cells *= im.pad;
        im.hat_cells = im.pad_cells / im.pad * (im.pad / 2 + 1);

        std::lock_guard<std::mutex> lk(fftw_mutex());
        im.rbuf = fftw_alloc_real(static_cast<std::size_t>(im.pad_cells));
        im.cbuf = fftw_alloc_complex(static_cast<std::size_t>(im.hat_cells));
        std::vector<int> dims(grid.dim, im.pad);  // fftw wants slowest-first; cube, so any order
        im.fwd = fftw_plan_dft_r2c(grid.dim, dims.data(), im.rbuf, im.cbuf, FFTW_ESTIMATE);
        im.bwd = fftw_plan_dft_c2r(grid.dim, dims.data(), im.cbuf, im.rbuf, FFTW_ESTIMATE);

        // Transform of the kernel placed at wrapped offsets.
        std::memset(im.rbuf, 0, sizeof(double) * static_cast<std::size_t>(im.pad_cells));
        MultiIndex mj(grid.dim);
        idx = 0;
        do {
            std::int64_t pidx = 0;
            for (int k = grid.dim - 1; k >= 0; --k) {
                int w = mj.m[k];
                if (grid.bc == Bc::dirichlet)
                    w = (((w - (im.n - 1)) % im.pad) + im.pad) % im.pad;
                pidx = pidx * im.pad + w;
            }
            im.rbuf[pidx] = im.samples[idx];
            ++idx;
        } while (mj.advance(im.ext));
        fftw_execute(im.fwd);
        im.kernel_hat_re.resize(static_cast<std::size_t>(im.hat_cells));
        im.kernel_hat_im.resize(static_cast<std::size_t>(im.hat_cells));
        for (std::int64_t i = 0; i < im.hat_cells; ++i) {
            im.kernel_hat_re[i] = im.cbuf[i][0];
            im.kernel_hat_im[i] = im.cbuf[i][1];
        }
    }
}

InteractionKernel::~InteractionKernel() = default;
InteractionKernel::InteractionKernel(InteractionKernel&&) noexcept = default;
InteractionKernel& InteractionKernel::operator=(InteractionKernel&&) noexcept = default;

const Grid& InteractionKernel::grid() const { return impl_->grid; }

double InteractionKernel::at_offset(std::span<const int> offset) const {
    return impl_->samples[impl_->sample_index(offset)];
}

double InteractionKernel::min_sample() const { return impl_->min_sample; }

double InteractionKernel::sample_mass() const {
    double s = 0.0;
    for (double x : impl_->samples) s += x;
    return s * impl_->grid.cell_volume();
}

ScalarField InteractionKernel::apply(const DensityField& rho) const {
    Impl& im = *impl_;
    if (!(rho.grid == im.grid)) throw domain_error("apply_V: grid mismatch");
    if (im.has_infinite) throw domain_error("apply_V: kernel has infinite cells; cap v first");
    std::lock_guard<std::mutex> lk(im.apply_mutex);

    const int dim = im.grid.dim;
    const int n = im.n;
    std::memset(im.rbuf, 0, sizeof(double) * static_cast<std::size_t>(im.pad_cells));
    // embed rho (index 0.. n-1 per axis) into the padded array
    MultiIndex mi(dim);
    std::int64_t src = 0;
    do {
        std::int64_t pidx = 0;
        for (int k = dim - 1; k >= 0; --k) pidx = pidx * im.pad + mi.m[k];
        im.rbuf[pidx] = rho.values[src];
        ++src;
    } while (mi.advance(n));
    fftw_execute(im.fwd);
    for (std::int64_t i = 0; i < im.hat_cells; ++i) {
        double ar = im.cbuf[i][0], ai = im.cbuf[i][1];
        double br = im.kernel_hat_re[i], bi = im.kernel_hat_im[i];
        im.cbuf[i][0] = ar * br - ai * bi;
        im.cbuf[i][1] = ar * bi + ai * br;
    }
    fftw_execute(im.bwd);

    ScalarField out(im.grid);
    const double scale = im.grid.cell_volume() / static_cast<double>(im.pad_cells);
    MultiIndex mo(dim);
    std::int64_t dst = 0;
    do {
        std::int64_t pidx = 0;
        for (int k = dim - 1; k >= 0; --k) pidx = pidx * im.pad + mo.m[k];
        out.values[dst] = im.rbuf[pidx] * scale;
        ++dst;
    } while (mo.advance(n));
    return out;
}

ScalarField InteractionKernel::apply_direct(const DensityField& rho) const {
    Impl& im = *impl_;
    if (!(rho.grid == im.grid)) throw domain_error("apply_V: grid mismatch");
    if (im.has_infinite) throw domain_error("apply_V: kernel has infinite cells; cap v first");
    const int dim = im.grid.dim;
    const int n = im.n;
    ScalarField out(im.grid);
    std::vector<int> mx(dim), my(dim), off(dim);
    const double hvol = im.grid.cell_volume();
    for (std::int64_t x = 0; x < im.grid.cells(); ++x) {
        im.grid.unravel(x, mx);
        double acc = 0.0;
        for (std::int64_t y = 0; y < im.grid.cells(); ++y) {
            if (rho.values[y] == 0.0) continue;
            im.grid.unravel(y, my);
            for (int k = 0; k < dim; ++k) off[k] = mx[k] - my[k];
            acc += im.samples[im.sample_index(off)] * rho.values[y];
        }
        out.values[x] = acc * hvol;
    }
    return out;
}

double interaction_pairing(const InteractionKernel& k, const DensityField& a,
                           const DensityField& b) {
    ScalarField vb = k.apply(b);
    return inner(a.values, vb.values, a.grid.cell_volume());
}

DensityField periodize(const DensityField& rho, double R_target) {
    const Grid& gs = rho.grid;
    const double h = gs.spacing();
    if (!(R_target > 0.0) || R_target > gs.half_width + 1e-12)
        throw domain_error("periodize: target box must fit inside the source box");
    double nt_real = 2.0 * R_target / h;
    int nt = static_cast<int>(std::llround(nt_real));
    if (std::abs(nt_real - nt) > 1e-9 || nt < 4)
        throw domain_error("periodize: source spacing does not divide the target box");
    double m_real = (R_target - gs.half_width) / h;
    long m = std::llround(m_real);
    if (std::abs(m_real - m) > 1e-9)
        throw domain_error("periodize: source and target lattices are not aligned");

    Grid gt(gs.dim, R_target, nt, Bc::periodic);
    // per-axis index map: source j -> target cell
    int delta = (gs.bc == Bc::dirichlet) ? 1 : 0;
    std::vector<int> map(gs.n);
    for (int j = 0; j < gs.n; ++j) {
        long t = (j + delta + m) % nt;
        if (t < 0) t += nt;
        map[j] = static_cast<int>(t);
    }
    DensityField out(gt);
    std::vector<int> mi(gs.dim);
    for (std::int64_t i = 0; i < gs.cells(); ++i) {
        if (rho.values[i] == 0.0) continue;
        gs.unravel(i, mi);
        std::int64_t tidx = 0;
        for (int k = gs.dim - 1; k >= 0; --k) tidx = tidx * nt + map[mi[k]];
        out.values[tidx] += rho.values[i];
    }
    return out;
}

double tv_distance(const DensityField& a, const DensityField& b) {
    if (!(a.grid == b.grid)) throw domain_error("tv_distance: grid mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += std::abs(a.values[i] - b.values[i]);
    return 0.5 * s * a.grid.cell_volume();
}

}  // namespace traplab
