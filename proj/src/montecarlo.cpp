#include "traplab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <thread>

#include "traplab/variational.hpp"

namespace traplab {

bool metropolis_accept(double delta_log_weight, CounterRng& rng) {
    if (delta_log_weight >= 0.0) {
        rng.uniform();  // keep the stream aligned regardless of the branch
        return true;
    }
    if (delta_log_weight == -kInf || std::isnan(delta_log_weight)) {
        rng.uniform();
        return false;
    }
    return std::log(rng.uniform()) < delta_log_weight;
}

// ---------------------------------------------------------------------------
// Free path sampling
// ---------------------------------------------------------------------------

namespace {

void draw_start(const StartDistribution& start, int d, CounterRng& rng, double* out) {
    if (start.kind == StartDistribution::Kind::point) {
        for (int k = 0; k < d; ++k) out[k] = (k < static_cast<int>(start.point.size())) ? start.point[k] : 0.0;
    } else {
        for (int k = 0; k < d; ++k) out[k] = rng.uniform(-start.box_half_width, start.box_half_width);
    }
}

}  // namespace

PathEnsemble sample_free_paths(int N, int d, double beta, double dt,
                               const StartDistribution& start, CounterRng& rng) {
    PathEnsemble ens;
    ens.N = N;
    ens.d = d;
    ens.beta = beta;
    ens.dt = dt;
    ens.slices = static_cast<int>(std::llround(beta / dt));
    if (std::abs(ens.slices * dt - beta) > 1e-9 * beta || ens.slices < 1)
        throw config_error("path ensemble: dt must divide beta");
    const double sd = std::sqrt(2.0 * dt);
    ens.pos.assign(N, std::vector<double>(static_cast<std::size_t>(ens.slices + 1) * d));
    for (int i = 0; i < N; ++i) {
        draw_start(start, d, rng, ens.at(i, 0));
        for (int k = 1; k <= ens.slices; ++k)
            for (int a = 0; a < d; ++a) ens.at(i, k)[a] = ens.at(i, k - 1)[a] + sd * rng.normal();
    }
    return ens;
}

// ---------------------------------------------------------------------------
// Hamiltonians
// ---------------------------------------------------------------------------

double hamiltonian_H(const PathEnsemble& ens, const TrapPotential& W) {
    double acc = 0.0;
    for (int i = 0; i < ens.N; ++i)
        for (int k = 0; k <= ens.slices; ++k) {
            double w = W(std::span<const double>(ens.at(i, k), ens.d));
            if (w == kInf) return kInf;
            acc += ens.weight(k) * w;
        }
    return acc;
}

double hamiltonian_G(const PathEnsemble& ens, const PairPotential& v) {
    if (v.is_zero()) return 0.0;
    double acc = 0.0;
    for (int k = 0; k <= ens.slices; ++k) {
        double wk = ens.weight(k);
        for (int i = 0; i < ens.N; ++i)
            for (int j = i + 1; j < ens.N; ++j) {
                double r2 = 0.0;
                for (int a = 0; a < ens.d; ++a) {
                    double dd = ens.at(i, k)[a] - ens.at(j, k)[a];
                    r2 += dd * dd;
                }
                double vv = v(std::sqrt(r2));
                if (vv == kInf) return kInf;
                acc += wk * vv;
            }
    }
    return acc;
}

namespace {

// bin index of a coordinate, or -1 if outside the grid footprint
inline int bin_axis(const Grid& g, double x) {
    double j = std::floor((x - g.coord(0)) / g.spacing() + 0.5);
    int ji = static_cast<int>(j);
    if (g.bc == Bc::periodic) {
        ji %= g.n;
        if (ji < 0) ji += g.n;
        return ji;
    }
    return (ji < 0 || ji >= g.n) ? -1 : ji;
}

// linear bin of a point, or -1 if escaped
std::int64_t bin_point(const Grid& g, const double* x) {
    std::int64_t idx = 0;
    for (int k = g.dim - 1; k >= 0; --k) {
        int j = bin_axis(g, x[k]);
        if (j < 0) return -1;
        idx = idx * g.n + j;
    }
    return idx;
}

// per-path binned weights (sum = beta when nothing escapes)
std::vector<double> bin_path(const PathEnsemble& ens, int path, const Grid& g, double* escaped) {
    std::vector<double> w(static_cast<std::size_t>(g.cells()), 0.0);
    double esc = 0.0;
    for (int k = 0; k <= ens.slices; ++k) {
        std::int64_t c = bin_point(g, ens.at(path, k));
        if (c < 0) esc += ens.weight(k);
        else w[c] += ens.weight(k);
    }
    if (escaped) *escaped = esc;
    return w;
}

}  // namespace

double hamiltonian_K(const PathEnsemble& ens, const InteractionKernel& kernel,
                     bool include_self) {
    const Grid& g = kernel.grid();
    std::vector<DensityField> mu;
    mu.reserve(ens.N);
    for (int i = 0; i < ens.N; ++i) {
        double esc = 0.0;
        std::vector<double> w = bin_path(ens, i, g, &esc);
        if (esc > 0.0) return kInf;  // confinement: escaping paths carry weight zero
        DensityField rho(g);
        const double scale = 1.0 / (ens.beta * g.cell_volume());
        for (std::size_t c = 0; c < w.size(); ++c) rho.values[c] = w[c] * scale;
        mu.push_back(std::move(rho));
    }
    double acc = 0.0;
    for (int i = 0; i < ens.N; ++i)
        for (int j = i + 1; j < ens.N; ++j) acc += interaction_pairing(kernel, mu[i], mu[j]);
    if (include_self)
        for (int i = 0; i < ens.N; ++i) acc += interaction_pairing(kernel, mu[i], mu[i]);
    return ens.beta * acc;
}

double hamiltonian_K_direct(const PathEnsemble& ens, const PairPotential& v, bool include_self) {
    double acc = 0.0;
    for (int i = 0; i < ens.N; ++i)
        for (int j = include_self ? i : i + 1; j < ens.N; ++j) {
            double sij = 0.0;
            for (int k = 0; k <= ens.slices; ++k)
                for (int l = 0; l <= ens.slices; ++l) {
                    double r2 = 0.0;
                    for (int a = 0; a < ens.d; ++a) {
                        double dd = ens.at(i, k)[a] - ens.at(j, l)[a];
                        r2 += dd * dd;
                    }
                    sij += ens.weight(k) * ens.weight(l) * v(std::sqrt(r2));
                }
            acc += sij / ens.beta;
        }
    return acc;
}

OccupationHistogram occupation(const PathEnsemble& ens, int path, const Grid& grid) {
    OccupationHistogram out;
    double esc = 0.0;
    std::vector<double> w = bin_path(ens, path, grid, &esc);
    out.escaped = esc / ens.beta;
    DensityField rho(grid);
    double inbox = ens.beta - esc;
    if (inbox > 0.0) {
        const double scale = 1.0 / (inbox * grid.cell_volume());
        for (std::size_t c = 0; c < w.size(); ++c) rho.values[c] = w[c] * scale;
    }
    out.density = std::move(rho);
    return out;
}

OccupationHistogram occupation_mean(const PathEnsemble& ens, const Grid& grid) {
    OccupationHistogram out;
    out.density = DensityField(grid);
    for (int i = 0; i < ens.N; ++i) {
        OccupationHistogram one = occupation(ens, i, grid);
        out.escaped += one.escaped / ens.N;
        for (std::size_t c = 0; c < out.density.values.size(); ++c)
            out.density.values[c] += one.density.values[c] / ens.N;
    }
    return out;
}

// ---------------------------------------------------------------------------
// BrownianSampler
// ---------------------------------------------------------------------------

struct BrownianSampler::Impl {
    PathEnsemble ens;
    TrapPotential W = TrapPotential::power(2.0);
    PairPotential v = PairPotential::zero();
    Grid grid;
    StartDistribution start;
    BrownianSamplerOptions opts;
    std::unique_ptr<InteractionKernel> kernel;

    // caches
    std::vector<double> trapH;               // per-path trap integral
    double G = 0.0;                          // canonical pair term
    std::vector<std::vector<double>> wbin;   // per-path binned weights
    std::vector<std::vector<double>> F;      // per-path kernel convolution of wbin
    std::vector<std::vector<double>> S;      // pair sums S_ij = sum_c wbin_i F_j
    std::vector<std::vector<int>> cell_multi;

    long accepted = 0;
    long proposed = 0;

    double box_lo = 0.0, box_hi = 0.0;

    bool hartree() const {
        return opts.model == McModel::hartree || opts.model == McModel::hartree_self;
    }

    bool in_box(const double* x) const {
        if (!opts.confine_to_grid) return true;
        for (int a = 0; a < ens.d; ++a)
            if (x[a] < box_lo || x[a] > box_hi) return false;
        return true;
    }

    double trap_at(const double* x) const { return W(std::span<const double>(x, ens.d)); }

    double pair_at(const double* x, const double* y) const {
        double r2 = 0.0;
        for (int a = 0; a < ens.d; ++a) {
            double dd = x[a] - y[a];
            r2 += dd * dd;
        }
        return v(std::sqrt(r2));
    }

    void rebuild_caches() {
        trapH.assign(ens.N, 0.0);
        for (int i = 0; i < ens.N; ++i)
            for (int k = 0; k <= ens.slices; ++k)
                trapH[i] += ens.weight(k) * trap_at(ens.at(i, k));
        if (opts.model == McModel::canonical) {
            G = hamiltonian_G(ens, v);
        } else if (kernel) {
            wbin.assign(ens.N, {});
            F.assign(ens.N, {});
            S.assign(ens.N, std::vector<double>(ens.N, 0.0));
            for (int i = 0; i < ens.N; ++i) {
                double esc = 0.0;
                wbin[i] = bin_path(ens, i, grid, &esc);
                if (esc > 0.0) throw solver_error("brownian sampler: initial path escapes the box");
                F[i] = convolve(wbin[i]);
            }
            for (int i = 0; i < ens.N; ++i)
                for (int j = 0; j < ens.N; ++j) {
                    double s = 0.0;
                    for (std::size_t c = 0; c < wbin[i].size(); ++c) s += wbin[i][c] * F[j][c];
                    S[i][j] = s;
                }
        }
    }

    std::vector<double> convolve(const std::vector<double>& w) const {
        DensityField rho(grid);
        const double scale = 1.0 / grid.cell_volume();
        for (std::size_t c = 0; c < w.size(); ++c) rho.values[c] = w[c] * scale;
        ScalarField f = kernel->apply(rho);
        return f.values;
    }

    double potential_energy() const {
        double H = 0.0;
        for (double t : trapH) H += t;
        if (opts.model == McModel::canonical) return H + G;
        double K = 0.0;
        for (int i = 0; i < ens.N; ++i)
            for (int j = i + 1; j < ens.N; ++j) K += S[i][j];
        if (opts.model == McModel::hartree_self)
            for (int i = 0; i < ens.N; ++i) K += S[i][i];
        return H + K / ens.beta;
    }

    // --- proposal application ------------------------------------------------

    struct Patch {
        int path = 0;
        int k_lo = 0, k_hi = 0;           // changed slice range (inclusive)
        std::vector<double> fresh;         // (k_hi - k_lo + 1) * d coordinates
        double start_ratio_log = 0.0;
        const double* at(int k, int d_) const {
            return fresh.data() + static_cast<std::size_t>(k - k_lo) * d_;
        }
    };

    bool apply_patch(const Patch& p, CounterRng& rng) {
        ++proposed;
        const int i = p.path;
        for (int k = p.k_lo; k <= p.k_hi; ++k)
            if (!in_box(p.at(k, ens.d))) {
                rng.uniform();
                return false;
            }
        // trap delta
        double dH = 0.0;
        for (int k = p.k_lo; k <= p.k_hi; ++k) {
            double wnew = trap_at(p.at(k, ens.d));
            double wold = trap_at(ens.at(i, k));
            if (wnew == kInf) {
                rng.uniform();
                return false;
            }
            dH += ens.weight(k) * ((wold == kInf ? 0.0 : wnew - wold));
            if (wold == kInf) dH = kInf;  // should not happen for valid states
        }
        double dU = dH;
        std::vector<std::pair<std::int64_t, double>> dw;  // bin weight deltas
        double dS_row_total = 0.0, dS_self = 0.0;
        if (opts.model == McModel::canonical) {
            if (!v.is_zero()) {
                double dG = 0.0;
                for (int k = p.k_lo; k <= p.k_hi; ++k) {
                    double wk = ens.weight(k);
                    for (int j = 0; j < ens.N; ++j) {
                        if (j == i) continue;
                        double vn = pair_at(p.at(k, ens.d), ens.at(j, k));
                        double vo = pair_at(ens.at(i, k), ens.at(j, k));
                        if (vn == kInf) {
                            rng.uniform();
                            return false;
                        }
                        dG += wk * (vn - vo);
                    }
                }
                dU += dG;
            }
        } else if (kernel) {
            // sparse bin delta for path i
            std::map<std::int64_t, double> dmap;
            for (int k = p.k_lo; k <= p.k_hi; ++k) {
                std::int64_t cn = bin_point(grid, p.at(k, ens.d));
                std::int64_t co = bin_point(grid, ens.at(i, k));
                if (cn < 0) {
                    rng.uniform();
                    return false;
                }
                if (cn != co) {
                    dmap[cn] += ens.weight(k);
                    if (co >= 0) dmap[co] -= ens.weight(k);
                }
            }
            dw.assign(dmap.begin(), dmap.end());
            for (auto& [c, dv] : dw) {
                double fj = 0.0;
                for (int j = 0; j < ens.N; ++j)
                    if (j != i) fj += F[j][c];
                dS_row_total += dv * fj;
                if (opts.model == McModel::hartree_self) dS_self += 2.0 * dv * F[i][c];
            }
            if (opts.model == McModel::hartree_self) {
                // second-order self term sum_{cc'} dw k dw
                for (auto& [c1, d1] : dw)
                    for (auto& [c2, d2] : dw) dS_self += d1 * d2 * kernel_cc(c1, c2);
            }
            dU += (dS_row_total + dS_self) / ens.beta;
        }
        double delta_log = -opts.coupling * dU + p.start_ratio_log;
        if (!metropolis_accept(delta_log, rng)) return false;

        // commit
        for (int k = p.k_lo; k <= p.k_hi; ++k)
            std::memcpy(ens.at(i, k), p.at(k, ens.d), sizeof(double) * ens.d);
        trapH[i] += dH;
        if (opts.model == McModel::canonical) {
            if (!v.is_zero()) G = hamiltonian_G(ens, v);  // refresh; O(slices N^2) but exact
        } else if (kernel) {
            for (auto& [c, dv] : dw) wbin[i][c] += dv;
            // update F_i and the S row/column
            for (auto& [c, dv] : dw) add_kernel_column(F[i], c, dv);
            for (int j = 0; j < ens.N; ++j) {
                if (j == i) continue;
                double ds = 0.0;
                for (auto& [c, dv] : dw) ds += dv * F[j][c];
                S[i][j] += ds;
                S[j][i] = S[i][j];
            }
            double dsii = 0.0;
            for (auto& [c, dv] : dw) dsii += 2.0 * dv * F[i][c];
            // F[i] already includes the delta, so subtract the double count
            for (auto& [c1, d1] : dw)
                for (auto& [c2, d2] : dw) dsii -= d1 * d2 * kernel_cc(c1, c2);
            S[i][i] += dsii;
        }
        ++accepted;
        return true;
    }

    // F_j[c] = sum_y kbar(c - y) w_j[y]; these helpers stay in the same units.
    double kernel_cc(std::int64_t c1, std::int64_t c2) const {
        std::vector<int> off(grid.dim);
        for (int k = 0; k < grid.dim; ++k) off[k] = cell_multi[c1][k] - cell_multi[c2][k];
        return kernel->at_offset(off);
    }

    void add_kernel_column(std::vector<double>& f, std::int64_t c0, double dv) {
        std::vector<int> off(grid.dim);
        for (std::int64_t c = 0; c < grid.cells(); ++c) {
            for (int k = 0; k < grid.dim; ++k) off[k] = cell_multi[c][k] - cell_multi[c0][k];
            f[c] += kernel->at_offset(off) * dv;
        }
    }

    // --- proposals -----------------------------------------------------------

    void propose_bridge(CounterRng& rng) {
        Patch p;
        p.path = static_cast<int>(rng.uniform_index(ens.N));
        int L = 2 + static_cast<int>(rng.uniform_index(std::max(1, opts.max_bridge_slices - 1)));
        L = std::min(L, ens.slices);
        int k1 = static_cast<int>(rng.uniform_index(ens.slices - L + 1));
        int k2 = k1 + L;
        p.k_lo = k1 + 1;
        p.k_hi = k2 - 1;
        if (p.k_hi < p.k_lo) {
            ++proposed;  // degenerate; counts as a null proposal
            return;
        }
        p.fresh.resize(static_cast<std::size_t>(p.k_hi - p.k_lo + 1) * ens.d);
        const double* z = ens.at(p.path, k2);
        std::vector<double> cur(ens.at(p.path, k1), ens.at(p.path, k1) + ens.d);
        for (int m = p.k_lo; m <= p.k_hi; ++m) {
            int Lrem = k2 - (m - 1);
            double var = 2.0 * ens.dt * (Lrem - 1) / Lrem;
            double sd = std::sqrt(var);
            for (int a = 0; a < ens.d; ++a) {
                double mean = cur[a] + (z[a] - cur[a]) / Lrem;
                cur[a] = mean + sd * rng.normal();
                p.fresh[static_cast<std::size_t>(m - p.k_lo) * ens.d + a] = cur[a];
            }
        }
        apply_patch(p, rng);
    }

    void propose_endpoint(CounterRng& rng) {
        Patch p;
        p.path = static_cast<int>(rng.uniform_index(ens.N));
        int tail = 1 + static_cast<int>(rng.uniform_index(std::max(1, opts.max_bridge_slices)));
        tail = std::min(tail, ens.slices);
        p.k_lo = ens.slices - tail + 1;
        p.k_hi = ens.slices;
        p.fresh.resize(static_cast<std::size_t>(tail) * ens.d);
        std::vector<double> cur(ens.at(p.path, p.k_lo - 1), ens.at(p.path, p.k_lo - 1) + ens.d);
        const double sd = std::sqrt(2.0 * ens.dt);
        for (int m = p.k_lo; m <= p.k_hi; ++m)
            for (int a = 0; a < ens.d; ++a) {
                cur[a] += sd * rng.normal();
                p.fresh[static_cast<std::size_t>(m - p.k_lo) * ens.d + a] = cur[a];
            }
        apply_patch(p, rng);
    }

    void propose_shift(CounterRng& rng) {
        if (start.kind == StartDistribution::Kind::point) {
            propose_bridge(rng);
            return;
        }
        Patch p;
        p.path = static_cast<int>(rng.uniform_index(ens.N));
        std::vector<double> eta(ens.d);
        for (int a = 0; a < ens.d; ++a) eta[a] = opts.shift_scale * rng.normal();
        p.k_lo = 0;
        p.k_hi = ens.slices;
        p.fresh.resize(static_cast<std::size_t>(ens.slices + 1) * ens.d);
        for (int k = 0; k <= ens.slices; ++k)
            for (int a = 0; a < ens.d; ++a)
                p.fresh[static_cast<std::size_t>(k) * ens.d + a] = ens.at(p.path, k)[a] + eta[a];
        // uniform start density: ratio is the in-box indicator of the new start
        for (int a = 0; a < ens.d; ++a)
            if (std::abs(p.fresh[a]) > start.box_half_width) p.start_ratio_log = -kInf;
        apply_patch(p, rng);
    }
};

BrownianSampler::BrownianSampler(PathEnsemble ens, const TrapPotential& W, const PairPotential& v,
                                 const Grid& bin_grid, const StartDistribution& start,
                                 const BrownianSamplerOptions& opts)
    : impl_(new Impl) {
    impl_->ens = std::move(ens);
    impl_->W = W;
    impl_->v = v;
    impl_->grid = bin_grid;
    impl_->start = start;
    impl_->opts = opts;
    if (bin_grid.dim != impl_->ens.d) throw config_error("brownian sampler: grid dim != path dim");
    double h = bin_grid.spacing();
    impl_->box_lo = bin_grid.coord(0) - 0.5 * h;
    impl_->box_hi = bin_grid.coord(bin_grid.n - 1) + 0.5 * h;
    if (impl_->hartree() && !v.is_zero()) {
        impl_->kernel = std::make_unique<InteractionKernel>(bin_grid, v);
        impl_->cell_multi.assign(static_cast<std::size_t>(bin_grid.cells()),
                                 std::vector<int>(bin_grid.dim));
        for (std::int64_t c = 0; c < bin_grid.cells(); ++c)
            bin_grid.unravel(c, impl_->cell_multi[c]);
    }
    impl_->rebuild_caches();
}

BrownianSampler::~BrownianSampler() = default;
BrownianSampler::BrownianSampler(BrownianSampler&&) noexcept = default;

void BrownianSampler::step(CounterRng& rng) {
    double u = rng.uniform();
    if (u < 0.70) impl_->propose_bridge(rng);
    else if (u < 0.92) impl_->propose_endpoint(rng);
    else impl_->propose_shift(rng);
}

void BrownianSampler::step(McMove move, CounterRng& rng) {
    switch (move) {
        case McMove::bridge_segment: impl_->propose_bridge(rng); break;
        case McMove::endpoint: impl_->propose_endpoint(rng); break;
        case McMove::whole_shift: impl_->propose_shift(rng); break;
    }
}

const PathEnsemble& BrownianSampler::ensemble() const { return impl_->ens; }
double BrownianSampler::potential_energy() const { return impl_->potential_energy(); }
double BrownianSampler::acceptance_rate() const {
    return impl_->proposed ? static_cast<double>(impl_->accepted) / impl_->proposed : 0.0;
}
long BrownianSampler::proposals() const { return impl_->proposed; }

void BrownianSampler::accumulate_occupation(std::vector<DensityField>& acc, double w) const {
    if (acc.empty()) acc.assign(impl_->ens.N, DensityField(impl_->grid));
    for (int i = 0; i < impl_->ens.N; ++i) {
        OccupationHistogram h = occupation(impl_->ens, i, impl_->grid);
        for (std::size_t c = 0; c < acc[i].values.size(); ++c)
            acc[i].values[c] += w * h.density.values[c];
    }
}

// ---------------------------------------------------------------------------
// Continuous-time walks
// ---------------------------------------------------------------------------

WalkTrajectory simulate_walk(int d, double beta, double rate_per_edge, const Site& start,
                             CounterRng& rng) {
    if (d < 1 || d > 4) throw config_error("walk: d must be in [1, 4]");
    WalkTrajectory tr;
    tr.d = d;
    tr.beta = beta;
    tr.rate_per_edge = rate_per_edge;
    tr.sites.push_back(start);
    double t = 0.0;
    const double total_rate = 2.0 * d * rate_per_edge;
    while (true) {
        t += rng.exponential(total_rate);
        if (t >= beta) break;
        std::uint64_t dir = rng.uniform_index(2 * d);
        Site nxt = tr.sites.back();
        int axis = static_cast<int>(dir / 2);
        nxt[axis] += (dir % 2 == 0) ? 1 : -1;
        tr.sites.push_back(nxt);
        tr.jump_times.push_back(t);
    }
    return tr;
}

std::vector<WalkTrajectory> ctrw_simulate(int N, double beta, int d, std::uint64_t seed) {
    std::vector<WalkTrajectory> out;
    out.reserve(N);
    for (int i = 0; i < N; ++i) {
        CounterRng rng(seed, 0x77A1C000u + static_cast<std::uint64_t>(i));
        Site origin{};
        out.push_back(simulate_walk(d, beta, 1.0, origin, rng));
    }
    return out;
}

std::map<Site, double> local_times(const WalkTrajectory& tr) {
    std::map<Site, double> lt;
    double prev = 0.0;
    for (std::size_t k = 0; k < tr.jump_times.size(); ++k) {
        lt[tr.sites[k]] += tr.jump_times[k] - prev;
        prev = tr.jump_times[k];
    }
    lt[tr.sites.back()] += tr.beta - prev;
    return lt;
}

double intersection_alpha(const std::map<Site, double>& li, const std::map<Site, double>& lj,
                          double beta) {
    double s = 0.0;
    for (const auto& [z, t] : li) {
        auto it = lj.find(z);
        if (it != lj.end()) s += t * it->second;
    }
    return s / (beta * beta);
}

double intersection_alpha(const WalkTrajectory& ti, const WalkTrajectory& tj) {
    return intersection_alpha(local_times(ti), local_times(tj), ti.beta);
}

double rescaled_inner(const std::map<Site, double>& li, const std::map<Site, double>& lj,
                      double beta, double xi, int d) {
    // <L_i, L_j> = xi^d beta^{-2} sum_z l_i l_j
    double s = 0.0;
    for (const auto& [z, t] : li) {
        auto it = lj.find(z);
        if (it != lj.end()) s += t * it->second;
    }
    return std::pow(xi, d) / (beta * beta) * s;
}

double xi_beta(double beta, double p) { return std::pow(beta, 1.0 / (2.0 + p)); }

OccupationHistogram rescaled_L_density(const WalkTrajectory& tr, double p, const Grid& grid) {
    if (grid.dim != tr.d) throw domain_error("rescaled_L_density: grid dim != walk dim");
    const double xi = xi_beta(tr.beta, p);
    std::map<Site, double> lt = local_times(tr);
    OccupationHistogram out;
    out.density = DensityField(grid);
    const double h = grid.spacing();
    // lattice cell z covers [z/xi, (z+1)/xi); grid cell j covers coord(j) +- h/2
    std::vector<std::pair<int, double>> ov[4];
    for (const auto& [z, t] : lt) {
        double mass = t / tr.beta;  // integral of L over the lattice cell
        for (int a = 0; a < tr.d; ++a) {
            ov[a].clear();
            double lo = z[a] / xi, hi = (z[a] + 1) / xi;
            int j_lo = std::max(0, static_cast<int>(std::floor((lo - grid.coord(0) + 0.5 * h) / h)));
            int j_hi = std::min(grid.n - 1,
                                static_cast<int>(std::floor((hi - grid.coord(0) + 0.5 * h) / h)));
            for (int j = j_lo; j <= j_hi; ++j) {
                double glo = grid.coord(j) - 0.5 * h, ghi = grid.coord(j) + 0.5 * h;
                double w = std::max(0.0, std::min(hi, ghi) - std::max(lo, glo)) * xi;
                if (w > 0.0) ov[a].emplace_back(j, w);
            }
        }
        // distribute mass over the overlap product
        std::vector<std::size_t> pick(tr.d, 0);
        bool any = true;
        for (int a = 0; a < tr.d; ++a) any = any && !ov[a].empty();
        if (!any) {
            out.escaped += mass;
            continue;
        }
        double used = 0.0;
        while (true) {
            double w = 1.0;
            std::int64_t idx = 0;
            for (int a = tr.d - 1; a >= 0; --a) {
                w *= ov[a][pick[a]].second;
                idx = idx * grid.n + ov[a][pick[a]].first;
            }
            out.density.values[idx] += mass * w / grid.cell_volume();
            used += w;
            int a = 0;
            for (; a < tr.d; ++a) {
                if (++pick[a] < ov[a].size()) break;
                pick[a] = 0;
            }
            if (a == tr.d) break;
        }
        out.escaped += mass * (1.0 - used);
    }
    return out;
}

double dirac_log_weight(const std::vector<WalkTrajectory>& trajs, double p, double lambda) {
    const int N = static_cast<int>(trajs.size());
    const double beta = trajs[0].beta;
    const int d = trajs[0].d;
    double trap = 0.0;
    std::vector<std::map<Site, double>> lts;
    lts.reserve(N);
    for (const auto& tr : trajs) lts.push_back(local_times(tr));
    for (const auto& lt : lts)
        for (const auto& [z, t] : lt) {
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) r2 += static_cast<double>(z[a]) * z[a];
            trap += t * std::pow(r2, 0.5 * p);
        }
    double inter = 0.0;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) inter += intersection_alpha(lts[i], lts[j], beta);
    return -trap / beta - lambda * std::pow(beta, (d + p) / (2.0 + p)) * inter;
}

// ---------------------------------------------------------------------------
// Walk move machinery (shared by the Dirac and lattice samplers)
// ---------------------------------------------------------------------------

namespace {

double site_time(const WalkTrajectory& tr, double t, Site* out) {
    // site occupied at time t
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(tr.jump_times.begin(), tr.jump_times.end(), t) - tr.jump_times.begin());
    *out = tr.sites[k];
    return k == 0 ? 0.0 : tr.jump_times[k - 1];
}

// Resample the walk freely on [t1, beta]; if translate_tail, keep the old
// suffix after t2 but translate it to glue at the resampled window end.
WalkTrajectory resample_window(const WalkTrajectory& tr, double t1, double t2, bool translate_tail,
                               CounterRng& rng) {
    WalkTrajectory out;
    out.d = tr.d;
    out.beta = tr.beta;
    out.rate_per_edge = tr.rate_per_edge;
    // prefix (strictly before t1)
    Site s1;
    site_time(tr, t1, &s1);
    out.sites.push_back(tr.sites[0]);
    for (std::size_t k = 0; k < tr.jump_times.size() && tr.jump_times[k] < t1; ++k) {
        out.sites.push_back(tr.sites[k + 1]);
        out.jump_times.push_back(tr.jump_times[k]);
    }
    // fresh window from s1 on [t1, t2)
    const double total_rate = 2.0 * tr.d * tr.rate_per_edge;
    Site cur = s1;
    double t = t1;
    while (true) {
        t += rng.exponential(total_rate);
        if (t >= t2) break;
        std::uint64_t dir = rng.uniform_index(2 * tr.d);
        int axis = static_cast<int>(dir / 2);
        cur[axis] += (dir % 2 == 0) ? 1 : -1;
        out.sites.push_back(cur);
        out.jump_times.push_back(t);
    }
    if (translate_tail && t2 < tr.beta) {
        Site old2;
        site_time(tr, t2, &old2);
        Site shift;
        for (int a = 0; a < tr.d; ++a) shift[a] = cur[a] - old2[a];
        std::size_t k = static_cast<std::size_t>(
            std::upper_bound(tr.jump_times.begin(), tr.jump_times.end(), t2) -
            tr.jump_times.begin());
        for (; k < tr.jump_times.size(); ++k) {
            Site s = tr.sites[k + 1];
            for (int a = 0; a < tr.d; ++a) s[a] += shift[a];
            out.sites.push_back(s);
            out.jump_times.push_back(tr.jump_times[k]);
        }
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// DiracSampler
// ---------------------------------------------------------------------------

struct DiracSampler::Impl {
    std::vector<WalkTrajectory> trajs;
    DiracSamplerOptions opts;
    std::vector<std::map<Site, double>> lts;
    double beta = 0.0;
    int d = 2;
    long accepted = 0, proposed = 0;

    double walk_trap(const std::map<Site, double>& lt) const {
        double s = 0.0;
        for (const auto& [z, t] : lt) {
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) r2 += static_cast<double>(z[a]) * z[a];
            s += t * std::pow(r2, 0.5 * opts.p);
        }
        return s;
    }

    void step(CounterRng& rng) {
        ++proposed;
        int i = static_cast<int>(rng.uniform_index(trajs.size()));
        double u = rng.uniform();
        WalkTrajectory prop;
        if (u < 0.4) {
            double t1 = rng.uniform() * beta;
            prop = resample_window(trajs[i], t1, beta, false, rng);
        } else {
            double span = opts.window_frac * beta;
            double t1 = rng.uniform() * (beta - span);
            prop = resample_window(trajs[i], t1, t1 + span, true, rng);
        }
        std::map<Site, double> lt_new = local_times(prop);
        double d_trap = (walk_trap(lt_new) - walk_trap(lts[i])) / beta;
        double d_inter = 0.0;
        for (std::size_t j = 0; j < trajs.size(); ++j) {
            if (static_cast<int>(j) == i) continue;
            d_inter += intersection_alpha(lt_new, lts[j], beta) -
                       intersection_alpha(lts[i], lts[j], beta);
        }
        double scale = std::pow(beta, (d + opts.p) / (2.0 + opts.p));
        double delta_log = -d_trap - opts.lambda * scale * d_inter;
        if (metropolis_accept(delta_log, rng)) {
            trajs[i] = std::move(prop);
            lts[i] = std::move(lt_new);
            ++accepted;
        }
    }
};

DiracSampler::DiracSampler(std::vector<WalkTrajectory> trajs, const DiracSamplerOptions& opts)
    : impl_(new Impl) {
    if (trajs.empty()) throw config_error("dirac sampler: need at least one walk");
    impl_->trajs = std::move(trajs);
    impl_->opts = opts;
    impl_->beta = impl_->trajs[0].beta;
    impl_->d = impl_->trajs[0].d;
    for (const auto& tr : impl_->trajs) impl_->lts.push_back(local_times(tr));
}

DiracSampler::~DiracSampler() = default;
DiracSampler::DiracSampler(DiracSampler&&) noexcept = default;
void DiracSampler::step(CounterRng& rng) { impl_->step(rng); }
const std::vector<WalkTrajectory>& DiracSampler::trajectories() const { return impl_->trajs; }
double DiracSampler::acceptance_rate() const {
    return impl_->proposed ? static_cast<double>(impl_->accepted) / impl_->proposed : 0.0;
}

// ---------------------------------------------------------------------------
// LatticeSampler
// ---------------------------------------------------------------------------

struct LatticeSampler::Impl {
    LatticeCanonical model;
    double coupling = 1.0;
    std::vector<WalkTrajectory> walks;
    std::vector<double> trap_table;  // W on grid cells (may hold inf)
    std::unique_ptr<InteractionKernel> kernel;
    long accepted = 0, proposed = 0;

    bool in_box(const Site& z) const {
        for (int a = 0; a < model.grid.dim; ++a)
            if (z[a] < 0 || z[a] >= model.grid.n) return false;
        return true;
    }

    Site wrap(Site z) const {
        if (model.grid.bc == Bc::periodic)
            for (int a = 0; a < model.grid.dim; ++a) {
                z[a] %= model.grid.n;
                if (z[a] < 0) z[a] += model.grid.n;
            }
        return z;
    }

    double trap_at(const Site& zराw) const {
        Site z = wrap(zराw);
        if (!in_box(z)) return kInf;
        std::int64_t idx = 0;
        for (int a = model.grid.dim - 1; a >= 0; --a) idx = idx * model.grid.n + z[a];
        return trap_table[idx];
    }

    double pair_at(const Site& araw, const Site& braw) const {
        if (!kernel) return 0.0;
        Site a = wrap(araw), b = wrap(braw);
        std::vector<int> off(model.grid.dim);
        for (int k = 0; k < model.grid.dim; ++k) off[k] = a[k] - b[k];
        return kernel->at_offset(off);
    }

    // exact integral of q along the joint trajectory over [lo, hi]
    double window_energy(const std::vector<const WalkTrajectory*>& ws, double lo,
                         double hi) const {
        // merged event sweep
        std::vector<std::size_t> kidx(ws.size());
        std::vector<Site> cur(ws.size());
        for (std::size_t i = 0; i < ws.size(); ++i) {
            std::size_t k = static_cast<std::size_t>(
                std::upper_bound(ws[i]->jump_times.begin(), ws[i]->jump_times.end(), lo) -
                ws[i]->jump_times.begin());
            kidx[i] = k;
            cur[i] = ws[i]->sites[k];
        }
        double t = lo, acc = 0.0;
        while (t < hi - 1e-15) {
            double tn = hi;
            int who = -1;
            for (std::size_t i = 0; i < ws.size(); ++i)
                if (kidx[i] < ws[i]->jump_times.size() && ws[i]->jump_times[kidx[i]] < tn) {
                    tn = ws[i]->jump_times[kidx[i]];
                    who = static_cast<int>(i);
                }
            double q = 0.0;
            for (std::size_t i = 0; i < ws.size(); ++i) {
                double w = trap_at(cur[i]);
                if (w == kInf) return kInf;
                q += w;
            }
            for (std::size_t i = 0; i < ws.size(); ++i)
                for (std::size_t j = i + 1; j < ws.size(); ++j) {
                    double pv = pair_at(cur[i], cur[j]);
                    if (pv == kInf) return kInf;
                    q += pv;
                }
            acc += q * (tn - t);
            if (who < 0) break;
            cur[who] = ws[who]->sites[kidx[who] + 1];
            ++kidx[who];
            t = tn;
        }
        return acc;
    }

    double total_energy() const {
        std::vector<const WalkTrajectory*> ws;
        for (const auto& w : walks) ws.push_back(&w);
        return window_energy(ws, 0.0, model.beta);
    }

    void step(CounterRng& rng) {
        ++proposed;
        int i = static_cast<int>(rng.uniform_index(walks.size()));
        double u = rng.uniform();
        WalkTrajectory prop;
        double lo;
        if (u < 0.35) {
            lo = rng.uniform() * model.beta;
            prop = resample_window(walks[i], lo, model.beta, false, rng);
        } else if (u < 0.9) {
            double span = 0.3 * model.beta;
            lo = rng.uniform() * (model.beta - span);
            prop = resample_window(walks[i], lo, lo + span, true, rng);
        } else {
            // whole-walk lattice shift; uniform start on the torus
            lo = 0.0;
            prop = walks[i];
            int axis = static_cast<int>(rng.uniform_index(model.grid.dim));
            int dir = rng.uniform() < 0.5 ? 1 : -1;
            for (auto& s : prop.sites) s[axis] += dir;
            if (model.grid.bc != Bc::periodic) {
                for (auto& s : prop.sites)
                    if (!in_box(s)) {
                        rng.uniform();
                        return;
                    }
            }
        }
        // delta over [lo, beta] with the other walks fixed
        std::vector<const WalkTrajectory*> ws_new, ws_old;
        for (std::size_t j = 0; j < walks.size(); ++j) {
            ws_old.push_back(&walks[j]);
            ws_new.push_back(static_cast<int>(j) == i ? &prop : &walks[j]);
        }
        double e_new = window_energy(ws_new, lo, model.beta);
        double e_old = window_energy(ws_old, lo, model.beta);
        double delta;
        if (e_new == kInf) delta = -kInf;
        else if (e_old == kInf) delta = kInf;
        else delta = -coupling * (e_new - e_old);
        if (metropolis_accept(delta, rng)) {
            walks[i] = std::move(prop);
            ++accepted;
        }
    }
};

LatticeSampler::LatticeSampler(const LatticeCanonical& model, double coupling, std::uint64_t seed,
                               std::uint64_t stream)
    : impl_(new Impl) {
    impl_->model = model;
    impl_->coupling = coupling;
    const Grid& g = model.grid;
    // trap table on the per-particle grid
    impl_->trap_table.resize(static_cast<std::size_t>(g.cells()));
    std::vector<double> x(g.dim);
    for (std::int64_t c = 0; c < g.cells(); ++c) {
        g.point(c, x);
        impl_->trap_table[c] = model.W(x);
    }
    if (model.N > 1 && !model.v.is_zero())
        impl_->kernel = std::make_unique<InteractionKernel>(g, model.v);

    CounterRng rng(seed, stream);
    const double rate = 1.0 / (g.spacing() * g.spacing());
    for (int i = 0; i < model.N; ++i) {
        // uniform start over non-wall cells, admissible w.r.t. earlier walks
        Site s{};
        for (int tries = 0; tries < 10000; ++tries) {
            for (int a = 0; a < g.dim; ++a) s[a] = static_cast<int>(rng.uniform_index(g.n));
            bool ok = impl_->trap_at(s) < kInf;
            for (const auto& w : impl_->walks)
                ok = ok && impl_->pair_at(s, w.sites[0]) < kInf;
            if (ok) break;
        }
        // cold start: frozen walk (no jumps), mixed in by burn-in
        WalkTrajectory tr;
        tr.d = g.dim;
        tr.beta = model.beta;
        tr.rate_per_edge = rate;
        tr.sites.push_back(s);
        impl_->walks.push_back(std::move(tr));
    }
}

LatticeSampler::~LatticeSampler() = default;
LatticeSampler::LatticeSampler(LatticeSampler&&) noexcept = default;
void LatticeSampler::step(CounterRng& rng) { impl_->step(rng); }
double LatticeSampler::potential_energy() const { return impl_->total_energy(); }
double LatticeSampler::acceptance_rate() const {
    return impl_->proposed ? static_cast<double>(impl_->accepted) / impl_->proposed : 0.0;
}
const std::vector<WalkTrajectory>& LatticeSampler::walks() const { return impl_->walks; }

// ---------------------------------------------------------------------------
// Thermodynamic integration
// ---------------------------------------------------------------------------

namespace {

// Gauss-Legendre nodes on [0, 1]
void gauss_legendre_01(int order, std::vector<double>* nodes, std::vector<double>* weights) {
    if (order != 8 && order != 4) throw config_error("thermo: gauss order must be 4 or 8");
    static const double x8[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                 0.9602898564975363};
    static const double w8[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                 0.1012285362903763};
    static const double x4[2] = {0.3399810435848563, 0.8611363115940526};
    static const double w4[2] = {0.6521451548625461, 0.3478548451374538};
    const double* xs = (order == 8) ? x8 : x4;
    const double* wshalf = (order == 8) ? w8 : w4;
    int half = order / 2;
    for (int i = half - 1; i >= 0; --i) {
        nodes->push_back(0.5 * (1.0 - xs[i]));
        weights->push_back(0.5 * wshalf[i]);
    }
    for (int i = 0; i < half; ++i) {
        nodes->push_back(0.5 * (1.0 + xs[i]));
        weights->push_back(0.5 * wshalf[i]);
    }
}

struct NodeStats {
    std::vector<double> chain_means;
    std::vector<double> chain_acceptance;
    std::vector<std::vector<double>> chain_samples;
};

template <typename MakeSampler>
ThermoResult run_thermo(double n_beta, const ThermoOptions& opts, MakeSampler make) {
    std::vector<double> nodes, weights;
    gauss_legendre_01(opts.gauss_order, &nodes, &weights);
    const int C = std::max(2, opts.chains);
    const int burn = opts.steps / 5;

    std::vector<NodeStats> stats(nodes.size());
    for (std::size_t g = 0; g < nodes.size(); ++g) {
        stats[g].chain_means.resize(C);
        stats[g].chain_acceptance.resize(C);
        stats[g].chain_samples.resize(C);
        auto run_chain = [&](int c) {
            auto sampler = make(nodes[g], static_cast<std::uint64_t>(g * 1000 + c));
            CounterRng rng(opts.seed, 0xC0FFEEull + g * 7919 + c);
            double acc_mean = 0.0;
            long cnt = 0;
            std::vector<double>& samples = stats[g].chain_samples[c];
            samples.reserve(opts.steps - burn);
            for (int s = 0; s < opts.steps; ++s) {
                sampler->step(rng);
                if (s >= burn) {
                    double u = sampler->potential_energy();
                    samples.push_back(u);
                    acc_mean += u;
                    ++cnt;
                }
            }
            stats[g].chain_means[c] = acc_mean / std::max<long>(1, cnt);
            stats[g].chain_acceptance[c] = sampler->acceptance_rate();
        };
        if (opts.threads > 1) {
            std::vector<std::thread> pool;
            for (int c = 0; c < C; ++c) pool.emplace_back(run_chain, c);
            for (auto& t : pool) t.join();
        } else {
            for (int c = 0; c < C; ++c) run_chain(c);
        }
    }

    ThermoResult out;
    out.nodes = nodes;
    for (std::size_t g = 0; g < nodes.size(); ++g) {
        double mean = 0.0;
        for (double m : stats[g].chain_means) mean += m;
        mean /= C;
        double sd = 0.0;
        long n = 0;
        for (const auto& cs : stats[g].chain_samples)
            for (double u : cs) {
                sd += (u - mean) * (u - mean);
                ++n;
            }
        sd = std::sqrt(sd / std::max<long>(1, n - 1));
        out.node_means.push_back(mean);
        out.node_sds.push_back(sd);
        out.node_rhat.push_back(split_rhat(stats[g].chain_samples));
        double a = 0.0;
        for (double ac : stats[g].chain_acceptance) a += ac / C;
        out.node_acceptance.push_back(a);
    }
    // neighbor-overlap diagnostic on the U distributions
    for (std::size_t g = 0; g + 1 < nodes.size(); ++g) {
        double gap = std::abs(out.node_means[g] - out.node_means[g + 1]);
        double s = out.node_sds[g] + out.node_sds[g + 1];
        if (gap > opts.overlap_sigmas * std::max(s, 1e-12))
            throw solver_error("thermo_logZ: coupling ladder too coarse (nodes " +
                               std::to_string(g) + "," + std::to_string(g + 1) +
                               " do not overlap)");
    }
    // jackknife over chains
    double logZ = 0.0;
    for (std::size_t g = 0; g < nodes.size(); ++g) logZ -= weights[g] * out.node_means[g];
    std::vector<double> loo(C, 0.0);
    for (int c = 0; c < C; ++c) {
        for (std::size_t g = 0; g < nodes.size(); ++g) {
            double m = 0.0;
            for (int c2 = 0; c2 < C; ++c2)
                if (c2 != c) m += stats[g].chain_means[c2];
            m /= (C - 1);
            loo[c] -= weights[g] * m;
        }
    }
    double lm = 0.0;
    for (double l : loo) lm += l;
    lm /= C;
    double var = 0.0;
    for (double l : loo) var += (l - lm) * (l - lm);
    var *= static_cast<double>(C - 1) / C;

    out.logZ = logZ;
    out.logZ_stderr = std::sqrt(var);
    out.minus_logZ_per_nbeta = -logZ / n_beta;
    out.stderr_per_nbeta = out.logZ_stderr / n_beta;
    return out;
}

}  // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
    std::vector<std::vector<double>> halves;
    std::size_t n = static_cast<std::size_t>(-1);
    for (const auto& c : chains) n = std::min(n, c.size());
    if (n < 4) return kInf;
    n -= n % 2;
    for (const auto& c : chains) {
        halves.emplace_back(c.begin(), c.begin() + n / 2);
        halves.emplace_back(c.begin() + n / 2, c.begin() + n);
    }
    const std::size_t m = halves.size(), len = n / 2;
    std::vector<double> means(m);
    double grand = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (double v : halves[i]) s += v;
        means[i] = s / len;
        grand += means[i] / m;
    }
    double B = 0.0, Wv = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        B += (means[i] - grand) * (means[i] - grand);
        double s2 = 0.0;
        for (double v : halves[i]) s2 += (v - means[i]) * (v - means[i]);
        Wv += s2 / (len - 1);
    }
    B *= static_cast<double>(len) / (m - 1);
    Wv /= m;
    if (Wv <= 0.0) return 1.0;
    double var_plus = (static_cast<double>(len - 1) / len) * Wv + B / len;
    return std::sqrt(var_plus / Wv);
}

ThermoResult thermo_logZ_lattice(const LatticeCanonical& model, const ThermoOptions& opts) {
    return run_thermo(model.N * model.beta, opts, [&](double s, std::uint64_t stream) {
        return std::make_unique<LatticeSampler>(model, s, opts.seed, stream);
    });
}

ThermoResult thermo_logZ_brownian(const BrownianThermoSpec& spec, const ThermoOptions& opts) {
    return run_thermo(spec.N * spec.beta, opts, [&](double s, std::uint64_t stream) {
        CounterRng rng(opts.seed, 0xB00Bull ^ stream);
        PathEnsemble ens;
        ens.N = spec.N;
        ens.d = spec.bin_grid.dim;
        ens.beta = spec.beta;
        ens.dt = spec.dt;
        ens.slices = static_cast<int>(std::llround(spec.beta / spec.dt));
        if (std::abs(ens.slices * spec.dt - spec.beta) > 1e-9 * spec.beta)
            throw config_error("thermo: dt must divide beta");
        ens.pos.assign(spec.N, std::vector<double>(static_cast<std::size_t>(ens.slices + 1) *
                                                   ens.d));
        for (int i = 0; i < spec.N; ++i) {
            std::vector<double> x0(ens.d);
            draw_start(spec.start, ens.d, rng, x0.data());
            for (int k = 0; k <= ens.slices; ++k)
                std::memcpy(ens.at(i, k), x0.data(), sizeof(double) * ens.d);
        }
        BrownianSamplerOptions bo;
        bo.model = spec.model;
        bo.coupling = s;
        return std::make_unique<BrownianSampler>(std::move(ens), spec.W, spec.v, spec.bin_grid,
                                                 spec.start, bo);
    });
}

// ---------------------------------------------------------------------------
// Feynman-Kac oracle
// ---------------------------------------------------------------------------

FkResult fk_oracle(const TrapPotential& W, const PairPotential& v, int N, const Grid& grid,
                   double beta, std::int64_t max_states) {
    double states = std::pow(static_cast<double>(grid.n), grid.dim * N);
    if (states > static_cast<double>(max_states))
        throw budget_error("fk_oracle: product lattice exceeds the state budget");
    GridOperator op = assemble_canonical_operator(W, v, N, grid, nullptr);
    std::int64_t alive = 0;
    for (auto e : op.excluded)
        if (!e) ++alive;
    if (alive == 0) throw domain_error("fk_oracle: no admissible states");
    std::vector<double> nu(op.excluded.size(), 0.0);
    for (std::size_t i = 0; i < nu.size(); ++i)
        if (!op.excluded[i]) nu[i] = 1.0 / static_cast<double>(alive);
    FkResult out;
    out.log_value = expm_log_sum(op, nu, beta);
    out.log_value_2beta = expm_log_sum(op, nu, 2.0 * beta);
    out.slope = (out.log_value_2beta - out.log_value) / beta;
    return out;
}

}  // namespace traplab
