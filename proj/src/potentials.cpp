#include "traplab/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace traplab {

// ---------------------------------------------------------------------------
// TrapPotential
// ---------------------------------------------------------------------------

TrapPotential TrapPotential::power(double exponent, double offset) {
    if (!(exponent > 0.0)) throw config_error("trap power: exponent must be > 0");
    if (offset < 0.0) throw config_error("trap: offset must be >= 0");
    TrapPotential w;
    w.kind_ = TrapKind::power;
    w.p_ = exponent;
    w.offset_ = offset;
    return w;
}

TrapPotential TrapPotential::hard_box(double wall_half_width, double offset) {
    if (!(wall_half_width > 0.0)) throw config_error("trap hard-box: wall must be > 0");
    if (offset < 0.0) throw config_error("trap: offset must be >= 0");
    TrapPotential w;
    w.kind_ = TrapKind::hard_box;
    w.wall_ = wall_half_width;
    w.offset_ = offset;
    return w;
}

TrapPotential TrapPotential::tabulated(std::vector<double> radii, std::vector<double> values,
                                       double offset) {
    if (radii.size() != values.size() || radii.size() < 2)
        throw config_error("trap tabulated: need matching r/W tables of size >= 2");
    if (radii.front() != 0.0) throw config_error("trap tabulated: table must start at r = 0");
    for (std::size_t i = 0; i + 1 < radii.size(); ++i)
        if (!(radii[i] < radii[i + 1])) throw config_error("trap tabulated: radii must increase");
    for (double w : values)
        if (!(w >= 0.0)) throw config_error("trap tabulated: W must be nonnegative");
    if (offset < 0.0) throw config_error("trap: offset must be >= 0");
    TrapPotential w;
    w.kind_ = TrapKind::tabulated;
    w.tab_r_ = std::move(radii);
    w.tab_w_ = std::move(values);
    w.offset_ = offset;
    return w;
}

double TrapPotential::radial(double r) const {
    double raw;
    switch (kind_) {
        case TrapKind::power:
            raw = std::pow(r, p_) + offset_;
            break;
        case TrapKind::tabulated: {
            if (r >= tab_r_.back()) {
                std::size_t m = tab_r_.size() - 1;
                double slope = (tab_w_[m] - tab_w_[m - 1]) / (tab_r_[m] - tab_r_[m - 1]);
                raw = tab_w_[m] + slope * (r - tab_r_[m]) + offset_;
            } else {
                auto it = std::upper_bound(tab_r_.begin(), tab_r_.end(), r);
                std::size_t j = static_cast<std::size_t>(it - tab_r_.begin());
                if (j == 0) j = 1;
                double t = (r - tab_r_[j - 1]) / (tab_r_[j] - tab_r_[j - 1]);
                raw = (1.0 - t) * tab_w_[j - 1] + t * tab_w_[j] + offset_;
            }
            break;
        }
        case TrapKind::hard_box:
            throw domain_error("trap hard-box has no radial profile; evaluate on points");
        default:
            raw = 0.0;
    }
    return std::min(raw, cap_);
}

double TrapPotential::operator()(std::span<const double> x) const {
    if (kind_ == TrapKind::hard_box) {
        double m = 0.0;
        for (double xi : x) m = std::max(m, std::abs(xi));
        double raw = (m <= wall_) ? offset_ : kInf;
        return std::min(raw, cap_);
    }
    double r2 = 0.0;
    for (double xi : x) r2 += xi * xi;
    return radial(std::sqrt(r2));
}

TrapPotential TrapPotential::capped(double M) const {
    TrapPotential w = *this;
    w.cap_ = std::min(cap_, M);
    return w;
}

void TrapPotential::validate() const {
    if (kind_ == TrapKind::hard_box) return;  // growth is the infinite wall itself
    if (cap_ < kInf) return;                  // capped traps are bounded by construction
    // inf_{|x|>R} W -> inf, checked on a doubling radius ladder.
    double prev = radial(1.0);
    double r = 2.0;
    for (int k = 0; k < 16; ++k, r *= 2.0) {
        double cur = radial(r);
        if (!(cur >= 0.0)) throw config_error("trap: W must be nonnegative");
        if (cur + 1e-12 < prev) throw config_error("trap: W must grow along the radius ladder");
        prev = cur;
    }
    if (!(prev > radial(1.0) + 1.0) && !(prev == kInf))
        throw config_error("trap: W does not grow to infinity on the sampled ladder");
}

std::string TrapPotential::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case TrapKind::power: os << "power(p=" << p_ << ")"; break;
        case TrapKind::hard_box: os << "hard-box(R_wall=" << wall_ << ")"; break;
        case TrapKind::tabulated: os << "tabulated(" << tab_r_.size() << " samples)"; break;
    }
    if (offset_ != 0.0) os << "+" << offset_;
    if (cap_ < kInf) os << " cap " << cap_;
    return os.str();
}

// ---------------------------------------------------------------------------
// PairPotential
// ---------------------------------------------------------------------------

PairPotential PairPotential::zero() { return PairPotential(); }

PairPotential PairPotential::gaussian(double strength, double sigma) {
    if (!(strength >= 0.0) || !(sigma > 0.0)) throw config_error("pair gaussian: need c >= 0, sigma > 0");
    PairPotential v;
    v.kind_ = PairKind::gaussian;
    v.c_ = strength;
    v.len_ = sigma;
    return v;
}

PairPotential PairPotential::square_well(double strength, double radius) {
    if (!(strength >= 0.0) || !(radius > 0.0)) throw config_error("pair square-well: need c >= 0, R0 > 0");
    PairPotential v;
    v.kind_ = PairKind::square_well;
    v.c_ = strength;
    v.len_ = radius;
    return v;
}

PairPotential PairPotential::inverse_power(double strength, double gamma) {
    // gamma >= 2 is admitted for classification; solvers reject it separately
    // (they can only handle integrable singularities milder than r^{-2}).
    if (!(strength > 0.0) || !(gamma > 0.0)) throw config_error("pair inverse-power: need c > 0, gamma > 0");
    PairPotential v;
    v.kind_ = PairKind::inverse_power;
    v.c_ = strength;
    v.gamma_ = gamma;
    return v;
}

PairPotential PairPotential::capped_hard_core(double M, double a) {
    if (!(a > 0.0)) throw config_error("pair capped-hard-core: need a > 0");
    if (!(M > 0.0)) throw config_error("pair capped-hard-core: need M > 0 (or infinite)");
    PairPotential v;
    v.kind_ = PairKind::capped_hard_core;
    v.plateau_ = M;
    v.len_ = a;
    return v;
}

double PairPotential::operator()(double r) const {
    if (r < 0.0) throw domain_error("pair potential: negative radius");
    if (r > trunc_) return 0.0;
    double raw;
    switch (kind_) {
        case PairKind::zero: raw = 0.0; break;
        case PairKind::gaussian: raw = c_ * std::exp(-0.5 * r * r / (len_ * len_)); break;
        case PairKind::square_well: raw = (r <= len_) ? c_ : 0.0; break;
        case PairKind::inverse_power: raw = (r == 0.0) ? kInf : c_ * std::pow(r, -gamma_); break;
        case PairKind::capped_hard_core: raw = (r <= len_) ? plateau_ : 0.0; break;
        default: raw = 0.0;
    }
    return std::min(raw, cap_);
}

double PairPotential::hard_core_radius() const {
    if (kind_ == PairKind::capped_hard_core && plateau_ == kInf && cap_ == kInf) return len_;
    if (kind_ == PairKind::inverse_power && cap_ == kInf) return 0.0;  // singular only at r = 0
    return 0.0;
}

bool PairPotential::is_zero() const {
    if (cap_ <= 0.0) return true;
    switch (kind_) {
        case PairKind::zero: return true;
        case PairKind::capped_hard_core: return plateau_ == 0.0;
        default: return c_ == 0.0;
    }
}

double PairPotential::infimum() const {
    // All supported kinds decay to (or sit at) zero far out and are >= 0.
    return std::min(0.0, std::min(cap_, 0.0));
}

std::vector<double> PairPotential::breakpoints() const {
    std::vector<double> b;
    switch (kind_) {
        case PairKind::square_well:
        case PairKind::capped_hard_core: b.push_back(len_); break;
        default: break;
    }
    if (trunc_ < kInf) b.push_back(trunc_);
    return b;
}

double PairPotential::range_hint() const {
    double r;
    switch (kind_) {
        case PairKind::zero: r = 0.0; break;
        case PairKind::gaussian: r = 8.0 * len_; break;
        case PairKind::square_well: r = len_; break;
        case PairKind::capped_hard_core: r = len_; break;
        case PairKind::inverse_power: r = 10.0; break;
        default: r = 1.0;
    }
    return std::min(r, trunc_);
}

PairPotential PairPotential::capped(double M) const {
    CutoffSpec{M}.validate_for(*this);
    PairPotential v = *this;
    v.cap_ = std::min(cap_, M);
    return v;
}

PairPotential PairPotential::truncated(double R_t) const {
    if (!(R_t > 0.0)) throw config_error("pair truncated: R_t must be > 0");
    PairPotential v = *this;
    v.trunc_ = std::min(trunc_, R_t);
    return v;
}

std::string PairPotential::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case PairKind::zero: os << "zero"; break;
        case PairKind::gaussian: os << "gaussian(c=" << c_ << ",sigma=" << len_ << ")"; break;
        case PairKind::square_well: os << "square-well(c=" << c_ << ",R0=" << len_ << ")"; break;
        case PairKind::inverse_power: os << "inverse-power(c=" << c_ << ",gamma=" << gamma_ << ")"; break;
        case PairKind::capped_hard_core:
            os << "capped-hard-core(M=" << plateau_ << ",a=" << len_ << ")";
            break;
    }
    if (cap_ < kInf) os << " cap " << cap_;
    return os.str();
}

// ---------------------------------------------------------------------------
// Radial quadrature. 15-point Gauss-Legendre panels, adaptive bisection,
// dyadic grading toward a singular origin and a doubling tail with geometric
// extrapolation of the remainder.
// ---------------------------------------------------------------------------

namespace {

constexpr int kGL = 15;
// Nodes/weights for [-1, 1].
constexpr double kGLx[kGL] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272, -0.7244177313601701,
    -0.5709721726085388, -0.3941513470775634, -0.2011940939974345, 0.0,
    0.2011940939974345,  0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
constexpr double kGLw[kGL] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719, 0.1395706779261543,
    0.1662692058169939, 0.1861610000155622, 0.1984314853271116, 0.2025782419255613,
    0.1984314853271116, 0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

double gl15(const PairPotential& v, int d, double a, double b) {
    double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < kGL; ++i) {
        double r = c + h * kGLx[i];
        s += kGLw[i] * v(r) * std::pow(r, d - 1);
    }
    return s * h;
}

// Bisection on the GL15 self-consistency error with a relative test plus an
// absolute floor (steeply decaying integrands never satisfy a pure relative
// test on negligible panels).
double adaptive_panel(const PairPotential& v, int d, double a, double b, double rel, double abs_tol,
                      int depth) {
    double whole = gl15(v, d, a, b);
    double m = 0.5 * (a + b);
    double left = gl15(v, d, a, m), right = gl15(v, d, m, b);
    double err = std::abs(left + right - whole);
    if (depth > 26 || err <= rel * (std::abs(left) + std::abs(right)) || err <= abs_tol)
        return left + right;
    return adaptive_panel(v, d, a, m, rel, 0.5 * abs_tol, depth + 1) +
           adaptive_panel(v, d, m, b, rel, 0.5 * abs_tol, depth + 1);
}

double panel_with_scale(const PairPotential& v, int d, double a, double b, double scale) {
    return adaptive_panel(v, d, a, b, 1e-12, 1e-15 * (scale + 1e-300), 0);
}

}  // namespace

double integrate_radial(const PairPotential& v, int d, double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    std::vector<double> cuts = {lo, hi};
    for (double b : v.breakpoints())
        if (b > lo && b < hi) cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double scale = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        scale += std::abs(gl15(v, d, cuts[i], cuts[i + 1]));
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        total += panel_with_scale(v, d, cuts[i], cuts[i + 1], scale);
    return total;
}

namespace {

// Sum dyadic panels [s 2^{-k-1}, s 2^{-k}] downward and decide whether the
// series converges; the tail is extrapolated geometrically from the observed
// panel ratio. Ratios at or above ~1 (power at or past the integrability
// boundary, including the log-divergent exponent) are divergent; the narrow
// band just below is numerically indeterminate.
RadialIntegral graded_origin_sum(const PairPotential& v, int d, double s) {
    RadialIntegral out;
    double total = 0.0;
    double prev = 0.0;
    std::vector<double> ratios;
    const int kMax = 60;
    for (int k = 0; k < kMax; ++k) {
        double hi = s * std::pow(0.5, k);
        double lo = 0.5 * hi;
        double p = adaptive_panel(v, d, lo, hi, 1e-12, 1e-16 * (std::abs(total) + 1e-300), 0);
        if (!std::isfinite(p)) {
            out.divergent = true;
            return out;
        }
        total += p;
        if (k > 0 && prev > 0.0) ratios.push_back(p / prev);
        prev = p;
        if (std::abs(p) < 1e-14 * (std::abs(total) + 1e-300) && k >= 4) {
            out.value = total;
            out.converged = true;
            return out;
        }
    }
    if (ratios.size() < 8) {
        out.value = total;
        out.converged = true;
        return out;
    }
    std::vector<double> last(ratios.end() - 8, ratios.end());
    std::sort(last.begin(), last.end());
    double rho = last[4];
    if (rho >= 0.998) {
        out.divergent = true;
        return out;
    }
    if (rho > 0.995) return out;  // indeterminate
    out.value = total + prev * rho / (1.0 - rho);
    out.converged = true;
    return out;
}

}  // namespace

RadialIntegral origin_integral(const PairPotential& v, int d, double upper) {
    if (v.hard_core_radius() > 0.0) return {0.0, false, true};
    double split = std::min(0.25 * upper, 0.25);
    RadialIntegral origin = graded_origin_sum(v, d, split);
    if (!origin.converged) return origin;
    origin.value += integrate_radial(v, d, split, upper);
    return origin;
}

RadialIntegral unit_ball_integral(const PairPotential& v, int d) {
    RadialIntegral out = origin_integral(v, d, 1.0);
    if (!out.converged) return out;
    out.value *= unit_sphere_area(d);
    return out;
}

RadialIntegral full_space_integral(const PairPotential& v, int d) {
    RadialIntegral inner = unit_ball_integral(v, d);
    if (!inner.converged) return inner;
    // Doubling tail shells [2^k, 2^{k+1}] until geometric decay is
    // established; a non-decaying shell sequence is a divergent tail.
    double total = inner.value / unit_sphere_area(d);
    double prev = -1.0;
    double lo = 1.0;
    for (int k = 0; k < 400; ++k) {
        double hi = 2.0 * lo;
        double p = adaptive_panel(v, d, lo, hi, 1e-12, 1e-16 * (std::abs(total) + 1e-300), 0);
        if (!std::isfinite(p)) return {0.0, false, true};
        total += p;
        if (std::abs(p) < 1e-14 * (std::abs(total) + 1e-300)) {
            return {unit_sphere_area(d) * total, true, false};
        }
        if (prev >= 0.0) {
            double rho = (prev > 0.0) ? p / prev : 0.0;
            if (rho >= 0.999 && k >= 4) return {0.0, false, true};
            if (k >= 8 && rho < 0.75) {
                total += p * rho / (1.0 - rho);
                return {unit_sphere_area(d) * total, true, false};
            }
        }
        prev = p;
        lo = hi;
    }
    return {0.0, false, true};
}

PairClass classify_pair(const PairPotential& v, int d) {
    if (d < 2) throw domain_error("classify_pair: d >= 2 required");
    if (v.hard_core_radius() > 0.0) return PairClass::hard_core;
    RadialIntegral ball = unit_ball_integral(v, d);
    if (ball.divergent) return PairClass::hard_core;
    if (!ball.converged)
        throw solver_error("classify_pair: unit-ball quadrature indeterminate for " + v.describe());
    return PairClass::soft_core;
}

double alpha_tilde(const PairPotential& v, int d) {
    if (v.is_zero()) return 0.0;
    if (classify_pair(v, d) != PairClass::soft_core)
        throw domain_error("alpha_tilde: requires a soft-core potential");
    RadialIntegral full = full_space_integral(v, d);
    if (!full.converged)
        throw domain_error("alpha_tilde: integral of v over R^d diverges (infinite alpha~)");
    return full.value / (8.0 * kPi);
}

PairPotential rescale_pair(const PairPotential& v, RescaleScheme scheme, double xi_or_N, int d) {
    double strength, reach;
    if (scheme == RescaleScheme::gp_xi) {
        double xi = xi_or_N;
        if (!(xi > 0.0)) throw config_error("rescale gp-xi: xi must be > 0");
        strength = 1.0 / (xi * xi);
        reach = xi;
    } else {
        double N = xi_or_N;
        if (!(N >= 1.0)) throw config_error("rescale thm114: N must be >= 1");
        strength = std::pow(N, d - 1);
        reach = 1.0 / N;
    }
    PairPotential out = PairPotential::zero();
    switch (v.kind()) {
        case PairKind::zero:
            out = PairPotential::zero();
            break;
        case PairKind::gaussian:
            out = PairPotential::gaussian(strength * v.strength(), reach * v.length());
            break;
        case PairKind::square_well:
            out = PairPotential::square_well(strength * v.strength(), reach * v.length());
            break;
        case PairKind::inverse_power:
            // xi^{-2} c (r/xi)^{-gamma} = c xi^{gamma-2} r^{-gamma}
            out = PairPotential::inverse_power(v.strength() * strength * std::pow(reach, v.gamma()),
                                               v.gamma());
            break;
        case PairKind::capped_hard_core:
            out = PairPotential::capped_hard_core(
                v.plateau() == kInf ? kInf : strength * v.plateau(), reach * v.length());
            break;
    }
    if (v.cap_level() < kInf) out = out.capped(strength * v.cap_level());
    if (v.truncation() < kInf) out = out.truncated(reach * v.truncation());
    return out;
}

}  // namespace traplab
