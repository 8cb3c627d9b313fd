#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "traplab/common.hpp"

namespace traplab {

// ---------------------------------------------------------------------------
// Trap potential W : R^d -> [0, inf], growing at infinity. Infinite values
// are the IEEE infinity sentinel; solvers turn them into excluded cells.
// ---------------------------------------------------------------------------

enum class TrapKind { power, hard_box, tabulated };

class TrapPotential {
public:
    static TrapPotential power(double exponent, double offset = 0.0);
    static TrapPotential hard_box(double wall_half_width, double offset = 0.0);
    // Radial table (r_k, W_k), r strictly increasing from 0; linear
    // interpolation inside, linear extrapolation with the last slope beyond.
    static TrapPotential tabulated(std::vector<double> radii, std::vector<double> values,
                                   double offset = 0.0);

    TrapKind kind() const { return kind_; }
    double exponent() const { return p_; }
    double wall() const { return wall_; }
    double offset() const { return offset_; }
    double cap_level() const { return cap_; }

    double operator()(std::span<const double> x) const;
    double radial(double r) const;  // power / tabulated kinds only

    // Pointwise W ∧ M.
    TrapPotential capped(double M) const;

    // Checks nonnegativity and growth on a sampled radius ladder.
    void validate() const;

    std::string describe() const;

private:
    TrapPotential() = default;
    TrapKind kind_ = TrapKind::power;
    double p_ = 2.0;
    double wall_ = 1.0;
    double offset_ = 0.0;
    double cap_ = kInf;
    std::vector<double> tab_r_, tab_w_;
};

// ---------------------------------------------------------------------------
// Radial pair potential v : [0, inf) -> R ∪ {+inf}, bounded below, with
// hard-core radius a = sup{r : v(r) = inf}.
// ---------------------------------------------------------------------------

enum class PairKind { zero, gaussian, square_well, inverse_power, capped_hard_core };

enum class PairClass { soft_core, hard_core };

class PairPotential {
public:
    static PairPotential zero();
    static PairPotential gaussian(double strength, double sigma);       // c e^{-r^2/(2 sigma^2)}
    static PairPotential square_well(double strength, double radius);   // c on [0, R0]
    static PairPotential inverse_power(double strength, double gamma);  // c r^{-gamma}
    // Plateau of height M on [0, a]; M = inf gives the pure hard core.
    static PairPotential capped_hard_core(double M, double a);

    PairKind kind() const { return kind_; }
    double strength() const { return c_; }
    double length() const { return len_; }  // sigma / R0 / a, by kind
    double gamma() const { return gamma_; }
    double plateau() const { return plateau_; }
    double cap_level() const { return cap_; }

    double operator()(double r) const;

    // a = sup{r : v(r) = inf}; zero for every bounded kind.
    double hard_core_radius() const;

    bool is_zero() const;
    double infimum() const;

    // Radii where v jumps; quadratures and the ODE integrator split here.
    std::vector<double> breakpoints() const;
    // Radius beyond which v is negligible (used for default horizons/grids).
    double range_hint() const;

    // Pointwise v ∧ M. The only place hard cores may become finite values.
    PairPotential capped(double M) const;

    // v restricted to [0, R_t] (zero beyond); used by the d = 2 scattering
    // extrapolation over compactly supported approximants.
    PairPotential truncated(double R_t) const;
    double truncation() const { return trunc_; }

    std::string describe() const;

private:
    PairPotential() = default;
    PairKind kind_ = PairKind::zero;
    double c_ = 0.0;
    double len_ = 0.0;
    double gamma_ = 0.0;
    double plateau_ = kInf;
    double cap_ = kInf;
    double trunc_ = kInf;
};

struct CutoffSpec {
    double M;
    void validate_for(const PairPotential& v) const {
        if (!(M > 0.0) || !(M > -v.infimum()))
            throw config_error("CutoffSpec: M must exceed max(0, -inf v)");
    }
};

// ---------------------------------------------------------------------------
// Classification and the integral parameter.
// ---------------------------------------------------------------------------

struct RadialIntegral {
    double value = 0.0;
    bool converged = false;
    bool divergent = false;
};

// ∫_lo^hi f(r) r^{d-1} dr with adaptive panels split at the breakpoints.
double integrate_radial(const PairPotential& v, int d, double lo, double hi);

// ∫_0^upper v(r) r^{d-1} dr with dyadic grading toward the (possibly
// singular) origin.
RadialIntegral origin_integral(const PairPotential& v, int d, double upper);

// ∫_{B_1(0)} v(|x|) dx with convergence detection near a singular origin.
RadialIntegral unit_ball_integral(const PairPotential& v, int d);

// ∫_{R^d} v(|y|) dy with dyadic grading at the origin and a doubling tail.
RadialIntegral full_space_integral(const PairPotential& v, int d);

// Definition: soft-core iff a = 0 and the unit-ball integral is finite.
PairClass classify_pair(const PairPotential& v, int d);

// alpha~(v) = (1/8pi) ∫_{R^d} v(|y|) dy; requires a soft-core v.
double alpha_tilde(const PairPotential& v, int d);

enum class RescaleScheme { gp_xi, thm114 };

// gp_xi:   r -> xi^{-2} v(r/xi)        (reach xi, strength xi^{-2})
// thm114:  r -> N^{d-1} v(rN)          (the large-N product-state scaling)
PairPotential rescale_pair(const PairPotential& v, RescaleScheme scheme, double xi_or_N, int d);

}  // namespace traplab
