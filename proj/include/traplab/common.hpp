#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace traplab {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

// Exit-code categories used by the CLI; library code throws these directly.
enum class ErrorCode {
    generic = 1,
    config = 2,
    solver = 3,
    budget = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline Error config_error(const std::string& msg) { return Error(ErrorCode::config, msg); }
inline Error solver_error(const std::string& msg) { return Error(ErrorCode::solver, msg); }
inline Error budget_error(const std::string& msg) { return Error(ErrorCode::budget, msg); }
inline Error domain_error(const std::string& msg) { return Error(ErrorCode::generic, msg); }

// Order-independent summation: sorting makes the result invariant under
// permutations of the inputs, which several symmetry checks rely on.
inline double sorted_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

// Surface area of the unit sphere in R^d.
inline double unit_sphere_area(int d) {
    if (d < 1) throw domain_error("unit_sphere_area: d must be >= 1");
    // omega_d = 2 pi^{d/2} / Gamma(d/2)
    return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

inline bool nearly_equal(double a, double b, double rel, double abs = 0.0) {
    return std::abs(a - b) <= std::max(abs, rel * std::max(std::abs(a), std::abs(b)));
}

}  // namespace traplab
