#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hetcop {

inline constexpr const char* kSchemaVersion = "hetcop/1";

/// Copula arguments are clamped to [kUnitEps, 1 - kUnitEps] before any
/// density or h-function evaluation; PIT values from empirical margins can
/// land exactly on 0 or 1.
inline constexpr double kUnitEps = 1e-10;

/// Hard cap on the t-copula degrees of freedom.
inline constexpr double kNuMax = 40.0;
inline constexpr double kNuMin = 2.0;

struct invalid_parameter : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Non-finite value produced by an iterative or composite numerical routine.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double clamp_unit(double u) {
    if (!(u >= 0.0 && u <= 1.0)) {
        if (std::isnan(u)) throw std::domain_error("argument outside [0,1]");
        // allow tiny excursions from downstream arithmetic
        if (u < -1e-12 || u > 1.0 + 1e-12) throw std::domain_error("argument outside [0,1]");
    }
    if (u < kUnitEps) return kUnitEps;
    if (u > 1.0 - kUnitEps) return 1.0 - kUnitEps;
    return u;
}

/// Clamp without the domain check, for values known to be probabilities.
inline double clamp_unit_unchecked(double u) {
    if (u < kUnitEps) return kUnitEps;
    if (u > 1.0 - kUnitEps) return 1.0 - kUnitEps;
    return u;
}

inline bool in_open_unit(double x) { return x > 0.0 && x < 1.0; }

}  // namespace hetcop
