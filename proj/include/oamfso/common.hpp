#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace oamfso {

using cd = std::complex<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Raised for malformed run configuration (CLI maps it to exit code 2).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a numerical sanity guard trips, e.g. beam power hitting the
// grid border during propagation (CLI maps it to exit code 3).
struct guard_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Gaussian tail probability Q(x) = P(N(0,1) > x).
inline double q_function(double x) {
    return 0.5 * std::erfc(x / std::sqrt(2.0));
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace oamfso
