#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace stmbus {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double flux_quantum = 2.067833848e-15;  // Wb
inline constexpr double hbar = 1.054571817e-34;
inline constexpr double electron_charge = 1.602176634e-19;

// Error taxonomy; the CLI maps each family to an exit code.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct PreconditionError : Error {
    using Error::Error;
};
struct NumericalError : Error {
    using Error::Error;
};

inline void require(bool ok, const std::string& what) {
    if (!ok) throw PreconditionError(what);
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = a;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

inline double sq(double x) { return x * x; }

inline double db(double ratio) { return 10.0 * std::log10(ratio); }

}  // namespace stmbus
