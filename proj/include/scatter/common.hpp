#ifndef SCATTER_COMMON_HPP
#define SCATTER_COMMON_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace scatter {

// Points and integer mode indices live in at most three dimensions; the
// active dimension count comes from the geometry that owns them.
using Point = std::array<double, 3>;
using IVec = std::array<int, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Default cap on the number of modes any single enumeration may produce.
inline constexpr std::int64_t kDefaultModeBudget = 100'000'000;

// ---------------------------------------------------------------------------
// Error taxonomy. The CLI maps these onto distinct exit codes.
// ---------------------------------------------------------------------------

// Invalid configuration or arguments (schema violations, bad parameters).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A computation would exceed a memory or latency budget.
struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure: eigensolver breakdown, quadrature non-convergence, ...
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Spectral parameter hit a pole (a Laplacian eigenvalue or an exactly
// vanishing denominator).
struct PoleError : NumericError {
  using NumericError::NumericError;
};

// A truncated sum could not certify the requested tail tolerance; carries
// the offending estimate.
struct ConvergenceError : NumericError {
  ConvergenceError(const std::string& what, double tail_estimate)
      : NumericError(what), tail(tail_estimate) {}
  double tail;
};

// A point fell outside the domain (or too close to a singular location).
struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 64-bit FNV-1a, used to stamp output files with the config that made them.
inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string to_hex(std::uint64_t value);

}  // namespace scatter

#endif
