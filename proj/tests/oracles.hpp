// Brute-force oracles shared by the test suites. Everything here is written
// to be independently obviously correct (direct loops, no shared machinery
// with the library paths they check).
#ifndef SCATTER_TESTS_ORACLES_HPP
#define SCATTER_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "scatter/common.hpp"

namespace oracle {

// # of integer vectors in Z^d with |xi|^2 <= X, by exhaustive box scan.
inline std::int64_t count_lattice_points(double X, int d) {
  if (X < 0) return 0;
  const int r = static_cast<int>(std::floor(std::sqrt(X)));
  std::int64_t n = 0;
  if (d == 2) {
    for (int a = -r; a <= r; ++a)
      for (int b = -r; b <= r; ++b)
        if (static_cast<double>(a) * a + static_cast<double>(b) * b <= X) ++n;
  } else {
    for (int a = -r; a <= r; ++a)
      for (int b = -r; b <= r; ++b)
        for (int c = -r; c <= r; ++c)
          if (static_cast<double>(a) * a + static_cast<double>(b) * b +
                  static_cast<double>(c) * c <=
              X)
            ++n;
  }
  return n;
}

// All xi in Z^2 with | |xi - zeta|^2 - lambda | <= W, sorted.
inline std::vector<scatter::IVec> annulus_points_2d(const scatter::IVec& zeta,
                                                    double lambda, double W) {
  std::vector<scatter::IVec> out;
  const int r = static_cast<int>(std::ceil(std::sqrt(lambda + W))) + 1;
  for (int a = zeta[0] - r; a <= zeta[0] + r; ++a) {
    for (int b = zeta[1] - r; b <= zeta[1] + r; ++b) {
      const double da = a - zeta[0];
      const double db = b - zeta[1];
      if (std::abs(da * da + db * db - lambda) <= W) {
        out.push_back({a, b, 0});
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// r_2(s): number of representations of s as an ordered sum of two squares.
inline int r2(std::int64_t s) {
  int n = 0;
  const int r = static_cast<int>(std::floor(std::sqrt(static_cast<double>(s))));
  for (int a = -r; a <= r; ++a)
    for (int b = -r; b <= r; ++b)
      if (static_cast<std::int64_t>(a) * a + static_cast<std::int64_t>(b) * b == s)
        ++n;
  return n;
}

}  // namespace oracle

#endif
