#include "scatter/quadrature.hpp"

#include <cmath>

#include "scatter/common.hpp"

namespace scatter {

namespace {

GaussRule01 build_rule() {
  GaussRule01 rule;
  const int n = 64;
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev initial guess.
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.node[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weight[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace

const GaussRule01& gauss01() {
  static const GaussRule01 rule = build_rule();
  return rule;
}

}  // namespace scatter
