#ifndef SCATTER_QUADRATURE_HPP
#define SCATTER_QUADRATURE_HPP

#include <array>

namespace scatter {

// 64-node Gauss-Legendre rule on (0, 1).
struct GaussRule01 {
  std::array<double, 64> node;
  std::array<double, 64> weight;
};

const GaussRule01& gauss01();

// integral of f over (a, b).
template <typename F>
double gauss_integrate(double a, double b, F&& f) {
  const GaussRule01& g = gauss01();
  double acc = 0.0;
  for (int i = 0; i < 64; ++i) {
    acc += g.weight[i] * f(a + (b - a) * g.node[i]);
  }
  return (b - a) * acc;
}

}  // namespace scatter

#endif
