#ifndef SCATTER_ARITH_HPP
#define SCATTER_ARITH_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "scatter/common.hpp"
#include "scatter/geometry.hpp"

namespace scatter::arith {

// Annulus A_zeta(lambda, W) = { xi in Z^d : | |xi - zeta|^2 - lambda | <= W }.
// lambda and W are measured on the integer lattice scale (|xi|^2 units).
struct AnnulusSpec {
  IVec center{0, 0, 0};
  double lambda = 0.0;
  double half_width = 0.0;
};

// Exponent bookkeeping for the circle-law diagnostics. theta defaults to the
// printed Huxley exponent 133/416; delta must sit inside (theta/2, 1/2 - theta).
struct ExponentConfig {
  double theta = 133.0 / 416.0;
  double delta = 0.17;

  // Equidistribution exponents per dimension.
  static double delta_d(int d) { return d == 2 ? 17.0 / 416.0 : 1.0 / 12.0; }
  // Localization-length exponent alpha_d = delta_d / (3d/2 + 2 delta_d).
  static double alpha_d(int d) {
    const double dd = delta_d(d);
    return dd / (1.5 * d + 2.0 * dd);
  }

  void validate() const;
};

// Exact count of xi in Z^d with |xi|^2 <= X.
std::int64_t count_lattice_points(double X, int d);

// N(X) - pi X for d = 2.
double circle_law_residual(double X);

// All annulus points, sorted lexicographically. The width comparison is
// inclusive with one ulp of outward slack so boundary shells are kept.
std::vector<IVec> annulus_points(const AnnulusSpec& spec, int d);
std::int64_t annulus_count(const AnnulusSpec& spec, int d);

// True iff every xi in A_0(lambda, lambda^delta) stays outside every shifted
// annulus A_zeta(lambda, lambda^delta), zeta in zstar. lambda on the lattice
// scale.
bool is_generic_lambda(double lambda, double delta,
                       std::span<const IVec> zstar, int d);

// Gap-level wrapper: lambda defaults to the midpoint of gap j of the
// geometry's distinct eigenvalues, converted to the lattice scale.
bool is_generic_gap(const SpectralGeometry& geom,
                    const std::vector<EigenvalueClass>& classes, int gap_index,
                    double delta, std::span<const IVec> zstar);

// Lattice-scale lambda for a physical spectral value on this geometry.
double lattice_lambda(const SpectralGeometry& geom, double physical_lambda);

// Chebyshev ratio bound:
//   N * sum_{xi in A_0} (|xi - zeta|^2 - lambda)^{-2}
//     / sum_{xi in A_0} (|xi|^2 - lambda)^{-2}
// with both sums over A_0(lambda, lambda^delta). Throws when the annulus is
// empty or a denominator term vanishes exactly.
double chebyshev_rhs(double lambda, const IVec& zeta, double delta, int n_scatterers,
                     int d = 2);

}  // namespace scatter::arith

#endif
