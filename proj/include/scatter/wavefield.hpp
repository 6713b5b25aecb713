#ifndef SCATTER_WAVEFIELD_HPP
#define SCATTER_WAVEFIELD_HPP

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "scatter/common.hpp"
#include "scatter/geometry.hpp"
#include "scatter/secular.hpp"

namespace scatter {

// Trigonometric-polynomial observable: a finite set of Fourier coefficients
// a_hat(zeta) in the orthonormal basis e_zeta = L^{-d/2} exp(i<k_zeta, x>),
// plus the domain mean (1/L^d) int a. Real observables carry conjugate pairs.
struct Observable {
  double mean_value = 0.0;
  std::vector<std::pair<IVec, std::complex<double>>> coefficients;

  // Real observable sum_k 2 amp_k cos(<k_zeta, x>) / L^{d/2} with zero mean:
  // stores a_hat(zeta) = amp and a_hat(-zeta) = conj(amp) for each entry.
  static Observable real_trig(
      const std::vector<std::pair<IVec, double>>& modes);

  static Observable constant(double mean) { return Observable{mean, {}}; }

  double coefficient_l1() const;
};

// Compactly supported radial bump, unit mass in R^d.
class Mollifier {
 public:
  // c exp(-1 / (1 - (r/eps)^2)) for r < eps, normalized numerically.
  static Mollifier bump(int dim, double support_radius);

  double support_radius() const { return radius_; }
  double operator()(double r) const;
  double mass() const;  // quadrature check, should be 1 within 1e-6

 private:
  Mollifier(int dim, double radius, double normalization)
      : dim_(dim), radius_(radius), normalization_(normalization) {}
  int dim_;
  double radius_;
  double normalization_;
};

struct LocalizationDiagnostics {
  double ipr = 0.0;
  std::optional<double> loc_length;  // none when no decaying envelope fits
  double r_squared = 0.0;            // least-squares quality of the fit
};

// Real field sampled on a midpoint grid over the domain.
class GridField {
 public:
  GridField(SpectralGeometry geom, int resolution, std::vector<double> values);

  const SpectralGeometry& geometry() const { return geom_; }
  int resolution() const { return res_; }
  const std::vector<double>& values() const { return values_; }
  double cell_volume() const;
  Point grid_point(std::size_t flat_index) const;

  double quadrature_norm_sq() const;  // h^d sum psi^2
  double quadrature_ipr() const;      // h^d sum psi^4 / (h^d sum psi^2)^2
  LocalizationDiagnostics diagnostics() const;

 private:
  SpectralGeometry geom_;
  int res_;
  std::vector<double> values_;
};

// A new eigenfunction psi = sum_j v_j G_lambda(., x_j) / ||Psi||, held as a
// truncated mode-coefficient table w_xi = sum_j v_j conj(phi_xi(x_j)) /
// (E_xi - lambda). The normalization ||Psi||^2 = v^T A'(lambda) v comes from
// the derivative Gram identity; matrix elements are normalized by the
// truncated Parseval sum so the zero mode is exact.
class Eigenfunction {
 public:
  // field_rel_tail controls the mode-coefficient truncation: the estimated
  // missing Parseval mass stays below field_rel_tail * ||Psi||^2 (capped by
  // the evaluator cutoff).
  Eigenfunction(const SecularSystem& system, const NewEigenpair& pair,
                double field_rel_tail = 1e-5);

  double lambda() const { return lambda_; }
  const SpectralGeometry& geometry() const { return geom_; }
  const std::vector<Point>& scatterers() const { return positions_; }

  double norm_squared() const { return norm_sq_; }          // v^T A' v
  double norm_sq_tail() const { return norm_tail_; }        // its tail bound
  double parseval_norm_sq() const { return parseval_; }     // truncated sum
  double parseval_tail() const { return parseval_tail_; }   // missing mass est.

  // Normalized pointwise value; x must keep distance 1e-6 L from scatterers.
  double evaluate(const Point& x) const;

  // <e_zeta psi, psi>; torus only. zeta = 0 returns exactly L^{-d/2}.
  std::complex<double> matrix_element(const IVec& zeta) const;

  struct ObservableResult {
    double value = 0.0;      // int a |psi|^2
    double deviation = 0.0;  // value minus the domain mean of a
    double dominated_bound = 0.0;  // sum |a_hat| |matrix element|
  };
  ObservableResult observable_integral(const Observable& a) const;

  GridField to_grid(int resolution) const;

  // Mollified amplitude (int chi(x'-x) |psi(x')|^2 dx')^{1/2} by adaptive
  // midpoint quadrature with the stated absolute error target.
  double smoothed_amplitude(const Mollifier& chi, const Point& x,
                            double abs_tol = 1e-4) const;
  double two_point_correlation(const Mollifier& chi, const Point& x,
                               const Point& y, double abs_tol = 1e-4) const;

  std::size_t mode_count() const { return mode_index_.size(); }
  double field_cutoff() const { return field_cutoff_; }

  // Normalized field values on a uniform n^d midpoint grid with the given
  // origin and per-axis step (separable axis sweep, O(modes n + groups n^d)).
  std::vector<double> values_on_grid(const Point& origin, const Point& step,
                                     int n) const;

 private:
  std::complex<double> lookup(const IVec& xi) const;

  SpectralGeometry geom_;
  std::vector<Point> positions_;
  double lambda_;
  double norm_sq_;
  double norm_tail_;
  double parseval_ = 0.0;
  double parseval_tail_ = 0.0;
  double field_cutoff_ = 0.0;

  int radius_ = 0;  // dense index box half-width (torus) or max index (box)
  std::vector<std::complex<double>> dense_;   // lookup by shifted index
  std::vector<IVec> mode_index_;              // compact list, table order
  std::vector<std::complex<double>> mode_w_;  // coefficients, same order
  std::vector<double> couplings_;             // |v_j| / ||Psi||
};

// IPR and exponential-envelope diagnostics on a fresh grid.
LocalizationDiagnostics localization_diagnostics(const Eigenfunction& ef,
                                                 int resolution);

}  // namespace scatter

#endif
