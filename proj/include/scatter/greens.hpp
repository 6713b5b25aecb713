#ifndef SCATTER_GREENS_HPP
#define SCATTER_GREENS_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "scatter/common.hpp"
#include "scatter/geometry.hpp"

namespace scatter {

// A truncated mode sum together with the magnitude of its tail estimate.
struct SummedValue {
  double value = 0.0;
  double tail = 0.0;
};

// Modes below the truncation cutoff, grouped into shells of equal eigenvalue
// (equal integer invariant), shells ascending, lexicographic within a shell.
struct ShellTable {
  std::vector<std::int64_t> shell;   // integer invariants, ascending
  std::vector<double> energy;        // eigenvalues, unit * shell
  std::vector<std::int32_t> begin;   // offsets into modes, size() + 1
  std::vector<IVec> modes;

  std::size_t shell_count() const { return shell.size(); }
};

// Shell-aggregated products phi_n(x) phi_n(y) for one point pair (or the
// squared moduli for a diagonal point), plus the spectral-parameter
// independent reference sums. Built once per pair; every kernel evaluation
// at any spectral parameter reuses it.
struct PairCoefficients {
  std::vector<double> coef;   // one entry per shell
  double ref_real_sum = 0.0;  // sum coef E/(E^2+1), Re G_i part
  double ref_imag_sum = 0.0;  // sum coef / (E^2+1), Im G_i part
  bool diagonal = false;
};

// Evaluates regularized torus/box Green's function combinations by truncated
// mode sums. Three kernels cover everything the secular machinery needs:
//
//   resolvent kernel    sum phi phi [ 1/(E - lambda) - E/(E^2 + 1) ]
//   reference imag      sum phi phi / (E^2 + 1)
//   resolvent squared   sum phi phi / (E - lambda)^2
//
// Diagonal sums carry a smooth (local Weyl) integral tail correction; every
// returned value reports a tail estimate, and operations throw
// ConvergenceError when the estimate exceeds the tolerance. Immutable and
// safe for concurrent use.
class GreensEvaluator {
 public:
  GreensEvaluator(const SpectralGeometry& geom, double cutoff,
                  double tail_tolerance);

  // Smallest cutoff whose modeled tail estimates stay below tau for every
  // spectral parameter up to lambda_max.
  static double recommended_cutoff(const SpectralGeometry& geom,
                                   double lambda_max, double tau);

  const SpectralGeometry& geometry() const { return geom_; }
  double cutoff() const { return cutoff_; }
  double tail_tolerance() const { return tau_; }
  const ShellTable& table() const { return *table_; }

  // Exact integer-invariant test for lambda on the Laplacian spectrum.
  bool is_pole(double lambda) const;

  PairCoefficients pair_coefficients(const Point& x, const Point& y) const;
  PairCoefficients diagonal_coefficients(const Point& x) const;

  SummedValue resolvent_kernel(const PairCoefficients& pc, double lambda) const;
  SummedValue reference_imag_kernel(const PairCoefficients& pc) const;
  SummedValue resolvent_sq_kernel(const PairCoefficients& pc, double lambda) const;

  // Convenience entry points (build the pair coefficients on the fly).
  // G_lambda(x, y) - Re G_i(x, y); requires x != y.
  SummedValue regularized_offdiag(double lambda, const Point& x,
                                  const Point& y) const;
  // Diagonal counterpart with the divergent part removed.
  SummedValue regularized_diag(double lambda, const Point& x) const;
  // Im G_i(x, y); coincident points allowed.
  SummedValue im_G_ref(const Point& x, const Point& y) const;

  // Gram matrix with entries sum_n phi_n(x_k) phi_n(x_l) / (E_n - lambda)^2.
  // Positive semidefinite; per-entry tail estimates bounded by *tail.
  Eigen::MatrixXd derivative_matrix(double lambda, std::span<const Point> points,
                                    double* max_tail = nullptr) const;

 private:
  void require_valid_lambda(double lambda) const;
  SummedValue kernel_sum(const PairCoefficients& pc, int kernel,
                         double lambda) const;
  double cached_tail(int kernel, bool diagonal, double lambda) const;

  SpectralGeometry geom_;
  double cutoff_;
  double tau_;
  std::shared_ptr<const ShellTable> table_;
  // Monotone tail-estimate envelopes on a lambda grid, [kernel][diagonal].
  std::array<std::array<std::vector<double>, 2>, 3> tail_grid_;
};

// Smooth local-Weyl estimate of sum_{E_n > cutoff} |phi_n(x)|^2/(E_n-lambda)^2
// at an interior point, used to size mode-coefficient truncations.
double norm_tail_estimate(const SpectralGeometry& geom, double lambda,
                          double cutoff);

// Serial reference implementations: direct single-loop mode sums in
// enumeration order, no shell grouping and no tail corrections. They are the
// independent oracle for the shell-aggregated kernels and the baseline for
// the benchmark target.
namespace ref {

double resolvent_minus_reference(const SpectralGeometry& geom, double lambda,
                                 const Point& x, const Point& y, double cutoff);
double reference_imag(const SpectralGeometry& geom, const Point& x,
                      const Point& y, double cutoff);
double resolvent_squared(const SpectralGeometry& geom, double lambda,
                         const Point& x, const Point& y, double cutoff);
// sum phi phi / ((E - a)(E - b)) for the resolvent-identity cross check.
double resolvent_pair(const SpectralGeometry& geom, double a, double b,
                      const Point& x, const Point& y, double cutoff);

}  // namespace ref

}  // namespace scatter

#endif
