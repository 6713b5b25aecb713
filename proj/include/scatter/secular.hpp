#ifndef SCATTER_SECULAR_HPP
#define SCATTER_SECULAR_HPP

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "scatter/common.hpp"
#include "scatter/geometry.hpp"
#include "scatter/greens.hpp"

namespace scatter {

// A disorder sample: N distinct impurity positions plus the extension phase
// parameter t = tan(phi/2), phi in (-pi, pi).
struct ScattererSet {
  SpectralGeometry geometry;
  std::vector<Point> positions;
  double phase_t = 0.0;

  int count() const { return static_cast<int>(positions.size()); }
  // Throws ConfigError on coincident positions (min distance 1e-6 L), empty
  // sets, or non-finite phase.
  void validate() const;
};

// A root of det A_lambda = 0 with its null vector and norm data.
struct NewEigenpair {
  double lambda = 0.0;
  int gap_index = -1;
  Eigen::VectorXd null_vector;
  double norm_sq = 0.0;          // v^T A'(lambda) v
  double residual = 0.0;         // smallest |eigenvalue of A(lambda)|
  double second_smallest = 0.0;  // second smallest |eigenvalue|
  bool degenerate = false;       // null space dimension >= 2 at tolerance
  bool boundary = false;         // crossing inside the gap margin, not refined
};

// The N x N real symmetric matrix family lambda -> A_lambda together with
// branch tracking and root isolation across Laplacian gaps.
//
//   A_kl = [G_lambda - Re G_i](x_k, x_l) - t Im G_i(x_k, x_l)
//
// Pair coefficients and the lambda-independent Im G_i block are cached at
// construction; evaluations at different lambda reuse them.
class SecularSystem {
 public:
  // Shares an evaluator (one mode table can serve many samples).
  SecularSystem(ScattererSet set, std::shared_ptr<const GreensEvaluator> ev);
  // Builds a private evaluator sized for root scans up to lambda_ceiling.
  SecularSystem(ScattererSet set, double lambda_ceiling, double tail_tolerance);

  const ScattererSet& scatterers() const { return set_; }
  const GreensEvaluator& evaluator() const { return *evaluator_; }
  const std::vector<EigenvalueClass>& classes() const { return classes_; }
  int gap_count() const { return static_cast<int>(classes_.size()) - 1; }

  // A_lambda; lambda must avoid the Laplacian spectrum.
  Eigen::MatrixXd build_matrix(double lambda, double* tail_sum = nullptr) const;

  // Eigenvalues of A_lambda, ascending.
  Eigen::VectorXd branch_eigenvalues(double lambda) const;

  // All secular roots inside gap j, each with null vector and norm factor.
  std::vector<NewEigenpair> find_new_eigenvalues(int gap_index) const;

  // Unit null vector of A at a root (smallest-|eigenvalue| eigenvector,
  // largest-magnitude component made positive).
  Eigen::VectorXd null_vector(double lambda_root) const;

  // Derivative Gram matrix A'(lambda) from the cached pair data.
  Eigen::MatrixXd derivative_matrix(double lambda, double* max_tail = nullptr) const;

  // Count of old eigenfunctions in multiplicity class `class_index` that
  // survive the perturbation (vanish at every scatterer).
  int old_eigenspace_survivors(int class_index) const;

 private:
  void build_caches();
  const PairCoefficients& pair(int k, int l) const;  // k <= l

  ScattererSet set_;
  std::shared_ptr<const GreensEvaluator> evaluator_;
  std::vector<EigenvalueClass> classes_;
  std::vector<PairCoefficients> pairs_;  // upper triangle, row-major
  Eigen::MatrixXd im_ref_;               // t-block, lambda independent
  double im_ref_tail_sum_ = 0.0;
};

// Rank of the m x N matrix of shell-mode values at the scatterer positions
// (singular values above 1e-8 of the largest).
int shell_evaluation_rank(const SpectralGeometry& geom, std::int64_t shell,
                          const std::vector<Point>& positions);

}  // namespace scatter

#endif
