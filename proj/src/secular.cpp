#include "scatter/secular.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace scatter {

namespace {

constexpr int kScanPoints = 32;
constexpr double kGapMargin = 1e-8;        // of the gap width
constexpr double kBisectTarget = 1e-10;    // of the gap width
constexpr double kDegeneracyFactor = 1e3;  // second/|mu_min| threshold

Eigen::VectorXd sorted_eigenvalues(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a,
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericError("symmetric eigensolver failed to converge");
  }
  return solver.eigenvalues();
}

}  // namespace

void ScattererSet::validate() const {
  if (positions.empty()) throw ConfigError("scatterer set is empty");
  if (!std::isfinite(phase_t)) throw ConfigError("phase parameter not finite");
  const double min_dist = 1e-6 * geometry.size();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!geometry.contains(positions[i])) {
      throw ConfigError("scatterer position outside the domain");
    }
    for (std::size_t j = i + 1; j < positions.size(); ++j) {
      if (geometry.distance(geometry.reduce(positions[i]),
                            geometry.reduce(positions[j])) < min_dist) {
        std::ostringstream msg;
        msg << "scatterer positions " << i << " and " << j
            << " closer than 1e-6 L";
        throw ConfigError(msg.str());
      }
    }
  }
}

SecularSystem::SecularSystem(ScattererSet set,
                             std::shared_ptr<const GreensEvaluator> ev)
    : set_(std::move(set)), evaluator_(std::move(ev)) {
  set_.validate();
  if (!(set_.geometry == evaluator_->geometry())) {
    throw ConfigError("SecularSystem: evaluator geometry mismatch");
  }
  build_caches();
}

SecularSystem::SecularSystem(ScattererSet set, double lambda_ceiling,
                             double tail_tolerance)
    : set_(std::move(set)) {
  set_.validate();
  const double cutoff = GreensEvaluator::recommended_cutoff(
      set_.geometry, lambda_ceiling, tail_tolerance);
  evaluator_ = std::make_shared<const GreensEvaluator>(set_.geometry, cutoff,
                                                       tail_tolerance);
  build_caches();
}

void SecularSystem::build_caches() {
  // Distinct eigenvalues up to the usable part of the cutoff.
  classes_ = distinct_eigenvalues(set_.geometry, 0.8 * evaluator_->cutoff());

  const int n = set_.count();
  pairs_.resize(static_cast<std::size_t>(n) * (n + 1) / 2);
  const bool torus = set_.geometry.kind() == DomainKind::FlatTorus;
  // On the torus every diagonal coefficient array is the same; build once.
  PairCoefficients shared_diag;
  if (torus) shared_diag = evaluator_->diagonal_coefficients(set_.positions[0]);
  std::size_t idx = 0;
  for (int k = 0; k < n; ++k) {
    for (int l = k; l < n; ++l, ++idx) {
      if (k == l) {
        pairs_[idx] = torus ? shared_diag
                            : evaluator_->diagonal_coefficients(set_.positions[k]);
      } else {
        pairs_[idx] =
            evaluator_->pair_coefficients(set_.positions[k], set_.positions[l]);
      }
    }
  }

  im_ref_.resize(n, n);
  im_ref_tail_sum_ = 0.0;
  idx = 0;
  for (int k = 0; k < n; ++k) {
    for (int l = k; l < n; ++l, ++idx) {
      const SummedValue v = evaluator_->reference_imag_kernel(pairs_[idx]);
      im_ref_(k, l) = v.value;
      im_ref_(l, k) = v.value;
      im_ref_tail_sum_ += (k == l ? 1.0 : 2.0) * v.tail;
    }
  }
}

const PairCoefficients& SecularSystem::pair(int k, int l) const {
  const int n = set_.count();
  // Row-major upper triangle offset.
  const std::size_t idx =
      static_cast<std::size_t>(k) * n - static_cast<std::size_t>(k) * (k - 1) / 2 +
      (l - k);
  return pairs_[idx];
}

Eigen::MatrixXd SecularSystem::build_matrix(double lambda,
                                            double* tail_sum) const {
  const int n = set_.count();
  Eigen::MatrixXd a(n, n);
  double tails = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int l = k; l < n; ++l) {
      const SummedValue v = evaluator_->resolvent_kernel(pair(k, l), lambda);
      const double entry = v.value - set_.phase_t * im_ref_(k, l);
      a(k, l) = entry;
      a(l, k) = entry;
      tails += (k == l ? 1.0 : 2.0) * v.tail;
    }
  }
  if (tail_sum) *tail_sum = tails + std::abs(set_.phase_t) * im_ref_tail_sum_;
  return a;
}

Eigen::VectorXd SecularSystem::branch_eigenvalues(double lambda) const {
  return sorted_eigenvalues(build_matrix(lambda));
}

Eigen::MatrixXd SecularSystem::derivative_matrix(double lambda,
                                                 double* max_tail) const {
  const int n = set_.count();
  Eigen::MatrixXd out(n, n);
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int l = k; l < n; ++l) {
      const SummedValue v = evaluator_->resolvent_sq_kernel(pair(k, l), lambda);
      out(k, l) = v.value;
      out(l, k) = v.value;
      worst = std::max(worst, v.tail);
    }
  }
  if (max_tail) *max_tail = worst;
  return out;
}

Eigen::VectorXd SecularSystem::null_vector(double lambda_root) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      build_matrix(lambda_root));
  if (solver.info() != Eigen::Success) {
    throw NumericError("symmetric eigensolver failed to converge");
  }
  const Eigen::VectorXd& mu = solver.eigenvalues();
  int best = 0;
  for (int i = 1; i < mu.size(); ++i) {
    if (std::abs(mu[i]) < std::abs(mu[best])) best = i;
  }
  Eigen::VectorXd v = solver.eigenvectors().col(best);
  int big = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) > std::abs(v[big])) big = i;
  }
  if (v[big] < 0.0) v = -v;
  return v;
}

int shell_evaluation_rank(const SpectralGeometry& geom, std::int64_t shell,
                          const std::vector<Point>& positions) {
  const std::vector<IVec> modes = shell_modes(geom, shell);
  if (modes.empty() || positions.empty()) return 0;
  Eigen::MatrixXcd e(modes.size(), positions.size());
  for (std::size_t a = 0; a < modes.size(); ++a) {
    for (std::size_t j = 0; j < positions.size(); ++j) {
      e(a, j) = geom.mode_value(modes[a], geom.reduce(positions[j]));
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(e);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  // Floor the reference scale at the mode amplitude L^{-d/2}, so an
  // evaluation matrix that vanishes to rounding reports rank zero.
  const double scale =
      std::max(sv[0], std::pow(geom.size(), -0.5 * geom.dim()));
  const double threshold = 1e-8 * scale;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > threshold) ++rank;
  }
  return rank;
}

int SecularSystem::old_eigenspace_survivors(int class_index) const {
  if (class_index < 0 || class_index >= static_cast<int>(classes_.size())) {
    throw ConfigError("old_eigenspace_survivors: class index out of range");
  }
  const EigenvalueClass& cls = classes_[class_index];
  const int rank =
      shell_evaluation_rank(set_.geometry, cls.shell, set_.positions);
  return cls.multiplicity - rank;
}

std::vector<NewEigenpair> SecularSystem::find_new_eigenvalues(
    int gap_index) const {
  if (gap_index < 0 || gap_index + 1 >= static_cast<int>(classes_.size())) {
    throw ConfigError("find_new_eigenvalues: gap index out of range");
  }
  const int n = set_.count();
  const double gap_lo = classes_[gap_index].eigenvalue;
  const double gap_hi = classes_[gap_index + 1].eigenvalue;
  const double width = gap_hi - gap_lo;
  const double margin = kGapMargin * width;
  const double a = gap_lo + margin;
  const double b = gap_hi - margin;

  // Scan grid, endpoints included.
  std::array<double, kScanPoints> grid;
  for (int i = 0; i < kScanPoints; ++i) {
    grid[i] = a + (b - a) * i / (kScanPoints - 1);
  }
  std::vector<Eigen::VectorXd> mu(kScanPoints);
  double tail_sum = 0.0;
  for (int i = 0; i < kScanPoints; ++i) {
    double t = 0.0;
    mu[i] = sorted_eigenvalues(build_matrix(grid[i], &t));
    tail_sum = std::max(tail_sum, t);
  }

  // Weyl monotonicity: each ordered branch must be nondecreasing.
  const double mono_tol = 2.0 * tail_sum + 1e-9 * (1.0 + mu[0].cwiseAbs().maxCoeff());
  for (int m = 0; m < n; ++m) {
    for (int i = 0; i + 1 < kScanPoints; ++i) {
      if (mu[i + 1][m] < mu[i][m] - mono_tol) {
        std::ostringstream msg;
        msg << "branch " << m << " decreased by " << mu[i][m] - mu[i + 1][m]
            << " between scan points in gap " << gap_index
            << " (tail tolerance " << mono_tol << ")";
        throw NumericError(msg.str());
      }
    }
  }

  std::vector<NewEigenpair> roots;
  auto finish_root = [&](double lambda_root) {
    NewEigenpair pair;
    pair.lambda = lambda_root;
    pair.gap_index = gap_index;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        build_matrix(lambda_root));
    if (solver.info() != Eigen::Success) {
      throw NumericError("symmetric eigensolver failed to converge");
    }
    const Eigen::VectorXd& ev = solver.eigenvalues();
    int best = 0;
    for (int i = 1; i < n; ++i) {
      if (std::abs(ev[i]) < std::abs(ev[best])) best = i;
    }
    pair.residual = std::abs(ev[best]);
    double second = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (i != best) second = std::min(second, std::abs(ev[i]));
    }
    pair.second_smallest = n > 1 ? second : std::numeric_limits<double>::infinity();
    pair.degenerate = n > 1 && second < kDegeneracyFactor * pair.residual;
    Eigen::VectorXd v = solver.eigenvectors().col(best);
    int big = 0;
    for (int i = 1; i < n; ++i) {
      if (std::abs(v[i]) > std::abs(v[big])) big = i;
    }
    if (v[big] < 0.0) v = -v;
    pair.null_vector = v;
    pair.norm_sq = v.dot(derivative_matrix(lambda_root) * v);
    roots.push_back(std::move(pair));
  };

  for (int m = 0; m < n; ++m) {
    // Locate the sign change of the m-th ordered branch, if any.
    if (mu[0][m] == 0.0) {
      finish_root(grid[0]);
      continue;
    }
    int cross = -1;
    for (int i = 0; i + 1 < kScanPoints; ++i) {
      if (mu[i][m] < 0.0 && mu[i + 1][m] >= 0.0) {
        cross = i;
        break;
      }
    }
    if (cross < 0) continue;
    double lo = grid[cross];
    double hi = grid[cross + 1];
    double flo = mu[cross][m];
    double fhi = mu[cross + 1][m];
    const double target = kBisectTarget * width;
    // Illinois false position with a bisection safeguard.
    bool last_was_lo = false;
    for (int iter = 0; iter < 128 && hi - lo > target; ++iter) {
      double mid = (flo * hi - fhi * lo) / (flo - fhi);
      const double margin_step = 0.01 * (hi - lo);
      if (!(mid > lo + margin_step && mid < hi - margin_step) ||
          iter % 3 == 2) {
        mid = 0.5 * (lo + hi);
      }
      const double fmid = sorted_eigenvalues(build_matrix(mid))[m];
      if (fmid < 0.0) {
        lo = mid;
        flo = fmid;
        if (last_was_lo) fhi *= 0.5;
        last_was_lo = true;
      } else {
        hi = mid;
        fhi = fmid;
        if (!last_was_lo) flo *= 0.5;
        last_was_lo = false;
      }
    }
    // Linear interpolation inside the final bracket.
    double root = hi;
    if (fhi > flo) {
      const double interp = lo - flo * (hi - lo) / (fhi - flo);
      if (interp > lo && interp < hi) root = interp;
      else root = 0.5 * (lo + hi);
    }
    finish_root(root);
  }

  // Crossings hidden inside the pole margins: branches that must diverge at
  // an edge but already have the post-crossing sign at the first (last)
  // scanned point are reported with the boundary flag and not refined.
  const int rank_bottom =
      shell_evaluation_rank(set_.geometry, classes_[gap_index].shell,
                            set_.positions);
  const int rank_top =
      shell_evaluation_rank(set_.geometry, classes_[gap_index + 1].shell,
                            set_.positions);
  for (int m = 0; m < std::min(rank_bottom, n); ++m) {
    if (mu[0][m] > 0.0) {
      NewEigenpair pair;
      pair.lambda = a;
      pair.gap_index = gap_index;
      pair.boundary = true;
      pair.null_vector = null_vector(a);
      pair.residual = std::abs(mu[0][m]);
      pair.second_smallest = std::numeric_limits<double>::infinity();
      roots.push_back(std::move(pair));
    }
  }
  for (int m = std::max(0, n - rank_top); m < n; ++m) {
    if (mu[kScanPoints - 1][m] < 0.0) {
      NewEigenpair pair;
      pair.lambda = b;
      pair.gap_index = gap_index;
      pair.boundary = true;
      pair.null_vector = null_vector(b);
      pair.residual = std::abs(mu[kScanPoints - 1][m]);
      pair.second_smallest = std::numeric_limits<double>::infinity();
      roots.push_back(std::move(pair));
    }
  }

  std::sort(roots.begin(), roots.end(),
            [](const NewEigenpair& p, const NewEigenpair& q) {
              return p.lambda < q.lambda;
            });
  return roots;
}

}  // namespace scatter
