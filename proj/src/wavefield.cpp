#include "scatter/wavefield.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "scatter/quadrature.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace scatter {

// ---------------------------------------------------------------------------
// Observable
// ---------------------------------------------------------------------------

Observable Observable::real_trig(
    const std::vector<std::pair<IVec, double>>& modes) {
  Observable a;
  for (const auto& [zeta, amp] : modes) {
    if (zeta == IVec{0, 0, 0}) {
      throw ConfigError("real_trig: zero frequency belongs in the mean term");
    }
    IVec neg{-zeta[0], -zeta[1], -zeta[2]};
    a.coefficients.emplace_back(zeta, std::complex<double>(amp, 0.0));
    a.coefficients.emplace_back(neg, std::complex<double>(amp, 0.0));
  }
  return a;
}

double Observable::coefficient_l1() const {
  double acc = std::abs(mean_value);
  for (const auto& [zeta, c] : coefficients) acc += std::abs(c);
  return acc;
}

// ---------------------------------------------------------------------------
// Mollifier
// ---------------------------------------------------------------------------

namespace {

double bump_profile(double r, double radius) {
  const double t = r / radius;
  if (t >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - t * t));
}

double sphere_area(int dim) { return dim == 2 ? kTwoPi : 4.0 * kPi; }

}  // namespace

Mollifier Mollifier::bump(int dim, double support_radius) {
  if (dim != 2 && dim != 3) throw ConfigError("Mollifier: dim must be 2 or 3");
  if (!(support_radius > 0.0)) {
    throw ConfigError("Mollifier: support radius must be positive");
  }
  const double raw = sphere_area(dim) *
                     gauss_integrate(0.0, support_radius, [&](double r) {
                       return bump_profile(r, support_radius) *
                              std::pow(r, dim - 1);
                     });
  return Mollifier(dim, support_radius, 1.0 / raw);
}

double Mollifier::operator()(double r) const {
  return normalization_ * bump_profile(r, radius_);
}

double Mollifier::mass() const {
  return sphere_area(dim_) * gauss_integrate(0.0, radius_, [&](double r) {
           return (*this)(r)*std::pow(r, dim_ - 1);
         });
}

// ---------------------------------------------------------------------------
// GridField
// ---------------------------------------------------------------------------

GridField::GridField(SpectralGeometry geom, int resolution,
                     std::vector<double> values)
    : geom_(std::move(geom)), res_(resolution), values_(std::move(values)) {
  std::size_t expected = 1;
  for (int i = 0; i < geom_.dim(); ++i) expected *= res_;
  if (values_.size() != expected) {
    throw ConfigError("GridField: value count does not match resolution");
  }
}

double GridField::cell_volume() const {
  const double side = (geom_.kind() == DomainKind::FlatTorus ? geom_.size()
                                                             : 2.0 * geom_.size()) /
                      res_;
  return geom_.dim() == 2 ? side * side : side * side * side;
}

Point GridField::grid_point(std::size_t flat) const {
  const int d = geom_.dim();
  const double extent =
      geom_.kind() == DomainKind::FlatTorus ? geom_.size() : 2.0 * geom_.size();
  const double origin =
      geom_.kind() == DomainKind::FlatTorus ? 0.0 : -geom_.size();
  Point x{0.0, 0.0, 0.0};
  for (int i = d - 1; i >= 0; --i) {
    const std::size_t g = flat % res_;
    flat /= res_;
    x[i] = origin + (g + 0.5) * extent / res_;
  }
  return x;
}

double GridField::quadrature_norm_sq() const {
  double acc = 0.0;
  for (double v : values_) acc += v * v;
  return acc * cell_volume();
}

double GridField::quadrature_ipr() const {
  double s2 = 0.0, s4 = 0.0;
  for (double v : values_) {
    const double q = v * v;
    s2 += q;
    s4 += q * q;
  }
  const double h = cell_volume();
  const double norm = s2 * h;
  return s4 * h / (norm * norm);
}

LocalizationDiagnostics GridField::diagnostics() const {
  LocalizationDiagnostics diag;
  diag.ipr = quadrature_ipr();

  std::size_t argmax = 0;
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (std::abs(values_[i]) > std::abs(values_[argmax])) argmax = i;
  }
  const Point center = grid_point(argmax);

  const double extent =
      geom_.kind() == DomainKind::FlatTorus ? geom_.size() : 2.0 * geom_.size();
  const double bin_width = 2.0 * extent / res_;
  const double max_r = extent * std::sqrt(static_cast<double>(geom_.dim())) *
                       (geom_.kind() == DomainKind::FlatTorus ? 0.5 : 1.0);
  const auto n_bins = static_cast<std::size_t>(max_r / bin_width) + 1;
  std::vector<double> shell_max(n_bins, 0.0);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double r = geom_.distance(grid_point(i), center);
    const auto bin = static_cast<std::size_t>(r / bin_width);
    if (bin < n_bins) {
      shell_max[bin] = std::max(shell_max[bin], std::abs(values_[i]));
    }
  }

  // Least-squares fit of ln(shell max) against distance, skipping the bin
  // that contains the localization centre itself.
  std::vector<double> xs, ys;
  for (std::size_t b = 1; b < n_bins; ++b) {
    if (shell_max[b] > 0.0) {
      xs.push_back((b + 0.5) * bin_width);
      ys.push_back(std::log(shell_max[b]));
    }
  }
  if (xs.size() < 4) return diag;
  const auto n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) return diag;
  const double slope = (n * sxy - sx * sy) / denom;
  const double ss_tot = syy - sy * sy / n;
  const double ss_res = ss_tot - slope * (sxy - sx * sy / n);
  diag.r_squared = ss_tot > 0.0 ? std::max(0.0, 1.0 - ss_res / ss_tot) : 0.0;
  if (slope < 0.0) diag.loc_length = -1.0 / slope;
  return diag;
}

// ---------------------------------------------------------------------------
// Eigenfunction
// ---------------------------------------------------------------------------

Eigenfunction::Eigenfunction(const SecularSystem& system,
                             const NewEigenpair& pair, double field_rel_tail)
    : geom_(system.scatterers().geometry),
      positions_(system.scatterers().positions),
      lambda_(pair.lambda) {
  if (pair.boundary) {
    throw ConfigError("Eigenfunction: boundary-flagged root has no refined data");
  }
  const Eigen::VectorXd& v = pair.null_vector;
  const auto n = static_cast<int>(positions_.size());
  if (v.size() != n) throw ConfigError("Eigenfunction: null vector size mismatch");

  double a_tail = 0.0;
  const Eigen::MatrixXd deriv = system.derivative_matrix(lambda_, &a_tail);
  norm_sq_ = v.dot(deriv * v);
  norm_tail_ = a_tail * n;  // |v|_1^2 <= n for a unit vector
  if (!(norm_sq_ > 0.0)) throw NumericError("Eigenfunction: nonpositive norm");

  // Truncation: smallest cutoff whose modeled missing Parseval mass is below
  // field_rel_tail * ||Psi||^2, capped by the evaluator table.
  const double cap = system.evaluator().cutoff();
  double lo = std::min(2.0 * lambda_ + 50.0, cap);
  double hi = cap;
  const double target = field_rel_tail * norm_sq_;
  if (norm_tail_estimate(geom_, lambda_, lo) > target) {
    for (int i = 0; i < 60 && hi - lo > 1.0; ++i) {
      const double mid = 0.5 * (lo + hi);
      (norm_tail_estimate(geom_, lambda_, mid) <= target ? hi : lo) = mid;
    }
    field_cutoff_ = hi;
  } else {
    field_cutoff_ = lo;
  }
  parseval_tail_ = norm_tail_estimate(geom_, lambda_, field_cutoff_);

  const double unit = geom_.eigenvalue_unit();
  radius_ = static_cast<int>(std::floor(std::sqrt(field_cutoff_ / unit)));
  const bool torus = geom_.kind() == DomainKind::FlatTorus;
  const int span = torus ? 2 * radius_ + 1 : radius_;
  std::size_t dense_size = 1;
  for (int i = 0; i < geom_.dim(); ++i) dense_size *= span;
  if (dense_size > 80'000'000) {
    throw ResourceError("Eigenfunction: dense coefficient table too large");
  }
  dense_.assign(dense_size, {0.0, 0.0});

  std::vector<Point> reduced;
  reduced.reserve(positions_.size());
  for (const Point& p : positions_) reduced.push_back(geom_.reduce(p));

  const ShellTable& t = system.evaluator().table();
  for (std::size_t s = 0; s < t.shell_count(); ++s) {
    if (t.energy[s] > field_cutoff_) break;
    const double denom = t.energy[s] - lambda_;
    for (std::int32_t k = t.begin[s]; k < t.begin[s + 1]; ++k) {
      const IVec& xi = t.modes[k];
      std::complex<double> w{0.0, 0.0};
      for (int j = 0; j < n; ++j) {
        w += v[j] * std::conj(geom_.mode_value(xi, reduced[j]));
      }
      w /= denom;
      mode_index_.push_back(xi);
      mode_w_.push_back(w);
      std::size_t flat = 0;
      for (int i = 0; i < geom_.dim(); ++i) {
        const int shifted = torus ? xi[i] + radius_ : xi[i] - 1;
        flat = flat * span + shifted;
      }
      dense_[flat] = w;
      parseval_ += std::norm(w);
    }
  }

  couplings_.resize(n);
  const double inv_norm = 1.0 / std::sqrt(norm_sq_);
  for (int j = 0; j < n; ++j) couplings_[j] = std::abs(v[j]) * inv_norm;
}

std::complex<double> Eigenfunction::lookup(const IVec& xi) const {
  const bool torus = geom_.kind() == DomainKind::FlatTorus;
  const int span = torus ? 2 * radius_ + 1 : radius_;
  std::size_t flat = 0;
  for (int i = 0; i < geom_.dim(); ++i) {
    const int shifted = torus ? xi[i] + radius_ : xi[i] - 1;
    if (shifted < 0 || shifted >= span) return {0.0, 0.0};
    flat = flat * span + shifted;
  }
  return dense_[flat];
}

double Eigenfunction::evaluate(const Point& x) const {
  const Point xr = geom_.reduce(x);
  const double guard = 1e-6 * geom_.size();
  for (const Point& p : positions_) {
    if (geom_.distance(xr, geom_.reduce(p)) < guard) {
      throw DomainError("evaluate: point within the scatterer guard distance");
    }
  }
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t k = 0; k < mode_index_.size(); ++k) {
    acc += mode_w_[k] * geom_.mode_value(mode_index_[k], xr);
  }
  return acc.real() / std::sqrt(norm_sq_);
}

std::complex<double> Eigenfunction::matrix_element(const IVec& zeta) const {
  if (geom_.kind() != DomainKind::FlatTorus) {
    throw DomainError("matrix_element: defined for torus geometries");
  }
  const double mean = std::pow(geom_.size(), -0.5 * geom_.dim());
  if (zeta == IVec{0, 0, 0}) return {mean, 0.0};
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t k = 0; k < mode_index_.size(); ++k) {
    IVec shifted = mode_index_[k];
    for (int i = 0; i < geom_.dim(); ++i) shifted[i] += zeta[i];
    acc += mode_w_[k] * std::conj(lookup(shifted));
  }
  return acc * (mean / parseval_);
}

Eigenfunction::ObservableResult Eigenfunction::observable_integral(
    const Observable& a) const {
  ObservableResult out;
  std::complex<double> dev{0.0, 0.0};
  for (const auto& [zeta, coeff] : a.coefficients) {
    const std::complex<double> m = matrix_element(zeta);
    dev += coeff * m;
    out.dominated_bound += std::abs(coeff) * std::abs(m);
  }
  out.deviation = dev.real();
  out.value = a.mean_value + out.deviation;
  return out;
}

// ---------------------------------------------------------------------------
// Separable evaluation on uniform grids: per-axis factor tables make an
// n^d-point sweep cost O(modes n + groups n^d) instead of O(modes n^d).
// ---------------------------------------------------------------------------

std::vector<double> Eigenfunction::values_on_grid(const Point& origin,
                                                  const Point& step,
                                                  int n) const {
  const int d = geom_.dim();
  const bool torus = geom_.kind() == DomainKind::FlatTorus;
  const double inv_norm = 1.0 / std::sqrt(norm_sq_);

  // Axis factor tables: factor[axis][(index - min_index) * n + g].
  const int span = torus ? 2 * radius_ + 1 : radius_;
  const int min_index = torus ? -radius_ : 1;
  std::vector<std::vector<std::complex<double>>> factor(d);
  for (int axis = 0; axis < d; ++axis) {
    factor[axis].resize(static_cast<std::size_t>(span) * n);
    for (int idx = 0; idx < span; ++idx) {
      const int mode_idx = idx + min_index;
      for (int g = 0; g < n; ++g) {
        const double coord = origin[axis] + (g + 0.5) * step[axis];
        if (torus) {
          factor[axis][static_cast<std::size_t>(idx) * n + g] =
              std::polar(1.0, kTwoPi * mode_idx * coord / geom_.size());
        } else {
          factor[axis][static_cast<std::size_t>(idx) * n + g] = {
              std::sin(kPi * mode_idx * (coord + geom_.size()) /
                       (2.0 * geom_.size())),
              0.0};
        }
      }
    }
  }
  auto axis_factor = [&](int axis, int mode_idx, int g) {
    return factor[axis][static_cast<std::size_t>(mode_idx - min_index) * n + g];
  };

  // Modes sorted lexicographically so grouping by leading indices is
  // contiguous.
  std::vector<std::size_t> order(mode_index_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mode_index_[a] < mode_index_[b];
  });

  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= n;
  std::vector<double> out(total, 0.0);
  const double mode_norm = std::pow(geom_.size(), -0.5 * d);

  if (d == 2) {
    std::map<int, std::vector<std::complex<double>>> rows;
    for (std::size_t i : order) {
      const IVec& xi = mode_index_[i];
      auto& row = rows.try_emplace(xi[0]).first->second;
      if (row.empty()) row.assign(n, {0.0, 0.0});
      for (int g1 = 0; g1 < n; ++g1) {
        row[g1] += mode_w_[i] * axis_factor(1, xi[1], g1);
      }
    }
    std::vector<std::pair<int, const std::vector<std::complex<double>>*>> flat;
    flat.reserve(rows.size());
    for (const auto& [xi0, row] : rows) flat.emplace_back(xi0, &row);
#pragma omp parallel for schedule(static)
    for (int g0 = 0; g0 < n; ++g0) {
      for (const auto& [xi0, row] : flat) {
        const std::complex<double> p = axis_factor(0, xi0, g0);
        for (int g1 = 0; g1 < n; ++g1) {
          out[static_cast<std::size_t>(g0) * n + g1] += (p * (*row)[g1]).real();
        }
      }
    }
  } else {
    std::map<std::pair<int, int>, std::vector<std::complex<double>>> rows;
    for (std::size_t i : order) {
      const IVec& xi = mode_index_[i];
      auto& row = rows.try_emplace(std::pair{xi[0], xi[1]}).first->second;
      if (row.empty()) row.assign(n, {0.0, 0.0});
      for (int g2 = 0; g2 < n; ++g2) {
        row[g2] += mode_w_[i] * axis_factor(2, xi[2], g2);
      }
    }
    std::map<int, std::vector<std::complex<double>>> planes;
    for (const auto& [key, row] : rows) {
      auto& plane = planes.try_emplace(key.first).first->second;
      if (plane.empty()) {
        plane.assign(static_cast<std::size_t>(n) * n, {0.0, 0.0});
      }
      for (int g1 = 0; g1 < n; ++g1) {
        const std::complex<double> p = axis_factor(1, key.second, g1);
        for (int g2 = 0; g2 < n; ++g2) {
          plane[static_cast<std::size_t>(g1) * n + g2] += p * row[g2];
        }
      }
    }
    std::vector<std::pair<int, const std::vector<std::complex<double>>*>> flat;
    for (const auto& [xi0, plane] : planes) flat.emplace_back(xi0, &plane);
#pragma omp parallel for schedule(static)
    for (int g0 = 0; g0 < n; ++g0) {
      for (const auto& [xi0, plane] : flat) {
        const std::complex<double> p = axis_factor(0, xi0, g0);
        for (std::size_t rest = 0; rest < static_cast<std::size_t>(n) * n;
             ++rest) {
          out[static_cast<std::size_t>(g0) * n * n + rest] +=
              (p * (*plane)[rest]).real();
        }
      }
    }
  }

  for (double& v : out) v *= mode_norm * inv_norm;
  return out;
}

GridField Eigenfunction::to_grid(int res) const {
  if (res < 2) throw ConfigError("to_grid: resolution must be at least 2");
  const bool torus = geom_.kind() == DomainKind::FlatTorus;
  const double h = (torus ? geom_.size() : 2.0 * geom_.size()) / res;
  const Point origin = torus ? Point{0.0, 0.0, 0.0}
                             : Point{-geom_.size(), -geom_.size(), -geom_.size()};
  return GridField(geom_, res, values_on_grid(origin, {h, h, h}, res));
}

// ---------------------------------------------------------------------------
// Smoothed amplitude: midpoint quadrature on dyadically refined grids over
// the mollifier support, with quadtree refinement around scatterers and an
// analytic bound on the skipped singular cores.
// ---------------------------------------------------------------------------

namespace {

// Integral of the squared free Green's singularity over a ball:
// d=2: ((1/2 pi) ln(1/r))^2, d=3: (1/(4 pi r))^2.
double singular_core_mass(int d, double radius) {
  if (d == 2) {
    const double lr = std::log(radius);
    return radius * radius * (lr * lr - lr + 0.5) / (4.0 * kPi);
  }
  return radius / (4.0 * kPi);
}

}  // namespace

double Eigenfunction::smoothed_amplitude(const Mollifier& chi, const Point& x,
                                         double abs_tol) const {
  const int d = geom_.dim();
  const bool torus = geom_.kind() == DomainKind::FlatTorus;
  const double eps = chi.support_radius();
  const Point xr = geom_.reduce(x);

  Point lo{0.0, 0.0, 0.0};
  Point hi{0.0, 0.0, 0.0};
  for (int i = 0; i < d; ++i) {
    lo[i] = xr[i] - eps;
    hi[i] = xr[i] + eps;
    if (!torus) {
      lo[i] = std::max(lo[i], -geom_.size());
      hi[i] = std::min(hi[i], geom_.size());
      if (lo[i] >= hi[i]) return 0.0;
    }
  }

  std::vector<Point> reduced;
  for (const Point& p : positions_) reduced.push_back(geom_.reduce(p));

  const double chi_max = chi(0.0);
  // Deterministic stand-in for the bounded part of |psi|^2 near a singular
  // core; the log/1-over-r term dominates the bound anyway.
  const double smooth_sq_bound = 1.0e4 / geom_.volume();
  constexpr int kMaxDepth = 12;  // measured from the coarsest 8^d grid

  // Scatterer images that fall inside the support box (at most one image per
  // scatterer since the box is smaller than the period).
  std::vector<std::pair<int, Point>> inside;
  for (std::size_t j = 0; j < reduced.size(); ++j) {
    Point img = reduced[j];
    bool ok = true;
    for (int i = 0; i < d; ++i) {
      if (torus) {
        while (img[i] < lo[i]) img[i] += geom_.size();
        while (img[i] > hi[i] && img[i] - geom_.size() >= lo[i]) {
          img[i] -= geom_.size();
        }
      }
      if (img[i] < lo[i] || img[i] > hi[i]) {
        ok = false;
        break;
      }
    }
    if (ok) inside.emplace_back(static_cast<int>(j), img);
  }

  auto cell_scatterer = [&](const Point& clo, const Point& cell_hi) -> int {
    for (const auto& [j, img] : inside) {
      bool in = true;
      for (int i = 0; i < d; ++i) {
        if (img[i] < clo[i] - 1e-12 || img[i] > cell_hi[i] + 1e-12) {
          in = false;
          break;
        }
      }
      if (in) return j;
    }
    return -1;
  };

  auto point_weight = [&](const Point& p) {
    return chi(geom_.distance(torus ? geom_.reduce(p) : p, xr));
  };

  // Depth-first refinement of a singular cell. Returns the integral estimate
  // and accumulates the analytic bound for skipped cores.
  auto refine = [&](auto&& self, const Point& clo, const Point& cell_hi,
                    int depth, double* budget) -> double {
    const int scat = cell_scatterer(clo, cell_hi);
    double vol = 1.0;
    for (int i = 0; i < d; ++i) vol *= cell_hi[i] - clo[i];
    if (scat < 0) {
      Point mid{0.0, 0.0, 0.0};
      for (int i = 0; i < d; ++i) mid[i] = 0.5 * (clo[i] + cell_hi[i]);
      const double a = evaluate(mid);
      return point_weight(mid) * a * a * vol;
    }
    if (depth >= kMaxDepth) {
      double half_diag_sq = 0.0;
      for (int i = 0; i < d; ++i) {
        const double side = cell_hi[i] - clo[i];
        half_diag_sq += 0.25 * side * side;
      }
      const double radius = std::sqrt(half_diag_sq);
      const double c = couplings_[scat];
      *budget += chi_max * 2.0 *
                 (c * c * singular_core_mass(d, radius) +
                  smooth_sq_bound * vol);
      return 0.0;
    }
    double acc = 0.0;
    for (int mask = 0; mask < (1 << d); ++mask) {
      Point slo = clo, shi = cell_hi;
      for (int i = 0; i < d; ++i) {
        const double mid = 0.5 * (clo[i] + cell_hi[i]);
        if ((mask >> i) & 1) {
          slo[i] = mid;
        } else {
          shi[i] = mid;
        }
      }
      acc += self(self, slo, shi, depth + 1, budget);
    }
    return acc;
  };

  auto level_sum = [&](int n_cells, double* budget_out) {
    Point step{0.0, 0.0, 0.0};
    for (int i = 0; i < d; ++i) step[i] = (hi[i] - lo[i]) / n_cells;
    const int base_depth = static_cast<int>(std::lround(
        std::log2(static_cast<double>(n_cells) / 8.0)));

    // Cells holding a scatterer image get the quadtree treatment; all other
    // midpoint values come from one separable sweep.
    std::vector<std::size_t> singular_cells;
    for (const auto& [j, img] : inside) {
      std::size_t flat = 0;
      for (int i = 0; i < d; ++i) {
        auto g = static_cast<std::int64_t>((img[i] - lo[i]) / step[i]);
        g = std::clamp<std::int64_t>(g, 0, n_cells - 1);
        flat = flat * n_cells + static_cast<std::size_t>(g);
      }
      singular_cells.push_back(flat);
    }
    std::sort(singular_cells.begin(), singular_cells.end());
    singular_cells.erase(
        std::unique(singular_cells.begin(), singular_cells.end()),
        singular_cells.end());

    const std::vector<double> grid = values_on_grid(lo, step, n_cells);

    const int planes = d == 3 ? n_cells : 1;
    double acc = 0.0;
    double budget = 0.0;
    double cell_vol = 1.0;
    for (int i = 0; i < d; ++i) cell_vol *= step[i];
    std::size_t flat = 0;
    for (int g0 = 0; g0 < n_cells; ++g0) {
      for (int g1 = 0; g1 < n_cells; ++g1) {
        for (int g2 = 0; g2 < planes; ++g2, ++flat) {
          Point clo{lo[0] + g0 * step[0], lo[1] + g1 * step[1],
                    d == 3 ? lo[2] + g2 * step[2] : 0.0};
          Point cell_hi{clo[0] + step[0], clo[1] + step[1],
                        d == 3 ? clo[2] + step[2] : 0.0};
          if (std::binary_search(singular_cells.begin(), singular_cells.end(),
                                 flat)) {
            acc += refine(refine, clo, cell_hi, base_depth, &budget);
            continue;
          }
          Point mid{0.0, 0.0, 0.0};
          for (int i = 0; i < d; ++i) mid[i] = 0.5 * (clo[i] + cell_hi[i]);
          const double a = grid[flat];
          acc += point_weight(mid) * a * a * cell_vol;
        }
      }
    }
    *budget_out = budget;
    return acc;
  };

  double budget = 0.0;
  double prev = level_sum(8, &budget);
  for (int n_cells = 16; n_cells <= (d == 2 ? 512 : 64); n_cells *= 2) {
    double cur_budget = 0.0;
    const double cur = level_sum(n_cells, &cur_budget);
    const double diff = std::abs(cur - prev);
    if (diff + cur_budget <= 0.5 * abs_tol) {
      return std::sqrt(std::max(cur, 0.0));
    }
    prev = cur;
  }
  std::ostringstream msg;
  msg << "smoothed_amplitude: quadrature did not reach tolerance " << abs_tol;
  throw NumericError(msg.str());
}

double Eigenfunction::two_point_correlation(const Mollifier& chi, const Point& x,
                                            const Point& y,
                                            double abs_tol) const {
  return smoothed_amplitude(chi, x, abs_tol) * smoothed_amplitude(chi, y, abs_tol);
}

LocalizationDiagnostics localization_diagnostics(const Eigenfunction& ef,
                                                 int resolution) {
  return ef.to_grid(resolution).diagnostics();
}

}  // namespace scatter
