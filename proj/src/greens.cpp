#include "scatter/greens.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "scatter/quadrature.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace scatter {

namespace {

// ---------------------------------------------------------------------------
// Kernels and their derivatives in the eigenvalue variable.
// ---------------------------------------------------------------------------

enum Kernel { kResolvent = 0, kReferenceImag = 1, kResolventSq = 2 };

inline double kernel_value(int kernel, double e, double lambda) {
  switch (kernel) {
    case kResolvent:
      return 1.0 / (e - lambda) - e / (e * e + 1.0);
    case kReferenceImag:
      return 1.0 / (e * e + 1.0);
    default: {
      const double d = e - lambda;
      return 1.0 / (d * d);
    }
  }
}

inline double kernel_derivative(int kernel, double e, double lambda) {
  const double d = e - lambda;
  const double q = e * e + 1.0;
  switch (kernel) {
    case kResolvent:
      return -1.0 / (d * d) - (1.0 - e * e) / (q * q);
    case kReferenceImag:
      return -2.0 * e / (q * q);
    default:
      return -2.0 / (d * d * d);
  }
}

// Integral of f over (cutoff, infinity) via the substitution E = cutoff/u^2.
template <typename F>
double tail_integral(double cutoff, F&& f) {
  const GaussRule01& g = gauss01();
  double acc = 0.0;
  for (int i = 0; i < 64; ++i) {
    const double u = g.node[i];
    const double e = cutoff / (u * u);
    acc += g.weight[i] * f(e) * 2.0 * cutoff / (u * u * u);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Tail models. Mode-count fluctuations use the empirical circle/sphere-law
// envelopes kappa X^beta; coefficient scatter uses a mean-square model with a
// safety factor of three. Both are estimates, validated by the
// tolerance-halving property tests.
// ---------------------------------------------------------------------------

struct TailModel {
  int dim;
  double unit_ball;     // omega_d
  double density_coef;  // modes per unit eigenvalue: density_coef * E^{d/2-1}
  double local_dos;     // omega_d (d/2) / (2 pi)^d
  double mean_diag;     // mean |phi|^2 per mode
  double var_diag;      // variance of |phi|^2 across modes
  double var_offdiag;   // mean of (phi phi')^2 across modes
  double kappa;         // count-fluctuation envelope constant
  double beta;          // count-fluctuation envelope exponent

  static TailModel build(const SpectralGeometry& geom) {
    TailModel m;
    m.dim = geom.dim();
    m.unit_ball = m.dim == 2 ? kPi : 4.0 * kPi / 3.0;
    const double L = geom.size();
    const double halfd = 0.5 * m.dim;
    const double pow2pi = std::pow(kTwoPi, m.dim);
    m.local_dos = m.unit_ball * halfd / pow2pi;
    const double vol_pow = std::pow(L, -static_cast<double>(m.dim));
    if (geom.kind() == DomainKind::FlatTorus) {
      m.density_coef = m.unit_ball * halfd * std::pow(L / kTwoPi, m.dim);
      m.mean_diag = vol_pow;
      m.var_diag = 0.0;
      m.var_offdiag = 0.5 * vol_pow * vol_pow;
    } else {
      m.density_coef = m.unit_ball * halfd * std::pow(L / kPi, m.dim);
      m.mean_diag = vol_pow * std::pow(0.5, m.dim);
      m.var_diag = vol_pow * vol_pow *
                   (std::pow(0.375, m.dim) - std::pow(0.25, m.dim));
      m.var_offdiag = vol_pow * vol_pow * std::pow(0.25, m.dim);
    }
    m.kappa = 4.0;
    m.beta = m.dim == 2 ? 0.35 : 0.66;
    return m;
  }

  double density(double e) const {
    return density_coef * std::pow(e, 0.5 * dim - 1.0);
  }

  // Signed smooth tail for a diagonal sum: local Weyl density times kernel.
  double smooth_diag_tail(int kernel, double lambda, double cutoff) const {
    return local_dos * tail_integral(cutoff, [&](double e) {
             return std::pow(e, 0.5 * dim - 1.0) * kernel_value(kernel, e, lambda);
           });
  }

  // Count-fluctuation envelope, via summation by parts against kappa X^beta.
  double count_fluctuation(int kernel, double lambda, double cutoff) const {
    const double boundary = kappa * std::pow(cutoff, beta) *
                            std::abs(kernel_value(kernel, cutoff, lambda));
    const double integral = tail_integral(cutoff, [&](double e) {
      return kappa * std::pow(e, beta) *
             std::abs(kernel_derivative(kernel, e, lambda));
    });
    return boundary + integral;
  }

  // Root-mean-square of the remainder under independent coefficient scatter.
  double rms_tail(int kernel, double lambda, double cutoff, double variance) const {
    if (variance <= 0.0) return 0.0;
    const double second_moment = tail_integral(cutoff, [&](double e) {
      const double k = kernel_value(kernel, e, lambda);
      return density(e) * k * k;
    });
    return std::sqrt(std::max(second_moment, 0.0) * variance);
  }

  double tail_estimate(int kernel, double lambda, double cutoff,
                       bool diagonal) const {
    if (diagonal) {
      return mean_diag * count_fluctuation(kernel, lambda, cutoff) +
             3.0 * rms_tail(kernel, lambda, cutoff, var_diag);
    }
    return 3.0 * rms_tail(kernel, lambda, cutoff, var_offdiag);
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// GreensEvaluator
// ---------------------------------------------------------------------------

GreensEvaluator::GreensEvaluator(const SpectralGeometry& geom, double cutoff,
                                 double tail_tolerance)
    : geom_(geom), cutoff_(cutoff), tau_(tail_tolerance) {
  if (!(cutoff > 0.0)) throw ConfigError("GreensEvaluator: cutoff must be > 0");
  if (!(tail_tolerance > 0.0)) {
    throw ConfigError("GreensEvaluator: tail tolerance must be > 0");
  }
  const std::vector<Mode> modes = enumerate_modes(geom, cutoff);
  auto table = std::make_shared<ShellTable>();
  table->modes.reserve(modes.size());
  for (const Mode& m : modes) {
    if (table->shell.empty() || table->shell.back() != m.shell) {
      table->shell.push_back(m.shell);
      table->energy.push_back(m.eigenvalue);
      table->begin.push_back(static_cast<std::int32_t>(table->modes.size()));
    }
    table->modes.push_back(m.index);
  }
  table->begin.push_back(static_cast<std::int32_t>(table->modes.size()));
  table_ = std::move(table);

  // Tail-estimate envelopes over the admissible spectral range; lookups
  // interpolate these instead of re-running the model integrals per call.
  const TailModel model = TailModel::build(geom_);
  const int grid_points = 64;
  for (int kernel = 0; kernel < 3; ++kernel) {
    for (int diag = 0; diag < 2; ++diag) {
      auto& grid = tail_grid_[kernel][diag];
      grid.resize(grid_points + 1);
      double running = 0.0;
      for (int i = 0; i <= grid_points; ++i) {
        const double lambda = 0.8 * cutoff_ * i / grid_points;
        running = std::max(
            running, model.tail_estimate(kernel, lambda, cutoff_, diag != 0));
        grid[i] = running;
      }
    }
  }
}

double GreensEvaluator::cached_tail(int kernel, bool diagonal,
                                    double lambda) const {
  const auto& grid = tail_grid_[kernel][diagonal ? 1 : 0];
  const double step = 0.8 * cutoff_ / (grid.size() - 1);
  const double pos = std::clamp(lambda / step, 0.0,
                                static_cast<double>(grid.size() - 1));
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, grid.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  // five percent slack over the interpolated envelope
  return 1.05 * ((1.0 - frac) * grid[lo] + frac * grid[hi]);
}

double GreensEvaluator::recommended_cutoff(const SpectralGeometry& geom,
                                           double lambda_max, double tau) {
  if (!(lambda_max > 0.0) || !(tau > 0.0)) {
    throw ConfigError("recommended_cutoff: lambda_max and tau must be > 0");
  }
  const TailModel m = TailModel::build(geom);
  auto worst = [&](double cutoff) {
    double est = 0.0;
    for (int kernel : {kResolvent, kReferenceImag, kResolventSq}) {
      est = std::max(est, m.tail_estimate(kernel, lambda_max, cutoff, true));
      est = std::max(est, m.tail_estimate(kernel, lambda_max, cutoff, false));
    }
    return est;
  };
  double lo = std::max(2.0 * lambda_max + 50.0, 100.0);
  if (worst(lo) <= tau) return lo;
  double hi = lo;
  while (worst(hi) > tau) {
    hi *= 2.0;
    if (hi > 1.0e12) {
      throw ResourceError(
          "recommended_cutoff: no feasible cutoff below 1e12 for the requested "
          "tolerance");
    }
  }
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (worst(mid) <= tau ? hi : lo) = mid;
  }
  // headroom for the interpolated envelope lookup used at evaluation time
  return 1.1 * hi;
}

bool GreensEvaluator::is_pole(double lambda) const {
  const double unit = geom_.eigenvalue_unit();
  const auto s = static_cast<std::int64_t>(std::llround(lambda / unit));
  if (s < 0 || lambda != static_cast<double>(s) * unit) return false;
  const auto& shells = table_->shell;
  return std::binary_search(shells.begin(), shells.end(), s);
}

void GreensEvaluator::require_valid_lambda(double lambda) const {
  if (is_pole(lambda)) {
    std::ostringstream msg;
    msg << "spectral parameter " << lambda << " is a Laplacian eigenvalue";
    throw PoleError(msg.str());
  }
  if (lambda >= 0.8 * cutoff_) {
    std::ostringstream msg;
    msg << "spectral parameter " << lambda << " too close to cutoff " << cutoff_;
    throw ConfigError(msg.str());
  }
}

namespace {

// Reference sums over the finished coefficient array; fixed order.
void finish_reference_sums(const ShellTable& t, PairCoefficients& pc) {
  double real_sum = 0.0;
  double imag_sum = 0.0;
  for (std::size_t i = 0; i < pc.coef.size(); ++i) {
    const double e = t.energy[i];
    const double q = 1.0 / (e * e + 1.0);
    real_sum += pc.coef[i] * e * q;
    imag_sum += pc.coef[i] * q;
  }
  pc.ref_real_sum = real_sum;
  pc.ref_imag_sum = imag_sum;
}

// Four-lane reduction of sum coef[i] / (energy[i] - lambda)^p, p in {1, 2}.
// The lane split fixes the summation order independently of the optimizer.
template <int P>
double pole_sum(const double* __restrict coef, const double* __restrict energy,
                std::size_t n, double lambda) {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const double d0 = energy[i] - lambda;
    const double d1 = energy[i + 1] - lambda;
    const double d2 = energy[i + 2] - lambda;
    const double d3 = energy[i + 3] - lambda;
    if constexpr (P == 1) {
      a0 += coef[i] / d0;
      a1 += coef[i + 1] / d1;
      a2 += coef[i + 2] / d2;
      a3 += coef[i + 3] / d3;
    } else {
      a0 += coef[i] / (d0 * d0);
      a1 += coef[i + 1] / (d1 * d1);
      a2 += coef[i + 2] / (d2 * d2);
      a3 += coef[i + 3] / (d3 * d3);
    }
  }
  for (; i < n; ++i) {
    const double d = energy[i] - lambda;
    a0 += coef[i] / (P == 1 ? d : d * d);
  }
  return (a0 + a1) + (a2 + a3);
}

}  // namespace

PairCoefficients GreensEvaluator::pair_coefficients(const Point& x,
                                                    const Point& y) const {
  const Point xr = geom_.reduce(x);
  const Point yr = geom_.reduce(y);
  if (geom_.distance(xr, yr) < 1e-9 * geom_.size()) {
    throw DomainError("pair_coefficients: points coincide (use the diagonal)");
  }
  const ShellTable& t = *table_;
  PairCoefficients pc;
  pc.coef.assign(t.shell_count(), 0.0);
  const auto n_shells = static_cast<std::int64_t>(t.shell_count());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n_shells; ++i) {
    double acc = 0.0;
    for (std::int32_t k = t.begin[i]; k < t.begin[i + 1]; ++k) {
      acc += geom_.mode_pair_product(t.modes[k], xr, yr);
    }
    pc.coef[i] = acc;
  }
  finish_reference_sums(t, pc);
  return pc;
}

PairCoefficients GreensEvaluator::diagonal_coefficients(const Point& x) const {
  const Point xr = geom_.reduce(x);
  const ShellTable& t = *table_;
  PairCoefficients pc;
  pc.diagonal = true;
  pc.coef.assign(t.shell_count(), 0.0);
  const auto n_shells = static_cast<std::int64_t>(t.shell_count());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n_shells; ++i) {
    double acc = 0.0;
    for (std::int32_t k = t.begin[i]; k < t.begin[i + 1]; ++k) {
      acc += geom_.mode_pair_product(t.modes[k], xr, xr);
    }
    pc.coef[i] = acc;
  }
  finish_reference_sums(t, pc);
  return pc;
}

SummedValue GreensEvaluator::kernel_sum(const PairCoefficients& pc, int kernel,
                                        double lambda) const {
  const ShellTable& t = *table_;
  const std::size_t n = t.shell_count();
  double acc = 0.0;
  switch (kernel) {
    case kResolvent:
      acc = pole_sum<1>(pc.coef.data(), t.energy.data(), n, lambda) -
            pc.ref_real_sum;
      break;
    case kReferenceImag:
      acc = pc.ref_imag_sum;
      break;
    default:
      acc = pole_sum<2>(pc.coef.data(), t.energy.data(), n, lambda);
      break;
  }
  if (pc.diagonal) {
    acc += TailModel::build(geom_).smooth_diag_tail(kernel, lambda, cutoff_);
  }
  const double tail = cached_tail(kernel, pc.diagonal, lambda);
  if (tail > tau_) {
    std::ostringstream msg;
    msg << "kernel sum unconverged at cutoff " << cutoff_ << ": tail estimate "
        << tail << " > tolerance " << tau_;
    throw ConvergenceError(msg.str(), tail);
  }
  return {acc, tail};
}

SummedValue GreensEvaluator::resolvent_kernel(const PairCoefficients& pc,
                                              double lambda) const {
  require_valid_lambda(lambda);
  return kernel_sum(pc, kResolvent, lambda);
}

SummedValue GreensEvaluator::reference_imag_kernel(
    const PairCoefficients& pc) const {
  return kernel_sum(pc, kReferenceImag, 0.0);
}

SummedValue GreensEvaluator::resolvent_sq_kernel(const PairCoefficients& pc,
                                                 double lambda) const {
  require_valid_lambda(lambda);
  return kernel_sum(pc, kResolventSq, lambda);
}

SummedValue GreensEvaluator::regularized_offdiag(double lambda, const Point& x,
                                                 const Point& y) const {
  return resolvent_kernel(pair_coefficients(x, y), lambda);
}

SummedValue GreensEvaluator::regularized_diag(double lambda,
                                              const Point& x) const {
  return resolvent_kernel(diagonal_coefficients(x), lambda);
}

SummedValue GreensEvaluator::im_G_ref(const Point& x, const Point& y) const {
  const Point xr = geom_.reduce(x);
  const Point yr = geom_.reduce(y);
  if (geom_.distance(xr, yr) < 1e-9 * geom_.size()) {
    return reference_imag_kernel(diagonal_coefficients(x));
  }
  return reference_imag_kernel(pair_coefficients(x, y));
}

Eigen::MatrixXd GreensEvaluator::derivative_matrix(double lambda,
                                                   std::span<const Point> points,
                                                   double* max_tail) const {
  require_valid_lambda(lambda);
  const auto n = static_cast<int>(points.size());
  Eigen::MatrixXd out(n, n);
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int l = k; l < n; ++l) {
      const PairCoefficients pc = k == l
                                      ? diagonal_coefficients(points[k])
                                      : pair_coefficients(points[k], points[l]);
      const SummedValue v = resolvent_sq_kernel(pc, lambda);
      out(k, l) = v.value;
      out(l, k) = v.value;
      worst = std::max(worst, v.tail);
    }
  }
  if (max_tail) *max_tail = worst;
  return out;
}

double norm_tail_estimate(const SpectralGeometry& geom, double lambda,
                          double cutoff) {
  const TailModel m = TailModel::build(geom);
  return m.smooth_diag_tail(kResolventSq, lambda, cutoff);
}

// ---------------------------------------------------------------------------
// Serial reference sums.
// ---------------------------------------------------------------------------

namespace ref {

namespace {

template <typename F>
double direct_sum(const SpectralGeometry& geom, const Point& x, const Point& y,
                  double cutoff, F&& weight) {
  const std::vector<Mode> modes = enumerate_modes(geom, cutoff);
  const Point xr = geom.reduce(x);
  const Point yr = geom.reduce(y);
  double acc = 0.0;
  for (const Mode& m : modes) {
    acc += geom.mode_pair_product(m.index, xr, yr) * weight(m.eigenvalue);
  }
  return acc;
}

}  // namespace

double resolvent_minus_reference(const SpectralGeometry& geom, double lambda,
                                 const Point& x, const Point& y, double cutoff) {
  return direct_sum(geom, x, y, cutoff, [lambda](double e) {
    return 1.0 / (e - lambda) - e / (e * e + 1.0);
  });
}

double reference_imag(const SpectralGeometry& geom, const Point& x,
                      const Point& y, double cutoff) {
  return direct_sum(geom, x, y, cutoff,
                    [](double e) { return 1.0 / (e * e + 1.0); });
}

double resolvent_squared(const SpectralGeometry& geom, double lambda,
                         const Point& x, const Point& y, double cutoff) {
  return direct_sum(geom, x, y, cutoff, [lambda](double e) {
    const double d = e - lambda;
    return 1.0 / (d * d);
  });
}

double resolvent_pair(const SpectralGeometry& geom, double a, double b,
                      const Point& x, const Point& y, double cutoff) {
  return direct_sum(geom, x, y, cutoff, [a, b](double e) {
    return 1.0 / ((e - a) * (e - b));
  });
}

}  // namespace ref

}  // namespace scatter
