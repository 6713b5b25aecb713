#include "scatter/arith.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace scatter::arith {

namespace {

// Largest integer r with r^2 <= x; exact for x < 2^62.
std::int64_t isqrt(std::int64_t x) {
  if (x < 0) return -1;
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(x)));
  while (r > 0 && r * r > x) --r;
  while ((r + 1) * (r + 1) <= x) ++r;
  return r;
}

// Count of b in Z with lo <= b^2 <= hi.
std::int64_t interval_count(double lo, double hi) {
  if (hi < 0.0) return 0;
  const std::int64_t bmax = isqrt(static_cast<std::int64_t>(std::floor(hi)));
  if (lo <= 0.0) return 2 * bmax + 1;
  // Smallest |b| with b^2 >= lo.
  auto bmin = static_cast<std::int64_t>(std::ceil(std::sqrt(lo)));
  while (bmin > 0 && static_cast<double>((bmin - 1)) * (bmin - 1) >= lo) --bmin;
  while (static_cast<double>(bmin) * bmin < lo) ++bmin;
  if (bmin > bmax) return 0;
  return 2 * (bmax - bmin + 1);
}

void check_latency_budget(double X, int d) {
  const double limit = d == 2 ? 1.0e12 : 1.0e8;
  if (X > limit) {
    std::ostringstream msg;
    msg << "count_lattice_points: X=" << X << " exceeds the d=" << d
        << " latency budget " << limit;
    throw ResourceError(msg.str());
  }
}

}  // namespace

void ExponentConfig::validate() const {
  if (!(theta > 0.0 && theta < 0.5)) {
    throw ConfigError("ExponentConfig: theta must lie in (0, 1/2)");
  }
  if (!(delta > 0.5 * theta && delta < 0.5 - theta)) {
    std::ostringstream msg;
    msg << "ExponentConfig: delta=" << delta << " outside (" << 0.5 * theta
        << ", " << 0.5 - theta << ")";
    throw ConfigError(msg.str());
  }
}

std::int64_t count_lattice_points(double X, int d) {
  if (!(X >= 0.0)) throw ConfigError("count_lattice_points: X must be >= 0");
  if (d != 2 && d != 3) throw ConfigError("count_lattice_points: d must be 2 or 3");
  check_latency_budget(X, d);

  const auto r = isqrt(static_cast<std::int64_t>(std::floor(X)));
  std::int64_t total = 0;
  if (d == 2) {
    for (std::int64_t a = -r; a <= r; ++a) {
      total += interval_count(0.0, X - static_cast<double>(a) * a);
    }
  } else {
    for (std::int64_t a = -r; a <= r; ++a) {
      const double rem_a = X - static_cast<double>(a) * a;
      const auto rb = isqrt(static_cast<std::int64_t>(std::floor(rem_a)));
      for (std::int64_t b = -rb; b <= rb; ++b) {
        total += interval_count(0.0, rem_a - static_cast<double>(b) * b);
      }
    }
  }
  return total;
}

double circle_law_residual(double X) {
  return static_cast<double>(count_lattice_points(X, 2)) - kPi * X;
}

namespace {

std::vector<IVec> annulus_points_impl(const AnnulusSpec& spec, int d,
                                      bool count_only, std::int64_t* count_out) {
  if (!(spec.half_width > 0.0)) throw ConfigError("annulus: half-width must be > 0");
  if (!(spec.lambda > 0.0)) throw ConfigError("annulus: lambda must be > 0");

  // Inclusive boundary with one ulp of outward slack.
  const double w_plus =
      std::nextafter(spec.half_width, std::numeric_limits<double>::infinity());
  const double lo = spec.lambda - w_plus;
  const double hi = spec.lambda + w_plus;

  const double shell_density =
      d == 2 ? kPi : 2.0 * kPi * std::sqrt(spec.lambda + spec.half_width);
  const double projected = shell_density * 2.0 * spec.half_width + 16.0;
  if (projected > 1.0e8) {
    std::ostringstream msg;
    msg << "annulus: projected point count " << projected
        << " exceeds budget 1e8";
    throw ResourceError(msg.str());
  }

  const auto r = isqrt(static_cast<std::int64_t>(std::floor(hi))) ;
  std::vector<IVec> out;
  std::int64_t n = 0;
  auto scan_last = [&](std::int64_t partial, const IVec& base, int axis) {
    // Remaining coordinate c must satisfy lo - partial <= c^2 <= hi - partial.
    const double clo = lo - static_cast<double>(partial);
    const double chi = hi - static_cast<double>(partial);
    if (chi < 0.0) return;
    const auto cmax = isqrt(static_cast<std::int64_t>(std::floor(chi)));
    for (std::int64_t c = -cmax; c <= cmax; ++c) {
      if (static_cast<double>(c) * c < clo) continue;
      if (count_only) {
        ++n;
      } else {
        IVec shifted = base;
        shifted[axis] = static_cast<int>(c) + spec.center[axis];
        out.push_back(shifted);
      }
    }
  };

  if (d == 2) {
    for (std::int64_t a = -r; a <= r; ++a) {
      IVec base{static_cast<int>(a) + spec.center[0], 0, 0};
      scan_last(a * a, base, 1);
    }
  } else {
    for (std::int64_t a = -r; a <= r; ++a) {
      for (std::int64_t b = -r; b <= r; ++b) {
        const std::int64_t partial = a * a + b * b;
        if (static_cast<double>(partial) > hi) continue;
        IVec base{static_cast<int>(a) + spec.center[0],
                  static_cast<int>(b) + spec.center[1], 0};
        scan_last(partial, base, 2);
      }
    }
  }
  if (count_only) {
    *count_out = n;
    return out;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::int64_t shifted_norm_sq(const IVec& xi, const IVec& zeta, int d) {
  std::int64_t s = 0;
  for (int i = 0; i < d; ++i) {
    const std::int64_t diff = static_cast<std::int64_t>(xi[i]) - zeta[i];
    s += diff * diff;
  }
  return s;
}

}  // namespace

std::vector<IVec> annulus_points(const AnnulusSpec& spec, int d) {
  return annulus_points_impl(spec, d, false, nullptr);
}

std::int64_t annulus_count(const AnnulusSpec& spec, int d) {
  std::int64_t n = 0;
  annulus_points_impl(spec, d, true, &n);
  return n;
}

bool is_generic_lambda(double lambda, double delta,
                       std::span<const IVec> zstar, int d) {
  if (zstar.empty()) throw ConfigError("is_generic: frequency set is empty");
  const double width = std::pow(lambda, delta);
  const std::vector<IVec> zero_annulus =
      annulus_points({IVec{0, 0, 0}, lambda, width}, d);
  const double w_plus =
      std::nextafter(width, std::numeric_limits<double>::infinity());
  for (const IVec& zeta : zstar) {
    for (const IVec& xi : zero_annulus) {
      const double dist =
          std::abs(static_cast<double>(shifted_norm_sq(xi, zeta, d)) - lambda);
      if (dist <= w_plus) return false;
    }
  }
  return true;
}

double lattice_lambda(const SpectralGeometry& geom, double physical_lambda) {
  return physical_lambda / geom.eigenvalue_unit();
}

bool is_generic_gap(const SpectralGeometry& geom,
                    const std::vector<EigenvalueClass>& classes, int gap_index,
                    double delta, std::span<const IVec> zstar) {
  if (gap_index < 0 || gap_index + 1 >= static_cast<int>(classes.size())) {
    throw ConfigError("is_generic_gap: gap index out of range");
  }
  const double mid = 0.5 * (classes[gap_index].eigenvalue +
                            classes[gap_index + 1].eigenvalue);
  return is_generic_lambda(lattice_lambda(geom, mid), delta, zstar, geom.dim());
}

double chebyshev_rhs(double lambda, const IVec& zeta, double delta,
                     int n_scatterers, int d) {
  const double width = std::pow(lambda, delta);
  const std::vector<IVec> annulus =
      annulus_points({IVec{0, 0, 0}, lambda, width}, d);
  if (annulus.empty()) {
    throw NumericError("chebyshev_rhs: empty annulus, ratio undefined");
  }
  double numer = 0.0;
  double denom = 0.0;
  const IVec origin{0, 0, 0};
  for (const IVec& xi : annulus) {
    const double shifted =
        static_cast<double>(shifted_norm_sq(xi, zeta, d)) - lambda;
    const double centered =
        static_cast<double>(shifted_norm_sq(xi, origin, d)) - lambda;
    if (shifted == 0.0 || centered == 0.0) {
      throw PoleError("chebyshev_rhs: exactly vanishing denominator term");
    }
    numer += 1.0 / (shifted * shifted);
    denom += 1.0 / (centered * centered);
  }
  return n_scatterers * numer / denom;
}

}  // namespace scatter::arith
