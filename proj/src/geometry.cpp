#include "scatter/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace scatter {

std::string to_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

SpectralGeometry::SpectralGeometry(DomainKind kind, int dim, double size)
    : kind_(kind), dim_(dim), size_(size) {
  if (dim != 2 && dim != 3) throw ConfigError("geometry: dimension must be 2 or 3");
  if (!(size > 0.0)) throw ConfigError("geometry: size must be positive");
}

SpectralGeometry SpectralGeometry::torus(int dim, double period) {
  return SpectralGeometry(DomainKind::FlatTorus, dim, period);
}

SpectralGeometry SpectralGeometry::box(int dim, double half_side) {
  return SpectralGeometry(DomainKind::DirichletBox, dim, half_side);
}

double SpectralGeometry::volume() const {
  const double side = kind_ == DomainKind::FlatTorus ? size_ : 2.0 * size_;
  return dim_ == 2 ? side * side : side * side * side;
}

double SpectralGeometry::eigenvalue_unit() const {
  if (kind_ == DomainKind::FlatTorus) {
    const double k = kTwoPi / size_;
    return k * k;
  }
  const double k = kPi / (2.0 * size_);
  return k * k;
}

std::int64_t SpectralGeometry::shell_of(const IVec& index) const {
  std::int64_t s = 0;
  for (int i = 0; i < dim_; ++i) {
    s += static_cast<std::int64_t>(index[i]) * index[i];
  }
  return s;
}

std::complex<double> SpectralGeometry::mode_value(const IVec& index,
                                                  const Point& x) const {
  const double norm = std::pow(size_, -0.5 * dim_);
  if (kind_ == DomainKind::FlatTorus) {
    double phase = 0.0;
    for (int i = 0; i < dim_; ++i) phase += index[i] * x[i];
    phase *= kTwoPi / size_;
    return std::polar(norm, phase);
  }
  if (!contains(x)) throw DomainError("mode_value: point outside Dirichlet box");
  double value = norm;
  for (int i = 0; i < dim_; ++i) {
    value *= std::sin(kPi * index[i] * (x[i] + size_) / (2.0 * size_));
  }
  return {value, 0.0};
}

double SpectralGeometry::mode_pair_product(const IVec& index, const Point& x,
                                           const Point& y) const {
  const double norm = std::pow(size_, -static_cast<double>(dim_));
  if (kind_ == DomainKind::FlatTorus) {
    double phase = 0.0;
    for (int i = 0; i < dim_; ++i) phase += index[i] * (x[i] - y[i]);
    phase *= kTwoPi / size_;
    return norm * std::cos(phase);
  }
  double value = norm;
  for (int i = 0; i < dim_; ++i) {
    const double scale = kPi * index[i] / (2.0 * size_);
    value *= std::sin(scale * (x[i] + size_)) * std::sin(scale * (y[i] + size_));
  }
  return value;
}

bool SpectralGeometry::contains(const Point& x) const {
  if (kind_ == DomainKind::FlatTorus) return true;  // reduced modulo L
  for (int i = 0; i < dim_; ++i) {
    if (x[i] < -size_ || x[i] > size_) return false;
  }
  return true;
}

Point SpectralGeometry::reduce(const Point& x) const {
  Point out = x;
  if (kind_ == DomainKind::FlatTorus) {
    for (int i = 0; i < dim_; ++i) {
      double r = std::fmod(x[i], size_);
      if (r < 0.0) r += size_;
      out[i] = r;
    }
  }
  return out;
}

double SpectralGeometry::distance(const Point& x, const Point& y) const {
  double sq = 0.0;
  for (int i = 0; i < dim_; ++i) {
    double d = x[i] - y[i];
    if (kind_ == DomainKind::FlatTorus) {
      d = std::fmod(std::abs(d), size_);
      d = std::min(d, size_ - d);
    }
    sq += d * d;
  }
  return std::sqrt(sq);
}

namespace {

// Projected mode count for the budget check, with generous slack.
std::int64_t projected_count(const SpectralGeometry& geom, double cutoff) {
  const double radius = std::sqrt(std::max(cutoff, 0.0) / geom.eigenvalue_unit());
  const double per_dim = geom.kind() == DomainKind::FlatTorus
                             ? 2.0 * radius + 1.0
                             : radius + 1.0;
  double est = 1.0;
  for (int i = 0; i < geom.dim(); ++i) est *= per_dim;
  if (est > 9.0e18) return INT64_MAX;
  return static_cast<std::int64_t>(est);
}

}  // namespace

std::vector<Mode> enumerate_modes(const SpectralGeometry& geom, double cutoff,
                                  std::int64_t budget) {
  if (!(cutoff >= 0.0)) throw ConfigError("enumerate_modes: cutoff must be >= 0");
  const std::int64_t projected = projected_count(geom, cutoff);
  if (projected > budget) {
    std::ostringstream msg;
    msg << "enumerate_modes: projected mode count " << projected
        << " exceeds budget " << budget;
    throw ResourceError(msg.str());
  }

  const double unit = geom.eigenvalue_unit();
  const bool torus = geom.kind() == DomainKind::FlatTorus;
  const int r = static_cast<int>(std::floor(std::sqrt(cutoff / unit)));
  const int lo = torus ? -r : 1;
  const int hi = r;

  std::vector<Mode> modes;
  if (hi < lo && !torus) return modes;

  auto emit = [&](int a, int b, int c) {
    IVec idx{a, b, c};
    const std::int64_t s = geom.shell_of(idx);
    const double e = geom.shell_eigenvalue(s);
    if (e <= cutoff) modes.push_back({idx, s, e});
  };

  if (geom.dim() == 2) {
    for (int a = lo; a <= hi; ++a)
      for (int b = lo; b <= hi; ++b) emit(a, b, 0);
  } else {
    for (int a = lo; a <= hi; ++a)
      for (int b = lo; b <= hi; ++b)
        for (int c = lo; c <= hi; ++c) emit(a, b, c);
  }

  std::sort(modes.begin(), modes.end(), [](const Mode& p, const Mode& q) {
    if (p.shell != q.shell) return p.shell < q.shell;
    return p.index < q.index;
  });
  return modes;
}

std::vector<EigenvalueClass> distinct_eigenvalues(const SpectralGeometry& geom,
                                                  double cutoff,
                                                  std::int64_t budget) {
  const std::vector<Mode> modes = enumerate_modes(geom, cutoff, budget);
  std::vector<EigenvalueClass> classes;
  for (const Mode& m : modes) {
    if (classes.empty() || classes.back().shell != m.shell) {
      classes.push_back({m.eigenvalue, m.shell, 1});
    } else {
      ++classes.back().multiplicity;
    }
  }
  return classes;
}

std::vector<EigenvalueClass> distinct_eigenvalues_at_least(
    const SpectralGeometry& geom, std::size_t count) {
  double cutoff = 16.0 * geom.eigenvalue_unit();
  for (int i = 0; i < 48; ++i) {
    auto classes = distinct_eigenvalues(geom, cutoff);
    if (classes.size() >= count) return classes;
    cutoff *= 2.0;
  }
  throw ResourceError(
      "distinct_eigenvalues_at_least: index beyond enumeration budget");
}

std::vector<IVec> shell_modes(const SpectralGeometry& geom, std::int64_t shell) {
  std::vector<IVec> out;
  if (shell < 0) return out;
  const int r = static_cast<int>(std::floor(std::sqrt(static_cast<double>(shell)))) + 1;
  const bool torus = geom.kind() == DomainKind::FlatTorus;
  const int lo = torus ? -r : 1;

  if (geom.dim() == 2) {
    for (int a = lo; a <= r; ++a)
      for (int b = lo; b <= r; ++b) {
        IVec idx{a, b, 0};
        if (geom.shell_of(idx) == shell) out.push_back(idx);
      }
  } else {
    for (int a = lo; a <= r; ++a)
      for (int b = lo; b <= r; ++b)
        for (int c = lo; c <= r; ++c) {
          IVec idx{a, b, c};
          if (geom.shell_of(idx) == shell) out.push_back(idx);
        }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace scatter
