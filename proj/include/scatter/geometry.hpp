#ifndef SCATTER_GEOMETRY_HPP
#define SCATTER_GEOMETRY_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "scatter/common.hpp"

namespace scatter {

enum class DomainKind { FlatTorus, DirichletBox };

// A Laplacian eigenmode. For the torus the index is any integer vector and
// the eigenvalue is |2 pi xi / L|^2; for the Dirichlet box the index has
// positive entries and the eigenvalue is sum_i (pi n_i / (2 L))^2. `shell`
// is the exact integer invariant |xi|^2 (resp. sum n_i^2) that labels the
// multiplicity class; eigenvalue comparisons always go through it.
struct Mode {
  IVec index;
  std::int64_t shell;
  double eigenvalue;
};

// One multiplicity class: a distinct eigenvalue with its mode count.
struct EigenvalueClass {
  double eigenvalue;
  std::int64_t shell;
  int multiplicity;
};

// Background domain: flat torus T^d_L = R^d / L Z^d or Dirichlet box
// B_L = [-L, L]^d, d in {2, 3}. Immutable; all members are pure.
class SpectralGeometry {
 public:
  // Defaults to the square torus R^2 / 2 pi Z^2.
  SpectralGeometry() : SpectralGeometry(DomainKind::FlatTorus, 2, kTwoPi) {}

  static SpectralGeometry torus(int dim, double period);
  static SpectralGeometry box(int dim, double half_side);

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double size() const { return size_; }
  double volume() const;

  // Eigenvalue of the integer shell s: s * eigenvalue_unit().
  double eigenvalue_unit() const;
  double shell_eigenvalue(std::int64_t shell) const {
    return static_cast<double>(shell) * eigenvalue_unit();
  }

  std::int64_t shell_of(const IVec& index) const;
  double mode_eigenvalue(const IVec& index) const {
    return shell_eigenvalue(shell_of(index));
  }

  // Orthonormal mode function value at x. Torus modes are complex
  // exponentials L^{-d/2} exp(i<k,x>); box modes are real sine products.
  // Torus points are reduced modulo L; box points outside [-L, L]^d throw.
  std::complex<double> mode_value(const IVec& index, const Point& x) const;

  // Real part machinery used by the kernel sums: the product
  // phi(x) * conj(phi(y)) is real after summing a full shell; this returns
  // the per-mode real contribution (torus: L^{-d} cos(<k, x - y>)).
  double mode_pair_product(const IVec& index, const Point& x,
                           const Point& y) const;

  bool contains(const Point& x) const;
  Point reduce(const Point& x) const;  // torus: canonical rep in [0, L)^d
  double distance(const Point& x, const Point& y) const;  // torus metric / euclidean

  bool operator==(const SpectralGeometry& other) const = default;

 private:
  SpectralGeometry(DomainKind kind, int dim, double size);

  DomainKind kind_;
  int dim_;
  double size_;
};

// All modes with eigenvalue <= cutoff, sorted by eigenvalue then
// lexicographically by index. Throws ResourceError when the projected count
// exceeds the budget.
std::vector<Mode> enumerate_modes(const SpectralGeometry& geom, double cutoff,
                                  std::int64_t budget = kDefaultModeBudget);

// Modes grouped into multiplicity classes by the exact integer shell.
std::vector<EigenvalueClass> distinct_eigenvalues(
    const SpectralGeometry& geom, double cutoff,
    std::int64_t budget = kDefaultModeBudget);

// Modes of a single shell, lexicographically ordered (empty when the shell
// is not represented).
std::vector<IVec> shell_modes(const SpectralGeometry& geom, std::int64_t shell);

// Distinct eigenvalue classes extended (by doubling the cutoff) until at
// least `count` entries exist.
std::vector<EigenvalueClass> distinct_eigenvalues_at_least(
    const SpectralGeometry& geom, std::size_t count);

}  // namespace scatter

#endif
