#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "scatter/greens.hpp"

using namespace scatter;

namespace {

const SpectralGeometry kTorus2 = SpectralGeometry::torus(2, kTwoPi);

GreensEvaluator small_evaluator() {
  const double cutoff = GreensEvaluator::recommended_cutoff(kTorus2, 2.0, 1e-6);
  return GreensEvaluator(kTorus2, cutoff, 1e-6);
}

}  // namespace

TEST_CASE("offdiagonal kernel is exactly symmetric in x and y") {
  const GreensEvaluator ev = small_evaluator();
  const Point x{0.3, 5.9, 0.0}, y{2.2, 1.1, 0.0};
  const auto a = ev.regularized_offdiag(0.7, x, y);
  const auto b = ev.regularized_offdiag(0.7, y, x);
  CHECK(a.value == b.value);
}

TEST_CASE("double-cutoff agreement stays within the summed tails") {
  const double cutoff = GreensEvaluator::recommended_cutoff(kTorus2, 2.0, 1e-6);
  const GreensEvaluator ev(kTorus2, cutoff, 1e-6);
  const GreensEvaluator ev4(kTorus2, 4.0 * cutoff, 1e-6);
  const Point x{0.0, 0.0, 0.0}, y{kPi, kPi, 0.0};
  for (double lambda : {0.5, 0.9, 1.7}) {
    const auto d1 = ev.regularized_diag(lambda, x);
    const auto d2 = ev4.regularized_diag(lambda, x);
    CHECK(std::abs(d1.value - d2.value) <= d1.tail + d2.tail);
    const auto o1 = ev.regularized_offdiag(lambda, x, y);
    const auto o2 = ev4.regularized_offdiag(lambda, x, y);
    CHECK(std::abs(o1.value - o2.value) <= o1.tail + o2.tail);
  }
}

TEST_CASE("halving the tolerance moves values by less than the summed tails") {
  for (const auto& geom :
       {SpectralGeometry::torus(2, kTwoPi), SpectralGeometry::torus(3, kTwoPi),
        SpectralGeometry::box(2, 2.0)}) {
    const double lambda =
        geom.kind() == DomainKind::FlatTorus && geom.dim() == 3 ? 2.5 : 3.3;
    const double tau = geom.dim() == 3 ? 1e-4 : 1e-5;
    const GreensEvaluator coarse(
        geom, GreensEvaluator::recommended_cutoff(geom, lambda, tau), tau);
    const GreensEvaluator fine(
        geom, GreensEvaluator::recommended_cutoff(geom, lambda, tau / 2.0),
        tau / 2.0);
    const Point x{0.21, -0.37, 0.11};
    const Point y{geom.size() * 0.31, geom.size() * 0.17, -0.23};
    const auto c_off = coarse.regularized_offdiag(lambda, x, y);
    const auto f_off = fine.regularized_offdiag(lambda, x, y);
    CHECK(std::abs(c_off.value - f_off.value) <= c_off.tail + f_off.tail);
    const auto c_diag = coarse.regularized_diag(lambda, x);
    const auto f_diag = fine.regularized_diag(lambda, x);
    CHECK(std::abs(c_diag.value - f_diag.value) <= c_diag.tail + f_diag.tail);
  }
}

TEST_CASE("resolvent identity across a gap, against the serial reference") {
  const double cutoff = 6e4;
  const GreensEvaluator ev(kTorus2, cutoff, 1e-6);
  const Point x{0.0, 0.0, 0.0}, y{2.5, 1.3, 0.0};
  const double pairs[][2] = {{150.3, 150.9}, {232.2, 232.8}, {97.1, 97.9}};
  for (const auto& p : pairs) {
    const auto a = ev.regularized_offdiag(p[0], x, y);
    const auto b = ev.regularized_offdiag(p[1], x, y);
    const double rhs =
        (p[0] - p[1]) * ref::resolvent_pair(kTorus2, p[0], p[1], x, y, cutoff);
    CHECK(std::abs(a.value - b.value - rhs) <= 2.0 * (a.tail + b.tail));
  }
}

TEST_CASE("diagonal values are translation invariant on the torus") {
  const GreensEvaluator ev = small_evaluator();
  const auto a = ev.regularized_diag(0.5, {0.0, 0.0, 0.0});
  const auto b = ev.regularized_diag(0.5, {1.0, 1.0, 0.0});
  CHECK(std::abs(a.value - b.value) < 1e-12);
}

TEST_CASE("diagonal kernel increases with lambda inside a gap") {
  const GreensEvaluator ev = small_evaluator();
  const auto a = ev.regularized_diag(0.5, {0.0, 0.0, 0.0});
  const auto b = ev.regularized_diag(0.9, {0.0, 0.0, 0.0});
  CHECK(a.value < b.value);
}

TEST_CASE("diagonal matches the serial reference plus the smooth correction") {
  // The evaluator adds the local-Weyl tail correction on the diagonal; at
  // lambda well below the cutoff the correction approaches lambda/(4 pi M).
  const double cutoff = 1750.0;
  const GreensEvaluator ev(kTorus2, cutoff, 1e-4);
  const double lambda = 0.5;
  const double raw = ref::resolvent_minus_reference(
      kTorus2, lambda, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}, cutoff);
  const auto v = ev.regularized_diag(lambda, {0.0, 0.0, 0.0});
  const double correction = v.value - raw;
  CHECK(correction ==
        doctest::Approx(lambda / (4.0 * kPi * cutoff)).epsilon(0.05));
}

TEST_CASE("offdiagonal equals the serial reference at the same cutoff") {
  const double cutoff = 2000.0;
  const GreensEvaluator ev(kTorus2, cutoff, 1e-4);
  const Point x{0.4, 1.7, 0.0}, y{3.3, 0.2, 0.0};
  const auto v = ev.regularized_offdiag(0.8, x, y);
  const double raw = ref::resolvent_minus_reference(kTorus2, 0.8, x, y, cutoff);
  CHECK(v.value == doctest::Approx(raw).epsilon(1e-12));
}

TEST_CASE("reference imaginary part: positivity and brute-force diagonal") {
  const GreensEvaluator ev = small_evaluator();
  const auto diag = ev.im_G_ref({1.0, 2.0, 0.0}, {1.0, 2.0, 0.0});
  CHECK(diag.value > 0.0);
  double brute = 0.0;
  for (std::int64_t s = 0; s <= 4000; ++s) {
    const int r = oracle::r2(s);
    if (r > 0) brute += r / (static_cast<double>(s) * s + 1.0);
  }
  brute += kPi / 4000.0;  // integral tail of the direct sum
  brute /= 4.0 * kPi * kPi;
  CHECK(diag.value == doctest::Approx(brute).epsilon(1e-6));
  const Point x{0.3, 0.9, 0.0}, y{4.4, 2.2, 0.0};
  CHECK(ev.im_G_ref(x, y).value == ev.im_G_ref(y, x).value);
}

TEST_CASE("derivative matrix is positive semidefinite and positive for N=1") {
  const GreensEvaluator ev = small_evaluator();
  const std::vector<Point> single{{0.7, 4.1, 0.0}};
  double tail = 0.0;
  const Eigen::MatrixXd one = ev.derivative_matrix(0.5, single, &tail);
  CHECK(one(0, 0) > 0.0);

  const std::vector<Point> pts{{0.1, 0.2, 0.0},
                               {2.0, 1.0, 0.0},
                               {4.0, 5.0, 0.0},
                               {1.3, 3.7, 0.0}};
  const Eigen::MatrixXd m = ev.derivative_matrix(0.9, pts);
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  CHECK(solver.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("finite differences reproduce the derivative matrix") {
  const GreensEvaluator ev(kTorus2, 60000.0, 1e-6);
  const std::vector<Point> pts{{0.1, 0.2, 0.0}, {2.0, 1.0, 0.0}};
  const double lambda = 150.5;
  const double h = 1e-4;
  const Eigen::MatrixXd deriv = ev.derivative_matrix(lambda, pts);
  for (int k = 0; k < 2; ++k) {
    for (int l = k; l < 2; ++l) {
      const PairCoefficients pc = k == l
                                      ? ev.diagonal_coefficients(pts[k])
                                      : ev.pair_coefficients(pts[k], pts[l]);
      const double up = ev.resolvent_kernel(pc, lambda + h).value;
      const double dn = ev.resolvent_kernel(pc, lambda - h).value;
      CHECK((up - dn) / (2.0 * h) ==
            doctest::Approx(deriv(k, l)).epsilon(1e-5));
    }
  }
}

TEST_CASE("pole requests are rejected by the exact integer test") {
  const GreensEvaluator ev = small_evaluator();
  CHECK_THROWS_AS(ev.regularized_diag(1.0, {0.0, 0.0, 0.0}), PoleError);
  // 3 is not a sum of two squares: no pole there
  CHECK_NOTHROW(ev.regularized_diag(1.5, {0.0, 0.0, 0.0}));
}

TEST_CASE("coincident points are rejected for offdiagonal entries") {
  const GreensEvaluator ev = small_evaluator();
  const Point x{1.0, 1.0, 0.0};
  CHECK_THROWS_AS(ev.regularized_offdiag(0.5, x, x), DomainError);
  const Point nearby{1.0 + 1e-12, 1.0, 0.0};
  CHECK_THROWS_AS(ev.regularized_offdiag(0.5, x, nearby), DomainError);
}

TEST_CASE("unconverged requests raise a convergence error carrying the tail") {
  const GreensEvaluator ev(kTorus2, 500.0, 1e-12);
  try {
    ev.regularized_diag(0.5, {0.0, 0.0, 0.0});
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.tail > 1e-12);
  }
}

TEST_CASE("d=3 shell sums certify their tails across cutoffs") {
  const auto g3 = SpectralGeometry::torus(3, kTwoPi);
  const double cutoff = GreensEvaluator::recommended_cutoff(g3, 3.0, 1e-4);
  const GreensEvaluator ev(g3, cutoff, 1e-4);
  const GreensEvaluator ev2(g3, 2.0 * cutoff, 1e-4);
  const Point x{0.0, 0.0, 0.0}, y{1.1, 2.7, 3.9};
  const auto a = ev.regularized_offdiag(2.5, x, y);
  const auto b = ev2.regularized_offdiag(2.5, x, y);
  CHECK(std::abs(a.value - b.value) <= a.tail + b.tail);
  const auto da = ev.regularized_diag(2.5, x);
  const auto db = ev2.regularized_diag(2.5, x);
  CHECK(std::abs(da.value - db.value) <= da.tail + db.tail);
}
