#include <doctest.h>

#include <cmath>
#include <map>

#include "scatter/ensemble.hpp"
#include "scatter/quadrature.hpp"
#include "scatter/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace scatter;

namespace {

const SpectralGeometry kTorus2 = SpectralGeometry::torus(2, kTwoPi);
const SpectralGeometry kBox2 = SpectralGeometry::box(2, 2.0);

}  // namespace

TEST_CASE("position sampling is a pure function of seed and index") {
  const UniformTorusProcess proc{kTorus2, 5, 0.3};
  const ScattererSet a = sample_positions(proc, 42, 7);
  const ScattererSet b = sample_positions(proc, 42, 7);
  REQUIRE(a.positions.size() == b.positions.size());
  for (std::size_t i = 0; i < a.positions.size(); ++i) {
    CHECK(a.positions[i] == b.positions[i]);  // bitwise
  }
  const ScattererSet c = sample_positions(proc, 42, 8);
  CHECK(c.positions[0] != a.positions[0]);
  for (const Point& p : a.positions) {
    CHECK(p[0] >= 0.0);
    CHECK(p[0] < kTwoPi);
    CHECK(p[1] >= 0.0);
    CHECK(p[1] < kTwoPi);
  }
}

TEST_CASE("displaced lattice: site count, support, boundary drops") {
  const DisplacedLatticeProcess proc{kBox2, RadialProfile(2, 0.25), 0.0};
  const ScattererSet raw = sample_positions(proc, 3, 11);
  REQUIRE(raw.count() == 25);  // xi in {-2..2}^2
  int site = 0;
  for (int a = -2; a <= 2; ++a) {
    for (int b = -2; b <= 2; ++b, ++site) {
      const double dx = raw.positions[site][0] - a;
      const double dy = raw.positions[site][1] - b;
      CHECK(std::sqrt(dx * dx + dy * dy) < 0.25);
    }
  }
  const auto [active, dropped] = active_scatterers(raw);
  CHECK(active.count() + dropped == 25);
  for (const Point& p : active.positions) {
    CHECK(std::abs(p[0]) < 2.0);
    CHECK(std::abs(p[1]) < 2.0);
  }
}

TEST_CASE("displacement profiles reject supports above one quarter") {
  CHECK_THROWS_AS(RadialProfile(2, 0.3), ConfigError);
  CHECK_NOTHROW(RadialProfile(2, 0.25));
  CHECK_NOTHROW(RadialProfile(3, 0.2));
}

TEST_CASE("empirical mean displacement matches the profile quadrature") {
  const RadialProfile profile(2, 0.25);
  const double expected = profile.mean_displacement();
  // sanity on the analytic value itself: E|X| < support radius
  CHECK(expected > 0.0);
  CHECK(expected < 0.25);

  const DisplacedLatticeProcess proc{kBox2, profile, 0.0};
  const int samples = 400;  // 400 x 25 displacement draws
  double sum = 0.0, sum_sq = 0.0;
  std::int64_t n = 0;
  for (int s = 0; s < samples; ++s) {
    const ScattererSet set = sample_positions(proc, 99, s);
    int site = 0;
    for (int a = -2; a <= 2; ++a) {
      for (int b = -2; b <= 2; ++b, ++site) {
        const double dx = set.positions[site][0] - a;
        const double dy = set.positions[site][1] - b;
        const double r = std::sqrt(dx * dx + dy * dy);
        sum += r;
        sum_sq += r * r;
        ++n;
      }
    }
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  const double se = std::sqrt(var / n);
  CHECK(std::abs(mean - expected) <= 3.0 * se);
}

TEST_CASE("spectrum runs: interlacing and per-gap counts") {
  SpectrumConfig cfg;
  cfg.process = UniformTorusProcess{kTorus2, 3, 0.2};
  cfg.first_gap = 0;
  cfg.gap_count = 8;
  cfg.samples = 4;
  cfg.seed = 5;
  const auto records = run_spectrum(cfg);
  REQUIRE(!records.empty());
  std::map<std::pair<std::uint64_t, int>, int> per_gap;
  for (const auto& r : records) {
    CHECK(r.lambda_root > r.lambda_low);
    CHECK(r.lambda_root < r.lambda_high);
    ++per_gap[{r.sample, r.gap_index}];
  }
  for (const auto& [key, count] : per_gap) CHECK(count <= 3);
}

TEST_CASE("records never depend on other sample indices") {
  SpectrumConfig small;
  small.process = UniformTorusProcess{kTorus2, 2, 0.0};
  small.first_gap = 0;
  small.gap_count = 3;
  small.samples = 2;
  small.seed = 17;
  SpectrumConfig large = small;
  large.samples = 4;
  const auto a = run_spectrum(small);
  const auto b = run_spectrum(large);
  REQUIRE(b.size() >= a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].sample == b[i].sample);
    CHECK(a[i].gap_index == b[i].gap_index);
    CHECK(a[i].lambda_root == b[i].lambda_root);  // bitwise
  }
}

TEST_CASE("worker count does not change emitted records") {
#ifdef _OPENMP
  SpectrumConfig cfg;
  cfg.process = UniformTorusProcess{kTorus2, 2, 0.1};
  cfg.first_gap = 0;
  cfg.gap_count = 4;
  cfg.samples = 4;
  cfg.seed = 23;
  omp_set_num_threads(1);
  const auto serial = run_spectrum(cfg);
  omp_set_num_threads(2);
  const auto parallel = run_spectrum(cfg);
  omp_set_num_threads(0 != 0 ? 1 : omp_get_max_threads());
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].lambda_root == parallel[i].lambda_root);  // bitwise
    CHECK(serial[i].residual == parallel[i].residual);
  }
#endif
}

TEST_CASE("equidistribution run: single-sample smoke and summary shape") {
  EquidistConfig cfg;
  cfg.process = UniformTorusProcess{kTorus2, 2, 0.0};
  cfg.window_lo = 30.0;
  cfg.window_hi = 45.0;
  cfg.observable = Observable::real_trig({{IVec{1, 0, 0}, 0.5}});
  cfg.frequencies = {IVec{1, 0, 0}};
  cfg.samples = 3;
  cfg.gaps_per_sample = 1;
  cfg.seed = 2;
  cfg.tail_tolerance = 1e-6;
  const auto result = run_equidistribution(cfg);
  REQUIRE(!result.records.empty());
  for (const auto& rec : result.records) {
    if (rec.degenerate || rec.boundary) continue;
    CHECK(rec.lambda_root > cfg.window_lo * 0.9);
    CHECK(std::abs(rec.deviation) <= rec.dominated_bound + 1e-12);
    CHECK(rec.roots_in_gap <= 2);
  }
  CHECK(result.summary.usable > 0);
  CHECK(result.summary.bound_fraction >= 0.0);
  CHECK(result.summary.bound_fraction <= 1.0);
  const double delta2 = 17.0 / 416.0;
  CHECK(result.summary.comparison ==
        doctest::Approx(std::sqrt(2.0) * std::pow(37.5, -delta2) *
                        std::pow(kTwoPi, -2.0 * delta2)));
}

TEST_CASE("equidistribution rejects windows without generic gaps") {
  EquidistConfig cfg;
  cfg.process = UniformTorusProcess{kTorus2, 1, 0.0};
  cfg.window_lo = 1.05;
  cfg.window_hi = 1.1;  // no gap midpoint in this sliver
  cfg.observable = Observable::constant(0.0);
  cfg.frequencies = {IVec{1, 0, 0}};
  cfg.samples = 1;
  CHECK_THROWS_AS(run_equidistribution(cfg), ConfigError);
}

TEST_CASE("theta run: estimates, exclusions, and localization verdicts") {
  ThetaConfig cfg{DisplacedLatticeProcess{SpectralGeometry::box(2, 1.2),
                                          RadialProfile(2, 0.25), 0.0}};
  cfg.gap_lambda = 25.0;
  cfg.pairs = {{Point{-0.8, -0.8, 0.0}, Point{0.8, 0.8, 0.0}},
               {Point{-0.5, 0.5, 0.0}, Point{0.5, -0.5, 0.0}}};
  cfg.samples = 6;
  cfg.seed = 9;
  cfg.tail_tolerance = 1e-4;
  cfg.field_rel_tail = 1e-2;
  cfg.quadrature_tol = 1e-3;
  const auto result = run_theta(cfg);
  REQUIRE(result.records.size() == 6);
  for (const auto& rec : result.records) {
    if (rec.degenerate) continue;
    for (double t : rec.theta_sum) CHECK(t >= 0.0);
  }
  REQUIRE(result.summary.pairs.size() == 2);
  // summary mean equals the serial fold over non-degenerate records
  double manual = 0.0;
  int used = 0;
  for (const auto& rec : result.records) {
    if (!rec.degenerate) {
      manual += rec.theta_sum[0];
      ++used;
    }
  }
  REQUIRE(used > 0);
  CHECK(result.summary.pairs[0].mean == doctest::Approx(manual / used));

  // trivially huge template holds everywhere; rising template is rejected
  DecreasingTemplate huge{DecreasingTemplate::Kind::Exponential, 1e9, 1e-3};
  const auto report = f_localization_test(result.summary, huge);
  CHECK(!report.violated);
  for (const auto& v : report.pairs) CHECK(v.holds);
  DecreasingTemplate bad{DecreasingTemplate::Kind::Exponential, 1.0, -2.0};
  CHECK_THROWS_AS(f_localization_test(result.summary, bad), ConfigError);
}

TEST_CASE("standard errors shrink like the square root of the sample count") {
  ThetaConfig base{DisplacedLatticeProcess{SpectralGeometry::box(2, 1.2),
                                           RadialProfile(2, 0.25), 0.0}};
  base.gap_lambda = 18.0;
  base.pairs = {{Point{-0.7, -0.7, 0.0}, Point{0.7, 0.7, 0.0}}};
  base.seed = 31;
  base.tail_tolerance = 1e-4;
  base.field_rel_tail = 1e-2;
  base.quadrature_tol = 1e-3;

  double se50 = 0.0, se200 = 0.0, se800 = 0.0;
  for (int m : {50, 200, 800}) {
    ThetaConfig cfg = base;
    cfg.samples = m;
    const auto result = run_theta(cfg);
    const double se = result.summary.pairs[0].std_error;
    if (m == 50) se50 = se;
    if (m == 200) se200 = se;
    if (m == 800) se800 = se;
  }
  // each doubling of 4x in M should halve SE within a factor 2
  CHECK(se50 / se200 > 1.0);
  CHECK(se50 / se200 < 4.0);
  CHECK(se200 / se800 > 1.0);
  CHECK(se200 / se800 < 4.0);
  CHECK(se50 / se800 > 2.0);
  CHECK(se50 / se800 < 8.0);
}

TEST_CASE("localization scan emits per-window diagnostics") {
  LocScanConfig cfg;
  cfg.process = UniformTorusProcess{kTorus2, 4, 0.0};
  cfg.windows = {{5.0, 20.0}, {40.0, 60.0}};
  cfg.samples = 3;
  cfg.seed = 13;
  cfg.grid_resolution = 64;
  cfg.tail_tolerance = 1e-5;
  cfg.field_rel_tail = 1e-3;
  const auto result = run_localization_scan(cfg);
  REQUIRE(result.rows.size() == 2);
  for (const auto& row : result.rows) {
    CHECK(row.roots_used > 0);
    CHECK(row.median_ipr > 0.0);
    CHECK(row.fraction_delocalized >= 0.0);
    CHECK(row.fraction_delocalized <= 1.0);
  }
  const double alpha2 = 17.0 / 1282.0;
  CHECK(result.rows[0].floor_alpha ==
        doctest::Approx(std::pow(12.5, alpha2)));
}

TEST_CASE("counter rng streams are stable and well distributed") {
  CounterRng a(1, 2, 3);
  CounterRng b(1, 2, 3);
  for (int i = 0; i < 16; ++i) CHECK(a.next_u64() == b.next_u64());
  CounterRng c(1, 2, 4);
  CHECK(a.next_u64() != c.next_u64());
  CounterRng u(7, 0, 1);
  double mean = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) mean += u.uniform();
  mean /= n;
  CHECK(std::abs(mean - 0.5) < 0.02);
}
