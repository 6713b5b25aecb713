#include "scatter/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "scatter/arith.hpp"
#include "scatter/quadrature.hpp"
#include "scatter/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace scatter {

namespace {

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

// ---------------------------------------------------------------------------
// RadialProfile
// ---------------------------------------------------------------------------

RadialProfile::RadialProfile(int dim, double support_radius)
    : dim_(dim), radius_(support_radius) {
  if (dim != 2 && dim != 3) throw ConfigError("RadialProfile: dim must be 2 or 3");
  if (!(support_radius > 0.0) || support_radius > 0.25) {
    throw ConfigError("RadialProfile: support radius must lie in (0, 1/4]");
  }
  auto shape = [this](double r) {
    const double t = r / radius_;
    const double q = 1.0 - t * t;
    return q * q * q * q;
  };
  const double surface = dim_ == 2 ? kTwoPi : 4.0 * kPi;
  const double raw = surface * gauss_integrate(0.0, radius_, [&](double r) {
                       return shape(r) * std::pow(r, dim_ - 1);
                     });
  norm_ = 1.0 / raw;

  // Radial CDF on a uniform grid; the integrand is smooth, the trapezoid at
  // this resolution is far below sampling noise.
  const int n = 4096;
  cdf_.assign(n + 1, 0.0);
  double acc = 0.0;
  double prev = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double r = radius_ * i / n;
    const double f = surface * norm_ * shape(r) * std::pow(r, dim_ - 1);
    acc += 0.5 * (prev + f) * (radius_ / n);
    prev = f;
    cdf_[i] = acc;
  }
  for (double& c : cdf_) c /= cdf_[n];  // exact unit range
}

double RadialProfile::density(double r) const {
  if (r >= radius_) return 0.0;
  const double t = r / radius_;
  const double q = 1.0 - t * t;
  return norm_ * q * q * q * q;
}

double RadialProfile::mean_displacement() const {
  const double surface = dim_ == 2 ? kTwoPi : 4.0 * kPi;
  return surface * gauss_integrate(0.0, radius_, [&](double r) {
           return r * density(r) * std::pow(r, dim_ - 1);
         });
}

double RadialProfile::sample_radius(double u) const {
  const auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return 0.0;
  if (it == cdf_.end()) return radius_;
  const auto i = static_cast<std::size_t>(it - cdf_.begin());
  const double c0 = cdf_[i - 1];
  const double c1 = cdf_[i];
  const double frac = c1 > c0 ? (u - c0) / (c1 - c0) : 0.0;
  return radius_ * (static_cast<double>(i - 1) + frac) /
         (static_cast<double>(cdf_.size()) - 1.0);
}

// ---------------------------------------------------------------------------
// Position sampling
// ---------------------------------------------------------------------------

const SpectralGeometry& process_geometry(const DisorderProcess& process) {
  if (const auto* u = std::get_if<UniformTorusProcess>(&process)) {
    return u->geometry;
  }
  return std::get<DisplacedLatticeProcess>(process).box;
}

double process_phase(const DisorderProcess& process) {
  if (const auto* u = std::get_if<UniformTorusProcess>(&process)) {
    return u->phase_t;
  }
  return std::get<DisplacedLatticeProcess>(process).phase_t;
}

ScattererSet sample_positions(const DisorderProcess& process,
                              std::uint64_t master_seed,
                              std::uint64_t sample_index) {
  CounterRng rng(master_seed, sample_index, stream::kPositions);
  ScattererSet set{process_geometry(process), {}, process_phase(process)};
  if (const auto* u = std::get_if<UniformTorusProcess>(&process)) {
    if (u->geometry.kind() != DomainKind::FlatTorus) {
      throw ConfigError("UniformTorusProcess requires a torus geometry");
    }
    if (u->n_scatterers < 1) throw ConfigError("n_scatterers must be >= 1");
    const int d = u->geometry.dim();
    for (int j = 0; j < u->n_scatterers; ++j) {
      Point p{0.0, 0.0, 0.0};
      for (int i = 0; i < d; ++i) p[i] = rng.uniform(0.0, u->geometry.size());
      set.positions.push_back(p);
    }
    return set;
  }

  const auto& dl = std::get<DisplacedLatticeProcess>(process);
  if (dl.box.kind() != DomainKind::DirichletBox) {
    throw ConfigError("DisplacedLatticeProcess requires a Dirichlet box");
  }
  if (dl.profile.dim() != dl.box.dim()) {
    throw ConfigError("displacement profile dimension mismatch");
  }
  const int d = dl.box.dim();
  const int r = static_cast<int>(std::floor(dl.box.size()));
  const int planes = d == 3 ? 2 * r + 1 : 1;
  for (int a = -r; a <= r; ++a) {
    for (int b = -r; b <= r; ++b) {
      for (int c = 0; c < planes; ++c) {
        // Fixed draw count per site keeps the stream alignment independent
        // of the accept/reject outcome downstream.
        const double radius = dl.profile.sample_radius(rng.uniform());
        Point omega{0.0, 0.0, 0.0};
        if (d == 2) {
          const double angle = rng.uniform(0.0, kTwoPi);
          omega = {radius * std::cos(angle), radius * std::sin(angle), 0.0};
        } else {
          const double cos_theta = rng.uniform(-1.0, 1.0);
          const double phi = rng.uniform(0.0, kTwoPi);
          const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
          omega = {radius * sin_theta * std::cos(phi),
                   radius * sin_theta * std::sin(phi), radius * cos_theta};
        }
        Point site{static_cast<double>(a), static_cast<double>(b),
                   d == 3 ? static_cast<double>(c - r) : 0.0};
        Point p{site[0] + omega[0], site[1] + omega[1],
                d == 3 ? site[2] + omega[2] : 0.0};
        set.positions.push_back(p);
      }
    }
  }
  return set;
}

std::pair<ScattererSet, int> active_scatterers(const ScattererSet& set) {
  if (set.geometry.kind() == DomainKind::FlatTorus) return {set, 0};
  ScattererSet active = set;
  active.positions.clear();
  const double margin = set.geometry.size() * (1.0 - 1e-6);
  int dropped = 0;
  for (const Point& p : set.positions) {
    bool inside = true;
    for (int i = 0; i < set.geometry.dim(); ++i) {
      if (std::abs(p[i]) >= margin) {
        inside = false;
        break;
      }
    }
    if (inside) {
      active.positions.push_back(p);
    } else {
      ++dropped;
    }
  }
  return {active, dropped};
}

// ---------------------------------------------------------------------------
// Spectrum scan
// ---------------------------------------------------------------------------

std::vector<SpectrumRecord> run_spectrum(const SpectrumConfig& config) {
  if (config.first_gap < 0 || config.gap_count < 1 || config.samples < 1) {
    throw ConfigError("run_spectrum: invalid gap range or sample count");
  }
  const SpectralGeometry& geom = config.process.geometry;
  const auto classes = distinct_eigenvalues_at_least(
      geom, static_cast<std::size_t>(config.first_gap + config.gap_count) + 1);
  const double ceiling =
      classes[config.first_gap + config.gap_count].eigenvalue * 1.05 + 1.0;
  const double cutoff = GreensEvaluator::recommended_cutoff(
      geom, ceiling, config.tail_tolerance);
  auto evaluator = std::make_shared<const GreensEvaluator>(
      geom, cutoff, config.tail_tolerance);

  std::vector<std::vector<SpectrumRecord>> slots(config.samples);
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < config.samples; ++s) {
    std::vector<SpectrumRecord> local;
    try {
      const ScattererSet set =
          sample_positions(UniformTorusProcess{config.process}, config.seed,
                           static_cast<std::uint64_t>(s));
      const SecularSystem system(set, evaluator);
      for (int j = config.first_gap; j < config.first_gap + config.gap_count;
           ++j) {
        for (const NewEigenpair& root : system.find_new_eigenvalues(j)) {
          SpectrumRecord rec;
          rec.sample = static_cast<std::uint64_t>(s);
          rec.gap_index = j;
          rec.lambda_low = system.classes()[j].eigenvalue;
          rec.lambda_high = system.classes()[j + 1].eigenvalue;
          rec.lambda_root = root.lambda;
          rec.residual = root.residual;
          rec.degenerate = root.degenerate;
          rec.boundary = root.boundary;
          local.push_back(rec);
        }
      }
    } catch (const ConfigError&) {
      // Coincident-position sample: excluded, leaves no records.
    }
    slots[s] = std::move(local);
  }

  std::vector<SpectrumRecord> records;
  for (auto& slot : slots) {
    records.insert(records.end(), slot.begin(), slot.end());
  }
  return records;
}

// ---------------------------------------------------------------------------
// Equidistribution
// ---------------------------------------------------------------------------

EquidistResult run_equidistribution(const EquidistConfig& config) {
  if (!(config.window_lo > 0.0 && config.window_hi > config.window_lo)) {
    throw ConfigError("run_equidistribution: invalid spectral window");
  }
  if (config.frequencies.empty()) {
    throw ConfigError("run_equidistribution: frequency set Z* is empty");
  }
  const SpectralGeometry& geom = config.process.geometry;
  const double ceiling = config.window_hi * 1.02 + 1.0;
  const auto classes = distinct_eigenvalues(geom, ceiling);

  // Generic gaps whose midpoint lies in the window (geometry-level screen,
  // identical for all samples).
  std::vector<int> candidates;
  std::vector<int> all_in_window;
  for (int j = 0; j + 1 < static_cast<int>(classes.size()); ++j) {
    const double mid =
        0.5 * (classes[j].eigenvalue + classes[j + 1].eigenvalue);
    if (mid < config.window_lo || mid > config.window_hi) continue;
    all_in_window.push_back(j);
    if (arith::is_generic_gap(geom, classes, j, config.delta,
                              config.frequencies)) {
      candidates.push_back(j);
    }
  }
  if (candidates.empty()) {
    std::ostringstream msg;
    msg << "run_equidistribution: no generic gap in window [" << config.window_lo
        << ", " << config.window_hi << "]";
    if (!all_in_window.empty()) {
      msg << " (window holds " << all_in_window.size()
          << " gaps, none generic for the given Z*)";
    }
    throw ConfigError(msg.str());
  }

  const double cutoff = GreensEvaluator::recommended_cutoff(
      geom, ceiling, config.tail_tolerance);
  auto evaluator = std::make_shared<const GreensEvaluator>(
      geom, cutoff, config.tail_tolerance);

  const int n_freq = static_cast<int>(config.frequencies.size());
  std::vector<std::vector<EquidistRecord>> slots(config.samples);
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < config.samples; ++s) {
    std::vector<EquidistRecord> local;
    try {
      const ScattererSet set =
          sample_positions(UniformTorusProcess{config.process}, config.seed,
                           static_cast<std::uint64_t>(s));
      const SecularSystem system(set, evaluator);
      CounterRng gap_rng(config.seed, static_cast<std::uint64_t>(s),
                         stream::kGapChoice);
      const int picks = std::min<int>(config.gaps_per_sample,
                                      static_cast<int>(candidates.size()));
      std::vector<int> chosen;
      while (static_cast<int>(chosen.size()) < picks) {
        const int j = candidates[gap_rng.uniform_index(candidates.size())];
        if (std::find(chosen.begin(), chosen.end(), j) == chosen.end()) {
          chosen.push_back(j);
        }
      }
      std::sort(chosen.begin(), chosen.end());

      for (int j : chosen) {
        const auto roots = system.find_new_eigenvalues(j);
        for (const NewEigenpair& root : roots) {
          EquidistRecord rec;
          rec.sample = static_cast<std::uint64_t>(s);
          rec.gap_index = j;
          rec.lambda_root = root.lambda;
          rec.degenerate = root.degenerate;
          rec.boundary = root.boundary;
          rec.roots_in_gap = static_cast<int>(roots.size());
          if (!root.degenerate && !root.boundary) {
            const Eigenfunction ef(system, root, config.field_rel_tail);
            const auto obs = ef.observable_integral(config.observable);
            rec.deviation = obs.deviation;
            rec.dominated_bound = obs.dominated_bound;
            rec.elements.reserve(n_freq);
            for (const IVec& zeta : config.frequencies) {
              rec.elements.push_back(ef.matrix_element(zeta));
            }
            const double lambda_lat =
                arith::lattice_lambda(geom, root.lambda);
            try {
              rec.cheb_rhs = arith::chebyshev_rhs(lambda_lat,
                                                  config.frequencies.front(),
                                                  config.delta, set.count(),
                                                  geom.dim());
              const double el_sq = std::norm(rec.elements.front());
              rec.ratio = rec.cheb_rhs > 0.0 ? el_sq / rec.cheb_rhs
                                             : std::numeric_limits<double>::infinity();
              rec.bound_holds = el_sq <= 10.0 * rec.cheb_rhs;
            } catch (const NumericError&) {
              rec.cheb_rhs = std::numeric_limits<double>::quiet_NaN();
              rec.ratio = std::numeric_limits<double>::quiet_NaN();
            }
          }
          local.push_back(std::move(rec));
        }
      }
    } catch (const ConfigError&) {
      // Degenerate sample (coincident positions): no records.
    } catch (const NumericError&) {
      // Branch tracking failed for this sample: excluded.
    }
    slots[s] = std::move(local);
  }

  EquidistResult result;
  for (auto& slot : slots) {
    result.records.insert(result.records.end(), slot.begin(), slot.end());
  }

  EquidistSummary& sum = result.summary;
  std::vector<double> abs_dev;
  std::vector<std::vector<double>> abs_el(n_freq);
  int bound_count = 0;
  int cheb_count = 0;
  for (const EquidistRecord& rec : result.records) {
    if (rec.degenerate) {
      ++sum.degenerate;
      continue;
    }
    if (rec.boundary) {
      ++sum.boundary;
      continue;
    }
    ++sum.usable;
    abs_dev.push_back(std::abs(rec.deviation));
    for (int f = 0; f < n_freq; ++f) {
      abs_el[f].push_back(std::abs(rec.elements[f]));
    }
    if (std::isfinite(rec.cheb_rhs)) {
      ++cheb_count;
      if (rec.bound_holds) ++bound_count;
    }
  }
  sum.median_abs_deviation = median_of(abs_dev);
  for (int f = 0; f < n_freq; ++f) {
    sum.median_abs_element.push_back(median_of(abs_el[f]));
  }
  sum.bound_fraction = cheb_count > 0
                           ? static_cast<double>(bound_count) / cheb_count
                           : 0.0;
  const double lambda_mid = 0.5 * (config.window_lo + config.window_hi);
  const double delta_d = arith::ExponentConfig::delta_d(geom.dim());
  sum.comparison = std::sqrt(static_cast<double>(config.process.n_scatterers)) *
                   std::pow(lambda_mid, -delta_d) *
                   std::pow(geom.size(), -2.0 * delta_d);
  const int total = sum.usable + sum.degenerate;
  sum.valid = total == 0 || static_cast<double>(sum.degenerate) / total < 0.01;
  return result;
}

// ---------------------------------------------------------------------------
// Theta runs
// ---------------------------------------------------------------------------

ThetaResult run_theta(const ThetaConfig& config) {
  const SpectralGeometry& geom = config.process.box;
  if (geom.kind() != DomainKind::DirichletBox) {
    throw ConfigError("run_theta: process must live in a Dirichlet box");
  }
  if (config.pairs.empty()) throw ConfigError("run_theta: no point pairs given");

  int gap = config.gap_index;
  std::vector<EigenvalueClass> classes;
  if (gap >= 0) {
    classes = distinct_eigenvalues_at_least(geom, static_cast<std::size_t>(gap) + 2);
  } else {
    double cutoff_guess = std::max(config.gap_lambda * 1.5, 10.0);
    for (int attempt = 0; attempt < 8 && gap < 0; ++attempt) {
      classes = distinct_eigenvalues(geom, cutoff_guess);
      for (int j = 0; j + 1 < static_cast<int>(classes.size()); ++j) {
        if (classes[j].eigenvalue >= config.gap_lambda) {
          gap = j;
          break;
        }
      }
      cutoff_guess *= 2.0;
    }
    if (gap < 0) {
      throw ConfigError("run_theta: gap_lambda beyond the enumerated spectrum");
    }
  }
  const double lambda_top = classes[gap + 1].eigenvalue;
  const double ceiling = lambda_top * 1.05 + 1.0;
  const double cutoff = GreensEvaluator::recommended_cutoff(
      geom, ceiling, config.tail_tolerance);
  auto evaluator = std::make_shared<const GreensEvaluator>(
      geom, cutoff, config.tail_tolerance);
  const Mollifier chi = Mollifier::bump(geom.dim(), config.mollifier_radius);

  const int n_pairs = static_cast<int>(config.pairs.size());
  std::vector<ThetaRecord> records(config.samples);
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < config.samples; ++s) {
    ThetaRecord rec;
    rec.sample = static_cast<std::uint64_t>(s);
    rec.theta_sum.assign(n_pairs, 0.0);
    try {
      const ScattererSet raw = sample_positions(
          DisplacedLatticeProcess{config.process}, config.seed,
          static_cast<std::uint64_t>(s));
      auto [set, dropped] = active_scatterers(raw);
      rec.dropped_scatterers = dropped;
      const SecularSystem system(set, evaluator);
      const auto roots = system.find_new_eigenvalues(gap);
      for (const NewEigenpair& root : roots) {
        if (root.degenerate) {
          rec.degenerate = true;
          break;
        }
        if (root.boundary) continue;
        ++rec.root_count;
        const Eigenfunction ef(system, root, config.field_rel_tail);
        for (int p = 0; p < n_pairs; ++p) {
          rec.theta_sum[p] += ef.two_point_correlation(
              chi, config.pairs[p].first, config.pairs[p].second,
              config.quadrature_tol);
        }
      }
    } catch (const ConfigError&) {
      rec.degenerate = true;
    } catch (const NumericError&) {
      rec.degenerate = true;
    }
    records[s] = std::move(rec);
  }

  ThetaResult result;
  result.records = std::move(records);
  ThetaSummary& sum = result.summary;
  sum.gap_index = gap;
  sum.lambda_low = classes[gap].eigenvalue;
  sum.lambda_high = lambda_top;

  int used = 0;
  double root_total = 0.0;
  for (const ThetaRecord& rec : result.records) {
    if (rec.degenerate) {
      ++sum.excluded;
    } else {
      ++used;
      root_total += rec.root_count;
    }
  }
  sum.mean_root_count = used > 0 ? root_total / used : 0.0;
  sum.valid = static_cast<double>(sum.excluded) / config.samples < 0.01;

  for (int p = 0; p < n_pairs; ++p) {
    ThetaSummary::PairEstimate est;
    est.x = config.pairs[p].first;
    est.y = config.pairs[p].second;
    est.separation = geom.distance(est.x, est.y);
    double mean = 0.0;
    for (const ThetaRecord& rec : result.records) {
      if (!rec.degenerate) mean += rec.theta_sum[p];
    }
    mean = used > 0 ? mean / used : 0.0;
    double var = 0.0;
    for (const ThetaRecord& rec : result.records) {
      if (!rec.degenerate) {
        const double d = rec.theta_sum[p] - mean;
        var += d * d;
      }
    }
    est.mean = mean;
    est.std_error = used > 1 ? std::sqrt(var / (used - 1.0) / used) : 0.0;
    sum.pairs.push_back(est);
  }
  return result;
}

double DecreasingTemplate::operator()(double r) const {
  if (kind == Kind::Exponential) return scale * std::exp(-param * r);
  return scale * std::pow(r, -param);
}

void DecreasingTemplate::validate() const {
  if (!(scale > 0.0) || !(param > 0.0)) {
    throw ConfigError("DecreasingTemplate: scale and rate must be positive "
                      "(the template must strictly decrease)");
  }
}

FLocalizationReport f_localization_test(const ThetaSummary& summary,
                                        const DecreasingTemplate& f) {
  f.validate();
  FLocalizationReport report;
  for (const auto& est : summary.pairs) {
    FLocalizationReport::PairVerdict v;
    v.separation = est.separation;
    v.estimate = est.mean;
    v.std_error = est.std_error;
    v.bound = f(est.separation);
    v.holds = est.mean <= v.bound + 2.0 * est.std_error;
    v.margin = est.mean - 2.0 * est.std_error - v.bound;
    report.violated = report.violated || (!v.holds && v.margin > 0.0);
    report.pairs.push_back(v);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Localization scan
// ---------------------------------------------------------------------------

LocScanResult run_localization_scan(const LocScanConfig& config) {
  if (config.windows.empty()) throw ConfigError("locscan: no windows given");
  const SpectralGeometry& geom = config.process.geometry;
  double top = 0.0;
  for (const auto& [lo, hi] : config.windows) {
    if (!(lo > 0.0 && hi > lo)) throw ConfigError("locscan: invalid window");
    top = std::max(top, hi);
  }
  const double ceiling = top * 1.02 + 1.0;
  const auto classes = distinct_eigenvalues(geom, ceiling);
  const double cutoff = GreensEvaluator::recommended_cutoff(
      geom, ceiling, config.tail_tolerance);
  auto evaluator = std::make_shared<const GreensEvaluator>(
      geom, cutoff, config.tail_tolerance);

  const int n_windows = static_cast<int>(config.windows.size());
  std::vector<std::vector<int>> window_gaps(n_windows);
  for (int w = 0; w < n_windows; ++w) {
    for (int j = 0; j + 1 < static_cast<int>(classes.size()); ++j) {
      const double mid =
          0.5 * (classes[j].eigenvalue + classes[j + 1].eigenvalue);
      if (mid >= config.windows[w].first && mid <= config.windows[w].second) {
        window_gaps[w].push_back(j);
      }
    }
    if (window_gaps[w].empty()) {
      std::ostringstream msg;
      msg << "locscan: window [" << config.windows[w].first << ", "
          << config.windows[w].second << "] contains no spectral gap";
      throw ConfigError(msg.str());
    }
  }

  struct RootDiag {
    double ipr;
    std::optional<double> loc_length;
  };
  std::vector<std::vector<std::vector<RootDiag>>> slots(
      config.samples, std::vector<std::vector<RootDiag>>(n_windows));

#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < config.samples; ++s) {
    try {
      const ScattererSet set =
          sample_positions(UniformTorusProcess{config.process}, config.seed,
                           static_cast<std::uint64_t>(s));
      const SecularSystem system(set, evaluator);
      for (int w = 0; w < n_windows; ++w) {
        CounterRng rng(config.seed, static_cast<std::uint64_t>(s),
                       stream::kGapChoice + static_cast<std::uint64_t>(w));
        const int j = window_gaps[w][rng.uniform_index(window_gaps[w].size())];
        for (const NewEigenpair& root : system.find_new_eigenvalues(j)) {
          if (root.degenerate || root.boundary) continue;
          const Eigenfunction ef(system, root, config.field_rel_tail);
          const auto diag = localization_diagnostics(ef, config.grid_resolution);
          slots[s][w].push_back({diag.ipr, diag.loc_length});
        }
      }
    } catch (const ConfigError&) {
    } catch (const NumericError&) {
    }
  }

  LocScanResult result;
  const double alpha = arith::ExponentConfig::alpha_d(geom.dim());
  for (int w = 0; w < n_windows; ++w) {
    LocScanRow row;
    row.window_lo = config.windows[w].first;
    row.window_hi = config.windows[w].second;
    std::vector<double> iprs;
    std::vector<double> lengths;
    int delocalized = 0;
    for (int s = 0; s < config.samples; ++s) {
      for (const RootDiag& d : slots[s][w]) {
        iprs.push_back(d.ipr);
        if (d.loc_length) {
          lengths.push_back(*d.loc_length);
        } else {
          ++delocalized;
        }
      }
    }
    row.roots_used = static_cast<int>(iprs.size());
    row.median_ipr = median_of(iprs);
    if (!lengths.empty()) row.median_loc_length = median_of(lengths);
    row.fraction_delocalized =
        row.roots_used > 0 ? static_cast<double>(delocalized) / row.roots_used
                           : 0.0;
    row.floor_alpha = std::pow(0.5 * (row.window_lo + row.window_hi), alpha);
    if (!result.crossing_window &&
        ((row.median_loc_length && *row.median_loc_length > geom.size()) ||
         (row.roots_used > 0 && row.fraction_delocalized > 0.5))) {
      result.crossing_window = w;
    }
    result.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace scatter
