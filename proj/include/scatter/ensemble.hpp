#ifndef SCATTER_ENSEMBLE_HPP
#define SCATTER_ENSEMBLE_HPP

#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "scatter/common.hpp"
#include "scatter/geometry.hpp"
#include "scatter/secular.hpp"
#include "scatter/wavefield.hpp"

namespace scatter {

// ---------------------------------------------------------------------------
// Disorder processes
// ---------------------------------------------------------------------------

// Radially symmetric displacement density P(|x|) with P(r) proportional to
// (1 - (r/R)^2)^4 on r < R. Support must stay inside the quarter-cell ball.
class RadialProfile {
 public:
  explicit RadialProfile(int dim, double support_radius = 0.25);

  int dim() const { return dim_; }
  double support_radius() const { return radius_; }
  double density(double r) const;       // normalized d-dimensional density
  double mean_displacement() const;     // E |X| by quadrature
  double sample_radius(double u) const; // inverse CDF of the radial law

 private:
  int dim_;
  double radius_;
  double norm_;                 // density normalization
  std::vector<double> cdf_;     // radial CDF on a uniform grid
};

struct UniformTorusProcess {
  SpectralGeometry geometry;
  int n_scatterers = 1;
  double phase_t = 0.0;
};

struct DisplacedLatticeProcess {
  SpectralGeometry box;  // DirichletBox geometry
  RadialProfile profile;
  double phase_t = 0.0;
};

using DisorderProcess = std::variant<UniformTorusProcess, DisplacedLatticeProcess>;

// Deterministic function of (master seed, sample index): uniform i.i.d.
// positions on the torus, or lattice sites displaced by i.i.d. radial draws.
// Displaced positions are NOT filtered here; active_scatterers() below drops
// the ones that left the open box.
ScattererSet sample_positions(const DisorderProcess& process,
                              std::uint64_t master_seed,
                              std::uint64_t sample_index);

// Positions at a safe distance (1e-6 L) inside the Dirichlet box; the second
// member counts how many were dropped. Torus sets pass through unchanged.
std::pair<ScattererSet, int> active_scatterers(const ScattererSet& set);

const SpectralGeometry& process_geometry(const DisorderProcess& process);
double process_phase(const DisorderProcess& process);

// ---------------------------------------------------------------------------
// Spectrum scan
// ---------------------------------------------------------------------------

struct SpectrumConfig {
  UniformTorusProcess process;
  int first_gap = 0;
  int gap_count = 50;
  int samples = 1;
  std::uint64_t seed = 1;
  double tail_tolerance = 1e-6;
};

struct SpectrumRecord {
  std::uint64_t sample = 0;
  int gap_index = 0;
  double lambda_low = 0.0;
  double lambda_high = 0.0;
  double lambda_root = 0.0;
  double residual = 0.0;
  bool degenerate = false;
  bool boundary = false;
};

std::vector<SpectrumRecord> run_spectrum(const SpectrumConfig& config);

// ---------------------------------------------------------------------------
// Equidistribution runs (uniform torus process)
// ---------------------------------------------------------------------------

struct EquidistConfig {
  UniformTorusProcess process;
  double window_lo = 0.0;   // physical spectral window for gap midpoints
  double window_hi = 0.0;
  Observable observable;    // the dominating observable a0
  std::vector<IVec> frequencies;  // Z*, first entry drives the ratio checks
  double delta = 0.17;
  int samples = 100;
  int gaps_per_sample = 1;
  std::uint64_t seed = 1;
  double tail_tolerance = 1e-6;
  double field_rel_tail = 1e-5;
};

struct EquidistRecord {
  std::uint64_t sample = 0;
  int gap_index = 0;
  double lambda_root = 0.0;
  double deviation = 0.0;        // D = int a |psi|^2 - mean(a)
  double dominated_bound = 0.0;  // sum |a_hat| |matrix element|
  std::vector<std::complex<double>> elements;  // per frequency in Z*
  double cheb_rhs = 0.0;         // at frequencies[0]
  double ratio = 0.0;            // |element|^2 / cheb_rhs
  bool bound_holds = false;      // |element|^2 <= 10 cheb_rhs
  bool degenerate = false;
  bool boundary = false;
  int roots_in_gap = 0;
};

struct EquidistSummary {
  int usable = 0;
  int degenerate = 0;
  int boundary = 0;
  double median_abs_deviation = 0.0;
  std::vector<double> median_abs_element;
  double bound_fraction = 0.0;  // fraction of usable roots with bound_holds
  double comparison = 0.0;      // sqrt(N) lambda_mid^{-delta_d} L^{-2 delta_d}
  bool valid = true;            // degenerate-exclusion rate below 1%
};

struct EquidistResult {
  std::vector<EquidistRecord> records;
  EquidistSummary summary;
};

EquidistResult run_equidistribution(const EquidistConfig& config);

// ---------------------------------------------------------------------------
// Two-point correlation runs (displaced lattice in the Dirichlet box)
// ---------------------------------------------------------------------------

struct ThetaConfig {
  DisplacedLatticeProcess process;
  // Gap selection: explicit index, or (when negative) the first gap whose
  // lower endpoint is >= gap_lambda.
  int gap_index = -1;
  double gap_lambda = 0.0;
  double mollifier_radius = 0.25;
  std::vector<std::pair<Point, Point>> pairs;
  int samples = 50;
  std::uint64_t seed = 1;
  double tail_tolerance = 1e-5;
  double field_rel_tail = 1e-3;
  double quadrature_tol = 1e-4;
};

struct ThetaRecord {
  std::uint64_t sample = 0;
  int root_count = 0;
  int dropped_scatterers = 0;
  bool degenerate = false;
  std::vector<double> theta_sum;  // per pair
};

struct ThetaSummary {
  struct PairEstimate {
    Point x;
    Point y;
    double separation = 0.0;
    double mean = 0.0;
    double std_error = 0.0;
  };
  int gap_index = 0;
  double lambda_low = 0.0;
  double lambda_high = 0.0;
  std::vector<PairEstimate> pairs;
  double mean_root_count = 0.0;
  int excluded = 0;
  bool valid = true;
};

struct ThetaResult {
  std::vector<ThetaRecord> records;
  ThetaSummary summary;
};

ThetaResult run_theta(const ThetaConfig& config);

// Strictly decreasing comparison template F for the localization test.
struct DecreasingTemplate {
  enum class Kind { Exponential, PowerLaw };
  Kind kind = Kind::Exponential;
  double scale = 1.0;  // c in c e^{-a r} or c r^{-p}
  double param = 1.0;  // a (rate) or p (power)

  double operator()(double r) const;
  void validate() const;  // rejects non-decreasing parameter choices
};

struct FLocalizationReport {
  struct PairVerdict {
    double separation = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double bound = 0.0;  // F(separation)
    bool holds = false;  // estimate <= F within two standard errors
    double margin = 0.0; // estimate - 2 SE - F
  };
  std::vector<PairVerdict> pairs;
  bool violated = false;  // some pair fails with margin
};

FLocalizationReport f_localization_test(const ThetaSummary& summary,
                                        const DecreasingTemplate& f);

// ---------------------------------------------------------------------------
// Localization scan
// ---------------------------------------------------------------------------

struct LocScanConfig {
  UniformTorusProcess process;
  std::vector<std::pair<double, double>> windows;
  int samples = 50;
  std::uint64_t seed = 1;
  int grid_resolution = 128;
  double tail_tolerance = 1e-6;
  double field_rel_tail = 1e-4;
};

struct LocScanRow {
  double window_lo = 0.0;
  double window_hi = 0.0;
  int roots_used = 0;
  double median_ipr = 0.0;
  std::optional<double> median_loc_length;
  double fraction_delocalized = 0.0;
  double floor_alpha = 0.0;  // (window midpoint)^{alpha_d}
};

struct LocScanResult {
  std::vector<LocScanRow> rows;
  // First window whose median fitted length exceeds the domain size, if any.
  std::optional<int> crossing_window;
};

LocScanResult run_localization_scan(const LocScanConfig& config);

}  // namespace scatter

#endif
