// scatterlab: batch driver for impurity-spectrum experiments.
//
// Each subcommand reads a JSON config, echoes the resolved config, streams
// records (CSV by default, JSON lines with --format jsonl) and writes a
// summary document. Reruns with the same config and seed are byte identical
// for any --workers value.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "scatter/arith.hpp"
#include "scatter/config.hpp"
#include "scatter/ensemble.hpp"
#include "scatter/records.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using nlohmann::json;
using namespace scatter;

namespace fs = std::filesystem;

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::string format = "csv";
  std::int64_t seed_override = -1;
  int workers = 0;
};

RecordWriter::Format record_format(const Options& opt) {
  return opt.format == "jsonl" ? RecordWriter::Format::Jsonl
                               : RecordWriter::Format::Csv;
}

std::string records_path(const Options& opt) {
  return (fs::path(opt.out_dir) /
          (record_format(opt) == RecordWriter::Format::Csv ? "records.csv"
                                                           : "records.jsonl"))
      .string();
}

json run_spectrum_cmd(const ParsedExperiment& parsed, const Options& opt) {
  const auto records = run_spectrum(*parsed.spectrum);
  RecordWriter writer(records_path(opt), record_format(opt), parsed.config_hash,
                      {"sample", "gap_index", "lambda_low", "lambda_high",
                       "lambda_root", "residual", "n", "t", "seed",
                       "degenerate", "boundary"});
  const auto& cfg = *parsed.spectrum;
  for (const auto& r : records) {
    writer.row({static_cast<std::int64_t>(r.sample),
                static_cast<std::int64_t>(r.gap_index), r.lambda_low,
                r.lambda_high, r.lambda_root, r.residual,
                static_cast<std::int64_t>(cfg.process.n_scatterers),
                cfg.process.phase_t, static_cast<std::int64_t>(cfg.seed),
                r.degenerate, r.boundary});
  }
  return json{{"records", records.size()}};
}

json run_equidist_cmd(const ParsedExperiment& parsed, const Options& opt) {
  const EquidistResult result = run_equidistribution(*parsed.equidist);
  const auto n_freq = parsed.equidist->frequencies.size();
  std::vector<std::string> columns = {"sample",    "gap_index", "lambda_root",
                                      "deviation", "dominated_bound"};
  for (std::size_t f = 0; f < n_freq; ++f) {
    columns.push_back("element" + std::to_string(f) + "_re");
    columns.push_back("element" + std::to_string(f) + "_im");
  }
  columns.insert(columns.end(), {"cheb_rhs", "ratio", "bound_holds",
                                 "degenerate", "boundary", "roots_in_gap"});
  RecordWriter writer(records_path(opt), record_format(opt), parsed.config_hash,
                      columns);
  for (const auto& r : result.records) {
    std::vector<Cell> cells = {static_cast<std::int64_t>(r.sample),
                               static_cast<std::int64_t>(r.gap_index),
                               r.lambda_root, r.deviation, r.dominated_bound};
    for (std::size_t f = 0; f < n_freq; ++f) {
      if (f < r.elements.size()) {
        cells.emplace_back(r.elements[f].real());
        cells.emplace_back(r.elements[f].imag());
      } else {
        cells.emplace_back(0.0);
        cells.emplace_back(0.0);
      }
    }
    cells.emplace_back(r.cheb_rhs);
    cells.emplace_back(r.ratio);
    cells.emplace_back(r.bound_holds);
    cells.emplace_back(r.degenerate);
    cells.emplace_back(r.boundary);
    cells.emplace_back(static_cast<std::int64_t>(r.roots_in_gap));
    writer.row(cells);
  }
  const EquidistSummary& s = result.summary;
  json medians = json::array();
  for (double m : s.median_abs_element) medians.push_back(m);
  return json{{"records", result.records.size()},
              {"usable", s.usable},
              {"degenerate", s.degenerate},
              {"boundary", s.boundary},
              {"median_abs_deviation", s.median_abs_deviation},
              {"median_abs_element", medians},
              {"bound_fraction", s.bound_fraction},
              {"comparison", s.comparison},
              {"valid", s.valid}};
}

json run_lattice_cmd(const ParsedExperiment& parsed, const Options& opt) {
  const auto& job = *parsed.lattice;
  if (!job.annulus_mode) {
    RecordWriter writer(records_path(opt), record_format(opt),
                        parsed.config_hash, {"x", "count", "residual"});
    for (int i = 0; i < job.points; ++i) {
      const double t = job.points == 1
                           ? 0.0
                           : static_cast<double>(i) / (job.points - 1);
      const double x = job.x_min * std::pow(job.x_max / job.x_min, t);
      const auto count = arith::count_lattice_points(x, job.dim);
      const double residual =
          static_cast<double>(count) -
          (job.dim == 2 ? kPi * x : 4.0 * kPi / 3.0 * std::pow(x, 1.5));
      writer.row({x, static_cast<std::int64_t>(count), residual});
    }
    return json{{"records", job.points}};
  }
  RecordWriter writer(records_path(opt), record_format(opt), parsed.config_hash,
                      {"lambda", "delta", "annulus_count", "generic"});
  for (int i = 0; i < job.points; ++i) {
    const double t =
        job.points == 1 ? 0.0 : static_cast<double>(i) / (job.points - 1);
    const double lambda = job.x_min * std::pow(job.x_max / job.x_min, t);
    const double width = std::pow(lambda, job.delta);
    const auto count =
        arith::annulus_count({IVec{0, 0, 0}, lambda, width}, job.dim);
    const bool generic =
        arith::is_generic_lambda(lambda, job.delta, job.frequencies, job.dim);
    writer.row({lambda, job.delta, count, generic});
  }
  return json{{"records", job.points}};
}

json run_theta_cmd(const ParsedExperiment& parsed, const Options& opt) {
  const ThetaResult result = run_theta(*parsed.theta);
  const auto n_pairs = parsed.theta->pairs.size();
  std::vector<std::string> columns = {"sample", "root_count",
                                      "dropped_scatterers", "degenerate"};
  for (std::size_t p = 0; p < n_pairs; ++p) {
    columns.push_back("theta" + std::to_string(p));
  }
  RecordWriter writer(records_path(opt), record_format(opt), parsed.config_hash,
                      columns);
  for (const auto& r : result.records) {
    std::vector<Cell> cells = {static_cast<std::int64_t>(r.sample),
                               static_cast<std::int64_t>(r.root_count),
                               static_cast<std::int64_t>(r.dropped_scatterers),
                               r.degenerate};
    for (std::size_t p = 0; p < n_pairs; ++p) cells.emplace_back(r.theta_sum[p]);
    writer.row(cells);
  }
  const ThetaSummary& s = result.summary;
  json pairs = json::array();
  for (const auto& est : s.pairs) {
    pairs.push_back({{"separation", est.separation},
                     {"mean", est.mean},
                     {"std_error", est.std_error}});
  }
  json out{{"records", result.records.size()},
           {"gap_index", s.gap_index},
           {"lambda_low", s.lambda_low},
           {"lambda_high", s.lambda_high},
           {"pairs", pairs},
           {"mean_root_count", s.mean_root_count},
           {"excluded", s.excluded},
           {"valid", s.valid}};
  if (parsed.theta_template) {
    const auto report = f_localization_test(s, *parsed.theta_template);
    json verdicts = json::array();
    for (const auto& v : report.pairs) {
      verdicts.push_back({{"separation", v.separation},
                          {"estimate", v.estimate},
                          {"std_error", v.std_error},
                          {"bound", v.bound},
                          {"holds", v.holds},
                          {"margin", v.margin}});
    }
    out["f_localization"] = {{"violated", report.violated},
                             {"pairs", verdicts}};
  }
  return out;
}

json run_locscan_cmd(const ParsedExperiment& parsed, const Options& opt) {
  const LocScanResult result = run_localization_scan(*parsed.locscan);
  RecordWriter writer(records_path(opt), record_format(opt), parsed.config_hash,
                      {"window_lo", "window_hi", "roots_used", "median_ipr",
                       "median_loc_length", "fraction_delocalized",
                       "floor_alpha"});
  for (const auto& row : result.rows) {
    writer.row({row.window_lo, row.window_hi,
                static_cast<std::int64_t>(row.roots_used), row.median_ipr,
                row.median_loc_length ? Cell(*row.median_loc_length)
                                      : Cell(std::string("none")),
                row.fraction_delocalized, row.floor_alpha});
  }
  json out{{"records", result.rows.size()}};
  if (result.crossing_window) out["crossing_window"] = *result.crossing_window;
  return out;
}

json run_field_cmd(const ParsedExperiment& parsed, const Options& opt) {
  const auto& job = *parsed.field;
  const SpectralGeometry& geom = job.process.geometry;
  const auto classes = distinct_eigenvalues_at_least(
      geom, static_cast<std::size_t>(job.gap_index) + 2);
  const double ceiling = classes[job.gap_index + 1].eigenvalue * 1.05 + 1.0;
  const ScattererSet seeded = sample_positions(
      DisorderProcess{job.process},
      parsed.resolved["seed"].get<std::uint64_t>(), job.sample_index);
  const SecularSystem system(seeded, ceiling, job.tail_tolerance);
  const auto roots = system.find_new_eigenvalues(job.gap_index);
  int usable = -1;
  const NewEigenpair* chosen = nullptr;
  for (const auto& r : roots) {
    if (r.degenerate || r.boundary) continue;
    if (++usable == job.root_rank) {
      chosen = &r;
      break;
    }
  }
  if (!chosen) {
    throw NumericError("field: requested root rank not found in the gap");
  }
  const Eigenfunction ef(system, *chosen, job.field_rel_tail);
  const GridField grid = ef.to_grid(job.grid);
  std::vector<std::string> columns = {"x", "y"};
  if (geom.dim() == 3) columns.push_back("z");
  columns.push_back("value");
  RecordWriter writer(records_path(opt), record_format(opt), parsed.config_hash,
                      columns);
  for (std::size_t i = 0; i < grid.values().size(); ++i) {
    const Point p = grid.grid_point(i);
    std::vector<Cell> cells;
    for (int c = 0; c < geom.dim(); ++c) cells.emplace_back(p[c]);
    const double v = grid.values()[i];
    cells.emplace_back(v * v);
    writer.row(cells);
  }
  return json{{"records", grid.values().size()},
              {"lambda_root", chosen->lambda},
              {"gap_index", job.gap_index}};
}

int run(const std::string& kind, const Options& opt) {
  const auto start = std::chrono::steady_clock::now();

  std::ifstream in(opt.config_path);
  if (!in) throw ConfigError("cannot read config file " + opt.config_path);
  json raw;
  try {
    in >> raw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }
  if (opt.seed_override >= 0) raw["seed"] = opt.seed_override;

  const ParsedExperiment parsed = parse_experiment(kind, raw);

#ifdef _OPENMP
  if (opt.workers > 0) omp_set_num_threads(opt.workers);
#endif

  fs::create_directories(opt.out_dir);
  {
    std::ofstream echo(fs::path(opt.out_dir) / "resolved_config.json");
    echo << parsed.resolved.dump(2) << "\n";
  }

  json summary;
  if (kind == "spectrum") summary = run_spectrum_cmd(parsed, opt);
  else if (kind == "equidist") summary = run_equidist_cmd(parsed, opt);
  else if (kind == "lattice") summary = run_lattice_cmd(parsed, opt);
  else if (kind == "theta") summary = run_theta_cmd(parsed, opt);
  else if (kind == "locscan") summary = run_locscan_cmd(parsed, opt);
  else summary = run_field_cmd(parsed, opt);

  const auto end = std::chrono::steady_clock::now();
  summary["version"] = kProjectVersion;
  summary["experiment"] = kind;
  summary["config_hash"] = parsed.config_hash;
  summary["seed"] = parsed.resolved["seed"];
  if (parsed.resolved.contains("tolerances")) {
    summary["tolerances"] = parsed.resolved["tolerances"];
  }
  summary["wall_time_seconds"] =
      std::chrono::duration<double>(end - start).count();
  std::ofstream sum_out(fs::path(opt.out_dir) / "summary.json");
  sum_out << summary.dump(2) << "\n";
  return 0;
}

int error_exit(int code, const std::string& kind_label,
               const std::string& message) {
  const json err{{"error", {{"code", code}, {"kind", kind_label},
                            {"message", message}}}};
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scatterlab: impurity spectra, eigenfunction statistics, and "
               "disorder ensembles on flat tori and Dirichlet boxes"};
  app.require_subcommand(1);

  Options opt;
  std::string kind;
  for (const char* name :
       {"spectrum", "equidist", "lattice", "theta", "locscan", "field"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "JSON config file")
        ->required();
    sub->add_option("--seed", opt.seed_override, "override the config seed");
    sub->add_option("--workers", opt.workers, "cap worker threads (0 = auto)");
    sub->add_option("--out-dir", opt.out_dir, "output directory");
    sub->add_option("--format", opt.format, "records format: csv or jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    sub->callback([&kind, name] { kind = name; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return run(kind, opt);
  } catch (const ConfigError& e) {
    return error_exit(2, "config", e.what());
  } catch (const ResourceError& e) {
    return error_exit(3, "resource", e.what());
  } catch (const NumericError& e) {
    return error_exit(4, "numeric", e.what());
  } catch (const std::exception& e) {
    return error_exit(1, "internal", e.what());
  }
}
