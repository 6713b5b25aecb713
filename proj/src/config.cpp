#include "scatter/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "scatter/arith.hpp"

namespace scatter {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  if (!obj.is_object()) {
    throw ConfigError("config: " + context + " must be an object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ConfigError("config: unknown key \"" + key + "\" in " + context);
    }
  }
}

double get_number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) {
    throw ConfigError("config: \"" + key + "\" must be a number");
  }
  return obj[key].get<double>();
}

std::int64_t get_integer(const json& obj, const std::string& key,
                         std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) {
    throw ConfigError("config: \"" + key + "\" must be an integer");
  }
  return obj[key].get<std::int64_t>();
}

IVec parse_ivec(const json& arr, const std::string& context) {
  if (!arr.is_array() || arr.size() < 2 || arr.size() > 3) {
    throw ConfigError("config: " + context + " must be an array of 2 or 3 integers");
  }
  IVec v{0, 0, 0};
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number_integer()) {
      throw ConfigError("config: " + context + " entries must be integers");
    }
    v[i] = arr[i].get<int>();
  }
  return v;
}

Point parse_point(const json& arr, const std::string& context) {
  if (!arr.is_array() || arr.size() < 2 || arr.size() > 3) {
    throw ConfigError("config: " + context + " must be an array of 2 or 3 numbers");
  }
  Point p{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      throw ConfigError("config: " + context + " entries must be numbers");
    }
    p[i] = arr[i].get<double>();
  }
  return p;
}

SpectralGeometry parse_geometry(const json& obj) {
  check_keys(obj, {"kind", "dim", "size"}, "geometry");
  if (!obj.contains("kind") || !obj["kind"].is_string()) {
    throw ConfigError("config: geometry.kind must be \"torus\" or \"box\"");
  }
  const std::string kind = obj["kind"].get<std::string>();
  const int dim = static_cast<int>(get_integer(obj, "dim", 2));
  const double size = get_number(obj, "size", kTwoPi);
  if (kind == "torus") return SpectralGeometry::torus(dim, size);
  if (kind == "box") return SpectralGeometry::box(dim, size);
  throw ConfigError("config: geometry.kind must be \"torus\" or \"box\"");
}

json geometry_json(const SpectralGeometry& g) {
  return json{{"kind", g.kind() == DomainKind::FlatTorus ? "torus" : "box"},
              {"dim", g.dim()},
              {"size", g.size()}};
}

struct Tolerances {
  double tail = 1e-6;
  double field_rel_tail = 1e-5;
  double quadrature = 1e-4;
};

Tolerances parse_tolerances(const json& root, double tail_default,
                            double field_default) {
  Tolerances t;
  t.tail = tail_default;
  t.field_rel_tail = field_default;
  if (!root.contains("tolerances")) return t;
  const json& obj = root["tolerances"];
  check_keys(obj, {"tail", "field_rel_tail", "quadrature"}, "tolerances");
  t.tail = get_number(obj, "tail", t.tail);
  t.field_rel_tail = get_number(obj, "field_rel_tail", t.field_rel_tail);
  t.quadrature = get_number(obj, "quadrature", t.quadrature);
  return t;
}

json tolerances_json(const Tolerances& t) {
  return json{{"tail", t.tail},
              {"field_rel_tail", t.field_rel_tail},
              {"quadrature", t.quadrature}};
}

std::vector<IVec> parse_frequencies(const json& root, const std::string& key) {
  std::vector<IVec> out;
  if (!root.contains(key)) return out;
  if (!root[key].is_array()) {
    throw ConfigError("config: \"" + key + "\" must be an array");
  }
  for (const auto& entry : root[key]) out.push_back(parse_ivec(entry, key));
  return out;
}

json ivec_json(const IVec& v, int dim) {
  json arr = json::array();
  for (int i = 0; i < dim; ++i) arr.push_back(v[i]);
  return arr;
}

json point_json(const Point& p, int dim) {
  json arr = json::array();
  for (int i = 0; i < dim; ++i) arr.push_back(p[i]);
  return arr;
}

}  // namespace

ParsedExperiment parse_experiment(const std::string& kind, const json& raw) {
  if (!raw.is_object()) throw ConfigError("config: document must be an object");
  if (!raw.contains("experiment") || !raw["experiment"].is_string()) {
    throw ConfigError("config: missing \"experiment\" entry");
  }
  if (raw["experiment"].get<std::string>() != kind) {
    throw ConfigError("config: experiment \"" +
                      raw["experiment"].get<std::string>() +
                      "\" does not match the requested subcommand \"" + kind +
                      "\"");
  }

  ParsedExperiment parsed;
  parsed.kind = kind;
  json resolved;
  resolved["experiment"] = kind;
  const auto seed = static_cast<std::uint64_t>(get_integer(raw, "seed", 1));
  resolved["seed"] = seed;

  if (kind == "spectrum") {
    check_keys(raw,
               {"experiment", "seed", "geometry", "process", "first_gap",
                "gap_count", "samples", "tolerances"},
               "document");
    SpectrumConfig cfg;
    SpectralGeometry geom =
        raw.contains("geometry") ? parse_geometry(raw["geometry"])
                                 : SpectralGeometry::torus(2, kTwoPi);
    if (geom.kind() != DomainKind::FlatTorus) {
      throw ConfigError("config: spectrum runs use torus geometry");
    }
    json proc = raw.value("process", json::object());
    check_keys(proc, {"count", "phase_t"}, "process");
    cfg.process = UniformTorusProcess{
        geom, static_cast<int>(get_integer(proc, "count", 1)),
        get_number(proc, "phase_t", 0.0)};
    cfg.first_gap = static_cast<int>(get_integer(raw, "first_gap", 0));
    cfg.gap_count = static_cast<int>(get_integer(raw, "gap_count", 50));
    cfg.samples = static_cast<int>(get_integer(raw, "samples", 1));
    cfg.seed = seed;
    const Tolerances tol = parse_tolerances(raw, 1e-6, 1e-5);
    cfg.tail_tolerance = tol.tail;
    resolved["geometry"] = geometry_json(geom);
    resolved["process"] = {{"count", cfg.process.n_scatterers},
                           {"phase_t", cfg.process.phase_t}};
    resolved["first_gap"] = cfg.first_gap;
    resolved["gap_count"] = cfg.gap_count;
    resolved["samples"] = cfg.samples;
    resolved["tolerances"] = tolerances_json(tol);
    parsed.spectrum = cfg;
  } else if (kind == "equidist") {
    check_keys(raw,
               {"experiment", "seed", "geometry", "process", "window",
                "observable", "frequencies", "delta", "samples",
                "gaps_per_sample", "tolerances"},
               "document");
    SpectralGeometry geom =
        raw.contains("geometry") ? parse_geometry(raw["geometry"])
                                 : SpectralGeometry::torus(2, kTwoPi);
    json proc = raw.value("process", json::object());
    check_keys(proc, {"count", "phase_t"}, "process");
    EquidistConfig cfg;
    cfg.process = UniformTorusProcess{
        geom, static_cast<int>(get_integer(proc, "count", 4)),
        get_number(proc, "phase_t", 0.0)};
    if (!raw.contains("window") || !raw["window"].is_array() ||
        raw["window"].size() != 2) {
      throw ConfigError("config: equidist window must be [lo, hi]");
    }
    cfg.window_lo = raw["window"][0].get<double>();
    cfg.window_hi = raw["window"][1].get<double>();
    std::vector<std::pair<IVec, double>> obs_modes;
    if (raw.contains("observable")) {
      if (!raw["observable"].is_array()) {
        throw ConfigError("config: observable must be an array");
      }
      for (const auto& entry : raw["observable"]) {
        check_keys(entry, {"zeta", "amplitude"}, "observable entry");
        obs_modes.emplace_back(parse_ivec(entry.at("zeta"), "observable.zeta"),
                               get_number(entry, "amplitude", 1.0));
      }
    }
    cfg.observable = Observable::real_trig(obs_modes);
    cfg.frequencies = parse_frequencies(raw, "frequencies");
    if (cfg.frequencies.empty()) cfg.frequencies.push_back(IVec{1, 0, 0});
    cfg.delta = get_number(raw, "delta", 0.17);
    arith::ExponentConfig exponents;
    exponents.delta = cfg.delta;
    exponents.validate();
    cfg.samples = static_cast<int>(get_integer(raw, "samples", 100));
    cfg.gaps_per_sample =
        static_cast<int>(get_integer(raw, "gaps_per_sample", 1));
    cfg.seed = seed;
    const Tolerances tol = parse_tolerances(raw, 1e-6, 1e-5);
    cfg.tail_tolerance = tol.tail;
    cfg.field_rel_tail = tol.field_rel_tail;
    resolved["geometry"] = geometry_json(geom);
    resolved["process"] = {{"count", cfg.process.n_scatterers},
                           {"phase_t", cfg.process.phase_t}};
    resolved["window"] = {cfg.window_lo, cfg.window_hi};
    json obs = json::array();
    for (const auto& [zeta, amp] : obs_modes) {
      obs.push_back({{"zeta", ivec_json(zeta, geom.dim())}, {"amplitude", amp}});
    }
    resolved["observable"] = obs;
    json freqs = json::array();
    for (const IVec& z : cfg.frequencies) freqs.push_back(ivec_json(z, geom.dim()));
    resolved["frequencies"] = freqs;
    resolved["delta"] = cfg.delta;
    resolved["samples"] = cfg.samples;
    resolved["gaps_per_sample"] = cfg.gaps_per_sample;
    resolved["tolerances"] = tolerances_json(tol);
    parsed.equidist = cfg;
  } else if (kind == "lattice") {
    check_keys(raw,
               {"experiment", "seed", "mode", "dim", "x_min", "x_max",
                "points", "delta", "frequencies"},
               "document");
    ParsedExperiment::LatticeJob job;
    const std::string mode =
        raw.contains("mode") ? raw["mode"].get<std::string>() : "circle";
    if (mode != "circle" && mode != "annulus") {
      throw ConfigError("config: lattice mode must be circle or annulus");
    }
    job.annulus_mode = mode == "annulus";
    job.dim = static_cast<int>(get_integer(raw, "dim", 2));
    job.x_min = get_number(raw, "x_min", 100.0);
    job.x_max = get_number(raw, "x_max", 1.0e6);
    job.points = static_cast<int>(get_integer(raw, "points", 50));
    job.delta = get_number(raw, "delta", 0.17);
    job.frequencies = parse_frequencies(raw, "frequencies");
    if (job.frequencies.empty()) job.frequencies.push_back(IVec{1, 0, 0});
    resolved["mode"] = mode;
    resolved["dim"] = job.dim;
    resolved["x_min"] = job.x_min;
    resolved["x_max"] = job.x_max;
    resolved["points"] = job.points;
    resolved["delta"] = job.delta;
    json freqs = json::array();
    for (const IVec& z : job.frequencies) freqs.push_back(ivec_json(z, job.dim));
    resolved["frequencies"] = freqs;
    parsed.lattice = job;
  } else if (kind == "theta") {
    check_keys(raw,
               {"experiment", "seed", "geometry", "process", "gap_index",
                "gap_lambda", "mollifier_radius", "pairs", "samples",
                "tolerances", "template"},
               "document");
    SpectralGeometry geom =
        raw.contains("geometry") ? parse_geometry(raw["geometry"])
                                 : SpectralGeometry::box(2, 2.0);
    if (geom.kind() != DomainKind::DirichletBox) {
      throw ConfigError("config: theta runs use box geometry");
    }
    json proc = raw.value("process", json::object());
    check_keys(proc, {"support_radius", "phase_t"}, "process");
    const double support = get_number(proc, "support_radius", 0.25);
    DisplacedLatticeProcess process{
        geom, RadialProfile(geom.dim(), support), get_number(proc, "phase_t", 0.0)};
    const Tolerances tol = parse_tolerances(raw, 1e-5, 1e-3);
    ThetaConfig cfg{process};
    cfg.gap_index = static_cast<int>(get_integer(raw, "gap_index", -1));
    cfg.gap_lambda = get_number(raw, "gap_lambda", 0.0);
    if (cfg.gap_index < 0 && !(cfg.gap_lambda > 0.0)) {
      throw ConfigError("config: theta needs gap_index or gap_lambda");
    }
    cfg.mollifier_radius = get_number(raw, "mollifier_radius", 0.25);
    if (!raw.contains("pairs") || !raw["pairs"].is_array() ||
        raw["pairs"].empty()) {
      throw ConfigError("config: theta needs a nonempty pairs array");
    }
    for (const auto& entry : raw["pairs"]) {
      check_keys(entry, {"x", "y"}, "pairs entry");
      cfg.pairs.emplace_back(parse_point(entry.at("x"), "pairs.x"),
                             parse_point(entry.at("y"), "pairs.y"));
    }
    cfg.samples = static_cast<int>(get_integer(raw, "samples", 50));
    cfg.seed = seed;
    cfg.tail_tolerance = tol.tail;
    cfg.field_rel_tail = tol.field_rel_tail;
    cfg.quadrature_tol = tol.quadrature;
    if (raw.contains("template")) {
      const json& tpl = raw["template"];
      check_keys(tpl, {"kind", "scale", "param"}, "template");
      DecreasingTemplate f;
      const std::string tkind = tpl.value("kind", "exponential");
      if (tkind == "exponential") {
        f.kind = DecreasingTemplate::Kind::Exponential;
      } else if (tkind == "power") {
        f.kind = DecreasingTemplate::Kind::PowerLaw;
      } else {
        throw ConfigError("config: template.kind must be exponential or power");
      }
      f.scale = get_number(tpl, "scale", 1.0);
      f.param = get_number(tpl, "param", 1.0);
      f.validate();
      parsed.theta_template = f;
      resolved["template"] = {{"kind", tkind}, {"scale", f.scale},
                              {"param", f.param}};
    }
    resolved["geometry"] = geometry_json(geom);
    resolved["process"] = {{"support_radius", support},
                           {"phase_t", process.phase_t}};
    resolved["gap_index"] = cfg.gap_index;
    resolved["gap_lambda"] = cfg.gap_lambda;
    resolved["mollifier_radius"] = cfg.mollifier_radius;
    json pairs = json::array();
    for (const auto& [x, y] : cfg.pairs) {
      pairs.push_back({{"x", point_json(x, geom.dim())},
                       {"y", point_json(y, geom.dim())}});
    }
    resolved["pairs"] = pairs;
    resolved["samples"] = cfg.samples;
    resolved["tolerances"] = tolerances_json(tol);
    parsed.theta.emplace(std::move(cfg));
  } else if (kind == "locscan") {
    check_keys(raw,
               {"experiment", "seed", "geometry", "process", "windows",
                "samples", "grid", "tolerances"},
               "document");
    SpectralGeometry geom =
        raw.contains("geometry") ? parse_geometry(raw["geometry"])
                                 : SpectralGeometry::torus(2, kTwoPi);
    json proc = raw.value("process", json::object());
    check_keys(proc, {"count", "phase_t"}, "process");
    LocScanConfig cfg;
    cfg.process = UniformTorusProcess{
        geom, static_cast<int>(get_integer(proc, "count", 16)),
        get_number(proc, "phase_t", 0.0)};
    if (!raw.contains("windows") || !raw["windows"].is_array() ||
        raw["windows"].empty()) {
      throw ConfigError("config: locscan needs a nonempty windows array");
    }
    for (const auto& w : raw["windows"]) {
      if (!w.is_array() || w.size() != 2) {
        throw ConfigError("config: each locscan window must be [lo, hi]");
      }
      cfg.windows.emplace_back(w[0].get<double>(), w[1].get<double>());
    }
    cfg.samples = static_cast<int>(get_integer(raw, "samples", 50));
    cfg.grid_resolution = static_cast<int>(get_integer(raw, "grid", 128));
    cfg.seed = seed;
    const Tolerances tol = parse_tolerances(raw, 1e-6, 1e-4);
    cfg.tail_tolerance = tol.tail;
    cfg.field_rel_tail = tol.field_rel_tail;
    resolved["geometry"] = geometry_json(geom);
    resolved["process"] = {{"count", cfg.process.n_scatterers},
                           {"phase_t", cfg.process.phase_t}};
    json windows = json::array();
    for (const auto& [lo, hi] : cfg.windows) windows.push_back({lo, hi});
    resolved["windows"] = windows;
    resolved["samples"] = cfg.samples;
    resolved["grid"] = cfg.grid_resolution;
    resolved["tolerances"] = tolerances_json(tol);
    parsed.locscan = cfg;
  } else if (kind == "field") {
    check_keys(raw,
               {"experiment", "seed", "geometry", "process", "sample_index",
                "gap_index", "root_rank", "grid", "tolerances"},
               "document");
    SpectralGeometry geom =
        raw.contains("geometry") ? parse_geometry(raw["geometry"])
                                 : SpectralGeometry::torus(2, kTwoPi);
    if (geom.kind() != DomainKind::FlatTorus) {
      throw ConfigError("config: field dumps use torus geometry");
    }
    json proc = raw.value("process", json::object());
    check_keys(proc, {"count", "phase_t"}, "process");
    ParsedExperiment::FieldJob job;
    job.process = UniformTorusProcess{
        geom, static_cast<int>(get_integer(proc, "count", 4)),
        get_number(proc, "phase_t", 0.0)};
    job.sample_index =
        static_cast<std::uint64_t>(get_integer(raw, "sample_index", 0));
    job.gap_index = static_cast<int>(get_integer(raw, "gap_index", 0));
    job.root_rank = static_cast<int>(get_integer(raw, "root_rank", 0));
    job.grid = static_cast<int>(get_integer(raw, "grid", 256));
    const Tolerances tol = parse_tolerances(raw, 1e-6, 1e-5);
    job.tail_tolerance = tol.tail;
    job.field_rel_tail = tol.field_rel_tail;
    resolved["geometry"] = geometry_json(geom);
    resolved["process"] = {{"count", job.process.n_scatterers},
                           {"phase_t", job.process.phase_t}};
    resolved["sample_index"] = job.sample_index;
    resolved["gap_index"] = job.gap_index;
    resolved["root_rank"] = job.root_rank;
    resolved["grid"] = job.grid;
    resolved["tolerances"] = tolerances_json(tol);
    parsed.field = job;
  } else {
    throw ConfigError("config: unknown experiment kind \"" + kind + "\"");
  }

  parsed.resolved = std::move(resolved);
  parsed.config_hash = to_hex(fnv1a64(parsed.resolved.dump()));
  return parsed;
}

ParsedExperiment load_experiment(const std::string& kind,
                                 const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  json raw;
  try {
    in >> raw;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
  }
  return parse_experiment(kind, raw);
}

}  // namespace scatter
