#ifndef SCATTER_CONFIG_HPP
#define SCATTER_CONFIG_HPP

#include <json.hpp>
#include <optional>
#include <string>

#include "scatter/ensemble.hpp"

namespace scatter {

// Schema-validated experiment description. Unknown keys are rejected; every
// default is materialized into `resolved`, which round-trips byte identically
// and is hashed into the output files.
struct ParsedExperiment {
  std::string kind;
  nlohmann::json resolved;
  std::string config_hash;

  std::optional<SpectrumConfig> spectrum;
  std::optional<EquidistConfig> equidist;
  std::optional<ThetaConfig> theta;
  std::optional<DecreasingTemplate> theta_template;
  std::optional<LocScanConfig> locscan;

  struct LatticeJob {
    bool annulus_mode = false;
    int dim = 2;
    double x_min = 100.0;
    double x_max = 1.0e6;
    int points = 50;
    double delta = 0.17;
    std::vector<IVec> frequencies;
  };
  std::optional<LatticeJob> lattice;

  struct FieldJob {
    UniformTorusProcess process;
    std::uint64_t sample_index = 0;
    int gap_index = 0;
    int root_rank = 0;
    int grid = 256;
    double tail_tolerance = 1e-6;
    double field_rel_tail = 1e-5;
  };
  std::optional<FieldJob> field;
};

// Parses and validates a config document for the given experiment kind
// (must match the document's own "experiment" entry).
ParsedExperiment parse_experiment(const std::string& kind,
                                  const nlohmann::json& raw);

ParsedExperiment load_experiment(const std::string& kind,
                                 const std::string& path);

}  // namespace scatter

#endif
