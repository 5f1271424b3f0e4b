#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "frb/engine.hpp"
#include "frb/ensemble.hpp"
#include "frb/noise.hpp"

namespace frb {

// Batch experiment description: ensemble, noise, measurement plan, backend.
// Field errors carry the offending path.  The canonical hash of the run is
// computed by the engine and embedded in every output.
struct ExperimentConfig {
  Ensemble ensemble;
  NoiseModel noise;          // Type::none when the field is absent
  SpamModel spam;            // identity when absent
  std::vector<int> ms;
  ProtocolOptions options;   // filters, shots, backend, seed, logging
  std::string output_csv, output_jsonl;

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::string& path);
};

// Column-name grammar of the estimator filters: an irrep name ("ad", "b=01",
// "w=(3,0)"), "xeb", "trivial", "trace", or "exact:<irrep>".
FilterSpec parse_filter(const std::string& name);

}  // namespace frb
