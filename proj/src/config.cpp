#include "frb/config.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "frb/errors.hpp"
#include "frb/irreps.hpp"

namespace frb {

namespace {

const nlohmann::json& need(const nlohmann::json& j, const char* field) {
  if (!j.contains(field))
    throw config_error(std::string("config: missing field '") + field + "'");
  return j.at(field);
}

}  // namespace

FilterSpec parse_filter(const std::string& name) {
  FilterSpec spec;
  if (name == "xeb") {
    spec.kind = FilterKind::xeb;
  } else if (name == "trivial") {
    spec.kind = FilterKind::trivial;
  } else if (name == "trace") {
    spec.kind = FilterKind::trace;
  } else if (name.rfind("exact:", 0) == 0) {
    spec.kind = FilterKind::exact_frame;
    spec.lambda = name.substr(6);
  } else {
    spec.kind = FilterKind::standard;
    spec.lambda = name;
  }
  if (spec.kind == FilterKind::standard || spec.kind == FilterKind::exact_frame)
    group_of_irrep(spec.lambda);  // rejects malformed block names early
  return spec;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw config_error("config: top level must be an object");
  ExperimentConfig c;
  try {
    c.ensemble = Ensemble::from_json(need(j, "ensemble"));
  } catch (const config_error&) {
    throw;
  } catch (const std::exception& e) {
    throw config_error(std::string("config: field 'ensemble': ") + e.what());
  }
  c.ensemble.validate();

  if (j.contains("noise") && !j.at("noise").is_null()) {
    try {
      c.noise = NoiseModel::from_json(j.at("noise"), c.ensemble.p, c.ensemble.n);
    } catch (const config_error&) {
      throw;
    } catch (const std::exception& e) {
      throw config_error(std::string("config: field 'noise': ") + e.what());
    }
  }
  if (j.contains("spam") && !j.at("spam").is_null()) {
    try {
      c.spam = SpamModel::from_json(j.at("spam"), c.ensemble.p, c.ensemble.n);
    } catch (const config_error&) {
      throw;
    } catch (const std::exception& e) {
      throw config_error(std::string("config: field 'spam': ") + e.what());
    }
  } else {
    c.spam = SpamModel::none_model(c.ensemble.p, c.ensemble.n);
  }

  const nlohmann::json& jm = need(j, "ms");
  if (!jm.is_array() || jm.empty())
    throw config_error("config: field 'ms' must be a non-empty array");
  for (const auto& v : jm) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw config_error("config: field 'ms' entries must be non-negative integers");
    c.ms.push_back(v.get<int>());
  }

  const nlohmann::json& js = need(j, "shots");
  if (!js.is_number_integer() || js.get<long long>() <= 0)
    throw config_error("config: field 'shots' must be a positive integer");
  c.options.n_circuits = js.get<Index>();

  if (j.contains("n_meas")) {
    if (!j.at("n_meas").is_number_integer() || j.at("n_meas").get<long long>() <= 0)
      throw config_error("config: field 'n_meas' must be a positive integer");
    c.options.n_meas = j.at("n_meas").get<Index>();
  }
  if (j.contains("backend")) {
    try {
      c.options.backend = parse_backend(j.at("backend").get<std::string>());
    } catch (const std::exception& e) {
      throw config_error(std::string("config: field 'backend': ") + e.what());
    }
  }
  if (j.contains("filters")) {
    const nlohmann::json& jf = j.at("filters");
    if (!jf.is_array() || jf.empty())
      throw config_error("config: field 'filters' must be a non-empty array");
    c.options.filters.clear();
    std::set<std::string> seen;
    for (const auto& v : jf) {
      if (!v.is_string())
        throw config_error("config: field 'filters' entries must be strings");
      FilterSpec spec;
      try {
        spec = parse_filter(v.get<std::string>());
      } catch (const config_error& e) {
        throw config_error(std::string("config: field 'filters': ") + e.what());
      }
      if (!seen.insert(spec.column_name()).second)
        throw config_error("config: duplicate filter column '" + spec.column_name() + "'");
      c.options.filters.push_back(std::move(spec));
    }
  }
  if (j.contains("seed")) c.options.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("include_m0")) c.options.include_m0 = j.at("include_m0").get<bool>();
  if (j.contains("shot_log")) c.options.shot_log = j.at("shot_log").get<bool>();
  if (j.contains("frame_mc_samples")) {
    if (!j.at("frame_mc_samples").is_number_integer() ||
        j.at("frame_mc_samples").get<long long>() <= 0)
      throw config_error("config: field 'frame_mc_samples' must be a positive integer");
    c.options.frame_mc_samples = j.at("frame_mc_samples").get<Index>();
  }
  if (j.contains("output_csv")) c.output_csv = j.at("output_csv").get<std::string>();
  if (j.contains("output_jsonl")) c.output_jsonl = j.at("output_jsonl").get<std::string>();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw config_error("config: parse error in '" + path + "': " + e.what());
  }
  return from_json(j);
}

}  // namespace frb
