#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "frb/ensemble.hpp"
#include "frb/frame.hpp"
#include "frb/noise.hpp"

namespace frb {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Backend { dense, stabilizer };
Backend parse_backend(const std::string& name);

// FNV-1a of the canonical parameter string; the stamp embedded in outputs.
std::uint64_t config_hash_of(const std::string& canonical);

// Per-shot estimator columns.  `standard` is the frame-filtered function for
// one irrep; `xeb` the cross-entropy variant of the adjoint filter; `trivial`
// the click indicator / d; `trace` the unital-direction filter (needs an
// ensemble invariant under right local-Clifford multiplication); `exact_frame`
// replaces the group frame operator by the depth-m circuit frame operator.
enum class FilterKind { standard, xeb, trivial, trace, exact_frame };

struct FilterSpec {
  FilterKind kind = FilterKind::standard;
  std::string lambda = "ad";  // irrep name for standard / exact_frame
  std::string column_name() const;
};

struct ShotRecord {
  int m = 0;
  Index circuit = 0;
  std::uint64_t seed = 0;     // per-circuit derived seed
  std::uint64_t outcome = 0;  // bitstring (bit k = qubit k); no-click: ~0
  bool clicked = true;
  std::vector<double> filters;  // one value per column
};

struct EstimateRow {
  std::string column;
  int m = 0;
  Index n_shots = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
};

struct RBDataset {
  std::vector<std::string> columns;
  std::vector<int> ms;
  Index n_circuits = 0, n_meas = 1;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::vector<EstimateRow> estimates;
  std::vector<ShotRecord> shots;  // retained only with shot_log
  // Per-circuit mean and sample variance of each column, [col][m index][c];
  // feeds the multi-shot variance decomposition.
  std::vector<std::vector<std::vector<double>>> circuit_means, circuit_vars;

  const EstimateRow& row(const std::string& column, int m) const;
};

struct ProtocolOptions {
  Backend backend = Backend::dense;
  Index n_circuits = 100;  // N_C random circuits per depth
  Index n_meas = 1;        // N_M measurements per circuit (1: single-shot)
  std::uint64_t seed = 1;
  bool include_m0 = false;  // keep / prepend depth-0 sequences
  bool shot_log = false;
  std::vector<FilterSpec> filters{FilterSpec{}};
  Index frame_mc_samples = 2000;  // circuits per depth for exact_frame
};

// Deterministic seed stream: the (stage, a, b) triple hashes to one
// independent seed, so results do not depend on the worker count.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage,
                          std::uint64_t a, std::uint64_t b);

// Single-shot filter value f_lambda(i, g) = <<rho| P_lambda S^+ w(g)^dag |E_i>>.
double filter_value(const FrameOperator& f, const IrrepSpec& lambda,
                    const GroupElement& g, std::uint64_t outcome,
                    const VectorXd& rho);

// Draw random circuits at every depth in ms, propagate |0..0> through the
// noisy implementation, sample outcomes (a lost shot contributes filter value
// 0), and evaluate every filter column on the ideal circuit.  Estimates are
// means over circuits; the standard error is the spread of per-circuit means.
RBDataset run_protocol(const Ensemble& e, const NoiseModel& noise,
                       const SpamModel& spam, const std::vector<int>& ms,
                       const ProtocolOptions& opt);

// d/(d+1) times the adjoint-filter mean per depth ("xeb" column when present,
// else "ad"); the depth-0 row is the ideal-overlap constant (d-1)/(d+1).
std::vector<std::pair<int, double>> xeb_estimator(const RBDataset& ds, Index d);

struct VarianceDecomposition {
  double within = 0.0;   // mean per-circuit sample variance  (E_g Var)
  double between = 0.0;  // variance of circuit means, debiased (Var_g E)
  double total = 0.0;    // single-shot variance: within + between
};
VarianceDecomposition multishot_variance(const RBDataset& ds,
                                         const std::string& column, int m);

// CSV: "lambda,m,n_shots,estimate,stderr", one row per (column, depth).
void write_csv(std::ostream& os, const RBDataset& ds);
// JSONL shot log, one record per line (requires shot_log).
void write_jsonl(std::ostream& os, const RBDataset& ds);

}  // namespace frb
