// frb: filtered randomized-benchmarking simulator and analysis tool.
//
// Subcommands: simulate, gap, fit, bounds, moments, perturb-check.  Structured
// results go to stdout as JSON, per-depth series as CSV; every output carries
// the configuration hash and the tool version, and a rerun with the same
// inputs is byte-identical.  Exit codes: 0 success, 2 configuration error,
// 3 over capacity, 4 numerical non-convergence.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "frb/bounds.hpp"
#include "frb/config.hpp"
#include "frb/engine.hpp"
#include "frb/errors.hpp"
#include "frb/fit.hpp"
#include "frb/irreps.hpp"
#include "frb/moments.hpp"
#include "frb/perturb.hpp"
#include "frb/second_moment.hpp"

namespace {

using nlohmann::json;

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << "0x" << std::hex << h;
  return os.str();
}

void stamp(json& out, std::uint64_t h) {
  out["config_hash"] = hash_hex(h);
  out["tool_version"] = frb::kToolVersion;
}

void emit(const json& out) { std::cout << out.dump(2) << '\n'; }

void cap_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

// Layer measures addressable from the command line; generator archs honour
// the CX weight.
frb::Ensemble ensemble_of_arch(const std::string& arch, int n, double cx_prob) {
  using frb::Ensemble;
  if (arch == "lrc_nn") return Ensemble::lrc_nn(n);
  if (arch == "lrc_nn_pbc") return Ensemble::lrc_nn(n, frb::Boundary::periodic);
  if (arch == "lrc_nn_clifford")
    return Ensemble::lrc_nn(n, frb::Boundary::open, frb::GateSet::clifford_haar);
  if (arch == "lrc_complete") {
    Ensemble e = Ensemble::lrc_nn(n);
    e.edges = Ensemble::complete_edges(n);
    return e;
  }
  if (arch == "bw") return Ensemble::brickwork(n);
  if (arch == "bw_clifford") return Ensemble::brickwork(n, frb::GateSet::clifford_haar);
  if (arch == "generator_lrc_nn" || arch == "generator_lrc_complete" ||
      arch == "generator_bw") {
    Ensemble e = arch == "generator_bw" ? Ensemble::brickwork(n)
                                        : Ensemble::lrc_nn(n);
    if (arch == "generator_lrc_complete") e.edges = Ensemble::complete_edges(n);
    e.gateset = frb::GateSet::generators;
    e.cx_prob = cx_prob;
    e.right_lc_invariant = false;
    return e;
  }
  if (arch == "exact_clifford")
    return Ensemble::exact_group(frb::GroupKind::clifford, n);
  if (arch == "exact_local_clifford")
    return Ensemble::exact_group(frb::GroupKind::local_clifford, n);
  if (arch == "exact_hw")
    return Ensemble::exact_group(frb::GroupKind::heisenberg_weyl, n);
  throw frb::config_error("gap: unknown architecture '" + arch + "'");
}

// ---- simulate ----

struct SimulateArgs {
  std::string config_path;
  long long shots = -1;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string backend, output_csv, output_jsonl;
  int threads = 0;
};

int run_simulate(const SimulateArgs& a) {
  cap_threads(a.threads);
  frb::ExperimentConfig cfg = frb::ExperimentConfig::from_file(a.config_path);

  if (const char* env = std::getenv("FRB_SEED")) {
    try {
      size_t pos = 0;
      cfg.options.seed = std::stoull(env, &pos, 0);
      if (pos != std::string(env).size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw frb::config_error(std::string("simulate: FRB_SEED is not an integer: '") + env + "'");
    }
  }
  if (a.seed_given) cfg.options.seed = a.seed;
  if (a.shots == 0)
    throw frb::config_error("simulate: --shots must be a positive integer");
  if (a.shots > 0) cfg.options.n_circuits = frb::Index(a.shots);
  if (!a.backend.empty()) cfg.options.backend = frb::parse_backend(a.backend);
  if (!a.output_csv.empty()) cfg.output_csv = a.output_csv;
  if (!a.output_jsonl.empty()) cfg.output_jsonl = a.output_jsonl;
  if (!cfg.output_jsonl.empty()) cfg.options.shot_log = true;

  frb::RBDataset ds =
      frb::run_protocol(cfg.ensemble, cfg.noise, cfg.spam, cfg.ms, cfg.options);

  if (!cfg.output_jsonl.empty()) {
    std::ofstream out(cfg.output_jsonl);
    if (!out) throw frb::config_error("simulate: cannot write '" + cfg.output_jsonl + "'");
    frb::write_jsonl(out, ds);
  }
  if (cfg.output_csv.empty()) {
    frb::write_csv(std::cout, ds);
  } else {
    std::ofstream out(cfg.output_csv);
    if (!out) throw frb::config_error("simulate: cannot write '" + cfg.output_csv + "'");
    frb::write_csv(out, ds);
    json summary;
    summary["columns"] = ds.columns;
    summary["depths"] = ds.ms;
    summary["shots"] = ds.n_circuits;
    summary["csv"] = cfg.output_csv;
    if (!cfg.output_jsonl.empty()) summary["jsonl"] = cfg.output_jsonl;
    stamp(summary, ds.config_hash);
    emit(summary);
  }
  return 0;
}

// ---- gap ----

struct GapArgs {
  std::string arch;
  int n = 2, t = 2;
  double cx_prob = 0.35;
  bool table = false, matrix_free = false;
  int threads = 0;
};

int run_gap(const GapArgs& a) {
  cap_threads(a.threads);
  json out;
  out["arch"] = a.arch;
  out["n"] = a.n;
  out["t"] = a.t;
  std::ostringstream canon;
  canon << "gap|" << a.arch << '|' << a.n << '|' << a.t << '|' << a.table << '|'
        << a.cx_prob;
  if (a.table) {
    auto [bound, provenance] = frb::tabulated_gap(a.arch, a.n, a.t);
    out["gap"] = bound;
    out["method"] = "table";
    out["provenance"] = provenance;
  } else {
    frb::Ensemble e = ensemble_of_arch(a.arch, a.n, a.cx_prob);
    const double dim = std::pow(4.0, double(e.n) * a.t);
    if (!a.matrix_free && dim > 4096.0)
      throw frb::capacity_error(
          "gap: operator dimension " + std::to_string((long long)dim) +
          " exceeds the dense limit 4096; pass --matrix-free");
    frb::MomentOperator m = frb::moment_operator(e, a.t);
    frb::GapResult g = frb::spectral_gap(m);
    out["gap"] = g.gap;
    out["method"] = g.method;
    out["residual"] = g.residual;
  }
  stamp(out, frb::config_hash_of(canon.str()));
  emit(out);
  return 0;
}

// ---- fit ----

struct FitArgs {
  std::string csv_path, column = "ad";
  int m_min = 0;
};

int run_fit(const FitArgs& a) {
  std::ifstream in(a.csv_path);
  if (!in) throw frb::config_error("fit: cannot open '" + a.csv_path + "'");

  std::string line;
  std::uint64_t source_hash = 0;
  bool have_source_hash = false, have_header = false;
  std::vector<int> ms;
  std::vector<double> vals, errs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("config_hash=");
      if (pos != std::string::npos) {
        source_hash = std::stoull(line.substr(pos + 12), nullptr, 0);
        have_source_hash = true;
      }
      continue;
    }
    if (!have_header) {  // "lambda,m,n_shots,estimate,stderr"
      have_header = true;
      continue;
    }
    std::istringstream row(line);
    std::string lam, field;
    std::getline(row, lam, ',');
    if (lam != a.column) continue;
    std::getline(row, field, ',');
    int m = std::stoi(field);
    std::getline(row, field, ',');  // n_shots, unused
    std::getline(row, field, ',');
    double est = std::stod(field);
    std::getline(row, field, ',');
    double se = std::stod(field);
    ms.push_back(m);
    vals.push_back(est);
    errs.push_back(se);
  }
  if (ms.empty())
    throw frb::config_error("fit: no rows for column '" + a.column + "' in '" +
                            a.csv_path + "'");

  Eigen::Map<const frb::VectorXd> v(vals.data(), frb::Index(vals.size()));
  Eigen::Map<const frb::VectorXd> s(errs.data(), frb::Index(errs.size()));
  frb::DecayFit fit = frb::fit_decay(ms, v, s, a.m_min);

  json out;
  out["column"] = a.column;
  out["a"] = fit.a;
  out["r"] = fit.r;
  out["stderr_a"] = fit.stderr_a;
  out["stderr_r"] = fit.stderr_r;
  out["m_window"] = {fit.m_min, fit.m_max};
  out["n_points"] = fit.n_points;
  out["residual_norm"] = fit.residual_norm;
  out["degenerate"] = fit.degenerate;
  std::uint64_t h = have_source_hash
                        ? source_hash
                        : frb::config_hash_of("fit|" + a.csv_path + "|" + a.column);
  stamp(out, h);
  emit(out);
  return 0;
}

// ---- bounds ----

struct BoundsArgs {
  std::string arch;
  int n = 0;
  double alpha = 0.0;
  bool alpha_given = false;
  std::string mode = "additive";
  double visibilities = 1.0;
  double eps = 0.0, delta_prob = 0.0, second_moment = 0.0;
};

json bounds_row_json(const frb::SequenceLengthRow& r, int n, bool alpha_given) {
  json jr;
  jr["arch"] = r.arch;
  jr["scaling"] = r.scaling;
  jr["coefficient"] = r.coefficient;
  jr["reference"] = r.reference;
  jr["discrepancy"] = r.discrepancy;
  double denom = r.scaling == "n" ? double(n) : double(n) * n;
  jr["m_alpha_free"] = r.coefficient * denom;
  jr["gap"] = 2.0 * 1.75 * n / (r.coefficient * denom);
  if (alpha_given) jr["m"] = r.m;
  return jr;
}

int run_bounds(const BoundsArgs& a) {
  if (a.n < 2) throw frb::config_error("bounds: need --n >= 2");
  frb::BoundMode mode;
  if (a.mode == "additive")
    mode = frb::BoundMode::additive;
  else if (a.mode == "relative")
    mode = frb::BoundMode::relative;
  else
    throw frb::config_error("bounds: --mode must be 'additive' or 'relative'");

  const double alpha = a.alpha_given ? a.alpha : 1.0;  // log(1/1) = 0 in the table
  std::vector<frb::SequenceLengthRow> rows = frb::sequence_length_table(a.n, alpha);

  json out;
  out["n"] = a.n;
  out["mode"] = a.mode;
  if (a.alpha_given) out["alpha"] = a.alpha;
  std::ostringstream canon;
  canon << "bounds|" << a.arch << '|' << a.n << '|' << alpha << '|' << a.mode
        << '|' << a.visibilities;

  if (a.arch.empty()) {
    json jrows = json::array();
    for (const auto& r : rows) jrows.push_back(bounds_row_json(r, a.n, a.alpha_given));
    out["table"] = jrows;
  } else {
    const frb::SequenceLengthRow* found = nullptr;
    for (const auto& r : rows)
      if (r.arch == a.arch) found = &r;
    if (!found)
      throw frb::config_error("bounds: no tabulated entry for architecture '" +
                              a.arch + "'");
    json jr = bounds_row_json(*found, a.n, a.alpha_given);
    double gap = jr["gap"].get<double>();
    if (a.alpha_given) {
      jr["m"] = frb::sequence_length_design(gap, a.n, a.alpha, mode, a.visibilities);
      jr["bracket_design"] = 1.75 * a.n;
      jr["bracket_alpha"] = std::log(1.0 / a.alpha);
      jr["bracket_g"] = 1.8;
      jr["prefactor"] = (mode == frb::BoundMode::relative ? 5.0 : 2.0) / gap;
    }
    out.update(jr);
  }
  if (a.eps > 0.0 && a.delta_prob > 0.0) {
    if (!(a.second_moment > 0.0))
      throw frb::config_error("bounds: sampling bound needs --second-moment > 0");
    out["samples"] = frb::sampling_bound(a.second_moment,
                                         a.alpha_given ? a.alpha : 0.0, a.eps,
                                         a.delta_prob);
    canon << '|' << a.eps << '|' << a.delta_prob << '|' << a.second_moment;
  }
  stamp(out, frb::config_hash_of(canon.str()));
  emit(out);
  return 0;
}

// ---- moments ----

struct MomentsArgs {
  std::string group = "clifford", lambda = "ad";
  int p = 2, n = 1;
  double vis = 1.0;
  long long k_lambda = 1;
  bool sigma = true;
};

int run_moments(const MomentsArgs& a) {
  frb::GroupKind kind;
  if (a.group == "clifford")
    kind = frb::GroupKind::clifford;
  else if (a.group == "local_clifford")
    kind = frb::GroupKind::local_clifford;
  else if (a.group == "heisenberg_weyl")
    kind = frb::GroupKind::heisenberg_weyl;
  else if (a.group == "unitary_2_group")
    kind = frb::GroupKind::unitary_2_group;
  else
    throw frb::config_error("moments: unknown group '" + a.group + "'");

  std::vector<frb::IrrepSpec> irreps = frb::irrep_projectors(kind, a.p, a.n);
  const frb::IrrepSpec& lam = frb::find_irrep(irreps, a.lambda);
  const double d = double(frb::pow_index(a.p, a.n));

  json out;
  out["group"] = a.group;
  out["p"] = a.p;
  out["n"] = a.n;
  out["lambda"] = a.lambda;
  out["ideal"] = frb::ideal_second_moment(kind, a.p, a.n, lam, a.vis);
  if (a.vis < 1.0) out["visibility"] = a.vis;
  if (!lam.is_trivial()) {
    auto [lo, hi] = frb::second_moment_bounds(lam, frb::Index(d), frb::Index(a.k_lambda));
    out["bound_lower"] = lo;
    out["bound_upper"] = hi;
  }
  if (a.sigma) {
    try {
      frb::SigmaBlocks blocks = frb::sigma_block_traces(kind, a.p, a.n, lam);
      json js;
      js["traces"] = blocks.traces;
      js["dims"] = blocks.dims;
      js["total"] = blocks.total;
      out["sigma"] = js;
    } catch (const frb::capacity_error&) {
      out["sigma"] = nullptr;  // over the exact-enumeration size
    }
  }
  std::ostringstream canon;
  canon << "moments|" << a.group << '|' << a.p << '|' << a.n << '|' << a.lambda
        << '|' << a.vis << '|' << a.k_lambda;
  stamp(out, frb::config_hash_of(canon.str()));
  emit(out);
  return 0;
}

// ---- perturb-check ----

struct PerturbArgs {
  int instances = 500;
  long long dim = 16, k = 1;
  double gap = 0.4, tol = 1e-10;
  std::uint64_t seed = 7;
};

int run_perturb_check(const PerturbArgs& a) {
  frb::PerturbSuiteResult r = frb::perturb_random_suite(
      a.instances, frb::Index(a.dim), frb::Index(a.k), a.gap, a.seed, a.tol);
  json out;
  out["instances"] = r.instances;
  out["dim"] = a.dim;
  out["k"] = a.k;
  out["gap"] = a.gap;
  out["seed"] = a.seed;
  out["tol"] = a.tol;
  out["residual_failures"] = r.residual_failures;
  out["bound_failures"] = r.bound_failures;
  out["max_residual"] = r.max_residual;
  out["max_e_norm"] = r.max_e_norm;
  std::ostringstream canon;
  canon << "perturb-check|" << a.instances << '|' << a.dim << '|' << a.k << '|'
        << a.gap << '|' << a.seed << '|' << a.tol;
  stamp(out, frb::config_hash_of(canon.str()));
  emit(out);
  return r.residual_failures + r.bound_failures > 0 ? 4 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"filtered randomized-benchmarking simulator and analysis tool"};
  app.require_subcommand(1);
  app.set_version_flag("--version", frb::kToolVersion);

  SimulateArgs sim;
  CLI::App* c_sim = app.add_subcommand("simulate", "run the sampling protocol from a JSON config");
  c_sim->add_option("--config", sim.config_path, "experiment configuration file")->required();
  c_sim->add_option("--shots", sim.shots, "override: random circuits per depth");
  CLI::Option* seed_opt = c_sim->add_option("--seed", sim.seed, "override: master seed");
  c_sim->add_option("--backend", sim.backend, "override: dense | stabilizer");
  c_sim->add_option("--output-csv", sim.output_csv, "write the estimate series here");
  c_sim->add_option("--output-jsonl", sim.output_jsonl, "write the per-shot log here");
  c_sim->add_option("--threads", sim.threads, "cap the worker count");

  GapArgs gap;
  CLI::App* c_gap = app.add_subcommand("gap", "spectral gap of a layer measure");
  c_gap->add_option("--arch", gap.arch, "architecture tag")->required();
  c_gap->add_option("--n", gap.n, "qubit count")->required();
  c_gap->add_option("--t", gap.t, "moment order");
  c_gap->add_option("--cx-prob", gap.cx_prob, "CX weight for generator sets");
  c_gap->add_flag("--table", gap.table, "report the certified bound instead of computing");
  c_gap->add_flag("--matrix-free", gap.matrix_free, "allow iterative methods past the dense limit");
  c_gap->add_option("--threads", gap.threads, "cap the worker count");

  FitArgs fit;
  CLI::App* c_fit = app.add_subcommand("fit", "exponential-decay fit of an estimate series");
  c_fit->add_option("--csv", fit.csv_path, "estimate series produced by simulate")->required();
  c_fit->add_option("--column", fit.column, "filter column to fit");
  c_fit->add_option("--m-min", fit.m_min, "drop depths below this");

  BoundsArgs bnd;
  CLI::App* c_bnd = app.add_subcommand("bounds", "sequence-length and sampling guarantees");
  c_bnd->add_option("--n", bnd.n, "qubit count")->required();
  c_bnd->add_option("--arch", bnd.arch, "single architecture (default: whole table)");
  CLI::Option* alpha_opt = c_bnd->add_option("--alpha", bnd.alpha, "target systematic error");
  c_bnd->add_option("--mode", bnd.mode, "additive | relative");
  c_bnd->add_option("--visibilities", bnd.visibilities, "SPAM visibility product");
  c_bnd->add_option("--eps", bnd.eps, "sampling: precision");
  c_bnd->add_option("--delta-prob", bnd.delta_prob, "sampling: failure probability");
  c_bnd->add_option("--second-moment", bnd.second_moment, "sampling: SPAM second moment");

  MomentsArgs mom;
  CLI::App* c_mom = app.add_subcommand("moments", "second-moment predictions and checks");
  c_mom->add_option("--group", mom.group, "clifford | local_clifford | heisenberg_weyl | unitary_2_group");
  c_mom->add_option("--n", mom.n, "qubit count")->required();
  c_mom->add_option("--p", mom.p, "local dimension");
  c_mom->add_option("--lambda", mom.lambda, "filter block name");
  c_mom->add_option("--vis", mom.vis, "depolarizing SPAM visibility");
  c_mom->add_option("--k-lambda", mom.k_lambda, "distinct frame eigenvalues on the block");
  c_mom->add_flag("!--no-sigma", mom.sigma, "skip the exact block-trace decomposition");

  PerturbArgs prt;
  CLI::App* c_prt = app.add_subcommand("perturb-check", "randomized self-test of the spectral split");
  c_prt->add_option("--instances", prt.instances, "number of random instances");
  c_prt->add_option("--dim", prt.dim, "operator dimension");
  c_prt->add_option("--k", prt.k, "dominant block size");
  c_prt->add_option("--gap", prt.gap, "unperturbed gap");
  c_prt->add_option("--tol", prt.tol, "reconstruction tolerance");
  c_prt->add_option("--seed", prt.seed, "instance seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  sim.seed_given = seed_opt->count() > 0;
  bnd.alpha_given = alpha_opt->count() > 0;

  try {
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_gap->parsed()) return run_gap(gap);
    if (c_fit->parsed()) return run_fit(fit);
    if (c_bnd->parsed()) return run_bounds(bnd);
    if (c_mom->parsed()) return run_moments(mom);
    if (c_prt->parsed()) return run_perturb_check(prt);
  } catch (const frb::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const frb::capacity_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const frb::convergence_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
