#include "frb/ensemble.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "frb/errors.hpp"
#include "frb/kernels.hpp"

namespace frb {

const char* arch_name(Arch a) {
  switch (a) {
    case Arch::lrc: return "lrc";
    case Arch::bw: return "bw";
    case Arch::exact: return "exact";
  }
  throw std::logic_error("arch_name: bad enum value");
}

const char* gateset_name(GateSet g) {
  switch (g) {
    case GateSet::haar: return "haar";
    case GateSet::clifford_haar: return "clifford_haar";
    case GateSet::generators: return "generators";
  }
  throw std::logic_error("gateset_name: bad enum value");
}

std::vector<std::pair<int, int>> Ensemble::nn_edges(int n, Boundary bc) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  if (bc == Boundary::periodic && n > 2) e.emplace_back(n - 1, 0);
  return e;
}

std::vector<std::pair<int, int>> Ensemble::complete_edges(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return e;
}

Ensemble Ensemble::lrc_nn(int n, Boundary bc, GateSet gs) {
  Ensemble e;
  e.arch = Arch::lrc;
  e.n = n;
  e.bc = bc;
  e.edges = nn_edges(n, bc);
  e.gateset = gs;
  e.validate();
  return e;
}

Ensemble Ensemble::brickwork(int n, GateSet gs) {
  Ensemble e;
  e.arch = Arch::bw;
  e.n = n;
  e.edges = nn_edges(n, Boundary::open);
  e.gateset = gs;
  // Every site meets a Haar(-type) gate inside one composite layer, so the
  // measure absorbs a preceding layer of local unitaries.
  e.right_lc_invariant = (gs == GateSet::haar || gs == GateSet::clifford_haar);
  e.validate();
  return e;
}

Ensemble Ensemble::exact_group(GroupKind g, int n) {
  Ensemble e;
  e.arch = Arch::exact;
  e.n = n;
  e.group = g;
  // Uniform (local) Clifford measures are invariant under right multiplication
  // by local Cliffords; the other exact groups are not.
  e.right_lc_invariant =
      (g == GroupKind::clifford || g == GroupKind::local_clifford);
  e.validate();
  return e;
}

void Ensemble::validate() const {
  if (p != 2) throw config_error("ensemble: only p = 2 circuit layers are supported");
  if (n < 1) throw config_error("ensemble: n must be positive");
  if (cx_prob < 0.0 || cx_prob > 1.0)
    throw config_error("ensemble: cx_prob outside [0, 1]");
  if (arch == Arch::exact) {
    if (group == GroupKind::unitary_2_group && n > 5)
      throw config_error("ensemble: exact haar layers need n <= 5");
    return;
  }
  if (n < 2) throw config_error("ensemble: circuit architectures need n >= 2");
  if (edges.empty()) throw config_error("ensemble: no edges");
  for (auto [i, j] : edges)
    if (i < 0 || j < 0 || i >= n || j >= n || i == j)
      throw config_error("ensemble: bad edge");
  if (arch == Arch::bw && bc != Boundary::open)
    throw config_error("ensemble: brickwork supports open boundaries only");
  if (!edge_probs.empty()) {
    if (arch != Arch::lrc) throw config_error("ensemble: edge weights apply to LRC only");
    if (edge_probs.size() != edges.size())
      throw config_error("ensemble: edge weight count mismatch");
    double s = 0.0;
    for (double w : edge_probs) {
      if (w < 0.0) throw config_error("ensemble: negative edge weight");
      s += w;
    }
    if (std::abs(s - 1.0) > 1e-9)
      throw config_error("ensemble: edge weights must sum to 1");
  }
}

Ensemble Ensemble::from_json(const nlohmann::json& j) {
  Ensemble e;
  if (!j.is_object()) throw config_error("ensemble: config must be a JSON object");
  if (!j.contains("arch")) throw config_error("ensemble: missing 'arch'");
  const std::string arch = j.at("arch").get<std::string>();
  if (arch == "lrc") {
    e.arch = Arch::lrc;
  } else if (arch == "bw" || arch == "brickwork") {
    e.arch = Arch::bw;
  } else if (arch == "generator_lrc") {
    e.arch = Arch::lrc;
    e.gateset = GateSet::generators;
  } else if (arch == "generator_bw") {
    e.arch = Arch::bw;
    e.gateset = GateSet::generators;
  } else if (arch == "exact") {
    e.arch = Arch::exact;
  } else {
    throw config_error("ensemble: unknown arch '" + arch + "'");
  }
  if (!j.contains("n")) throw config_error("ensemble: missing 'n'");
  e.n = j.at("n").get<int>();
  e.p = j.value("p", 2);
  const std::string bc = j.value("bc", "obc");
  if (bc == "obc")
    e.bc = Boundary::open;
  else if (bc == "pbc")
    e.bc = Boundary::periodic;
  else
    throw config_error("ensemble: unknown bc '" + bc + "'");
  if (j.contains("gateset")) {
    const std::string gs = j.at("gateset").get<std::string>();
    if (gs == "haar")
      e.gateset = GateSet::haar;
    else if (gs == "clifford_haar" || gs == "clifford-haar")
      e.gateset = GateSet::clifford_haar;
    else if (gs == "generators")
      e.gateset = GateSet::generators;
    else
      throw config_error("ensemble: unknown gateset '" + gs + "'");
  }
  if (j.contains("edges")) {
    for (const auto& pr : j.at("edges")) {
      if (!pr.is_array() || pr.size() != 2)
        throw config_error("ensemble: edges must be [i, j] pairs");
      e.edges.emplace_back(pr[0].get<int>(), pr[1].get<int>());
    }
  } else if (e.arch != Arch::exact) {
    e.edges = nn_edges(e.n, e.bc);
  }
  if (j.contains("edge_probs"))
    e.edge_probs = j.at("edge_probs").get<std::vector<double>>();
  e.cx_prob = j.value("cx_prob", 0.35);
  if (j.contains("group")) e.group = parse_group(j.at("group").get<std::string>());
  if (e.arch == Arch::exact) {
    e.right_lc_invariant =
        (e.group == GroupKind::clifford || e.group == GroupKind::local_clifford);
  }
  if (j.contains("right_lc_invariant"))
    e.right_lc_invariant = j.at("right_lc_invariant").get<bool>();
  e.validate();
  return e;
}

nlohmann::json Ensemble::to_json() const {
  nlohmann::json j;
  j["arch"] = arch_name(arch);
  j["n"] = n;
  j["p"] = p;
  j["bc"] = bc == Boundary::open ? "obc" : "pbc";
  if (arch != Arch::exact) {
    nlohmann::json edges_j = nlohmann::json::array();
    for (auto [a, b] : edges) edges_j.push_back({a, b});
    j["edges"] = edges_j;
    j["gateset"] = gateset_name(gateset);
    if (!edge_probs.empty()) j["edge_probs"] = edge_probs;
    if (gateset == GateSet::generators) j["cx_prob"] = cx_prob;
  } else {
    j["group"] = group_name(group);
  }
  j["right_lc_invariant"] = right_lc_invariant;
  return j;
}

// ------------------------------------------------------------- gate draws ----

const WeightedCliffords& generator_set(double cx_prob) {
  static std::map<long long, std::unique_ptr<WeightedCliffords>> cache;
  static std::mutex mtx;
  const long long key = std::llround(cx_prob * 1e12);
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(key);
  if (it != cache.end()) return *it->second;

  auto w = std::make_unique<WeightedCliffords>();
  std::vector<CliffordTableau> cliff_parts;
  const CliffordTableau id2 = CliffordTableau::identity(2);
  std::vector<CliffordTableau> singles = {id2, tab_s(2, 0), tab_h(2, 0)};
  for (const auto& c0 : singles)
    for (const auto& c1 : {id2, tab_s(2, 1), tab_h(2, 1)})
      cliff_parts.push_back(c0.then(c1));
  const double p_single = (1.0 - cx_prob) / double(cliff_parts.size() * 16);
  cliff_parts.push_back(tab_cx(2, 0, 1));
  const double p_cx = cx_prob / 16.0;
  for (size_t u = 0; u < cliff_parts.size(); ++u) {
    const double prob = (u + 1 == cliff_parts.size()) ? p_cx : p_single;
    for (Index zx = 0; zx < 16; ++zx) {
      PauliBits pb = PauliBits::from_weyl(WeylLabel::from_index(zx, 2, 2));
      w->elems.push_back(pauli_times(pb, cliff_parts[u]));
      w->probs.push_back(prob);
    }
  }
  auto [ins, ok] = cache.emplace(key, std::move(w));
  (void)ok;
  return *ins->second;
}

MatrixXcd haar_unitary(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXcd a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) a(i, j) = cplx(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<MatrixXcd> qr(a);
  MatrixXcd q = qr.householderQ();
  MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j) {
    cplx rj = r(j, j);
    q.col(j) *= rj / std::abs(rj);
  }
  return q;
}

namespace {

GroupElement draw_edge_gate(const Ensemble& e, std::mt19937_64& rng) {
  GroupElement g;
  g.p = 2;
  g.n = 2;
  switch (e.gateset) {
    case GateSet::haar:
      g.kind = GroupElement::Kind::unitary;
      g.u = haar_unitary(4, rng);
      break;
    case GateSet::clifford_haar:
      g.kind = GroupElement::Kind::clifford;
      g.tab = sample_clifford(2, rng);
      break;
    case GateSet::generators: {
      const WeightedCliffords& ws = generator_set(e.cx_prob);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      double r = unif(rng), acc = 0.0;
      size_t pick = ws.elems.size() - 1;
      for (size_t i = 0; i < ws.probs.size(); ++i) {
        acc += ws.probs[i];
        if (r < acc) {
          pick = i;
          break;
        }
      }
      g.kind = GroupElement::Kind::clifford;
      g.tab = ws.elems[pick];
      break;
    }
  }
  return g;
}

size_t draw_edge_index(const Ensemble& e, std::mt19937_64& rng) {
  if (e.edge_probs.empty()) {
    std::uniform_int_distribution<size_t> unif(0, e.edges.size() - 1);
    return unif(rng);
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double r = unif(rng), acc = 0.0;
  for (size_t i = 0; i < e.edge_probs.size(); ++i) {
    acc += e.edge_probs[i];
    if (r < acc) return i;
  }
  return e.edge_probs.size() - 1;
}

}  // namespace

LayerSample sample_layer(const Ensemble& e, std::mt19937_64& rng) {
  LayerSample layer;
  layer.p = e.p;
  layer.n = e.n;
  switch (e.arch) {
    case Arch::lrc: {
      auto [i, j] = e.edges[draw_edge_index(e, rng)];
      layer.gates.push_back({i, j, draw_edge_gate(e, rng)});
      break;
    }
    case Arch::bw: {
      // Even-start pairs (1-based) first, then odd-start pairs.
      for (int a = 1; a + 1 < e.n; a += 2)
        layer.gates.push_back({a, a + 1, draw_edge_gate(e, rng)});
      for (int a = 0; a + 1 < e.n; a += 2)
        layer.gates.push_back({a, a + 1, draw_edge_gate(e, rng)});
      break;
    }
    case Arch::exact: {
      GroupElement g;
      g.p = e.p;
      switch (e.group) {
        case GroupKind::clifford:
          g.kind = GroupElement::Kind::clifford;
          g.n = e.n;
          g.tab = sample_clifford(e.n, rng);
          layer.gates.push_back({0, -1, std::move(g)});
          break;
        case GroupKind::local_clifford:
          for (int k = 0; k < e.n; ++k) {
            GroupElement s;
            s.p = e.p;
            s.n = 1;
            s.kind = GroupElement::Kind::clifford;
            s.tab = sample_clifford(1, rng);
            layer.gates.push_back({k, -1, std::move(s)});
          }
          break;
        case GroupKind::heisenberg_weyl: {
          const Index dim = pow_index(2, 2 * e.n);
          std::uniform_int_distribution<Index> unif(0, dim - 1);
          g.kind = GroupElement::Kind::weyl;
          g.n = e.n;
          g.a = WeylLabel::from_index(unif(rng), 2, e.n);
          layer.gates.push_back({0, -1, std::move(g)});
          break;
        }
        case GroupKind::unitary_2_group:
          g.kind = GroupElement::Kind::unitary;
          g.n = e.n;
          g.u = haar_unitary(pow_index(2, e.n), rng);
          layer.gates.push_back({0, -1, std::move(g)});
          break;
      }
      break;
    }
  }
  return layer;
}

// -------------------------------------------------------- layer application ----

MatrixXd gate_ptm(const GroupElement& g) { return element_superop(g).mat; }

std::vector<int> gate_bits(const LayerGate& gate, int n) {
  std::vector<int> sites = {gate.site0};
  if (gate.site1 >= 0) sites.push_back(gate.site1);
  if (gate.site1 < 0 && gate.g.n == n && n > 1) {
    // full-width gate: all x bits then all z bits
    std::vector<int> bits(size_t(2 * n));
    for (int k = 0; k < n; ++k) {
      bits[size_t(k)] = k;
      bits[size_t(n + k)] = n + k;
    }
    return bits;
  }
  std::vector<int> bits;
  for (int s : sites) bits.push_back(s);          // x digits of the gate label
  for (int s : sites) bits.push_back(n + s);      // z digits
  return bits;
}

void apply_layer(const LayerSample& layer, VectorXd& v) {
  const Index dim = pow_index(2, 2 * layer.n);
  if (v.size() != dim) throw std::invalid_argument("apply_layer: vector size mismatch");
  for (const auto& gate : layer.gates)
    apply_on_bits_serial(gate_ptm(gate.g), gate_bits(gate, layer.n), v.data(), dim);
}

void apply_layer_adjoint(const LayerSample& layer, VectorXd& v) {
  const Index dim = pow_index(2, 2 * layer.n);
  if (v.size() != dim)
    throw std::invalid_argument("apply_layer_adjoint: vector size mismatch");
  for (auto it = layer.gates.rbegin(); it != layer.gates.rend(); ++it)
    apply_on_bits_serial(gate_ptm(it->g).transpose(), gate_bits(*it, layer.n), v.data(),
                         dim);
}

Superop layer_superop(const LayerSample& layer) {
  Superop s(layer.p, layer.n);
  const Index dim = s.mat.rows();
  VectorXd col(dim);
  for (Index j = 0; j < dim; ++j) {
    col.setZero();
    col[j] = 1.0;
    apply_layer(layer, col);
    s.mat.col(j) = col;
  }
  return s;
}

namespace {

// Tableau of conjugation by w(a): identity images with symplectic signs.
CliffordTableau weyl_tableau(const WeylLabel& a, int n) {
  CliffordTableau t = CliffordTableau::identity(n);
  for (int k = 0; k < n; ++k) {
    t.img_x[size_t(k)].s = (t.img_x[size_t(k)].s + 2 * a.z[size_t(k)]) % 4;
    t.img_z[size_t(k)].s = (t.img_z[size_t(k)].s + 2 * a.x[size_t(k)]) % 4;
  }
  return t;
}

}  // namespace

CliffordTableau embed_tableau(const CliffordTableau& gate, const std::vector<int>& sites,
                              int n) {
  if (int(sites.size()) != gate.n)
    throw std::invalid_argument("embed_tableau: site count mismatch");
  auto remap = [&](const PauliBits& q) {
    PauliBits out;
    out.s = q.s;
    for (int b = 0; b < gate.n; ++b) {
      if ((q.z >> b) & 1) out.z |= std::uint64_t(1) << sites[size_t(b)];
      if ((q.x >> b) & 1) out.x |= std::uint64_t(1) << sites[size_t(b)];
    }
    return out;
  };
  CliffordTableau t = CliffordTableau::identity(n);
  for (int b = 0; b < gate.n; ++b) {
    t.img_x[size_t(sites[size_t(b)])] = remap(gate.img_x[size_t(b)]);
    t.img_z[size_t(sites[size_t(b)])] = remap(gate.img_z[size_t(b)]);
  }
  return t;
}

CliffordTableau layer_tableau(const LayerSample& layer) {
  CliffordTableau t = CliffordTableau::identity(layer.n);
  for (const auto& gate : layer.gates) {
    CliffordTableau full;
    switch (gate.g.kind) {
      case GroupElement::Kind::clifford: {
        if (gate.site1 < 0 && gate.g.n == layer.n) {
          full = gate.g.tab;
        } else {
          std::vector<int> sites = {gate.site0};
          if (gate.site1 >= 0) sites.push_back(gate.site1);
          full = embed_tableau(gate.g.tab, sites, layer.n);
        }
        break;
      }
      case GroupElement::Kind::weyl:
        full = weyl_tableau(gate.g.a, layer.n);
        break;
      default:
        throw std::invalid_argument("layer_tableau: non-Clifford gate in layer");
    }
    t = t.then(full);
  }
  return t;
}

}  // namespace frb
