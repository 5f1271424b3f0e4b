#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "frb/group.hpp"

namespace frb {

// One circuit-layer measure: a distribution over parallel gate layers whose
// i.i.d. products form the random circuits the protocol draws.
enum class Arch { lrc, bw, exact };
enum class GateSet { haar, clifford_haar, generators };
enum class Boundary { open, periodic };

const char* arch_name(Arch a);
const char* gateset_name(GateSet g);

struct Ensemble {
  Arch arch = Arch::lrc;
  int p = 2, n = 2;
  Boundary bc = Boundary::open;
  std::vector<std::pair<int, int>> edges;  // connectivity; (control, target) for CX
  std::vector<double> edge_probs;          // uniform when empty (LRC only)
  GateSet gateset = GateSet::haar;
  double cx_prob = 0.35;                   // CX weight inside the generator set
  GroupKind group = GroupKind::clifford;   // drawn group for arch == exact
  bool right_lc_invariant = false;         // asserted invariance under right
                                           // multiplication by local Cliffords

  // Nearest-neighbour chain edges for the given boundary condition.
  static std::vector<std::pair<int, int>> nn_edges(int n, Boundary bc);
  static std::vector<std::pair<int, int>> complete_edges(int n);

  static Ensemble lrc_nn(int n, Boundary bc = Boundary::open, GateSet gs = GateSet::haar);
  static Ensemble brickwork(int n, GateSet gs = GateSet::haar);
  static Ensemble exact_group(GroupKind g, int n);

  void validate() const;  // throws config_error

  static Ensemble from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// One gate placed at one or two sites (or the whole register for width n).
struct LayerGate {
  int site0 = 0, site1 = -1;  // site1 < 0: single-site or full-width gate
  GroupElement g;
};

struct LayerSample {
  int p = 2, n = 1;
  std::vector<LayerGate> gates;  // applied in listed order
};

// One i.i.d. draw from the layer measure.  Brickwork returns the two-sublayer
// composite: gates on even-start pairs (1-based) first, then odd-start pairs.
LayerSample sample_layer(const Ensemble& e, std::mt19937_64& rng);

// The weighted two-qubit generator set {P*U : P Pauli pair, U in
// {1,S,H}x{1,S,H} or CX}; CX carries total weight cx_prob, the nine
// single-qubit products share the rest uniformly; Paulis uniform throughout.
struct WeightedCliffords {
  std::vector<CliffordTableau> elems;  // 2-qubit tableaus
  std::vector<double> probs;
};
const WeightedCliffords& generator_set(double cx_prob);

// Haar-random unitary via QR of a Gaussian matrix with phase fixing.
MatrixXcd haar_unitary(Index d, std::mt19937_64& rng);

// ---- layer application ----

// Real PTM of the gate (4^w x 4^w for width w) used by the dense backend.
MatrixXd gate_ptm(const GroupElement& g);

// Flat-index bit positions of the gate's PTM coordinates inside the n-site
// (z, x)-split layout: x bits first (site, then site+n for z), per gate site.
std::vector<int> gate_bits(const LayerGate& gate, int n);

// In-place ideal layer action on a PTM coordinate vector (p = 2).
void apply_layer(const LayerSample& layer, VectorXd& v);
// Adjoint (inverse) action, gates reversed and transposed.
void apply_layer_adjoint(const LayerSample& layer, VectorXd& v);

// Dense superoperator of the layer (tests and Monte-Carlo averaging).
Superop layer_superop(const LayerSample& layer);

// Full-width tableau of a layer of Clifford/Weyl gates (stabilizer backend).
CliffordTableau layer_tableau(const LayerSample& layer);

// Embed a width-w gate tableau at the given sites of an n-qubit register.
CliffordTableau embed_tableau(const CliffordTableau& gate, const std::vector<int>& sites, int n);

}  // namespace frb
