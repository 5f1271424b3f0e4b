#pragma once

#include <array>
#include <functional>
#include <random>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "frb/ensemble.hpp"
#include "frb/group.hpp"

namespace frb {

// Implementation map g -> noisy channel: completely positive, trace
// non-increasing, Markovian and time-stationary.  The error channel composes
// after the ideal layer.
struct NoiseModel {
  enum class Type { none, gate_independent, local_pauli, gate_dependent };
  Type type = Type::none;

  Superop channel;  // gate_independent: PTM of the per-layer error channel

  // local_pauli: per-site (pX, pY, pZ); optional joint table overrides the
  // product form (label index -> probability, identity takes the remainder).
  std::vector<std::array<double, 3>> rates;
  std::vector<std::pair<WeylLabel, double>> joint_table;

  std::function<Superop(const GroupElement&)> dense_map;  // gate_dependent

  static NoiseModel none_model() { return NoiseModel{}; }
  static NoiseModel depolarizing(double f, int p, int n);
  static NoiseModel local_depolarizing(double eps, int n);
  static NoiseModel local_pauli(std::vector<std::array<double, 3>> rates);

  bool pauli_diagonal() const { return type != Type::gate_dependent || !dense_map; }

  static NoiseModel from_json(const nlohmann::json& j, int p, int n);
  nlohmann::json to_json() const;
};

// Validation helpers: Choi minimum eigenvalue (CP up to -tol) and trace
// non-increase of the adjoint applied to the identity.
double choi_min_eigenvalue(const Superop& channel);
bool trace_non_increasing(const Superop& channel, double tol = 1e-9);
void validate_channel(const Superop& channel, double tol = 1e-9);

// Dense PTM of the error channel itself (identity for none; product of
// single-site Pauli channels for local_pauli).  gate_dependent has no
// gate-free channel and throws.
Superop noise_channel_dense(const NoiseModel& m, int p, int n);

// phi(g) = error channel composed after the ideal superoperator.
Superop apply_noise(const NoiseModel& m, const GroupElement& g);

// One stochastic unraveling of the layer's Pauli error: the Weyl label to
// insert after the layer (empty when the identity was drawn).  Averaging the
// induced channels over trajectories reproduces noise_channel_dense.
std::vector<WeylLabel> pauli_trajectory(const NoiseModel& m, int n, std::mt19937_64& rng);

// State-preparation / measurement error channels (either may be identity).
struct SpamModel {
  Superop prep;  // acts on the ideal rho
  Superop meas;  // acts on the state before ideal readout (E_M)
  bool trivial = true;

  static SpamModel none_model(int p, int n);
  static SpamModel depolarizing_meas(double f, int p, int n);
  static SpamModel from_json(const nlohmann::json& j, int p, int n);
};

// PTM coordinates of |0...0><0...0| in the real Weyl basis.
VectorXd zero_state_coords(int p, int n);
// PTM coordinates of the computational-basis effect |i><i|.
VectorXd basis_effect_coords(int p, int n, std::uint64_t outcome);

}  // namespace frb
