#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "frb/tableau.hpp"

namespace frb {

// Stabilizer-tableau state simulation (qubits only): n stabilizer and n
// destabilizer generators with exact sign tracking.  Gates enter as Clifford
// tableaus, Pauli-channel noise as sampled Pauli insertions.
struct StabilizerState {
  int n = 0;
  std::vector<PauliBits> stab, destab;

  static StabilizerState zero_state(int n);

  // Conjugate every generator by the (full-width) Clifford.
  void apply(const CliffordTableau& c);
  // Conjugate by a Pauli: flips signs of anticommuting generators.
  void apply_pauli(const PauliBits& a);

  // Measure every qubit in the computational basis (collapses the state);
  // bit k of the result is the outcome on qubit k.
  std::uint64_t measure_all(std::mt19937_64& rng);

  // Born probability of one full bitstring: 2^{-#random qubits} or 0,
  // evaluated by forced measurement on a copy.
  double prob_of_outcome(std::uint64_t outcome) const;
};

}  // namespace frb
