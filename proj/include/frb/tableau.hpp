#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "frb/superop.hpp"
#include "frb/weyl.hpp"

namespace frb {

// n-qubit Pauli in ZX form i^s Z(z) X(x), bitmask per site (site k = bit k),
// s mod 4.  Hermitian iff s + |z & x| is even.
struct PauliBits {
  std::uint64_t z = 0, x = 0;
  int s = 0;

  static PauliBits from_weyl(const WeylLabel& a);
  bool identity_bits() const { return z == 0 && x == 0; }
};

inline int parity64(std::uint64_t v) { return __builtin_parityll(v); }

// Product q1 * q2 of ZX-form Paulis.
PauliBits pauli_mul(const PauliBits& q1, const PauliBits& q2);

// Hermitian Weyl image: returns the label index and fills sign with +-1.
// Throws if the Pauli is not proportional to a Hermitian Weyl operator.
Index pauli_to_weyl(const PauliBits& q, int n, int& sign);

// ---- Clifford tableau over F_2 ----

// Stores conjugation images of the generators X_k, Z_k as Hermitian Paulis.
struct CliffordTableau {
  int n = 0;
  std::vector<PauliBits> img_x, img_z;

  static CliffordTableau identity(int n);
  bool is_valid() const;  // symplectic condition + Hermitian images

  PauliBits conjugate(const PauliBits& q) const;

  CliffordTableau then(const CliffordTableau& second) const;  // second ∘ this
  CliffordTableau inverse() const;

  bool operator==(const CliffordTableau& o) const;
};

// Named gates (full-width tableaus acting on the given sites).
CliffordTableau tab_h(int n, int k);
CliffordTableau tab_s(int n, int k);
CliffordTableau tab_cx(int n, int control, int target);
// Left-multiply by the Pauli with the given bits: C -> w(a) C.
CliffordTableau pauli_times(const PauliBits& a, const CliffordTableau& c);

// ---- signed permutation action on the Weyl basis ----

struct SignedPerm {
  std::vector<Index> perm;    // image label of each basis label
  std::vector<int8_t> sign;

  Index dim() const { return Index(perm.size()); }
  SignedPerm then(const SignedPerm& second) const;  // second ∘ this
  SignedPerm inverse() const;
  void apply(const double* in, double* out) const {
    for (Index i = 0; i < dim(); ++i) out[perm[i]] = sign[i] * in[i];
  }
};

SignedPerm clifford_action(const CliffordTableau& c);
Superop to_superop(const CliffordTableau& c);

// ---- sampling & enumeration ----

// Uniform Clifford modulo phase: uniform symplectic part via sequential
// hyperbolic-pair choices, uniform generator signs.
CliffordTableau sample_clifford(int n, std::mt19937_64& rng);

// All |Sp(2n,2)| symplectic parts as sign-free tableaus (n <= 2).
std::vector<CliffordTableau> enumerate_symplectic(int n);

// Streaming traversal of Sp(2n,2) without storing tableaus (n <= 3).
void for_each_symplectic(int n, const std::function<void(const CliffordTableau&)>& fn);

// All |Sp(2n,2)| * 4^n distinct Clifford channels (n <= 2).
std::vector<CliffordTableau> enumerate_clifford(int n);

}  // namespace frb
