#pragma once

#include <string>
#include <vector>

#include "frb/group.hpp"
#include "frb/superop.hpp"

namespace frb {

// Isotypic projector of the conjugation representation.  For every supported
// group the projector is diagonal in the real Weyl basis (the groups contain
// the Weyl operators), so only the 0/1 diagonal is stored; dense form on
// demand.
struct IrrepSpec {
  std::string name;   // "1", "ad", "b=010", "w=(z,x)"
  int p = 2, n = 1;
  Index dim_lambda = 1;  // d_lambda (real dimension for paired odd-p blocks)
  Index mult = 1;        // n_lambda
  VectorXd diag;

  std::vector<Index> support() const;
  Superop projector() const;
  bool is_trivial() const { return name == "1" || name == "b=" + std::string(size_t(n), '1'); }
};

// All isotypic projectors for the group's conjugation action; they sum to the
// identity.  unitary_2_group and clifford yield {1, ad}; local_clifford one
// block per b in {0,1}^n (b_k = 1: trivial at site k); heisenberg_weyl one
// block per Weyl label (conjugate labels merged into 2-dim real blocks for
// odd p).
std::vector<IrrepSpec> irrep_projectors(GroupKind kind, int p, int n);

// Find a block by name.
const IrrepSpec& find_irrep(const std::vector<IrrepSpec>& list, const std::string& name);

// Group a block name belongs to by naming convention ("b=..." local Clifford,
// "w=..." Heisenberg-Weyl, "1"/"ad" Clifford).
GroupKind group_of_irrep(const std::string& name);

// Character projector dim_tau * avg_g conj(chi(g)) rho(g) for a finite group
// given by its representation matrices.  Throws if the result is not a real
// idempotent (non-real characters / wrong dimension).
Superop character_projector(const std::vector<Superop>& rep, const std::vector<cplx>& chi,
                            double dim_tau);

}  // namespace frb
