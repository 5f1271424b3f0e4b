#pragma once

#include <vector>

#include "frb/superop.hpp"
#include "frb/tableau.hpp"
#include "frb/weyl.hpp"

namespace frb {

// Gate-set groups with closed-form harmonic data.
enum class GroupKind { unitary_2_group, clifford, local_clifford, heisenberg_weyl };

const char* group_name(GroupKind k);
GroupKind parse_group(const std::string& name);

// A sampled group element in whichever parameterization the group admits:
// Weyl label + tau phase, Clifford tableau, dense unitary (n <= 5), or a
// product of single-site unitaries.
struct GroupElement {
  enum class Kind { weyl, clifford, unitary, local_product };
  Kind kind = Kind::weyl;
  int p = 2, n = 1;
  WeylLabel a;
  int tau_power = 0;
  CliffordTableau tab;
  MatrixXcd u;
  std::vector<MatrixXcd> site_us;
};

Superop element_superop(const GroupElement& g);
GroupElement element_inverse(const GroupElement& g);

// Dense superoperator of a product of single-site superoperators, respecting
// the (z, x)-split index layout (site k carries the p^k digit of z and of x).
Superop local_superop(const std::vector<Superop>& sites);

}  // namespace frb
