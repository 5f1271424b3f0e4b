#pragma once

#include <vector>

#include "frb/irreps.hpp"
#include "frb/superop.hpp"

namespace frb {

// Block decomposition of the ideal second moment of the filter function over
// the isotypes sigma of the doubled block representation.  The traces sum to
// E[f_lambda^2] for the exact group average; with the default computational
// prep state every trace is non-negative.
struct SigmaBlocks {
  std::vector<double> traces;  // tr C_sigma
  std::vector<Index> dims;     // isotype dimensions (summing to |supp|^2)
  double total = 0.0;          // direct second moment, equals the trace sum
};

// Dense construction by explicit group summation (clifford and local_clifford
// need n <= 2; heisenberg_weyl any dense n).  rho_tilde optionally replaces
// the prepared state to model non-malicious preparation noise; outcome
// probabilities then come from rho_tilde while the filter stays calibrated
// to the ideal state.
SigmaBlocks sigma_block_traces(GroupKind kind, int p, int n, const IrrepSpec& lambda,
                               const VectorXd* rho_tilde = nullptr);

}  // namespace frb
