#pragma once

#include <map>
#include <string>

#include "frb/irreps.hpp"
#include "frb/superop.hpp"

namespace frb {

// Frame operator S = avg_g w(g)^dagger M w(g) for the computational-basis
// measurement channel M (dephasing onto Z-type Weyl directions).  For every
// supported group S is diagonal with a scalar per irrep block.
struct FrameOperator {
  GroupKind kind = GroupKind::clifford;
  int p = 2, n = 1;
  VectorXd diag;                        // diagonal of S in the real Weyl basis
  std::map<std::string, double> blocks; // irrep name -> s_lambda

  Superop dense() const;
};

// Closed forms: s_1 = 1 and s_ad = 1/(d+1) (2-groups / Clifford);
// s_b = (p+1)^{-(n-|b|)} (local blocks); s_{(z,x)} = [x == 0] (HW).
FrameOperator frame_operator(GroupKind kind, int p, int n);

// Explicit group-averaged construction for cross-checks (Clifford n <= 3 via
// the symplectic traversal; local/HW by direct enumeration).
VectorXd frame_diag_by_averaging(GroupKind kind, int p, int n);

// P_lambda / s_lambda (Moore-Penrose block); zero block -> zero operator.
Superop frame_pinv_block(const FrameOperator& f, const IrrepSpec& lambda);

struct FrameEigBounds {
  double lower = 1.0;     // max(1, d_lambda / (d-1)) when aligned
  double upper = 1.0;     // d_lambda when aligned, +inf sentinel otherwise
  double actual = 1.0;    // ||S_lambda^+|| = 1/s_lambda
};

// Bounds on ||S_lambda^+||; throws for an invisible irrep (s_lambda = 0).
// aligned = false (measurement not aligned with the irrep basis) drops the
// upper bound to +inf.
FrameEigBounds frame_eig_bounds(const FrameOperator& f, const IrrepSpec& lambda,
                                bool aligned = true);

struct SpamVisibilities {
  double v_sp = 1.0;  // <<rho|P_lambda|rho_tilde>> / <<rho|P_lambda|rho>>
  double v_m = 1.0;   // tr(P_lambda M_tilde) / tr(P_lambda M)
};

// Visibilities for a noisy preparation vector and a measurement noise channel
// N_M acting before ideal readout (M_tilde = sum_i |E_i>><<N_M^T E_i|).
SpamVisibilities spam_visibilities(const IrrepSpec& lambda, const VectorXd& rho,
                                   const VectorXd& rho_tilde,
                                   const Superop* meas_channel);

// Diagonal of the measurement channel M (dephasing onto Z-type directions).
VectorXd measurement_diag(int p, int n);

}  // namespace frb
