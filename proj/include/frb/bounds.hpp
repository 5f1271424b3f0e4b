#pragma once

#include <string>
#include <vector>

#include "frb/group.hpp"
#include "frb/irreps.hpp"

namespace frb {

// ---- sequence lengths ----

// Sufficient depth so the subdominant signal terms are suppressed below the
// requested error.  Simplified forms use the constant 1.8 >= log g(1/5);
// the full forms take the measured noise-to-gap ratio and use log g exactly.
// additive:  m >= (2/gap) (log d_lambda + 0.5 log overlap + log(1/alpha) + 1.8)
// relative:  m >= (5/gap) (log d_lambda + 0.5 log overlap
//                          + log(1/(vis * overlap)) + log(1/gamma) + 1.8)
// where vis = v_M * v_SP and vis * overlap is the ideal SPAM plateau.
enum class BoundMode { additive, relative };

int sequence_length_bound(double gap, Index d_lambda, double overlap, double error,
                          BoundMode mode, double visibilities = 1.0);

// Unsimplified lemma form with the explicit growth factor g and the sharp
// prefactor c_lambda in place of d_lambda.
int sequence_length_bound_full(double gap, double delta_noise, double c_lambda,
                               double overlap, double error, BoundMode mode,
                               double visibilities = 1.0);

// Qubit 3-design form, m >= (pref/gap3) (1.75 n + log(1/error) + 1.8) with
// pref = 2 (additive) or 5 (relative, + log(1/vis) inside the bracket).
int sequence_length_design(double gap3, int n, double error, BoundMode mode,
                           double visibilities = 1.0);

// Architecture summary built from the tabulated gap bounds and the 3-design
// form: sufficient depth per architecture with the leading coefficient in n.
struct SequenceLengthRow {
  std::string arch;
  int m = 0;                    // evaluated sufficient depth at this n
  double coefficient = 0.0;     // computed leading coefficient of m(n)
  std::string scaling;          // "n" or "n^2"
  double reference = 0.0;       // published leading coefficient
  bool discrepancy = false;     // computed and published disagree
};
std::vector<SequenceLengthRow> sequence_length_table(int n, double alpha);

// ---- sampling ----

// Additive-precision sample count N >= (E[f^2]_SPAM + alpha) / (eps^2 delta).
long long sampling_bound(double second_moment_spam, double alpha, double eps,
                         double delta_prob);

// Relative-precision sample count
// N >= ((1+kappa)/(1-gamma)^2 * E[f^2]/F^2 * I^(-2m) - 1) / (eps^2 delta).
long long sampling_bound_relative(double second_moment_spam, double first_moment_spam,
                                  double i_lambda, int m, double kappa, double gamma,
                                  double eps, double delta_prob);

// ---- ideal second moments ----

// Closed-form E[f_lambda^2] for the exact filter groups: the unitary
// 3-design expression for clifford (p = 2) and the unitary group, the local
// product form for local_clifford, and the flat d^-2 for z-type
// Heisenberg-Weyl labels.  `depol_vis` < 1 applies the depolarizing-SPAM
// visibility  v^2 = p^2 + (1 - p^2) n_l d_l / (d^2 E[f^2]).
double ideal_second_moment(GroupKind kind, int p, int n, const IrrepSpec& lambda,
                           double depol_vis = 1.0);

// Universal bounds k_l d_l / d^2 <= E[f^2] <= (k_l d_l)^2 / d^2 for groups
// containing the Weyl operators; k_lambda counts distinct nonzero frame
// eigenvalues on the block.
std::pair<double, double> second_moment_bounds(const IrrepSpec& lambda, Index d,
                                               Index k_lambda);

}  // namespace frb
