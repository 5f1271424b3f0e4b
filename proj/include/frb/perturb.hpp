#pragma once

#include "frb/ensemble.hpp"
#include "frb/irreps.hpp"
#include "frb/noise.hpp"
#include "frb/superop.hpp"

namespace frb {

// Growth factor bounding the boundary-vector distortion of the split,
// g(x) = (1 - 4x) x + (1 + x) / (1 - 4x); finite and monotone on [0, 1/4).
double perturbation_g(double x);

// Similarity split of a + e into invariant blocks near the unperturbed ones.
// The input a must be block diagonal with an exact identity leading k x k
// block and a trailing block Lambda of spectral norm at most 1 - delta.
// The perturbed operator then factorizes as
//     a + e = r1 * i_block * l1 + r2 * o_block * l2
// with oblique projector pairs obeying l_i r_j = delta_ij id.
struct PerturbationResult {
  MatrixXd i_block;  // k x k, within 2||e|| of the identity
  MatrixXd o_block;  // within 2||e|| of Lambda
  MatrixXd r1, r2;   // right factors, dim x k and dim x (dim - k)
  MatrixXd l1, l2;   // left factors, k x dim and (dim - k) x dim
  MatrixXd p1, p2;   // corner couplings of the two triangular transforms

  double e_norm = 0.0;          // ||e||
  double p1_norm = 0.0;         // certified < 4 ||e|| / delta
  double p2_norm = 0.0;         // certified < 2 ||e|| / (delta - 4 ||e||)
  double i_dev = 0.0;           // ||i_block - id||, certified < 2 ||e||
  double o_dev = 0.0;           // ||o_block - Lambda||, certified < 2 ||e||
  double sep_io = 0.0;          // sep(i_block, o_block) >= delta - 4 ||e||
  double recon_residual = 0.0;  // reconstruction error of the factorization
  int iterations = 0;
  bool bounds_hold = false;     // all five certified inequalities
};

PerturbationResult perturb_block_diagonalize(const MatrixXd& a, Index k,
                                             const MatrixXd& e, double delta);

// Split of the noisy transfer operator on one filter block: the signal
//     F_lambda(m) = tr(a_lambda * i_block^m) + subdominant(m),
//     |subdominant(m)| <= bound_prefactor * bound_base^m.
struct SignalDecomposition {
  MatrixXd i_block;        // n_lambda x n_lambda dominant-pole block
  MatrixXd o_block;        // subdominant block
  MatrixXd a_lambda;       // predicted signal coefficient matrix
  double amp_trace = 0.0;  // tr(a_lambda), the fitted amplitude for mult 1
  double delta_noise = 0.0;       // implementation error ||noisy - ideal||
  double gap = 0.0;               // ideal-block gap 1 - ||Lambda||
  double overlap = 0.0;           // <<rho| P_lambda |rho>>
  double c_lambda = 0.0;          // sqrt(tr S_lambda) * ||S_lambda^+||
  double bound_prefactor = 0.0;   // c_lambda * sqrt(overlap) * g(delta/gap)
  double bound_base = 0.0;        // 1 - gap + 2 delta
};

// Perturbative split of the filtered signal for gate-independent noise on a
// dense-feasible ensemble.  Refuses (with the measured ratio in the message)
// when the noise is too strong for the split, ||noisy - ideal|| >= gap / 4.
SignalDecomposition signal_decomposition(const Ensemble& e, const NoiseModel* noise,
                                         const IrrepSpec& lambda);

// Randomized self-check of the split: Gaussian instances with ||Lambda|| =
// 1 - gap and ||e|| drawn below gap / 4, verified against the reconstruction
// tolerance and the five certified inequalities.
struct PerturbSuiteResult {
  int instances = 0;
  int residual_failures = 0;  // reconstruction error above tol
  int bound_failures = 0;     // some certified inequality violated
  double max_residual = 0.0;
  double max_e_norm = 0.0;
};

PerturbSuiteResult perturb_random_suite(int instances, Index dim, Index k,
                                        double gap, std::uint64_t seed,
                                        double tol = 1e-10);

}  // namespace frb
