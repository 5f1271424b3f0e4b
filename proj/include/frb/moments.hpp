#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "frb/ensemble.hpp"
#include "frb/irreps.hpp"
#include "frb/noise.hpp"

namespace frb {

// Moment operators M_t(nu) = E_nu[ conj-PTM(g)^{(x) t} ] in copy-major
// coordinates: the t-copy flat index stacks one 2n-bit PTM index per copy,
// copy 1 in the least significant bits.  Site k of copy c carries x bit
// c*2n + k and z bit c*2n + n + k.

// Spanning columns (not orthonormalized) of the fixed space of the local
// Haar/Clifford twirl on `sites` qubits for t copies; 4^{sites*t} x r.
// t = 1: identity coordinate; t = 2: identity and swap vectors; t = 3: the
// six copy-permutation operators (rank 5 on a single qubit).
MatrixXd twirl_basis(int sites, int t);

// Orthonormal basis of the global Haar fixed space on n qubits (dim x r).
MatrixXd fixed_space_orthonormal(int n, int t);
// Dense projector onto it (dim <= 4096).
MatrixXd haar_projector_dense(int n, int t);

struct MomentOperator {
  int p = 2, n = 1, t = 1;
  Ensemble ens;
  Index dim = 0;
  std::shared_ptr<SparseApply> op;  // noiseless averaging operator
  bool has_dense = false;
  MatrixXd dense;                   // filled when dim <= 4096
};

// Exact moment operator: closed-form local twirls for Haar / uniform-Clifford
// gates (t <= 3), exact weighted sums for the generator set, closed forms for
// the exact group layers.  A non-null noise model composes the per-layer
// channel into the average (dense dimensions only).
MomentOperator moment_operator(const Ensemble& e, int t,
                               const NoiseModel* noise = nullptr);

// Dense average of op^{(x) t} over an explicit weighted element list.
MatrixXd moment_dense_of_elements(const std::vector<MatrixXd>& ops,
                                  const std::vector<double>& probs, int t);

// Monte-Carlo moment operator from sampled layers (dense dims only); the
// optional output receives the entrywise standard error in Frobenius form.
MatrixXd moment_operator_mc(const Ensemble& e, int t, Index n_samples,
                            std::mt19937_64& rng, double* frob_stderr = nullptr);

// Delta = 1 - ||M - M_haar||: 1 - sqrt(lambda_max) of M^T M with the fixed
// space deflated.  Method: "dense" (<= 4096), "lanczos" (matrix-free,
// <= 4^10), "sector" (population-sector exact diagonalization, LRC only).
struct GapResult {
  double gap = 0.0;
  std::string method;
  double residual = 0.0;
};
GapResult spectral_gap(const MomentOperator& m, double tol = 1e-8);

// Exact second eigenvalue of the Haar-twirl LRC restricted to the invariant
// product sector spanned by per-site identity/swap vectors (t = 2); agrees
// with the full-space gap and scales to n ~ 30.
double sector_gap(const Ensemble& e);

// Closed-form nearest-neighbour chain gap (Haar 2-site gates, t = 2, 3).
double exact_nn_lrc_gap(int n, Boundary bc);

// Certified lower bounds on Delta_t by architecture tag:
//   lrc_nn, lrc_nn_pbc, lrc_complete, bw, bw_odd, generator_lrc_nn,
//   generator_lrc_complete, generator_bw, generator_local.
// Returns (bound, provenance).
std::pair<double, std::string> tabulated_gap(const std::string& arch, int n, int t);

// Composition bound 1 - (1 - local)(1 - arch).
double local_to_global_gap(double local_gap, double arch_gap);

// Dense Fourier operator on the adjoint-type block: integral of
// phi(g) (x) omega_lambda(g) in kron order (noise factor high, compressed
// irrep block low).  noise = nullptr gives the ideal operator.
MatrixXd fourier_operator(const Ensemble& e, const IrrepSpec& lambda,
                          const NoiseModel* noise);

// delta_lambda = || noisy Fourier - ideal Fourier || (spectral norm).
double implementation_error(const Ensemble& e, const IrrepSpec& lambda,
                            const NoiseModel& noise);

// Exact noiseless filtered signal F_lambda(1..m_max) for rho = |0..0>, via
// propagation of the measurement-channel vector under M_2(nu)^T.
VectorXd ideal_decay_curve(const Ensemble& e, const IrrepSpec& lambda, int m_max);

}  // namespace frb
