#include "frb/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "frb/errors.hpp"
#include "frb/frame.hpp"
#include "frb/moments.hpp"

namespace frb {

namespace {

// ---- norms ----

// Spectral norm by power iteration on a^T a; full SVD is wasteful for the
// large Fourier-operator blocks.
double big_spectral_norm(const MatrixXd& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  if (a.rows() <= 512 && a.cols() <= 512) return spectral_norm(a);
  std::mt19937_64 rng(19);
  std::normal_distribution<double> gauss;
  VectorXd v(a.cols());
  for (Index i = 0; i < v.size(); ++i) v[i] = gauss(rng);
  v.normalize();
  double val = 0.0;
  for (int it = 0; it < 300; ++it) {
    VectorXd w = a.transpose() * (a * v);
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    w /= nw;
    double diff = (w - v).norm();
    v = std::move(w);
    val = nw;
    if (diff < 1e-13) break;
  }
  return std::sqrt(val);
}

// sep(i, o) = min_X ||i X - X o|| / ||X||, the smallest singular value of the
// two-sided Sylvester map.  Exact SVD for small problems; for a scalar i
// block the map is X -> X (i - o) and an LU-based inverse power iteration on
// (i I - o) avoids forming anything large.
double sep_of_blocks(const MatrixXd& i_blk, const MatrixXd& o_blk) {
  const Index k = i_blk.rows(), m2 = o_blk.rows();
  if (k * m2 <= 2048) {
    MatrixXd map = Eigen::kroneckerProduct(MatrixXd::Identity(m2, m2), i_blk) -
                   Eigen::kroneckerProduct(o_blk.transpose(), MatrixXd::Identity(k, k));
    Eigen::JacobiSVD<MatrixXd> svd(map);
    return svd.singularValues().tail(1)(0);
  }
  if (k != 1)
    throw capacity_error("perturb_block_diagonalize: sep estimate for k > 1 needs k*(dim-k) <= 2048");
  MatrixXd b = i_blk(0, 0) * MatrixXd::Identity(m2, m2) - o_blk;
  Eigen::PartialPivLU<MatrixXd> lu(b);
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss;
  VectorXd v(m2);
  for (Index i = 0; i < m2; ++i) v[i] = gauss(rng);
  v.normalize();
  double val = 0.0;
  for (int it = 0; it < 200; ++it) {
    VectorXd w = lu.solve(v);
    w = lu.transpose().solve(w);
    double nw = w.norm();
    if (nw == 0.0) break;
    w /= nw;
    double diff = (w - v).norm();
    v = std::move(w);
    val = nw;
    if (diff < 1e-13) break;
  }
  return val > 0.0 ? 1.0 / std::sqrt(val) : 0.0;
}

std::string num(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

}  // namespace

double perturbation_g(double x) {
  if (!(x >= 0.0 && x < 0.25))
    throw std::invalid_argument("perturbation_g: argument must lie in [0, 1/4), got " + num(x));
  return (1.0 - 4.0 * x) * x + (1.0 + x) / (1.0 - 4.0 * x);
}

PerturbationResult perturb_block_diagonalize(const MatrixXd& a, Index k,
                                             const MatrixXd& e, double delta) {
  const Index dim = a.rows();
  if (a.cols() != dim || e.rows() != dim || e.cols() != dim)
    throw std::invalid_argument("perturb_block_diagonalize: operands must be square and equal-sized");
  if (k < 1 || k >= dim)
    throw std::invalid_argument("perturb_block_diagonalize: leading block size out of range");
  if (!(delta > 0.0))
    throw std::invalid_argument("perturb_block_diagonalize: gap must be positive");
  const Index m2 = dim - k;

  const MatrixXd a11 = a.topLeftCorner(k, k);
  const MatrixXd lam = a.bottomRightCorner(m2, m2);
  const double block_tol = 1e-8 * std::max(1.0, big_spectral_norm(a));
  if ((a11 - MatrixXd::Identity(k, k)).norm() > block_tol)
    throw std::invalid_argument("perturb_block_diagonalize: leading block of a must be the identity");
  if (a.topRightCorner(k, m2).norm() > block_tol || a.bottomLeftCorner(m2, k).norm() > block_tol)
    throw std::invalid_argument("perturb_block_diagonalize: a must be block diagonal");

  PerturbationResult res;
  res.e_norm = big_spectral_norm(e);
  if (res.e_norm >= delta / 4.0)
    throw std::invalid_argument("perturb_block_diagonalize: perturbation too large, ||e|| = " +
                                num(res.e_norm) + " >= gap/4 = " + num(delta / 4.0));

  const MatrixXd e11 = e.topLeftCorner(k, k), e12 = e.topRightCorner(k, m2);
  const MatrixXd e21 = e.bottomLeftCorner(m2, k), e22 = e.bottomRightCorner(m2, m2);

  // Corner equation p (a11 + e11) - (lam + e22) p = e21 - p e12 p with
  // a11 = id, so each pass is a single solve with (id - lam).  Damping kicks
  // in when the update stops contracting.
  Eigen::PartialPivLU<MatrixXd> lu(MatrixXd::Identity(m2, m2) - lam);
  MatrixXd p = MatrixXd::Zero(m2, k);
  double prev_step = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 0; it < 200; ++it) {
    MatrixXd rhs = e21 - p * e12 * p - p * e11 + e22 * p;
    MatrixXd next = lu.solve(rhs);
    double step = (next - p).norm();
    if (step > prev_step) next = 0.5 * (next + p);
    prev_step = step;
    p = std::move(next);
    ++res.iterations;
    if (step <= 1e-12 * std::max(1.0, p.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw convergence_error("perturb_block_diagonalize: corner iteration did not converge");
  res.p1 = p;

  // First (lower) triangular similarity fixes the diagonal blocks; the
  // second corner only decouples the upper-right block and leaves them alone.
  const MatrixXd m11 = a11 + e11, m12 = e12, m22 = lam + e22;
  res.i_block = m11 + m12 * p;
  res.o_block = m22 - p * m12;

  // i q - q o = -m12, linear in q since the lower corner is already zero.
  MatrixXd q(k, m2);
  if (k == 1) {
    MatrixXd b = res.i_block(0, 0) * MatrixXd::Identity(m2, m2) - res.o_block;
    q = Eigen::PartialPivLU<MatrixXd>(b.transpose()).solve(MatrixXd(-m12.transpose())).transpose();
  } else {
    if (k * m2 > 4096)
      throw capacity_error("perturb_block_diagonalize: upper corner for k > 1 needs k*(dim-k) <= 4096");
    MatrixXd map = Eigen::kroneckerProduct(MatrixXd::Identity(m2, m2), res.i_block) -
                   Eigen::kroneckerProduct(res.o_block.transpose(), MatrixXd::Identity(k, k));
    VectorXd rhs(k * m2);
    for (Index j = 0; j < m2; ++j) rhs.segment(j * k, k) = -m12.col(j);
    VectorXd sol = Eigen::PartialPivLU<MatrixXd>(map).solve(rhs);
    for (Index j = 0; j < m2; ++j) q.col(j) = sol.segment(j * k, k);
  }
  res.p2 = q;

  res.r1.resize(dim, k);
  res.r1.topRows(k) = MatrixXd::Identity(k, k);
  res.r1.bottomRows(m2) = p;
  res.r2.resize(dim, m2);
  res.r2.topRows(k) = q;
  res.r2.bottomRows(m2) = p * q + MatrixXd::Identity(m2, m2);
  res.l1.resize(k, dim);
  res.l1.leftCols(k) = MatrixXd::Identity(k, k) + q * p;
  res.l1.rightCols(m2) = -q;
  res.l2.resize(m2, dim);
  res.l2.leftCols(k) = -p;
  res.l2.rightCols(m2) = MatrixXd::Identity(m2, m2);

  res.p1_norm = big_spectral_norm(res.p1);
  res.p2_norm = big_spectral_norm(res.p2);
  res.i_dev = big_spectral_norm(res.i_block - MatrixXd::Identity(k, k));
  res.o_dev = big_spectral_norm(res.o_block - lam);
  res.sep_io = sep_of_blocks(res.i_block, res.o_block);
  res.recon_residual = big_spectral_norm(res.r1 * res.i_block * res.l1 +
                                         res.r2 * res.o_block * res.l2 - (a + e));

  const double en = res.e_norm;
  res.bounds_hold = res.p1_norm <= 4.0 * en / delta &&
                    res.p2_norm <= 2.0 * en / (delta - 4.0 * en) &&
                    res.i_dev <= 2.0 * en && res.o_dev <= 2.0 * en &&
                    res.sep_io >= delta - 4.0 * en && delta - 4.0 * en > 0.0;
  return res;
}

// ---- signal split ----

namespace {

// Orthonormal basis of the fixed space of the ideal transfer operator by
// subspace iteration; eigenvalue 1 dominates the rest by the block gap, so
// convergence is geometric and the complement stays invariant.
MatrixXd fixed_space_of(const MatrixXd& f, Index k) {
  const Index dim = f.rows();
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss;
  MatrixXd v(dim, k);
  for (Index j = 0; j < k; ++j)
    for (Index i = 0; i < dim; ++i) v(i, j) = gauss(rng);
  for (int it = 0; it < 250; ++it) {
    MatrixXd w = f * v;
    Eigen::HouseholderQR<MatrixXd> qr(w);
    v = qr.householderQ() * MatrixXd::Identity(dim, k);
  }
  return v;
}

}  // namespace

SignalDecomposition signal_decomposition(const Ensemble& e, const NoiseModel* noise,
                                         const IrrepSpec& lambda) {
  if (lambda.is_trivial())
    throw std::invalid_argument("signal_decomposition: trivial irrep carries no decay");
  const Index d = pow_index(e.p, e.n);
  const std::vector<Index> supp = lambda.support();
  const Index s = Index(supp.size());
  const Index dd = d * d;

  const MatrixXd f_ideal = fourier_operator(e, lambda, nullptr);
  const MatrixXd f_noisy = noise ? fourier_operator(e, lambda, noise) : f_ideal;
  const Index dim = f_ideal.rows();
  const Index k = lambda.mult;

  // Rotate into fixed space (+) complement; both are invariant for the ideal
  // operator, so the rotated a is block diagonal with identity leading block.
  MatrixXd fix = fixed_space_of(f_ideal, k);
  MatrixXd qfull = Eigen::HouseholderQR<MatrixXd>(fix).householderQ() *
                   MatrixXd::Identity(dim, dim);
  MatrixXd a_rot = qfull.transpose() * (f_ideal * qfull);
  const double off_norm = a_rot.topRightCorner(k, dim - k).norm() +
                          a_rot.bottomLeftCorner(dim - k, k).norm();
  if (off_norm > 1e-9 * std::max(1.0, a_rot.norm()))
    throw convergence_error("signal_decomposition: fixed-space extraction did not converge");

  SignalDecomposition out;
  MatrixXd lam_blk = a_rot.bottomRightCorner(dim - k, dim - k);
  out.gap = 1.0 - big_spectral_norm(lam_blk);

  // Numerical dust outside the exact block structure joins the perturbation.
  MatrixXd a_clean = MatrixXd::Zero(dim, dim);
  a_clean.topLeftCorner(k, k) = MatrixXd::Identity(k, k);
  a_clean.bottomRightCorner(dim - k, dim - k) = lam_blk;
  MatrixXd e_rot = qfull.transpose() * (f_noisy * qfull) - a_clean;
  out.delta_noise = big_spectral_norm(e_rot);

  // Boundary vectors of the transfer recursion: the measurement side seeds
  // the iteration, state (x) filter vector closes it.
  const VectorXd mdiag = measurement_diag(e.p, e.n);
  const VectorXd rho = zero_state_coords(e.p, e.n);
  const FrameOperator frame = frame_operator(group_of_irrep(lambda.name), e.p, e.n);
  VectorXd x_f = VectorXd::Zero(dim), x_i = VectorXd::Zero(dim);
  double overlap = 0.0;
  for (Index j = 0; j < s; ++j) {
    const Index a = supp[j];
    x_f[a * s + j] = mdiag[a];
    overlap += rho[a] * rho[a];
  }
  for (Index b = 0; b < dd; ++b) {
    if (rho[b] == 0.0) continue;
    for (Index j = 0; j < s; ++j) {
      const Index a = supp[j];
      if (frame.diag[a] > 0.0) x_i[b * s + j] = rho[b] * rho[a] / frame.diag[a];
    }
  }
  out.overlap = overlap;

  VectorXd xf_rot = qfull.transpose() * x_f, xi_rot = qfull.transpose() * x_i;

  if (out.delta_noise <= 1e-13) {
    out.i_block = MatrixXd::Identity(k, k);
    out.o_block = lam_blk;
    out.a_lambda = (fix.transpose() * x_i) * (x_f.transpose() * fix);
  } else {
    if (out.delta_noise >= out.gap / 4.0)
      throw config_error("signal_decomposition: noise too strong for the perturbative split, ||E|| = " +
                         num(out.delta_noise) + " vs gap/4 = " + num(out.gap / 4.0));
    PerturbationResult split = perturb_block_diagonalize(a_clean, k, e_rot, out.gap);
    out.i_block = split.i_block;
    out.o_block = split.o_block;
    out.a_lambda = (split.l1 * xi_rot) * (xf_rot.transpose() * split.r1);
  }
  out.amp_trace = out.a_lambda.trace();

  // Subdominant bound constants; [P_lambda, M] = 0 holds for every supported
  // block (both diagonal in the Weyl basis), so the prefactor form applies.
  double tr_s = 0.0, min_s = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < s; ++j) {
    tr_s += frame.diag[supp[j]];
    if (frame.diag[supp[j]] > 0.0) min_s = std::min(min_s, frame.diag[supp[j]]);
  }
  out.c_lambda = tr_s > 0.0 ? std::sqrt(tr_s) / min_s : 0.0;
  const double x = out.gap > 0.0 ? out.delta_noise / out.gap : 0.0;
  out.bound_prefactor = out.c_lambda * std::sqrt(overlap) * perturbation_g(x);
  out.bound_base = 1.0 - out.gap + 2.0 * out.delta_noise;
  return out;
}

PerturbSuiteResult perturb_random_suite(int instances, Index dim, Index k,
                                        double gap, std::uint64_t seed,
                                        double tol) {
  if (instances < 1) throw std::invalid_argument("perturb_random_suite: need instances >= 1");
  if (k < 1 || k >= dim)
    throw std::invalid_argument("perturb_random_suite: need 1 <= k < dim");
  if (!(gap > 0.0 && gap <= 1.0))
    throw std::invalid_argument("perturb_random_suite: need 0 < gap <= 1");

  PerturbSuiteResult out;
  out.instances = instances;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  const Index m2 = dim - k;

  for (int inst = 0; inst < instances; ++inst) {
    MatrixXd lam(m2, m2);
    for (Index i = 0; i < m2; ++i)
      for (Index j = 0; j < m2; ++j) lam(i, j) = gauss(rng);
    lam *= (1.0 - gap) / spectral_norm(lam);

    MatrixXd a = MatrixXd::Zero(dim, dim);
    a.topLeftCorner(k, k).setIdentity();
    a.bottomRightCorner(m2, m2) = lam;

    MatrixXd e(dim, dim);
    for (Index i = 0; i < dim; ++i)
      for (Index j = 0; j < dim; ++j) e(i, j) = gauss(rng);
    e *= unif(rng) * (gap / 4.0) / spectral_norm(e);

    PerturbationResult r = perturb_block_diagonalize(a, k, e, gap);
    out.max_residual = std::max(out.max_residual, r.recon_residual);
    out.max_e_norm = std::max(out.max_e_norm, r.e_norm);
    if (r.recon_residual > tol) ++out.residual_failures;
    if (!r.bounds_hold) ++out.bound_failures;
  }
  return out;
}

}  // namespace frb
