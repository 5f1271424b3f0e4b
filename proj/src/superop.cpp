#include "frb/superop.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "frb/rng.hpp"

namespace frb {

MatrixXd pseudoinverse(const MatrixXd& a, double rtol) {
  if (rtol <= 0) throw std::invalid_argument("pseudoinverse: rtol must be positive");
  Eigen::JacobiSVD<MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& s = svd.singularValues();
  if (s.size() == 0) return MatrixXd::Zero(a.cols(), a.rows());
  double cut = rtol * s(0);
  VectorXd inv = VectorXd::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) inv(i) = 1.0 / s(i);
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double spectral_norm(const MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() >= 128 || a.cols() >= 128) {
    Eigen::BDCSVD<MatrixXd> svd(a);
    return svd.singularValues()(0);
  }
  Eigen::JacobiSVD<MatrixXd> svd(a);
  return svd.singularValues()(0);
}

double spectral_norm(const SparseApply& a, double tol, int max_iter, std::uint64_t seed) {
  auto rng = make_rng(seed, 0x5eed);
  std::normal_distribution<double> gauss;
  VectorXd v(a.cols());
  for (Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
  v.normalize();
  VectorXd av(a.rows()), w(a.cols());
  double lam_prev = -1.0;
  double lam = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    a.apply(v.data(), av.data());
    a.adjoint_apply(av.data(), w.data());  // w = A^T A v
    lam = v.dot(w);
    double res = (w - lam * v).norm();     // Weyl: eigenvalue error <= residual
    double wn = w.norm();
    if (wn == 0) return 0.0;               // v landed in the kernel and stays there
    v = w / wn;
    if (res <= tol * std::max(1.0, lam) && std::abs(lam - lam_prev) <= tol * std::max(1.0, lam))
      return std::sqrt(std::max(0.0, lam));
    lam_prev = lam;
  }
  throw convergence_error("spectral_norm: power iteration exceeded max_iter (last sigma=" +
                          std::to_string(std::sqrt(std::max(0.0, lam))) + ")");
}

// ---- symmetric eigensolvers ----

namespace {

void project_out(VectorXd& v, const MatrixXd& q) {
  if (q.cols() == 0) return;
  v.noalias() -= q * (q.transpose() * v);
}

MatrixXd orthonormalize(const MatrixXd& m) {
  if (m.cols() == 0) return m;
  Eigen::HouseholderQR<MatrixXd> qr(m);
  MatrixXd q = qr.householderQ() * MatrixXd::Identity(m.rows(), m.cols());
  // Drop columns beyond the numerical rank.
  MatrixXd r = qr.matrixQR().topRows(m.cols()).triangularView<Eigen::Upper>();
  std::vector<Index> keep;
  double scale = r.cwiseAbs().maxCoeff();
  for (Index i = 0; i < m.cols(); ++i)
    if (std::abs(r(i, i)) > 1e-12 * std::max(1.0, scale)) keep.push_back(i);
  MatrixXd out(m.rows(), Index(keep.size()));
  for (size_t i = 0; i < keep.size(); ++i) out.col(Index(i)) = q.col(keep[i]);
  return out;
}

EigPairs lanczos_top(const SparseApply& a, int k, double tol, int max_iter,
                     std::uint64_t seed, const MatrixXd& defl) {
  const Index n = a.cols();
  const Index cap = std::min<Index>(n, std::max<Index>(3 * k + 32, 96));
  auto rng = make_rng(seed, 0x1a2c);
  std::normal_distribution<double> gauss;

  MatrixXd v(n, cap);      // Lanczos basis
  MatrixXd t = MatrixXd::Zero(cap, cap);
  Index j = 0;
  int restarts = 0;
  VectorXd w(n), prev(n);
  double beta = 0.0;
  bool fresh = true;

  auto new_start = [&](VectorXd& x) {
    for (int attempt = 0; attempt < 50; ++attempt) {
      for (Index i = 0; i < n; ++i) x(i) = gauss(rng);
      project_out(x, defl);
      if (j > 0) x.noalias() -= v.leftCols(j) * (v.leftCols(j).transpose() * x);
      double nx = x.norm();
      if (nx > 1e-8) {
        x /= nx;
        return true;
      }
    }
    return false;
  };

  VectorXd x(n);
  if (!new_start(x)) throw std::runtime_error("top_eigs: could not build start vector");

  int iters = 0;
  while (j < cap && iters < max_iter) {
    v.col(j) = x;
    a.apply(x.data(), w.data());
    project_out(w, defl);
    double alpha = x.dot(w);
    t(j, j) = alpha;
    w.noalias() -= alpha * x;
    if (!fresh && beta != 0.0) w.noalias() -= beta * prev;
    // Full reorthogonalization (twice).
    for (int pass = 0; pass < 2; ++pass)
      w.noalias() -= v.leftCols(j + 1) * (v.leftCols(j + 1).transpose() * w);
    beta = w.norm();
    prev = x;
    ++j;
    ++iters;

    bool breakdown = beta < 1e-13;
    if (!breakdown && j < cap) {
      t(j - 1, j) = t(j, j - 1) = beta;
      x = w / beta;
      fresh = false;
    }

    // Convergence check on the current tridiagonal section.
    if (j >= std::min<Index>(cap, Index(k)) && (j % 8 == 0 || breakdown || j == cap)) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(t.topLeftCorner(j, j));
      Index nev = std::min<Index>(j, k);
      bool ok = j >= k;
      for (Index i = 0; ok && i < nev; ++i) {
        Index col = j - 1 - i;  // eigenvalues ascending
        double resid = std::abs(beta * es.eigenvectors()(j - 1, col));
        if (resid > tol * std::max(1.0, std::abs(es.eigenvalues()(col)))) ok = false;
      }
      if (ok || (breakdown && j >= n - defl.cols())) {
        EigPairs out;
        out.values.resize(nev);
        out.vectors.resize(n, nev);
        for (Index i = 0; i < nev; ++i) {
          Index col = j - 1 - i;
          out.values(i) = es.eigenvalues()(col);
          out.vectors.col(i) = v.leftCols(j) * es.eigenvectors().col(col);
          out.vectors.col(i).normalize();
        }
        return out;
      }
    }

    if (breakdown) {
      // Invariant subspace exhausted; restart in the orthogonal complement.
      if (++restarts > 8) break;
      if (!new_start(x)) break;
      fresh = true;
      beta = 0.0;
    }
  }
  throw convergence_error("top_eigs: Lanczos did not converge (basis " + std::to_string(j) +
                          ", iters " + std::to_string(iters) + ")");
}

EigPairs power_top(const SparseApply& a, int k, double tol, int max_iter,
                   std::uint64_t seed, const MatrixXd& defl) {
  const Index n = a.cols();
  auto rng = make_rng(seed, 0x90f3);
  std::normal_distribution<double> gauss;

  // Shift by an overestimate of ||A|| so the algebraically largest eigenvalue
  // dominates in magnitude.
  VectorXd x(n), y(n);
  for (Index i = 0; i < n; ++i) x(i) = gauss(rng);
  x.normalize();
  double norm_est = 0.0;
  for (int it = 0; it < 60; ++it) {
    a.apply(x.data(), y.data());
    norm_est = y.norm();
    if (norm_est == 0) break;
    x = y / norm_est;
  }
  double sigma = 1.1 * norm_est + 1e-6;

  EigPairs out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  for (int ev = 0; ev < k; ++ev) {
    for (Index i = 0; i < n; ++i) x(i) = gauss(rng);
    project_out(x, defl);
    if (ev > 0) {
      auto found = out.vectors.leftCols(ev);
      x.noalias() -= found * (found.transpose() * x);
    }
    double nx = x.norm();
    if (nx < 1e-12) throw std::runtime_error("top_eigs: deflation exhausted the space");
    x /= nx;
    double lam = 0.0;
    bool done = false;
    for (int it = 0; it < max_iter; ++it) {
      a.apply(x.data(), y.data());
      lam = x.dot(y);
      double res = (y - lam * x).norm();
      y.noalias() += sigma * x;
      project_out(y, defl);
      if (ev > 0) {
        auto found = out.vectors.leftCols(ev);
        y.noalias() -= found * (found.transpose() * y);
      }
      double ny = y.norm();
      if (ny == 0) break;
      x = y / ny;
      if (res <= tol * std::max(1.0, std::abs(lam))) {
        done = true;
        break;
      }
    }
    if (!done)
      throw convergence_error("top_eigs: power iteration did not converge at eigenpair " +
                              std::to_string(ev) + " (residual target " + std::to_string(tol) +
                              ")");
    out.values(ev) = lam;
    out.vectors.col(ev) = x;
  }
  // Power iteration with a positive shift returns algebraically ordered values.
  std::vector<Index> order(k);
  for (int i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](Index i, Index j) { return out.values(i) > out.values(j); });
  EigPairs sorted;
  sorted.values.resize(k);
  sorted.vectors.resize(n, k);
  for (int i = 0; i < k; ++i) {
    sorted.values(i) = out.values(order[i]);
    sorted.vectors.col(i) = out.vectors.col(order[i]);
  }
  return sorted;
}

}  // namespace

EigPairs top_eigs(const SparseApply& a, int k, EigMethod method, double tol, int max_iter,
                  std::uint64_t seed, const MatrixXd* deflate) {
  if (a.rows() != a.cols()) throw std::invalid_argument("top_eigs: operator must be square");
  if (k <= 0 || Index(k) > a.rows()) throw std::invalid_argument("top_eigs: bad k");
  MatrixXd defl(a.rows(), 0);
  if (deflate && deflate->cols() > 0) {
    if (deflate->rows() != a.rows())
      throw std::invalid_argument("top_eigs: deflation basis shape mismatch");
    defl = orthonormalize(*deflate);
  }
  if (method == EigMethod::lanczos) return lanczos_top(a, k, tol, max_iter, seed, defl);
  return power_top(a, k, tol, max_iter, seed, defl);
}

}  // namespace frb
