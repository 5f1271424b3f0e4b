#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "frb/errors.hpp"

namespace frb {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Dense superoperators act on Hermitian operators expanded in the orthonormal
// Weyl basis w(a)/p^{n/2}, labels a = (z, x) in lexicographic order
// (index = z * p^n + x).  Entries are real for Hermiticity-preserving maps.
// Dense storage is refused above dimension 2^16; larger operators go through
// SparseApply.

constexpr Index kDenseLimit = Index(1) << 16;

inline Index pow_index(Index base, int e) {
  Index r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

struct Superop {
  int p = 2;       // qudit prime
  int n = 1;       // sites
  MatrixXd mat;    // p^{2n} x p^{2n}

  Superop() = default;
  Superop(int p_, int n_) : p(p_), n(n_) {
    Index d2 = pow_index(p, 2 * n);
    if (d2 > kDenseLimit)
      throw capacity_error("Superop: dimension " + std::to_string(d2) +
                           " exceeds dense limit 2^16; use SparseApply");
    mat = MatrixXd::Zero(d2, d2);
  }
  Superop(int p_, int n_, MatrixXd m) : p(p_), n(n_), mat(std::move(m)) {
    Index d2 = pow_index(p, 2 * n);
    if (mat.rows() != d2 || mat.cols() != d2)
      throw std::invalid_argument("Superop: matrix shape does not match p^(2n)");
    if (d2 > kDenseLimit)
      throw capacity_error("Superop: dimension exceeds dense limit 2^16");
  }

  Index dim() const { return mat.rows(); }

  static Superop identity(int p, int n) {
    Superop s(p, n);
    s.mat.setIdentity();
    return s;
  }
};

// ---- matrix-free interface ----

struct SparseApply {
  virtual ~SparseApply() = default;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  virtual void apply(const double* in, double* out) const = 0;          // out = A in
  virtual void adjoint_apply(const double* in, double* out) const = 0;  // out = A^T in

  VectorXd apply(const VectorXd& v) const {
    if (v.size() != cols()) throw std::invalid_argument("SparseApply::apply: size mismatch");
    VectorXd out(rows());
    apply(v.data(), out.data());
    return out;
  }
  VectorXd adjoint_apply(const VectorXd& v) const {
    if (v.size() != rows())
      throw std::invalid_argument("SparseApply::adjoint_apply: size mismatch");
    VectorXd out(cols());
    adjoint_apply(v.data(), out.data());
    return out;
  }
};

struct DenseApply final : SparseApply {
  const MatrixXd& a;
  explicit DenseApply(const MatrixXd& m) : a(m) {}
  Index rows() const override { return a.rows(); }
  Index cols() const override { return a.cols(); }
  void apply(const double* in, double* out) const override {
    Eigen::Map<VectorXd>(out, a.rows()) =
        a * Eigen::Map<const VectorXd>(in, a.cols());
  }
  void adjoint_apply(const double* in, double* out) const override {
    Eigen::Map<VectorXd>(out, a.cols()) =
        a.transpose() * Eigen::Map<const VectorXd>(in, a.rows());
  }
};

// ---- numerics ----

// Hilbert-Schmidt pairing tr(a^T b) of two superoperator matrices.
inline double hs_inner(const MatrixXd& a, const MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("hs_inner: shape mismatch");
  return a.cwiseProduct(b).sum();
}
inline double hs_inner(const Superop& a, const Superop& b) {
  return hs_inner(a.mat, b.mat);
}

// Moore-Penrose pseudoinverse with a relative singular-value cutoff.
MatrixXd pseudoinverse(const MatrixXd& a, double rtol = 1e-10);

// Largest singular value.  Dense path uses SVD; the operator path runs power
// iteration on A^T A with a seeded random start.
double spectral_norm(const MatrixXd& a);
double spectral_norm(const SparseApply& a, double tol = 1e-10, int max_iter = 5000,
                     std::uint64_t seed = 7);

struct EigPairs {
  VectorXd values;   // descending
  MatrixXd vectors;  // columns
};

enum class EigMethod { lanczos, power };

// Top-k eigenpairs of a symmetric operator.  `deflate` columns are projected
// out first (known invariant directions, e.g. exact fixed spaces).
EigPairs top_eigs(const SparseApply& a, int k, EigMethod method = EigMethod::lanczos,
                  double tol = 1e-10, int max_iter = 10000, std::uint64_t seed = 11,
                  const MatrixXd* deflate = nullptr);

}  // namespace frb
