#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "frb/superop.hpp"

namespace frb {

using Eigen::MatrixXcd;
using cplx = std::complex<double>;

// Weyl (generalized Pauli) operators over F_p:
//   w(a) = tau^{-a_z . a_x} Z(a_z) X(a_x),  tau = (-1)^p e^{i pi / p},
// so tau = i and w(a) runs over the Hermitian Paulis for p = 2, and
// w(a)^dagger = w(-a) for every p.  Labels a = (z, x) are stored as base-p
// digit vectors, site k carrying the p^k digit; the flat index is
// z * p^n + x, i.e. lexicographic in (z, x).
//
// Real basis convention for superoperators: for p = 2 every w(a) is Hermitian
// and the basis is w(a)/2^{n/2} directly.  For odd p, labels pair up as
// {b, -b}; the smaller flat index of the pair carries (w(b)+w(-b))/sqrt(2),
// the larger carries (w(b)-w(-b))/(i sqrt(2)), both Hermitian.  b = 0 keeps
// the identity.  Conjugation superoperators then have +-1 diagonals (p = 2)
// or 2x2 rotation blocks (odd p).

struct WeylLabel {
  std::vector<int> z, x;  // digits mod p, size n

  static WeylLabel from_index(Index idx, int p, int n);
  Index index(int p) const;
  bool is_zero() const;
  WeylLabel negated(int p) const;
};

// Symplectic form [a, b] = a_z . b_x - a_x . b_z mod p.
int symplectic_form(const WeylLabel& a, const WeylLabel& b, int p);

// Dense d x d unitary for w(a), d = p^n.
MatrixXcd weyl_matrix(const WeylLabel& a, int p, int n);

// Real PTM of conjugation by w(a): diagonal of +-1 for p = 2, rotation blocks
// on conjugate pairs for odd p.
Superop weyl_superop(const WeylLabel& a, int p, int n);

// Coefficients of a (Hermitian) operator in the orthonormal real Weyl basis,
// and the reconstruction.  Round-trips to 1e-12.
VectorXd weyl_coeffs(const MatrixXcd& op, int p, int n);
MatrixXcd from_weyl_coeffs(const VectorXd& coeffs, int p, int n);

// Real PTM of the unitary channel U . U^dagger, d = p^n <= dense limit.
Superop ptm_of_unitary(const MatrixXcd& u, int p, int n);

// Real PTM of a general linear channel X -> sum_k K_k X K_k^dagger.
Superop ptm_of_kraus(const std::vector<MatrixXcd>& kraus, int p, int n);

}  // namespace frb
