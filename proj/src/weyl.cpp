#include "frb/weyl.hpp"

#include <cmath>
#include <numbers>

namespace frb {

namespace {

constexpr double kPi = std::numbers::pi;

cplx tau(int p) {
  // (-1)^p e^{i pi / p}: i for p = 2, a primitive 2p-th root scaled by -1 for odd p.
  double sign = (p % 2 == 0) ? 1.0 : -1.0;
  return sign * std::polar(1.0, kPi / p);
}

cplx xi(int p) { return std::polar(1.0, 2.0 * kPi / p); }

}  // namespace

WeylLabel WeylLabel::from_index(Index idx, int p, int n) {
  Index pn = pow_index(p, n);
  if (idx < 0 || idx >= pn * pn) throw std::invalid_argument("WeylLabel: index out of range");
  Index zi = idx / pn, xi_ = idx % pn;
  WeylLabel a;
  a.z.resize(n);
  a.x.resize(n);
  for (int k = 0; k < n; ++k) {
    a.z[k] = int(zi % p);
    zi /= p;
    a.x[k] = int(xi_ % p);
    xi_ /= p;
  }
  return a;
}

Index WeylLabel::index(int p) const {
  Index zi = 0, xi_ = 0, w = 1;
  for (size_t k = 0; k < z.size(); ++k) {
    zi += w * z[k];
    xi_ += w * x[k];
    w *= p;
  }
  return zi * pow_index(p, int(z.size())) + xi_;
}

bool WeylLabel::is_zero() const {
  for (size_t k = 0; k < z.size(); ++k)
    if (z[k] != 0 || x[k] != 0) return false;
  return true;
}

WeylLabel WeylLabel::negated(int p) const {
  WeylLabel b = *this;
  for (size_t k = 0; k < z.size(); ++k) {
    b.z[k] = (p - z[k]) % p;
    b.x[k] = (p - x[k]) % p;
  }
  return b;
}

int symplectic_form(const WeylLabel& a, const WeylLabel& b, int p) {
  int s = 0;
  for (size_t k = 0; k < a.z.size(); ++k) s += a.z[k] * b.x[k] - a.x[k] * b.z[k];
  return ((s % p) + p) % p;
}

MatrixXcd weyl_matrix(const WeylLabel& a, int p, int n) {
  Index d = pow_index(p, n);
  MatrixXcd w = MatrixXcd::Zero(d, d);
  cplx xp = xi(p);
  // tau has order 2p, so the exponent -z.x only matters mod 2p.
  int sum_zx = 0;
  for (size_t k = 0; k < a.z.size(); ++k) sum_zx += a.z[k] * a.x[k];
  int e = ((-sum_zx) % (2 * p) + 2 * p) % (2 * p);
  cplx phase = std::pow(tau(p), e);
  for (Index col = 0; col < d; ++col) {
    // X(x) sends |j> to |j + x>; then Z(z) multiplies by xi^{z.(j+x)}.
    Index j = col, row = 0, wgt = 1;
    int zdot = 0;
    for (int k = 0; k < n; ++k) {
      int jk = int(j % p);
      j /= p;
      int tk = (jk + a.x[k]) % p;
      row += wgt * tk;
      wgt *= p;
      zdot += a.z[k] * tk;
    }
    w(row, col) = phase * std::pow(xp, ((zdot % p) + p) % p);
  }
  return w;
}

Superop weyl_superop(const WeylLabel& a, int p, int n) {
  Superop s(p, n);
  Index d2 = s.dim();
  if (p == 2) {
    for (Index i = 0; i < d2; ++i) {
      WeylLabel b = WeylLabel::from_index(i, p, n);
      s.mat(i, i) = (symplectic_form(a, b, p) == 0) ? 1.0 : -1.0;
    }
    return s;
  }
  for (Index i = 0; i < d2; ++i) {
    WeylLabel b = WeylLabel::from_index(i, p, n);
    if (b.is_zero()) {
      s.mat(i, i) = 1.0;
      continue;
    }
    Index ni = b.negated(p).index(p);
    if (ni == i) {
      s.mat(i, i) = 1.0;  // self-paired cannot happen for odd p unless b = 0
      continue;
    }
    if (ni < i) continue;  // handled when visiting the smaller index
    double theta = 2.0 * kPi * symplectic_form(a, b, p) / p;
    double c = std::cos(theta), sn = std::sin(theta);
    // (h_b, g_b) ordering: h at the smaller index i, g at the larger ni.
    s.mat(i, i) = c;
    s.mat(ni, i) = -sn;
    s.mat(i, ni) = sn;
    s.mat(ni, ni) = c;
  }
  return s;
}

namespace {

// Dense matrix of the real basis element at flat index idx.
MatrixXcd basis_element(Index idx, int p, int n) {
  WeylLabel b = WeylLabel::from_index(idx, p, n);
  if (p == 2) return weyl_matrix(b, p, n);
  if (b.is_zero()) return weyl_matrix(b, p, n);
  Index ni = b.negated(p).index(p);
  MatrixXcd wb = weyl_matrix(b, p, n);
  MatrixXcd wn = weyl_matrix(b.negated(p), p, n);
  const double r2 = std::sqrt(2.0);
  if (idx < ni) return (wb + wn) / r2;           // h_b
  return (wb - wn) / (cplx(0.0, 1.0) * r2);      // g_b
}

}  // namespace

VectorXd weyl_coeffs(const MatrixXcd& op, int p, int n) {
  Index d = pow_index(p, n);
  if (op.rows() != d || op.cols() != d)
    throw std::invalid_argument("weyl_coeffs: operator shape does not match p^n");
  Index d2 = d * d;
  VectorXd c(d2);
  double norm = std::sqrt(double(d));
  for (Index i = 0; i < d2; ++i) {
    cplx v = (basis_element(i, p, n).adjoint() * op).trace() / norm;
    if (std::abs(v.imag()) > 1e-9 * std::max(1.0, std::abs(v)))
      throw std::invalid_argument("weyl_coeffs: operator is not Hermitian");
    c(i) = v.real();
  }
  return c;
}

MatrixXcd from_weyl_coeffs(const VectorXd& coeffs, int p, int n) {
  Index d = pow_index(p, n);
  if (coeffs.size() != d * d)
    throw std::invalid_argument("from_weyl_coeffs: wrong coefficient count");
  MatrixXcd op = MatrixXcd::Zero(d, d);
  double norm = std::sqrt(double(d));
  for (Index i = 0; i < d * d; ++i)
    if (coeffs(i) != 0.0) op += (coeffs(i) / norm) * basis_element(i, p, n);
  return op;
}

Superop ptm_of_unitary(const MatrixXcd& u, int p, int n) {
  Index d = pow_index(p, n);
  if (u.rows() != d || u.cols() != d)
    throw std::invalid_argument("ptm_of_unitary: unitary shape does not match p^n");
  Superop s(p, n);
  const double norm = std::sqrt(double(d));  // columns act on w_b / sqrt(d)
  for (Index b = 0; b < d * d; ++b) {
    MatrixXcd img = u * basis_element(b, p, n) * u.adjoint();
    s.mat.col(b) = weyl_coeffs(img, p, n) / norm;
  }
  return s;
}

Superop ptm_of_kraus(const std::vector<MatrixXcd>& kraus, int p, int n) {
  Index d = pow_index(p, n);
  Superop s(p, n);
  const double norm = std::sqrt(double(d));  // columns act on w_b / sqrt(d)
  for (Index b = 0; b < d * d; ++b) {
    MatrixXcd e = basis_element(b, p, n);
    MatrixXcd img = MatrixXcd::Zero(d, d);
    for (const auto& k : kraus) {
      if (k.rows() != d || k.cols() != d)
        throw std::invalid_argument("ptm_of_kraus: Kraus shape does not match p^n");
      img += k * e * k.adjoint();
    }
    s.mat.col(b) = weyl_coeffs(img, p, n) / norm;
  }
  return s;
}

}  // namespace frb
