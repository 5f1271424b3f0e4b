#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include <unsupported/Eigen/KroneckerProduct>

#include "frb/group.hpp"
#include "frb/tableau.hpp"
#include "frb/weyl.hpp"

using namespace frb;

namespace {

MatrixXcd pauli_z() {
  MatrixXcd z(2, 2);
  z << 1, 0, 0, -1;
  return z;
}
MatrixXcd pauli_x() {
  MatrixXcd x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}
MatrixXcd pauli_y() {
  MatrixXcd y(2, 2);
  y << 0, cplx(0, -1), cplx(0, 1), 0;
  return y;
}

}  // namespace

// ---- Weyl operators ----

TEST_CASE("single-qubit Weyl operators are the Hermitian Paulis") {
  // flat index z*2 + x: 0 -> I, 1 -> X, 2 -> Z, 3 -> i^{-1} Z X = Y.
  CHECK((weyl_matrix(WeylLabel::from_index(0, 2, 1), 2, 1) -
         MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK((weyl_matrix(WeylLabel::from_index(1, 2, 1), 2, 1) - pauli_x())
            .cwiseAbs().maxCoeff() < 1e-14);
  CHECK((weyl_matrix(WeylLabel::from_index(2, 2, 1), 2, 1) - pauli_z())
            .cwiseAbs().maxCoeff() < 1e-14);
  CHECK((weyl_matrix(WeylLabel::from_index(3, 2, 1), 2, 1) - pauli_y())
            .cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("Weyl labels round-trip through the flat index") {
  for (Index i = 0; i < 16; ++i)
    CHECK(WeylLabel::from_index(i, 2, 2).index(2) == i);
  for (Index i = 0; i < 81; ++i)
    CHECK(WeylLabel::from_index(i, 3, 2).index(3) == i);
}

TEST_CASE("Weyl commutation phase is the symplectic form") {
  const int p = 2, n = 2;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<Index> unif(0, 15);
  for (int trial = 0; trial < 20; ++trial) {
    WeylLabel a = WeylLabel::from_index(unif(rng), p, n);
    WeylLabel b = WeylLabel::from_index(unif(rng), p, n);
    MatrixXcd wa = weyl_matrix(a, p, n), wb = weyl_matrix(b, p, n);
    int form = symplectic_form(a, b, p);
    cplx omega = std::exp(cplx(0, 2 * M_PI * form / p));
    CHECK((wa * wb - omega * wb * wa).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("Weyl basis is orthonormal and unitary") {
  const int p = 3, n = 1;
  for (Index i = 0; i < 9; ++i) {
    MatrixXcd w = weyl_matrix(WeylLabel::from_index(i, p, n), p, n);
    CHECK((w * w.adjoint() - MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    for (Index j = 0; j < 9; ++j) {
      MatrixXcd wj = weyl_matrix(WeylLabel::from_index(j, p, n), p, n);
      cplx ip = (w.adjoint() * wj).trace() / 3.0;
      CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-12);
    }
  }
}

TEST_CASE("weyl_coeffs round-trips Hermitian operators") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int p : {2, 3}) {
    const Index d = p;
    MatrixXcd a(d, d);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) a(i, j) = cplx(g(rng), g(rng));
    MatrixXcd h = a + a.adjoint();
    VectorXd c = weyl_coeffs(h, p, 1);
    CHECK((from_weyl_coeffs(c, p, 1) - h).cwiseAbs().maxCoeff() < 1e-12);
    // Parseval: |h|_HS^2 = |c|^2.
    CHECK(c.squaredNorm() == doctest::Approx((h.adjoint() * h).trace().real()));
  }
}

TEST_CASE("ptm_of_unitary: Hadamard and phase gate") {
  MatrixXcd h(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  Superop ph = ptm_of_unitary(h, 2, 1);
  // index order (I, X, Z, Y): H swaps X and Z, negates Y.
  MatrixXd want = MatrixXd::Zero(4, 4);
  want(0, 0) = 1;
  want(2, 1) = 1;
  want(1, 2) = 1;
  want(3, 3) = -1;
  CHECK((ph.mat - want).cwiseAbs().maxCoeff() < 1e-12);

  MatrixXcd s(2, 2);
  s << 1, 0, 0, cplx(0, 1);
  Superop ps = ptm_of_unitary(s, 2, 1);
  want.setZero();
  want(0, 0) = 1;
  want(3, 1) = 1;   // X -> Y
  want(2, 2) = 1;   // Z -> Z
  want(1, 3) = -1;  // Y -> -X
  CHECK((ps.mat - want).cwiseAbs().maxCoeff() < 1e-12);

  // PTMs of unitaries are orthogonal.
  CHECK((ph.mat * ph.mat.transpose()).isIdentity(1e-12));
}

TEST_CASE("ptm_of_kraus reproduces the depolarizing diagonal") {
  const double f = 0.8;
  std::vector<MatrixXcd> kraus{std::sqrt(1.0 - 3.0 * (1 - f) / 4) * MatrixXcd::Identity(2, 2),
                               std::sqrt((1 - f) / 4) * pauli_x(),
                               std::sqrt((1 - f) / 4) * pauli_y(),
                               std::sqrt((1 - f) / 4) * pauli_z()};
  Superop ch = ptm_of_kraus(kraus, 2, 1);
  VectorXd want(4);
  want << 1, f, f, f;
  CHECK((ch.mat - MatrixXd(want.asDiagonal())).cwiseAbs().maxCoeff() < 1e-12);
}

// ---- tableaus ----

TEST_CASE("named gate tableaus act correctly") {
  CliffordTableau h = tab_h(1, 0);
  CHECK(h.img_x[0].z == 1);  // X -> Z
  CHECK(h.img_x[0].x == 0);
  CHECK(h.img_z[0].x == 1);  // Z -> X
  CHECK(h.is_valid());

  CliffordTableau cx = tab_cx(2, 0, 1);
  // X_0 -> X_0 X_1, Z_1 -> Z_0 Z_1.
  CHECK(cx.img_x[0].x == 3);
  CHECK(cx.img_z[1].z == 3);
  CHECK(cx.is_valid());
}

TEST_CASE("tableau composition matches PTM composition") {
  MatrixXcd hu(2, 2), su(2, 2);
  hu << 1, 1, 1, -1;
  hu /= std::sqrt(2.0);
  su << 1, 0, 0, cplx(0, 1);
  CliffordTableau sh = tab_h(1, 0).then(tab_s(1, 0));  // S after H
  Superop want = ptm_of_unitary(su * hu, 2, 1);
  CHECK((to_superop(sh).mat - want.mat).cwiseAbs().maxCoeff() < 1e-12);

  CliffordTableau inv = sh.inverse();
  CHECK(sh.then(inv) == CliffordTableau::identity(1));
}

TEST_CASE("signed-perm convention: column i scatters to perm[i]") {
  // Conjugation by X: Z -> -Z, Y -> -Y.
  CliffordTableau xg = CliffordTableau::identity(1);
  xg.img_z[0].s ^= 2;
  SignedPerm sp = clifford_action(xg);
  VectorXd v(4), out(4);
  v << 0.5, 1.0, 2.0, 3.0;
  sp.apply(v.data(), out.data());
  VectorXd want(4);
  want << 0.5, 1.0, -2.0, -3.0;
  CHECK((out - want).cwiseAbs().maxCoeff() == 0.0);
  CHECK((to_superop(xg).mat * v - want).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("enumeration sizes") {
  CHECK(enumerate_symplectic(1).size() == 6);
  CHECK(enumerate_symplectic(2).size() == 720);
  CHECK(enumerate_clifford(1).size() == 24);

  std::set<std::uint64_t> keys;
  for (const auto& t : enumerate_clifford(1)) {
    SignedPerm sp = clifford_action(t);
    std::uint64_t key = 0;
    for (Index i = 0; i < 4; ++i)
      key = key * 64 + std::uint64_t(sp.perm[i]) * 4 + std::uint64_t(sp.sign[i] > 0 ? 1 : 2);
    keys.insert(key);
  }
  CHECK(keys.size() == 24);  // all channels distinct

  int count = 0;
  for_each_symplectic(2, [&](const CliffordTableau& t) {
    ++count;
    if (count == 1) CHECK(t.is_valid());
  });
  CHECK(count == 720);
}

TEST_CASE("sample_clifford produces valid uniform-ish tableaus") {
  std::mt19937_64 rng(17);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 200; ++i) {
    CliffordTableau t = sample_clifford(2, rng);
    REQUIRE(t.is_valid());
    SignedPerm sp = clifford_action(t);
    std::uint64_t key = 1469598103934665603ull;
    for (Index j = 0; j < 16; ++j) {
      key ^= std::uint64_t(sp.perm[j] * 2 + (sp.sign[j] > 0));
      key *= 1099511628211ull;
    }
    seen.insert(key);
  }
  CHECK(seen.size() > 150);  // 200 draws from 11520 channels rarely collide
}

TEST_CASE("pauli algebra helpers") {
  PauliBits x{0, 1, 0}, z{1, 0, 0};
  PauliBits zx = pauli_mul(z, x);
  int sign = 0;
  Index idx = pauli_to_weyl(pauli_mul(zx, zx), 1, sign);  // (ZX)^2 = -1 ... i^2
  CHECK(idx == 0);
  CHECK(sign == -1);

  GroupElement g;
  g.kind = GroupElement::Kind::weyl;
  g.p = 2;
  g.n = 1;
  g.a = WeylLabel::from_index(1, 2, 1);  // X
  Superop sx = element_superop(g);
  VectorXd diag = sx.mat.diagonal();
  VectorXd want(4);
  want << 1, 1, -1, -1;
  CHECK((diag - want).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("local_superop respects the (z, x)-split layout") {
  MatrixXcd hu(2, 2);
  hu << 1, 1, 1, -1;
  hu /= std::sqrt(2.0);
  Superop h1 = ptm_of_unitary(hu, 2, 1);
  Superop id1 = Superop::identity(2, 1);

  // H on site 0, identity on site 1.
  Superop joint = local_superop({h1, id1});
  MatrixXcd hfull = Eigen::kroneckerProduct(MatrixXcd::Identity(2, 2), hu);
  Superop want = ptm_of_unitary(hfull, 2, 2);  // site 0 = least significant
  CHECK((joint.mat - want.mat).cwiseAbs().maxCoeff() < 1e-12);
}
