#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "frb/kernels.hpp"
#include "frb/superop.hpp"

using namespace frb;

namespace {

MatrixXd random_matrix(Index r, Index c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

// Dense embedding of op acting on the listed flat-index bits.
MatrixXd dense_on_bits(const MatrixXd& op, const std::vector<int>& bits, int nb) {
  const Index dim = Index(1) << nb;
  MatrixXd out = MatrixXd::Zero(dim, dim);
  const Index sub = op.rows();
  for (Index col = 0; col < dim; ++col) {
    Index packed = 0;
    for (size_t i = 0; i < bits.size(); ++i) packed |= ((col >> bits[i]) & 1) << i;
    Index base = col;
    for (int b : bits) base &= ~(Index(1) << b);
    for (Index r = 0; r < sub; ++r) {
      Index row = base;
      for (size_t i = 0; i < bits.size(); ++i) row |= ((r >> i) & 1) << bits[i];
      out(row, col) = op(r, packed);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("pow_index") {
  CHECK(pow_index(2, 0) == 1);
  CHECK(pow_index(2, 10) == 1024);
  CHECK(pow_index(3, 4) == 81);
}

TEST_CASE("superop shape validation") {
  Superop s(2, 2);
  CHECK(s.dim() == 16);
  CHECK_THROWS_AS(Superop(2, 1, MatrixXd::Zero(3, 3)), std::invalid_argument);
  CHECK(Superop::identity(2, 1).mat.isIdentity(0.0));
}

TEST_CASE("pseudoinverse satisfies the Penrose identities") {
  MatrixXd a = random_matrix(6, 4, 3) * random_matrix(4, 5, 4);  // rank <= 4
  MatrixXd ap = pseudoinverse(a);
  CHECK((a * ap * a - a).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((ap * a * ap - ap).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((a * ap - (a * ap).transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((ap * a - (ap * a).transpose()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("spectral norm: dense and operator paths agree") {
  MatrixXd a = random_matrix(40, 40, 5);
  double dense = spectral_norm(a);
  CHECK(dense == doctest::Approx(a.jacobiSvd().singularValues()[0]).epsilon(1e-12));
  DenseApply op(a);
  CHECK(spectral_norm(op) == doctest::Approx(dense).epsilon(1e-8));
}

TEST_CASE("top_eigs finds a known spectrum and honours deflation") {
  // Symmetric matrix with eigenvalues 5, 3, 1 on known axes.
  MatrixXd q = random_matrix(12, 12, 8);
  Eigen::HouseholderQR<MatrixXd> qr(q);
  MatrixXd u = qr.householderQ();
  VectorXd ev = VectorXd::Ones(12);
  ev[0] = 5.0;
  ev[1] = 3.0;
  MatrixXd a = u * ev.asDiagonal() * u.transpose();

  DenseApply op(a);
  EigPairs top = top_eigs(op, 2);
  CHECK(top.values[0] == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(top.values[1] == doctest::Approx(3.0).epsilon(1e-9));

  MatrixXd known = u.col(0);
  EigPairs rest = top_eigs(op, 1, EigMethod::lanczos, 1e-10, 10000, 11, &known);
  CHECK(rest.values[0] == doctest::Approx(3.0).epsilon(1e-9));
}

// ---- scatter-apply kernels ----

TEST_CASE("apply_on_bits matches the dense embedding") {
  const int nb = 10;
  const Index dim = Index(1) << nb;
  const std::vector<int> bits{1, 7, 4};
  MatrixXd op = random_matrix(8, 8, 21);
  VectorXd v = random_matrix(dim, 1, 22);

  VectorXd got = v;
  apply_on_bits(op, bits, got.data(), dim);
  VectorXd want = dense_on_bits(op, bits, nb) * v;
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);

  VectorXd serial = v;
  apply_on_bits_serial(op, bits, serial.data(), dim);
  CHECK((got - serial).cwiseAbs().maxCoeff() == 0.0);  // identical arithmetic
}

TEST_CASE("project_on_bits is the orthogonal block projector") {
  const int nb = 8;
  const Index dim = Index(1) << nb;
  const std::vector<int> bits{0, 3, 6, 7};
  MatrixXd basis = random_matrix(16, 3, 31);
  MatrixXd ginv = (basis.transpose() * basis).inverse();
  VectorXd v = random_matrix(dim, 1, 32);

  VectorXd got = v;
  project_on_bits(basis, ginv, bits, got.data(), dim);

  MatrixXd proj = basis * ginv * basis.transpose();
  VectorXd want = dense_on_bits(proj, bits, nb) * v;
  CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);

  VectorXd twice = got;
  project_on_bits(basis, ginv, bits, twice.data(), dim);
  CHECK((twice - got).cwiseAbs().maxCoeff() < 1e-10);  // idempotent

  VectorXd serial = v;
  project_on_bits_serial(basis, ginv, bits, serial.data(), dim);
  CHECK((got - serial).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kernel validation") {
  VectorXd v = VectorXd::Zero(8);
  MatrixXd op = MatrixXd::Identity(4, 4);
  CHECK_THROWS_AS(apply_on_bits(op, {0, 1}, v.data(), 7), std::invalid_argument);
  CHECK_THROWS_AS(apply_on_bits(op, {0, 0}, v.data(), 8), std::invalid_argument);
  CHECK_THROWS_AS(apply_on_bits(op, {0, 9}, v.data(), 8), std::invalid_argument);
  CHECK_THROWS_AS(apply_on_bits(MatrixXd::Identity(2, 2), {0, 1}, v.data(), 8),
                  std::invalid_argument);
  CHECK(free_bits({0, 2}, 4) == std::vector<int>{1, 3});
}
