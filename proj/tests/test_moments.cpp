#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "frb/moments.hpp"
#include "frb/irreps.hpp"
#include "frb/noise.hpp"

using namespace frb;

namespace {

double frob(const MatrixXd& a) { return a.norm(); }

}  // namespace

// ---- fixed-space bases and Haar projectors ----

TEST_CASE("twirl basis columns are fixed by the single-site Haar twirl") {
  for (int t : {1, 2}) {
    MatrixXd b = twirl_basis(1, t);
    MomentOperator m = moment_operator(Ensemble::exact_group(GroupKind::clifford, 1), t);
    REQUIRE(m.has_dense);
    CHECK(frob(m.dense * b - b) < 1e-10);
  }
}

TEST_CASE("fixed_space_orthonormal is orthonormal and spans the projector") {
  for (int n : {1, 2}) {
    for (int t : {1, 2}) {
      MatrixXd b = fixed_space_orthonormal(n, t);
      MatrixXd gram = b.transpose() * b;
      CHECK(frob(gram - MatrixXd::Identity(b.cols(), b.cols())) < 1e-10);
      MatrixXd p = haar_projector_dense(n, t);
      CHECK(frob(p - b * b.transpose()) < 1e-10);
      CHECK(frob(p * p - p) < 1e-10);
      CHECK(frob(p - p.transpose()) < 1e-12);
    }
  }
}

TEST_CASE("Haar fixed-space dimensions: 2 at t=2; 5 (qubit) / 6 at t=3") {
  CHECK(haar_projector_dense(1, 2).trace() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(haar_projector_dense(2, 2).trace() == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(haar_projector_dense(1, 3).trace() == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(haar_projector_dense(2, 3).trace() == doctest::Approx(6.0).epsilon(1e-10));
}

// ---- exact-group moment operators ----

TEST_CASE("uniform Clifford layers are exact 2- and 3-designs") {
  // t = 2 at one and two qubits
  for (int n : {1, 2}) {
    MomentOperator m = moment_operator(Ensemble::exact_group(GroupKind::clifford, n), 2);
    REQUIRE(m.has_dense);
    CHECK(frob(m.dense - haar_projector_dense(n, 2)) < 1e-12);
  }
  // the single-qubit Clifford group is also a 3-design
  MomentOperator m3 = moment_operator(Ensemble::exact_group(GroupKind::clifford, 1), 3);
  REQUIRE(m3.has_dense);
  CHECK(frob(m3.dense - haar_projector_dense(1, 3)) < 1e-12);
}

TEST_CASE("single-site local Clifford layer equals the full group at n=1") {
  MomentOperator a = moment_operator(Ensemble::exact_group(GroupKind::clifford, 1), 2);
  MomentOperator b = moment_operator(Ensemble::exact_group(GroupKind::local_clifford, 1), 2);
  CHECK(frob(a.dense - b.dense) < 1e-12);
}

TEST_CASE("Pauli-layer second moment projects onto matched-index pairs") {
  MomentOperator m = moment_operator(Ensemble::exact_group(GroupKind::heisenberg_weyl, 1), 2);
  REQUIRE(m.has_dense);
  CHECK(frob(m.dense * m.dense - m.dense) < 1e-12);
  CHECK(m.dense.trace() == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("moment_dense_of_elements averages tensor powers") {
  MatrixXd id = MatrixXd::Identity(4, 4);
  MatrixXd x = id;
  x(2, 2) = -1.0;  // PTM of the X gate: flips Z...
  x(3, 3) = -1.0;  // ...and Y
  std::vector<MatrixXd> ops = {id, x};
  std::vector<double> pr = {0.25, 0.75};
  MatrixXd m1 = moment_dense_of_elements(ops, pr, 1);
  CHECK(frob(m1 - (0.25 * id + 0.75 * x)) < 1e-14);
  MatrixXd m2 = moment_dense_of_elements(ops, pr, 2);
  MatrixXd want = MatrixXd::Zero(16, 16);
  for (int i = 0; i < 16; ++i) want(i, i) = 0.25 + 0.75 * x(i / 4, i / 4) * x(i % 4, i % 4);
  CHECK(frob(m2 - want) < 1e-14);
}

// ---- spectral gaps ----

TEST_CASE("closed-form NN chain gap") {
  // open chain: (1/(n-1)) (1 - (4/5) cos(pi/n))
  CHECK(exact_nn_lrc_gap(3, Boundary::open) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(exact_nn_lrc_gap(4, Boundary::open) ==
        doctest::Approx((1.0 - 0.8 * std::cos(M_PI / 4.0)) / 3.0).epsilon(1e-12));
  // periodic: (2/n) (1 - (4/5) cos(pi/n))
  CHECK(exact_nn_lrc_gap(4, Boundary::periodic) ==
        doctest::Approx(0.5 * (1.0 - 0.8 * std::cos(M_PI / 4.0))).epsilon(1e-12));
}

TEST_CASE("dense gap of the n=3 NN chain hits the closed form") {
  GapResult g = spectral_gap(moment_operator(Ensemble::lrc_nn(3), 2));
  CHECK(g.method == "dense");
  CHECK(g.gap == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("matrix-free gap at n=4 matches the closed form") {
  GapResult g = spectral_gap(moment_operator(Ensemble::lrc_nn(4), 2));
  CHECK(g.method == "lanczos");
  CHECK(g.gap == doctest::Approx(exact_nn_lrc_gap(4, Boundary::open)).epsilon(1e-6));
  CHECK(g.residual < 1e-6);
}

TEST_CASE("population-sector gap agrees with the closed form far beyond dense reach") {
  for (int n : {5, 8, 10}) {
    Ensemble e = Ensemble::lrc_nn(n);
    CHECK(sector_gap(e) == doctest::Approx(exact_nn_lrc_gap(n, Boundary::open)).epsilon(1e-10));
  }
  Ensemble p = Ensemble::lrc_nn(6, Boundary::periodic);
  CHECK(sector_gap(p) == doctest::Approx(exact_nn_lrc_gap(6, Boundary::periodic)).epsilon(1e-10));
}

TEST_CASE("tabulated gaps") {
  CHECK(tabulated_gap("lrc_nn", 4, 2).first == doctest::Approx(1.0 / 20.0));
  CHECK(tabulated_gap("lrc_complete", 6, 3).first == doctest::Approx(5.0 / 36.0));
  CHECK(tabulated_gap("bw", 10, 2).first == doctest::Approx(9.0 / 50.0));
  CHECK(tabulated_gap("bw", 10, 3).first == doctest::Approx(1.0 / 42.0));
  CHECK(tabulated_gap("bw_odd", 10, 2).first == doctest::Approx(9.0 / 25.0));
  CHECK(tabulated_gap("generator_bw", 8, 2).first == doctest::Approx(1.0 / 134.0));
  CHECK(tabulated_gap("generator_local", 2, 2).first == doctest::Approx(1.0 / 10.99));
  CHECK(tabulated_gap("generator_lrc_nn", 5, 2).first == doctest::Approx(1.0 / 275.0));
  CHECK(tabulated_gap("generator_lrc_complete", 7, 3).first == doctest::Approx(1.0 / 98.0));
  CHECK(tabulated_gap("lrc_nn_pbc", 6, 2).first ==
        doctest::Approx(exact_nn_lrc_gap(6, Boundary::periodic)));
  CHECK(!tabulated_gap("bw", 4, 2).second.empty());
  CHECK_THROWS_AS((void)tabulated_gap("no_such_arch", 4, 2), config_error);
  CHECK_THROWS_AS((void)tabulated_gap("bw", 4, 5), config_error);
  CHECK_THROWS_AS((void)tabulated_gap("bw", 1, 2), config_error);
}

TEST_CASE("composition bound") {
  CHECK(local_to_global_gap(0.1, 0.05) == doctest::Approx(1.0 - 0.9 * 0.95).epsilon(1e-14));
  CHECK(local_to_global_gap(0.0, 0.3) == doctest::Approx(0.3));
  CHECK(local_to_global_gap(1.0, 0.3) == doctest::Approx(1.0));
}

// ---- Fourier-side quantities ----

TEST_CASE("implementation error of global depolarizing noise on an exact design") {
  Ensemble e = Ensemble::exact_group(GroupKind::clifford, 2);
  auto irr = irrep_projectors(GroupKind::clifford, 2, 2);
  const IrrepSpec& ad = find_irrep(irr, "ad");
  NoiseModel nm = NoiseModel::depolarizing(0.97, 2, 2);
  CHECK(implementation_error(e, ad, nm) == doctest::Approx(0.03).epsilon(1e-9));
  // noiseless: zero error
  NoiseModel none = NoiseModel::none_model();
  CHECK(implementation_error(e, ad, none) < 1e-10);
}

TEST_CASE("implementation error of weak local depolarizing noise") {
  Ensemble e = Ensemble::exact_group(GroupKind::clifford, 2);
  auto irr = irrep_projectors(GroupKind::clifford, 2, 2);
  const IrrepSpec& ad = find_irrep(irr, "ad");
  NoiseModel loc = NoiseModel::local_depolarizing(0.01, 2);
  double d = implementation_error(e, ad, loc);
  CHECK(d == doctest::Approx(0.0166615125).epsilon(1e-6));
  // below the crude product bound 1 - (1-eps)^n
  CHECK(d < 1.0 - 0.99 * 0.99);
}

TEST_CASE("noiseless decay curve of the n=3 NN chain") {
  Ensemble e = Ensemble::lrc_nn(3);
  auto irr = irrep_projectors(GroupKind::clifford, 2, 3);
  const IrrepSpec& ad = find_irrep(irr, "ad");
  VectorXd f = ideal_decay_curve(e, ad, 40);
  REQUIRE(f.size() == 40);
  CHECK(f(0) == doctest::Approx(2.475).epsilon(1e-9));
  CHECK(f(1) == doctest::Approx(1.755).epsilon(1e-9));
  // converges to the ideal plateau 1 - 1/d from above
  CHECK(f(39) == doctest::Approx(0.875000363820).epsilon(1e-9));
  for (int m = 0; m < 39; ++m) CHECK(f(m) > f(m + 1));
  // late-window decrements shrink by 1 - Delta_2 = 0.7 per step
  double r1 = (f(36) - 0.875) / (f(35) - 0.875);
  CHECK(r1 == doctest::Approx(0.7).epsilon(2e-3));
}

TEST_CASE("sampled moment operator converges to the exact one") {
  Ensemble e = Ensemble::exact_group(GroupKind::clifford, 1);
  MomentOperator exact = moment_operator(e, 2);
  std::mt19937_64 rng(1234);
  double se = 0.0;
  MatrixXd mc = moment_operator_mc(e, 2, 4000, rng, &se);
  CHECK(se > 0.0);
  CHECK(frob(mc - exact.dense) < 5.0 * se);
}
