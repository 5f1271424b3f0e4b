#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "frb/frame.hpp"
#include "frb/irreps.hpp"
#include "frb/noise.hpp"

using namespace frb;

// ---- irrep projectors ----

TEST_CASE("irrep projectors partition the identity") {
  for (GroupKind kind : {GroupKind::clifford, GroupKind::local_clifford,
                         GroupKind::heisenberg_weyl}) {
    auto irr = irrep_projectors(kind, 2, 2);
    VectorXd sum = VectorXd::Zero(16);
    Index total_dim = 0;
    for (const auto& lam : irr) {
      for (Index i = 0; i < 16; ++i) {
        CHECK((lam.diag[i] == 0.0 || lam.diag[i] == 1.0));
        sum[i] += lam.diag[i];
      }
      CHECK(Index(lam.support().size()) == lam.mult * lam.dim_lambda);
      total_dim += lam.mult * lam.dim_lambda;
    }
    CHECK((sum - VectorXd::Ones(16)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(total_dim == 16);
  }
}

TEST_CASE("block structure per group") {
  auto cl = irrep_projectors(GroupKind::clifford, 2, 2);
  CHECK(cl.size() == 2);
  CHECK(find_irrep(cl, "1").dim_lambda == 1);
  CHECK(find_irrep(cl, "ad").dim_lambda == 15);
  CHECK(find_irrep(cl, "ad").mult == 1);

  auto loc = irrep_projectors(GroupKind::local_clifford, 2, 2);
  CHECK(loc.size() == 4);  // b in {00, 01, 10, 11}
  CHECK(find_irrep(loc, "b=00").dim_lambda == 9);
  CHECK(find_irrep(loc, "b=01").dim_lambda == 3);
  CHECK(find_irrep(loc, "b=11").is_trivial());

  auto hw = irrep_projectors(GroupKind::heisenberg_weyl, 2, 2);
  CHECK(hw.size() == 16);  // trivial + 15 one-dimensional blocks
  CHECK(find_irrep(hw, "w=(3,0)").dim_lambda == 1);

  CHECK_THROWS_AS(find_irrep(cl, "nope"), std::invalid_argument);
}

TEST_CASE("group_of_irrep maps names to groups") {
  CHECK(group_of_irrep("ad") == GroupKind::clifford);
  CHECK(group_of_irrep("1") == GroupKind::clifford);
  CHECK(group_of_irrep("b=01") == GroupKind::local_clifford);
  CHECK(group_of_irrep("w=(3,0)") == GroupKind::heisenberg_weyl);
  CHECK_THROWS_AS(group_of_irrep("junk"), config_error);
}

TEST_CASE("character projector on a two-element group") {
  // Conjugation by Z: diag(1, -1, 1, -1) on (I, X, Z, Y).
  VectorXd d(4);
  d << 1, -1, 1, -1;
  Superop rz(2, 1, MatrixXd(d.asDiagonal()));
  std::vector<Superop> rep{Superop::identity(2, 1), rz};

  Superop even = character_projector(rep, {1.0, 1.0}, 1.0);
  Superop odd = character_projector(rep, {1.0, -1.0}, 1.0);
  VectorXd we(4), wo(4);
  we << 1, 0, 1, 0;
  wo << 0, 1, 0, 1;
  CHECK((even.mat - MatrixXd(we.asDiagonal())).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((odd.mat - MatrixXd(wo.asDiagonal())).cwiseAbs().maxCoeff() < 1e-12);
}

// ---- frame operator ----

TEST_CASE("closed-form frame eigenvalues") {
  for (int n : {1, 2, 3}) {
    FrameOperator f = frame_operator(GroupKind::clifford, 2, n);
    const double d = double(pow_index(2, n));
    CHECK(f.blocks.at("1") == doctest::Approx(1.0));
    CHECK(f.blocks.at("ad") == doctest::Approx(1.0 / (d + 1.0)));
  }
  FrameOperator floc = frame_operator(GroupKind::local_clifford, 2, 2);
  CHECK(floc.blocks.at("b=00") == doctest::Approx(1.0 / 9.0));
  CHECK(floc.blocks.at("b=01") == doctest::Approx(1.0 / 3.0));
  CHECK(floc.blocks.at("b=11") == doctest::Approx(1.0));

  FrameOperator fhw = frame_operator(GroupKind::heisenberg_weyl, 2, 2);
  CHECK(fhw.blocks.at("w=(3,0)") == doctest::Approx(1.0));
  CHECK(fhw.blocks.at("w=(0,3)") == doctest::Approx(0.0));
}

TEST_CASE("frame by explicit averaging matches the closed form") {
  for (GroupKind kind : {GroupKind::clifford, GroupKind::local_clifford,
                         GroupKind::heisenberg_weyl}) {
    for (int n : {1, 2}) {
      FrameOperator f = frame_operator(kind, 2, n);
      VectorXd avg = frame_diag_by_averaging(kind, 2, n);
      CHECK((avg - f.diag).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("prepared-state overlap with the local frame") {
  // <<00| S_local |00>> for two qubits.
  FrameOperator f = frame_operator(GroupKind::local_clifford, 2, 2);
  VectorXd rho = zero_state_coords(2, 2);
  CHECK(rho.dot(f.diag.cwiseProduct(rho)) == doctest::Approx(2.0 / 5.0));
}

TEST_CASE("frame pseudoinverse blocks") {
  FrameOperator f = frame_operator(GroupKind::clifford, 2, 1);
  auto irr = irrep_projectors(GroupKind::clifford, 2, 1);
  const IrrepSpec& ad = find_irrep(irr, "ad");
  Superop pinv = frame_pinv_block(f, ad);
  // S^+ S = P_ad on the block.
  MatrixXd prod = pinv.mat * f.dense().mat;
  CHECK((prod - ad.projector().mat).cwiseAbs().maxCoeff() < 1e-12);

  FrameEigBounds b = frame_eig_bounds(f, ad);
  CHECK(b.actual == doctest::Approx(3.0));  // 1 / s_ad = d + 1
  CHECK(b.lower <= b.actual);
  CHECK(b.actual <= b.upper);

  // Invisible HW block: frame_eig_bounds must refuse.
  FrameOperator fhw = frame_operator(GroupKind::heisenberg_weyl, 2, 1);
  auto hw = irrep_projectors(GroupKind::heisenberg_weyl, 2, 1);
  CHECK_THROWS_AS(frame_eig_bounds(fhw, find_irrep(hw, "w=(0,1)")),
                  std::invalid_argument);
}

TEST_CASE("measurement channel dephases onto z-type directions") {
  VectorXd m = measurement_diag(2, 2);
  for (Index z = 0; z < 4; ++z)
    for (Index x = 0; x < 4; ++x)
      CHECK(m[z * 4 + x] == (x == 0 ? 1.0 : 0.0));
}

TEST_CASE("spam visibilities") {
  auto irr = irrep_projectors(GroupKind::clifford, 2, 1);
  const IrrepSpec& ad = find_irrep(irr, "ad");
  VectorXd rho = zero_state_coords(2, 1);

  SpamVisibilities ideal = spam_visibilities(ad, rho, rho, nullptr);
  CHECK(ideal.v_sp == doctest::Approx(1.0));
  CHECK(ideal.v_m == doctest::Approx(1.0));

  // Depolarized preparation scales v_sp by f on the adjoint block.
  NoiseModel dep = NoiseModel::depolarizing(0.9, 2, 1);
  Superop ch = noise_channel_dense(dep, 2, 1);
  VectorXd rho_t = ch.mat * rho;
  SpamVisibilities noisy = spam_visibilities(ad, rho, rho_t, &ch);
  CHECK(noisy.v_sp == doctest::Approx(0.9));
  CHECK(noisy.v_m == doctest::Approx(0.9));
}
