#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <map>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

#include "frb/noise.hpp"
#include "frb/tableau.hpp"
#include "frb/weyl.hpp"

using namespace frb;
using nlohmann::json;

// ---- channel construction ----

TEST_CASE("global depolarizing channel fixes identity and scales the rest") {
  NoiseModel m = NoiseModel::depolarizing(0.8, 2, 1);
  Superop s = noise_channel_dense(m, 2, 1);
  VectorXd want(4);
  want << 1.0, 0.8, 0.8, 0.8;
  CHECK((s.mat.diagonal() - want).norm() < 1e-14);
  CHECK((s.mat - MatrixXd(s.mat.diagonal().asDiagonal())).norm() == 0.0);

  Superop s2 = noise_channel_dense(NoiseModel::depolarizing(0.5, 2, 2), 2, 2);
  CHECK(s2.mat(0, 0) == 1.0);
  for (Index i = 1; i < 16; ++i) CHECK(s2.mat(i, i) == 0.5);
}

TEST_CASE("single-site Pauli channel matches its Kraus form") {
  const double px = 0.1, py = 0.05, pz = 0.02;
  NoiseModel m = NoiseModel::local_pauli({{px, py, pz}});
  Superop s = noise_channel_dense(m, 2, 1);

  // independent oracle: PTM from explicit Kraus operators sqrt(p_a) w_a
  std::vector<MatrixXcd> ks;
  auto wl = [](int z, int x) { return WeylLabel{{z}, {x}}; };
  ks.push_back(std::sqrt(1.0 - px - py - pz) * weyl_matrix(wl(0, 0), 2, 1));
  ks.push_back(std::sqrt(px) * weyl_matrix(wl(0, 1), 2, 1));
  ks.push_back(std::sqrt(py) * weyl_matrix(wl(1, 1), 2, 1));
  ks.push_back(std::sqrt(pz) * weyl_matrix(wl(1, 0), 2, 1));
  Superop oracle = ptm_of_kraus(ks, 2, 1);
  CHECK((s.mat - oracle.mat).norm() < 1e-12);

  // flat order (I, X, Z, Y)
  CHECK(s.mat(1, 1) == doctest::Approx(1.0 - 2.0 * (py + pz)));
  CHECK(s.mat(2, 2) == doctest::Approx(1.0 - 2.0 * (px + py)));
  CHECK(s.mat(3, 3) == doctest::Approx(1.0 - 2.0 * (px + pz)));
}

TEST_CASE("two-site Pauli noise is the tensor product, site 0 low") {
  NoiseModel m = NoiseModel::local_pauli({{0.1, 0.0, 0.0}, {0.0, 0.0, 0.2}});
  Superop s = noise_channel_dense(m, 2, 2);
  Superop a = noise_channel_dense(NoiseModel::local_pauli({{0.1, 0.0, 0.0}}), 2, 1);
  Superop b = noise_channel_dense(NoiseModel::local_pauli({{0.0, 0.0, 0.2}}), 2, 1);
  MatrixXd za = a.mat, zb = b.mat;
  // flat index = z * 4 + x with site 0 the least-significant digit of each of
  // z and x, so neither plain kron order reproduces it; check entrywise.
  for (int z1 = 0; z1 < 2; ++z1)
    for (int z0 = 0; z0 < 2; ++z0)
      for (int x1 = 0; x1 < 2; ++x1)
        for (int x0 = 0; x0 < 2; ++x0) {
          Index idx = Index(z1 * 2 + z0) * 4 + (x1 * 2 + x0);
          double want = za(z0 * 2 + x0, z0 * 2 + x0) * zb(z1 * 2 + x1, z1 * 2 + x1);
          CHECK(s.mat(idx, idx) == doctest::Approx(want).epsilon(1e-14));
        }
}

TEST_CASE("local depolarizing is the eps/4 Pauli triple per site") {
  NoiseModel m = NoiseModel::local_depolarizing(0.02, 3);
  REQUIRE(m.rates.size() == 3);
  for (const auto& r : m.rates)
    for (double q : r) CHECK(q == doctest::Approx(0.005));
  // single-site marginal: diag(1, 1-eps, 1-eps, 1-eps)
  Superop s1 = noise_channel_dense(NoiseModel::local_depolarizing(0.02, 1), 2, 1);
  for (Index i = 1; i < 4; ++i) CHECK(s1.mat(i, i) == doctest::Approx(0.98));
}

TEST_CASE("joint correlated table overrides the product form") {
  NoiseModel m = NoiseModel::local_pauli({{0.0, 0.0, 0.0}});
  m.joint_table.push_back({WeylLabel{{0}, {1}}, 0.2});  // X with weight 0.2
  Superop s = noise_channel_dense(m, 2, 1);
  VectorXd want(4);
  want << 1.0, 1.0, 0.6, 0.6;
  CHECK((s.mat.diagonal() - want).norm() < 1e-14);

  // two-site correlated XX flips both Z components together
  NoiseModel m2 = NoiseModel::local_pauli({{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}});
  m2.joint_table.push_back({WeylLabel{{0, 0}, {1, 1}}, 0.1});
  Superop s2 = noise_channel_dense(m2, 2, 2);
  // ZI (z = 01, x = 00) anticommutes with XX
  WeylLabel zi{{1, 0}, {0, 0}};
  CHECK(s2.mat(zi.index(2), zi.index(2)) == doctest::Approx(0.8));
  // ZZ commutes with XX
  WeylLabel zz{{1, 1}, {0, 0}};
  CHECK(s2.mat(zz.index(2), zz.index(2)) == doctest::Approx(1.0));
}

// ---- validation ----

TEST_CASE("rate validation rejects malformed Pauli models") {
  CHECK_THROWS_AS(NoiseModel::local_pauli({{-0.1, 0.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel::local_pauli({{0.5, 0.4, 0.2}}), std::invalid_argument);
  CHECK_NOTHROW(NoiseModel::local_pauli({{0.5, 0.3, 0.2}}));
}

TEST_CASE("channel validation: Choi positivity and trace non-increase") {
  Superop depol = noise_channel_dense(NoiseModel::depolarizing(0.9, 2, 1), 2, 1);
  CHECK(choi_min_eigenvalue(depol) > -1e-12);
  CHECK(trace_non_increasing(depol));
  CHECK_NOTHROW(validate_channel(depol));

  // scaling a Pauli component above 1 breaks complete positivity
  Superop bad = Superop::identity(2, 1);
  bad.mat(1, 1) = 1.5;
  CHECK(choi_min_eigenvalue(bad) < -0.1);
  CHECK_THROWS_AS(validate_channel(bad), std::invalid_argument);

  // inflating the unit row increases trace
  Superop leak = Superop::identity(2, 1);
  leak.mat(0, 0) = 1.1;
  CHECK(!trace_non_increasing(leak));
  CHECK_THROWS_AS(validate_channel(leak), std::invalid_argument);
}

TEST_CASE("gate-dependent models have no gate-free channel") {
  NoiseModel m;
  m.type = NoiseModel::Type::gate_dependent;
  m.dense_map = [](const GroupElement&) { return Superop::identity(2, 1); };
  CHECK(!m.pauli_diagonal());
  CHECK_THROWS_AS((void)noise_channel_dense(m, 2, 1), std::invalid_argument);
}

// ---- composition with the ideal gate ----

TEST_CASE("apply_noise composes the error after the ideal layer") {
  GroupElement h;
  h.kind = GroupElement::Kind::clifford;
  h.p = 2;
  h.n = 1;
  h.tab = tab_h(1, 0);
  Superop ideal = element_superop(h);
  NoiseModel m = NoiseModel::depolarizing(0.9, 2, 1);
  Superop noisy = apply_noise(m, h);
  Superop err = noise_channel_dense(m, 2, 1);
  CHECK((noisy.mat - err.mat * ideal.mat).norm() < 1e-14);
  // none model returns the ideal gate itself
  Superop plain = apply_noise(NoiseModel::none_model(), h);
  CHECK((plain.mat - ideal.mat).norm() == 0.0);
}

// ---- stochastic unraveling ----

TEST_CASE("trajectory sampling reproduces the channel on average") {
  const double px = 0.1, py = 0.05, pz = 0.02;
  NoiseModel m = NoiseModel::local_pauli({{px, py, pz}});
  std::mt19937_64 rng(99);
  const int trials = 20000;
  std::map<Index, int> counts;
  for (int t = 0; t < trials; ++t) {
    std::vector<WeylLabel> traj = pauli_trajectory(m, 1, rng);
    REQUIRE(traj.size() <= 1);
    counts[traj.empty() ? 0 : traj[0].index(2)]++;
  }
  auto freq = [&](Index i) { return counts[i] / double(trials); };
  auto band = [&](double p0) { return 4.0 * std::sqrt(p0 * (1.0 - p0) / trials); };
  CHECK(std::fabs(freq(0) - (1.0 - px - py - pz)) < band(1.0 - px - py - pz));
  CHECK(std::fabs(freq(1) - px) < band(px));  // X
  CHECK(std::fabs(freq(3) - py) < band(py));  // Y
  CHECK(std::fabs(freq(2) - pz) < band(pz));  // Z

  // none draws nothing; gate-independent dense channels have no unraveling
  CHECK(pauli_trajectory(NoiseModel::none_model(), 1, rng).empty());
  NoiseModel dep = NoiseModel::depolarizing(0.9, 2, 1);
  CHECK_THROWS_AS((void)pauli_trajectory(dep, 1, rng), std::invalid_argument);
  NoiseModel gd;
  gd.type = NoiseModel::Type::gate_dependent;
  gd.dense_map = [](const GroupElement&) { return Superop::identity(2, 1); };
  CHECK_THROWS_AS((void)pauli_trajectory(gd, 1, rng), std::invalid_argument);
}

// ---- SPAM ----

TEST_CASE("SPAM factories") {
  SpamModel none = SpamModel::none_model(2, 2);
  CHECK(none.trivial);
  CHECK((none.prep.mat - MatrixXd::Identity(16, 16)).norm() == 0.0);
  CHECK((none.meas.mat - MatrixXd::Identity(16, 16)).norm() == 0.0);

  SpamModel dm = SpamModel::depolarizing_meas(0.9, 2, 1);
  CHECK(!dm.trivial);
  CHECK((dm.prep.mat - MatrixXd::Identity(4, 4)).norm() == 0.0);
  CHECK(dm.meas.mat(1, 1) == doctest::Approx(0.9));
  CHECK(dm.meas.mat(0, 0) == doctest::Approx(1.0));
}

// ---- JSON ----

TEST_CASE("noise JSON round-trip and rejection paths") {
  NoiseModel m = NoiseModel::from_json(json{{"type", "depolarizing"}, {"f", 0.98}}, 2, 2);
  CHECK(m.type == NoiseModel::Type::gate_independent);
  CHECK(noise_channel_dense(m, 2, 2).mat(5, 5) == doctest::Approx(0.98));
  json back = m.to_json();
  CHECK(back.at("type").get<std::string>() == "depolarizing");
  CHECK(back.at("f").get<double>() == doctest::Approx(0.98));

  NoiseModel lp = NoiseModel::from_json(
      json{{"type", "local_pauli"},
           {"rates", json::array({json::array({0.01, 0.0, 0.0}), json::array({0.0, 0.0, 0.02})})}},
      2, 2);
  CHECK(lp.type == NoiseModel::Type::local_pauli);
  CHECK(lp.rates[1][2] == doctest::Approx(0.02));

  NoiseModel nn = NoiseModel::from_json(json{{"type", "none"}}, 2, 2);
  CHECK(nn.type == NoiseModel::Type::none);

  CHECK_THROWS_AS(NoiseModel::from_json(json::array(), 2, 1), config_error);
  CHECK_THROWS_AS(NoiseModel::from_json(json{{"type", "depolarizing"}}, 2, 1), config_error);
  CHECK_THROWS_AS(NoiseModel::from_json(json{{"type", "depolarizing"}, {"f", 1.5}}, 2, 1),
                  config_error);
  CHECK_THROWS_AS(
      NoiseModel::from_json(json{{"type", "local_pauli"},
                                 {"rates", json::array({json::array({0.01, 0.0, 0.0})})}},
                            2, 2),
      config_error);
  CHECK_THROWS_AS(NoiseModel::from_json(json{{"type", "amplitude"}}, 2, 1), config_error);
  // CP violation surfaces as config_error through the JSON path
  CHECK_THROWS_AS(
      NoiseModel::from_json(json{{"type", "local_pauli"},
                                 {"rates", json::array({json::array({0.9, 0.3, 0.0})})}},
                            2, 1),
      config_error);
}

TEST_CASE("spam JSON") {
  SpamModel s = SpamModel::from_json(
      json{{"prep", {{"type", "depolarizing"}, {"f", 0.9}}}}, 2, 1);
  CHECK(!s.trivial);
  CHECK(s.prep.mat(1, 1) == doctest::Approx(0.9));
  CHECK((s.meas.mat - MatrixXd::Identity(4, 4)).norm() == 0.0);
  CHECK_THROWS_AS(SpamModel::from_json(json::array(), 2, 1), config_error);
}

// ---- state and effect coordinates ----

TEST_CASE("zero-state coordinates in the orthonormal Weyl basis") {
  VectorXd v1 = zero_state_coords(2, 1);
  VectorXd want1(4);
  want1 << 1.0 / std::sqrt(2.0), 0.0, 1.0 / std::sqrt(2.0), 0.0;
  CHECK((v1 - want1).norm() < 1e-14);

  VectorXd v2 = zero_state_coords(2, 2);
  CHECK(v2.norm() == doctest::Approx(1.0));  // purity
  for (Index i = 0; i < 16; ++i) {
    bool ztype = (i % 4) == 0;  // x digits zero
    CHECK(v2[i] == doctest::Approx(ztype ? 0.5 : 0.0));
  }
}

TEST_CASE("basis effect coordinates resolve the identity") {
  VectorXd e1 = basis_effect_coords(2, 1, 1);
  VectorXd want(4);
  want << 1.0 / std::sqrt(2.0), 0.0, -1.0 / std::sqrt(2.0), 0.0;
  CHECK((e1 - want).norm() < 1e-14);

  // completeness at n = 2: effects sum to sqrt(d) e_0
  VectorXd tot = VectorXd::Zero(16);
  for (std::uint64_t i = 0; i < 4; ++i) tot += basis_effect_coords(2, 2, i);
  VectorXd id = VectorXd::Zero(16);
  id[0] = 2.0;
  CHECK((tot - id).norm() < 1e-13);

  // Born rule: <E_i, rho_0> = delta_{i0}
  VectorXd rho = zero_state_coords(2, 2);
  for (std::uint64_t i = 0; i < 4; ++i)
    CHECK(basis_effect_coords(2, 2, i).dot(rho) == doctest::Approx(i == 0 ? 1.0 : 0.0));
}
