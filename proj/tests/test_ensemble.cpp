#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "frb/ensemble.hpp"
#include "frb/errors.hpp"

using namespace frb;

// ---- construction & validation ----

TEST_CASE("edge sets") {
  CHECK(Ensemble::nn_edges(4, Boundary::open) ==
        std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}});
  CHECK(Ensemble::nn_edges(4, Boundary::periodic).size() == 4);
  CHECK(Ensemble::nn_edges(2, Boundary::periodic).size() == 1);  // no double edge
  CHECK(Ensemble::complete_edges(4).size() == 6);
}

TEST_CASE("validation rejects malformed measures") {
  Ensemble e = Ensemble::lrc_nn(3);
  e.edges.push_back({0, 5});
  CHECK_THROWS_AS(e.validate(), config_error);

  Ensemble bad_bw = Ensemble::brickwork(4);
  bad_bw.bc = Boundary::periodic;
  CHECK_THROWS_AS(bad_bw.validate(), config_error);

  Ensemble w = Ensemble::lrc_nn(3);
  w.edge_probs = {0.5, 0.4};  // does not sum to 1
  CHECK_THROWS_AS(w.validate(), config_error);
  w.edge_probs = {0.5, 0.5};
  CHECK_NOTHROW(w.validate());

  Ensemble odd = Ensemble::lrc_nn(2);
  odd.p = 3;
  CHECK_THROWS_AS(odd.validate(), config_error);

  CHECK_THROWS_AS(Ensemble::exact_group(GroupKind::unitary_2_group, 6),
                  config_error);
}

TEST_CASE("invariance flags") {
  CHECK(Ensemble::brickwork(4).right_lc_invariant);
  CHECK(Ensemble::brickwork(4, GateSet::clifford_haar).right_lc_invariant);
  CHECK(!Ensemble::lrc_nn(3).right_lc_invariant);
  CHECK(Ensemble::exact_group(GroupKind::clifford, 2).right_lc_invariant);
  CHECK(!Ensemble::exact_group(GroupKind::heisenberg_weyl, 2).right_lc_invariant);
}

TEST_CASE("json round-trip") {
  Ensemble e = Ensemble::lrc_nn(3, Boundary::periodic, GateSet::generators);
  e.cx_prob = 0.5;
  Ensemble back = Ensemble::from_json(e.to_json());
  CHECK(back.arch == e.arch);
  CHECK(back.n == e.n);
  CHECK(back.bc == e.bc);
  CHECK(back.edges == e.edges);
  CHECK(back.gateset == e.gateset);
  CHECK(back.cx_prob == e.cx_prob);

  nlohmann::json j;
  j["arch"] = "lrc";
  CHECK_THROWS_AS(Ensemble::from_json(j), config_error);  // missing n
}

// ---- layer sampling ----

TEST_CASE("lrc layers place one two-site gate") {
  Ensemble e = Ensemble::lrc_nn(4);
  std::mt19937_64 rng(3);
  std::set<std::pair<int, int>> seen;
  for (int i = 0; i < 60; ++i) {
    LayerSample layer = sample_layer(e, rng);
    REQUIRE(layer.gates.size() == 1);
    const LayerGate& gate = layer.gates[0];
    CHECK(gate.site1 >= 0);
    seen.insert({gate.site0, gate.site1});
  }
  CHECK(seen.size() == 3);  // all chain edges hit

  // Edge weights concentrate the draw.
  e.edge_probs = {1.0, 0.0, 0.0};
  for (int i = 0; i < 20; ++i) {
    LayerSample layer = sample_layer(e, rng);
    CHECK(layer.gates[0].site0 == 0);
  }
}

TEST_CASE("brickwork layers tile even then odd pairs") {
  Ensemble e = Ensemble::brickwork(5);
  std::mt19937_64 rng(4);
  LayerSample layer = sample_layer(e, rng);
  REQUIRE(layer.gates.size() == 4);
  CHECK(layer.gates[0].site0 == 1);  // even-start (1-based) sublayer first
  CHECK(layer.gates[1].site0 == 3);
  CHECK(layer.gates[2].site0 == 0);
  CHECK(layer.gates[3].site0 == 2);
}

TEST_CASE("exact layers draw one full-width element") {
  std::mt19937_64 rng(5);
  LayerSample cl = sample_layer(Ensemble::exact_group(GroupKind::clifford, 2), rng);
  REQUIRE(cl.gates.size() == 1);
  CHECK(cl.gates[0].site1 == -1);
  CHECK(cl.gates[0].g.kind == GroupElement::Kind::clifford);

  LayerSample lc =
      sample_layer(Ensemble::exact_group(GroupKind::local_clifford, 3), rng);
  CHECK(lc.gates.size() == 3);  // one single-site tableau per site
}

TEST_CASE("generator set is a normalized weighted measure") {
  const WeightedCliffords& w = generator_set(0.35);
  CHECK(w.elems.size() == 160);  // (9 products + CX) x 16 Paulis
  double total = 0.0, cx_mass = 0.0;
  for (size_t i = 0; i < w.probs.size(); ++i) {
    total += w.probs[i];
    if (i >= 144) cx_mass += w.probs[i];  // CX block is appended last
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(cx_mass == doctest::Approx(0.35));
  for (const auto& t : w.elems) CHECK(t.is_valid());
}

TEST_CASE("haar_unitary is unitary and seed-deterministic") {
  std::mt19937_64 a(9), b(9);
  MatrixXcd u = haar_unitary(4, a), v = haar_unitary(4, b);
  CHECK((u * u.adjoint() - MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((u - v).cwiseAbs().maxCoeff() == 0.0);
}

// ---- layer application ----

TEST_CASE("apply_layer matches the dense layer superoperator") {
  Ensemble e = Ensemble::lrc_nn(3);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    LayerSample layer = sample_layer(e, rng);
    Superop dense = layer_superop(layer);
    VectorXd v(64);
    for (Index i = 0; i < 64; ++i) v[i] = g(rng);

    VectorXd fast = v;
    apply_layer(layer, fast);
    CHECK((fast - dense.mat * v).cwiseAbs().maxCoeff() < 1e-12);

    apply_layer_adjoint(layer, fast);  // inverse round-trip
    CHECK((fast - v).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("clifford layers: tableau path equals the superoperator path") {
  Ensemble e = Ensemble::brickwork(3, GateSet::clifford_haar);
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    LayerSample layer = sample_layer(e, rng);
    CliffordTableau t = layer_tableau(layer);
    CHECK((to_superop(t).mat - layer_superop(layer).mat).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("embed_tableau places gates at arbitrary sites") {
  CliffordTableau cx01 = tab_cx(2, 0, 1);
  CliffordTableau embedded = embed_tableau(cx01, {2, 0}, 3);  // control 2, target 0
  CHECK(embedded == tab_cx(3, 2, 0));
}

TEST_CASE("gate PTMs are orthogonal stochastic maps") {
  Ensemble e = Ensemble::lrc_nn(2);
  std::mt19937_64 rng(17);
  LayerSample layer = sample_layer(e, rng);
  MatrixXd ptm = gate_ptm(layer.gates[0].g);
  CHECK(ptm.rows() == 16);
  CHECK((ptm * ptm.transpose()).isIdentity(1e-12));
  CHECK(ptm(0, 0) == doctest::Approx(1.0));       // unital
  CHECK(ptm.col(0).tail(15).norm() < 1e-12);      // trace preserving
  CHECK(ptm.row(0).tail(15).norm() < 1e-12);
}
