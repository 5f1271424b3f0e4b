#include "frb/stabilizer.hpp"

#include <stdexcept>

#include "frb/errors.hpp"

namespace frb {

StabilizerState StabilizerState::zero_state(int n) {
  if (n < 1 || n > 63)
    throw std::invalid_argument("zero_state: need 1 <= n <= 63");
  StabilizerState st;
  st.n = n;
  st.stab.resize(static_cast<size_t>(n));
  st.destab.resize(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    st.stab[static_cast<size_t>(k)] = PauliBits{std::uint64_t{1} << k, 0, 0};
    st.destab[static_cast<size_t>(k)] = PauliBits{0, std::uint64_t{1} << k, 0};
  }
  return st;
}

void StabilizerState::apply(const CliffordTableau& c) {
  for (auto& q : stab) q = c.conjugate(q);
  for (auto& q : destab) q = c.conjugate(q);
}

void StabilizerState::apply_pauli(const PauliBits& a) {
  // a P a^dag = (-1)^{<a,P>} P for Hermitian Pauli a.
  for (auto& q : stab)
    if (parity64((a.z & q.x) ^ (a.x & q.z))) q.s = (q.s + 2) & 3;
  for (auto& q : destab)
    if (parity64((a.z & q.x) ^ (a.x & q.z))) q.s = (q.s + 2) & 3;
}

namespace {

// Measure Z on qubit k.  When `force` is null the outcome is drawn from rng;
// otherwise the requested bit is imposed and *prob collects the 1/2 factors.
int measure_z(StabilizerState& st, int k, std::mt19937_64& rng,
              const int* force, double* prob) {
  const std::uint64_t bit = std::uint64_t{1} << k;
  int p = -1;
  for (int i = 0; i < st.n; ++i)
    if (st.stab[static_cast<size_t>(i)].x & bit) { p = i; break; }

  if (p >= 0) {
    // Random outcome.  Multiply every other anticommuting generator by the
    // old stab[p], then replace the pair (stab[p], destab[p]).
    const PauliBits gp = st.stab[static_cast<size_t>(p)];
    for (int i = 0; i < st.n; ++i) {
      if (i != p && (st.stab[static_cast<size_t>(i)].x & bit))
        st.stab[static_cast<size_t>(i)] =
            pauli_mul(st.stab[static_cast<size_t>(i)], gp);
      if (st.destab[static_cast<size_t>(i)].x & bit)
        st.destab[static_cast<size_t>(i)] =
            pauli_mul(st.destab[static_cast<size_t>(i)], gp);
    }
    int r = force ? *force : static_cast<int>(rng() & 1u);
    if (prob) *prob *= 0.5;
    st.destab[static_cast<size_t>(p)] = gp;
    st.stab[static_cast<size_t>(p)] = PauliBits{bit, 0, r ? 2 : 0};
    return r;
  }

  // Deterministic outcome: Z_k = +- product of stab[i] over destabilizers
  // that anticommute with Z_k.
  PauliBits acc{0, 0, 0};
  for (int i = 0; i < st.n; ++i)
    if (st.destab[static_cast<size_t>(i)].x & bit)
      acc = pauli_mul(acc, st.stab[static_cast<size_t>(i)]);
  if (acc.z != bit || acc.x != 0 || (acc.s & 1))
    throw std::logic_error("measure_z: tableau inconsistency");
  return acc.s == 2 ? 1 : 0;
}

}  // namespace

std::uint64_t StabilizerState::measure_all(std::mt19937_64& rng) {
  std::uint64_t out = 0;
  for (int k = 0; k < n; ++k)
    out |= static_cast<std::uint64_t>(measure_z(*this, k, rng, nullptr, nullptr))
           << k;
  return out;
}

double StabilizerState::prob_of_outcome(std::uint64_t outcome) const {
  StabilizerState st = *this;
  std::mt19937_64 dummy(0);
  double prob = 1.0;
  for (int k = 0; k < n; ++k) {
    const int want = static_cast<int>((outcome >> k) & 1u);
    const std::uint64_t bit = std::uint64_t{1} << k;
    bool random = false;
    for (int i = 0; i < st.n; ++i)
      if (st.stab[static_cast<size_t>(i)].x & bit) { random = true; break; }
    if (random) {
      measure_z(st, k, dummy, &want, &prob);
    } else if (measure_z(st, k, dummy, nullptr, nullptr) != want) {
      return 0.0;
    }
  }
  return prob;
}

}  // namespace frb
