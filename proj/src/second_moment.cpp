#include "frb/second_moment.hpp"

#include <algorithm>
#include <cstring>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "frb/ensemble.hpp"
#include "frb/errors.hpp"
#include "frb/frame.hpp"
#include "frb/noise.hpp"
#include "frb/tableau.hpp"
#include "frb/weyl.hpp"

namespace frb {

namespace {

// ---- element lists ----

std::string tab_key(const CliffordTableau& t) {
  std::string key;
  key.reserve(size_t(t.n) * 6);
  auto add = [&key](const PauliBits& b) {
    for (int part = 0; part < 2; ++part) {
      std::uint64_t v = part == 0 ? b.z : b.x;
      for (int i = 0; i < 8; ++i) key.push_back(char(v >> (8 * i)));
    }
    key.push_back(char(b.s));
  };
  for (const auto& b : t.img_x) add(b);
  for (const auto& b : t.img_z) add(b);
  return key;
}

CliffordTableau conj_by(const CliffordTableau& g, const CliffordTableau& h) {
  // channel conjugation h^-1 ∘ g ∘ h
  return h.then(g).then(h.inverse());
}

// Conjugacy classes as orbits under conjugation by a generating set.
std::vector<int> conjugacy_classes(const std::vector<CliffordTableau>& elems,
                                   const std::vector<CliffordTableau>& gens) {
  std::unordered_map<std::string, size_t> index;
  index.reserve(elems.size() * 2);
  for (size_t i = 0; i < elems.size(); ++i) index[tab_key(elems[i])] = i;
  std::vector<int> cls(elems.size(), -1);
  int next = 0;
  std::vector<size_t> stack;
  for (size_t seed = 0; seed < elems.size(); ++seed) {
    if (cls[seed] >= 0) continue;
    cls[seed] = next;
    stack.assign(1, seed);
    while (!stack.empty()) {
      size_t cur = stack.back();
      stack.pop_back();
      for (const auto& h : gens) {
        auto it = index.find(tab_key(conj_by(elems[cur], h)));
        if (it == index.end())
          throw std::logic_error("sigma_block_traces: conjugation left the element list");
        if (cls[it->second] < 0) {
          cls[it->second] = next;
          stack.push_back(it->second);
        }
      }
    }
    ++next;
  }
  return cls;
}

std::vector<CliffordTableau> local_products(int n) {
  auto g1 = enumerate_clifford(1);
  std::vector<CliffordTableau> out;
  if (n == 1) return g1;
  out.reserve(g1.size() * g1.size());
  for (const auto& a : g1)
    for (const auto& b : g1)
      out.push_back(embed_tableau(a, {0}, 2).then(embed_tableau(b, {1}, 2)));
  return out;
}

std::vector<CliffordTableau> clifford_generators(int n, bool entangling) {
  std::vector<CliffordTableau> gens;
  for (int k = 0; k < n; ++k) {
    gens.push_back(tab_h(n, k));
    gens.push_back(tab_s(n, k));
    CliffordTableau x = CliffordTableau::identity(n), z = CliffordTableau::identity(n);
    x.img_z[size_t(k)].s ^= 2;  // conjugation by X flips Z
    z.img_x[size_t(k)].s ^= 2;
    gens.push_back(x);
    gens.push_back(z);
  }
  if (entangling && n >= 2)
    for (int k = 0; k + 1 < n; ++k) gens.push_back(tab_cx(n, k, k + 1));
  return gens;
}

}  // namespace

SigmaBlocks sigma_block_traces(GroupKind kind, int p, int n, const IrrepSpec& lambda,
                               const VectorXd* rho_tilde) {
  if (p != 2)
    throw capacity_error("sigma_block_traces: explicit group sums are implemented for p = 2");
  const Index d = pow_index(2, n);
  const Index dd = d * d;
  const std::vector<Index> supp = lambda.support();
  const Index s = Index(supp.size());

  // signed-permutation actions and conjugacy classes of the group
  std::vector<SignedPerm> action;
  std::vector<int> cls;
  int n_cls = 0;
  switch (kind) {
    case GroupKind::clifford: {
      if (n > 2) throw capacity_error("sigma_block_traces: clifford sum needs n <= 2");
      auto elems = enumerate_clifford(n);
      cls = conjugacy_classes(elems, clifford_generators(n, true));
      action.reserve(elems.size());
      for (const auto& t : elems) action.push_back(clifford_action(t));
      break;
    }
    case GroupKind::local_clifford: {
      if (n > 2) throw capacity_error("sigma_block_traces: local sum needs n <= 2");
      auto elems = local_products(n);
      cls = conjugacy_classes(elems, clifford_generators(n, false));
      action.reserve(elems.size());
      for (const auto& t : elems) action.push_back(clifford_action(t));
      break;
    }
    case GroupKind::heisenberg_weyl: {
      if (dd > 4096) throw capacity_error("sigma_block_traces: Weyl sum needs 4^n <= 4096");
      // conjugation by w(a) is diagonal with symplectic-form signs; the group
      // is abelian so every element is its own class
      cls.resize(size_t(dd));
      for (Index a = 0; a < dd; ++a) {
        SignedPerm sp;
        sp.perm.resize(size_t(dd));
        sp.sign.resize(size_t(dd));
        WeylLabel wa = WeylLabel::from_index(a, 2, n);
        for (Index b = 0; b < dd; ++b) {
          sp.perm[size_t(b)] = b;
          WeylLabel wb = WeylLabel::from_index(b, 2, n);
          sp.sign[size_t(b)] = symplectic_form(wa, wb, 2) % 2 ? -1 : 1;
        }
        action.push_back(std::move(sp));
        cls[size_t(a)] = int(a);
      }
      break;
    }
    default:
      throw std::invalid_argument("sigma_block_traces: unsupported group");
  }
  n_cls = *std::max_element(cls.begin(), cls.end()) + 1;
  const double inv_g = 1.0 / double(action.size());

  // filter vector w = S^+ P_lambda rho and prep state on the support
  const VectorXd rho = zero_state_coords(2, n);
  const VectorXd* prep = rho_tilde ? rho_tilde : &rho;
  if (prep->size() != dd)
    throw std::invalid_argument("sigma_block_traces: prep vector has wrong dimension");
  const FrameOperator frame = frame_operator(kind, 2, n);
  VectorXd w = VectorXd::Zero(s);
  for (Index j = 0; j < s; ++j)
    if (frame.diag[supp[j]] > 0.0) w[j] = rho[supp[j]] / frame.diag[supp[j]];

  // position of each support label and the z-type sublist
  std::vector<Index> pos(size_t(dd), -1);
  for (Index j = 0; j < s; ++j) pos[size_t(supp[j])] = j;
  std::vector<Index> ztype;  // support positions with vanishing x part
  for (Index j = 0; j < s; ++j)
    if (supp[j] % d == 0) ztype.push_back(j);

  // One pass over the group accumulates both the measurement-contracted
  // vector u (giving every trace as u^T P_sigma (w (x) w)) and a random
  // class-function central element whose eigenspaces cluster the isotypes.
  std::mt19937_64 rng(0x51C7ABu);
  std::uniform_real_distribution<double> unif(1.0, 2.0);
  std::vector<double> coeff(static_cast<size_t>(n_cls));
  for (double& c : coeff) c = unif(rng);

  VectorXd u = VectorXd::Zero(s * s);
  MatrixXd central = MatrixXd::Zero(s * s, s * s);
  VectorXd x_g(dd);
  const double inv_sqrt_d = 1.0 / std::sqrt(double(d));
  std::vector<Index> lperm(static_cast<size_t>(s));
  std::vector<Index> linv(static_cast<size_t>(s));
  std::vector<int8_t> lsign(static_cast<size_t>(s));
  for (size_t gi = 0; gi < action.size(); ++gi) {
    const SignedPerm& sp = action[gi];
    // restriction to the support block (the action preserves the isotype)
    for (Index j = 0; j < s; ++j) {
      Index img = sp.perm[size_t(supp[j])];
      lperm[size_t(j)] = pos[size_t(img)];
      if (lperm[size_t(j)] < 0)
        throw std::logic_error("sigma_block_traces: action leaves the support");
      lsign[size_t(j)] = sp.sign[size_t(supp[j])];
      linv[size_t(lperm[size_t(j)])] = j;
    }
    const double fc = coeff[size_t(cls[gi])] * inv_g;
    for (Index j = 0; j < s; ++j)
      for (Index k = 0; k < s; ++k)
        central(lperm[size_t(j)] * s + lperm[size_t(k)], j * s + k) +=
            fc * lsign[size_t(j)] * lsign[size_t(k)];

    sp.apply(prep->data(), x_g.data());
    for (Index ja : ztype)
      for (Index jb : ztype) {
        const Index za = supp[ja] / d, zb = supp[jb] / d;
        const double c = x_g[(za ^ zb) * d] * inv_sqrt_d;
        const Index j = linv[size_t(ja)], k = linv[size_t(jb)];
        u[j * s + k] += inv_g * lsign[size_t(j)] * lsign[size_t(k)] * c;
      }
  }

  // eigenvalue clusters of the symmetrized central element = isotypes
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (central + central.transpose()));
  const VectorXd& ev = eig.eigenvalues();
  const double tol = 1e-7 * std::max(1.0, std::abs(ev[ev.size() - 1]));

  VectorXd ww(s * s);
  for (Index j = 0; j < s; ++j)
    for (Index k = 0; k < s; ++k) ww[j * s + k] = w[j] * w[k];

  SigmaBlocks out;
  Index lo = 0;
  while (lo < ev.size()) {
    Index hi = lo + 1;
    while (hi < ev.size() && std::abs(ev[hi] - ev[hi - 1]) <= tol) ++hi;
    const auto basis = eig.eigenvectors().middleCols(lo, hi - lo);
    out.traces.push_back(VectorXd(basis.transpose() * u).dot(basis.transpose() * ww));
    out.dims.push_back(hi - lo);
    lo = hi;
  }
  out.total = u.dot(ww);
  return out;
}

}  // namespace frb
