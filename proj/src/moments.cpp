#include "frb/moments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

#include "frb/errors.hpp"
#include "frb/frame.hpp"
#include "frb/kernels.hpp"
#include "frb/tableau.hpp"
#include "frb/weyl.hpp"

namespace frb {

using Eigen::VectorXcd;

namespace {

constexpr Index kMomentDenseLimit = 4096;          // dense matrix storage
constexpr Index kMatrixFreeLimit = Index(1) << 20; // Lanczos vector budget

// ---- copy permutations ----

// Cycle decomposition of a permutation of the t copies.  hermitian marks
// T_pi symmetric (self-inverse pi); the single non-hermitian entry at t = 3
// stands for the conjugate 3-cycle pair and contributes two real columns
// (real and imaginary parts of its coordinate vector).
struct PermSpec {
  std::vector<std::vector<int>> cycles;
  bool hermitian = true;
};

std::vector<PermSpec> perm_specs(int t) {
  std::vector<PermSpec> out;
  auto add = [&](std::vector<std::vector<int>> cyc, bool h) {
    PermSpec s;
    s.cycles = std::move(cyc);
    s.hermitian = h;
    out.push_back(std::move(s));
  };
  switch (t) {
    case 1:
      add({{0}}, true);
      break;
    case 2:
      add({{0}, {1}}, true);
      add({{0, 1}}, true);
      break;
    case 3:
      add({{0}, {1}, {2}}, true);
      add({{0, 1}, {2}}, true);
      add({{0, 2}, {1}}, true);
      add({{1, 2}, {0}}, true);
      add({{0, 1, 2}}, false);
      break;
    default:
      throw config_error("moment twirl: t must be 1, 2, or 3");
  }
  return out;
}

// Normalized Hermitian Weyl basis on `sites` qubits.
std::vector<MatrixXcd> weyl_site_basis(int sites) {
  const Index labels = pow_index(2, 2 * sites);
  std::vector<MatrixXcd> sig(static_cast<size_t>(labels));
  VectorXd e = VectorXd::Zero(labels);
  for (Index a = 0; a < labels; ++a) {
    e(a) = 1.0;
    sig[size_t(a)] = from_weyl_coeffs(e, 2, sites);
    e(a) = 0.0;
  }
  return sig;
}

// Coordinate vector of the copy-permutation operator T_pi on
// (C^{2^sites})^{(x)t}: the entry at multi-label (a_1,..,a_t) is the product
// over cycles of tr(sigma_{a_{c_1}} sigma_{a_{c_2}} ...).
VectorXcd perm_coords(const PermSpec& ps, int sites, int t) {
  const auto sig = weyl_site_basis(sites);
  const Index labels = Index(sig.size());
  const Index dim = pow_index(labels, t);
  VectorXcd out(dim);
  std::vector<Index> a(static_cast<size_t>(t));
  for (Index idx = 0; idx < dim; ++idx) {
    Index rest = idx;
    for (int c = 0; c < t; ++c) {
      a[size_t(c)] = rest % labels;
      rest /= labels;
    }
    cplx val = 1.0;
    for (const auto& cyc : ps.cycles) {
      MatrixXcd prod = sig[size_t(a[size_t(cyc[0])])];
      for (size_t k = 1; k < cyc.size(); ++k) prod *= sig[size_t(a[size_t(cyc[k])])];
      val *= prod.trace();
    }
    out(idx) = val;
  }
  return out;
}

MatrixXd twirl_basis_uncached(int sites, int t) {
  const auto specs = perm_specs(t);
  std::vector<VectorXd> cols;
  for (const auto& ps : specs) {
    VectorXcd c = perm_coords(ps, sites, t);
    if (ps.hermitian) {
      if (c.imag().norm() > 1e-9 * std::max(1.0, c.norm()))
        throw std::logic_error("twirl_basis: hermitian permutation with complex coordinates");
      cols.push_back(c.real());
    } else {
      cols.push_back(c.real());
      cols.push_back(c.imag());
    }
  }
  MatrixXd b(cols[0].size(), Index(cols.size()));
  for (size_t j = 0; j < cols.size(); ++j) b.col(Index(j)) = cols[j];
  return b;
}

// ---- twirl leaves ----

struct TwirlLeaf {
  virtual ~TwirlLeaf() = default;
  virtual void run(double* v, Index dim, bool adjoint) const = 0;
};

// Orthogonal projector onto spanning columns, applied on a bit subset.
struct ProjOnBitsLeaf final : TwirlLeaf {
  MatrixXd basis, ginv;
  std::vector<int> bits;
  void run(double* v, Index dim, bool) const override {
    project_on_bits(basis, ginv, bits, v, dim);  // self-adjoint
  }
};

// Projector onto an explicit orthonormal global basis (exact-design layers).
struct GlobalProjLeaf final : TwirlLeaf {
  MatrixXd q;
  void run(double* v, Index dim, bool) const override {
    Eigen::Map<VectorXd> m(v, dim);
    VectorXd r = q.transpose() * m;
    m.noalias() = q * r;
  }
};

// Diagonal Heisenberg-Weyl average: a coordinate survives iff the XOR of its
// per-copy labels vanishes.
struct DiagXorLeaf final : TwirlLeaf {
  int n = 1, t = 1;
  void run(double* v, Index dim, bool) const override {
    const Index mask = pow_index(2, 2 * n) - 1;
    const int shift = 2 * n;
#pragma omp parallel for schedule(static)
    for (Index idx = 0; idx < dim; ++idx) {
      Index acc = 0;
      for (int c = 0; c < t; ++c) acc ^= (idx >> (c * shift)) & mask;
      if (acc != 0) v[idx] = 0.0;
    }
  }
};

// Weighted average of t-fold signed label permutations on a bit subset
// (finite weighted gate sets, e.g. the Clifford generator set on an edge).
struct SignedPermSetLeaf final : TwirlLeaf {
  Index sub = 0;                        // 4^{t * width}
  std::vector<std::vector<Index>> perm; // per element
  std::vector<std::vector<double>> ws;  // weight * sign, per element
  std::vector<int> bits;

  void run(double* v, Index dim, bool adjoint) const override {
    const int b = int(bits.size());
    if (sub != (Index(1) << b) || b > kMaxLocalBits)
      throw std::logic_error("SignedPermSetLeaf: bit/table mismatch");
    std::vector<int> free = free_bits(bits, 63);
    // Only free bits below dim matter.
    std::vector<int> fr;
    for (int f : free)
      if ((Index(1) << f) < dim) fr.push_back(f);
    const Index nblocks = dim >> b;
    std::vector<Index> spread(static_cast<size_t>(sub));
    for (Index j = 0; j < sub; ++j) {
      Index off = 0;
      for (int k = 0; k < b; ++k)
        if ((j >> k) & 1) off |= Index(1) << bits[size_t(k)];
      spread[size_t(j)] = off;
    }
#pragma omp parallel for schedule(static)
    for (Index blk = 0; blk < nblocks; ++blk) {
      double buf[1 << kMaxLocalBits];
      double acc[1 << kMaxLocalBits];
      Index base = 0;
      for (size_t k = 0; k < fr.size(); ++k)
        if ((blk >> k) & 1) base |= Index(1) << fr[k];
      for (Index j = 0; j < sub; ++j) buf[j] = v[base + spread[size_t(j)]];
      for (Index j = 0; j < sub; ++j) acc[j] = 0.0;
      for (size_t el = 0; el < perm.size(); ++el) {
        const Index* pp = perm[el].data();
        const double* ww = ws[el].data();
        if (!adjoint) {
          for (Index j = 0; j < sub; ++j) acc[pp[j]] += ww[j] * buf[j];
        } else {
          for (Index j = 0; j < sub; ++j) acc[j] += ww[j] * buf[pp[j]];
        }
      }
      for (Index j = 0; j < sub; ++j) v[base + spread[size_t(j)]] = acc[j];
    }
  }
};

// ---- composite operators ----

// Sequential product of commuting-or-ordered leaves (brickwork stages, exact
// local layers, single-leaf operators).  apply runs leaves first-to-last.
struct SeqTwirl final : SparseApply {
  Index d = 0;
  std::vector<std::unique_ptr<TwirlLeaf>> leaves;
  Index rows() const override { return d; }
  Index cols() const override { return d; }
  void apply(const double* in, double* out) const override {
    std::copy(in, in + d, out);
    for (const auto& l : leaves) l->run(out, d, false);
  }
  void adjoint_apply(const double* in, double* out) const override {
    std::copy(in, in + d, out);
    for (auto it = leaves.rbegin(); it != leaves.rend(); ++it) (*it)->run(out, d, true);
  }
};

// Weighted average of leaves (LRC edge draws).
struct AvgTwirl final : SparseApply {
  Index d = 0;
  std::vector<std::unique_ptr<TwirlLeaf>> leaves;
  std::vector<double> w;
  mutable VectorXd scratch;  // reused between applies; not thread-safe per instance
  Index rows() const override { return d; }
  Index cols() const override { return d; }
  void run_avg(const double* in, double* out, bool adjoint) const {
    if (scratch.size() != d) scratch.resize(d);
    Eigen::Map<VectorXd> o(out, d);
    o.setZero();
    for (size_t i = 0; i < leaves.size(); ++i) {
      std::copy(in, in + d, scratch.data());
      leaves[i]->run(scratch.data(), d, adjoint);
      o.noalias() += w[i] * scratch;
    }
  }
  void apply(const double* in, double* out) const override { run_avg(in, out, false); }
  void adjoint_apply(const double* in, double* out) const override { run_avg(in, out, true); }
};

// Dense operator owning its matrix (noisy moment operators).
struct OwnedDense final : SparseApply {
  MatrixXd m;
  Index rows() const override { return m.rows(); }
  Index cols() const override { return m.cols(); }
  void apply(const double* in, double* out) const override {
    Eigen::Map<VectorXd>(out, m.rows()) = m * Eigen::Map<const VectorXd>(in, m.cols());
  }
  void adjoint_apply(const double* in, double* out) const override {
    Eigen::Map<VectorXd>(out, m.cols()) =
        m.transpose() * Eigen::Map<const VectorXd>(in, m.rows());
  }
};

// ---- leaf builders ----

// Bit positions of a gate footprint replicated across copies: per copy the
// x digits of the covered sites, then their z digits, matching the Weyl flat
// index z * 2^w + x of the local twirl basis.
std::vector<int> copy_bits(const std::vector<int>& sites, int n, int t) {
  std::vector<int> bits;
  for (int c = 0; c < t; ++c) {
    for (int s : sites) bits.push_back(c * 2 * n + s);
    for (int s : sites) bits.push_back(c * 2 * n + n + s);
  }
  return bits;
}

std::unique_ptr<TwirlLeaf> design_leaf(const std::vector<int>& sites, int n, int t) {
  auto leaf = std::make_unique<ProjOnBitsLeaf>();
  leaf->basis = twirl_basis(int(sites.size()), t);
  leaf->ginv = pseudoinverse(leaf->basis.transpose() * leaf->basis);
  leaf->bits = copy_bits(sites, n, t);
  return leaf;
}

std::unique_ptr<TwirlLeaf> generator_leaf(const std::vector<int>& sites, int n, int t,
                                          double cx_prob) {
  const WeightedCliffords& wc = generator_set(cx_prob);
  auto leaf = std::make_unique<SignedPermSetLeaf>();
  const Index labels = 16;  // 2-qubit Weyl labels per copy
  Index sub = 1;
  for (int c = 0; c < t; ++c) sub *= labels;
  leaf->sub = sub;
  leaf->bits = copy_bits(sites, n, t);
  leaf->perm.reserve(wc.elems.size());
  leaf->ws.reserve(wc.elems.size());
  for (size_t el = 0; el < wc.elems.size(); ++el) {
    SignedPerm sp = clifford_action(wc.elems[el]);
    std::vector<Index> pm(static_cast<size_t>(sub));
    std::vector<double> ww(static_cast<size_t>(sub));
    for (Index j = 0; j < sub; ++j) {
      Index rest = j, img = 0, mul = 1;
      double sg = wc.probs[el];
      for (int c = 0; c < t; ++c) {
        Index digit = rest % labels;
        rest /= labels;
        img += sp.perm[size_t(digit)] * mul;
        sg *= sp.sign[size_t(digit)];
        mul *= labels;
      }
      pm[size_t(j)] = img;
      ww[size_t(j)] = sg;
    }
    leaf->perm.push_back(std::move(pm));
    leaf->ws.push_back(std::move(ww));
  }
  return leaf;
}

std::unique_ptr<TwirlLeaf> edge_leaf(const Ensemble& e, std::pair<int, int> edge, int t) {
  std::vector<int> sites = {edge.first, edge.second};
  if (e.gateset == GateSet::generators) return generator_leaf(sites, e.n, t, e.cx_prob);
  // Haar and uniform-Clifford 2-site twirls agree for t <= 3 (the 2-qubit
  // Clifford group is a 3-design), so both use the commutant projector.
  return design_leaf(sites, e.n, t);
}

MatrixXd kron_dense(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

MatrixXd kron_power(const MatrixXd& m, int t) {
  MatrixXd acc = m;
  for (int c = 1; c < t; ++c) acc = kron_dense(m, acc);  // new copy in the high factor
  return acc;
}

// Deflated Gram operator (M - P)^T (M - P) restricted to the complement of
// the exact fixed space Q; symmetric PSD, fed to Lanczos.
struct DeflatedGram final : SparseApply {
  const SparseApply* m = nullptr;
  const MatrixXd* q = nullptr;
  mutable VectorXd y;
  Index rows() const override { return m->cols(); }
  Index cols() const override { return m->cols(); }
  void drop_fixed(VectorXd& v) const {
    if (q->cols() > 0) v.noalias() -= (*q) * (q->transpose() * v);
  }
  void apply(const double* in, double* out) const override {
    const Index d = m->cols();
    if (y.size() != d) y.resize(d);
    m->apply(in, y.data());
    drop_fixed(y);
    m->adjoint_apply(y.data(), out);
    Eigen::Map<VectorXd> o(out, d);
    if (q->cols() > 0) o.noalias() -= (*q) * (q->transpose() * o);
  }
  void adjoint_apply(const double* in, double* out) const override { apply(in, out); }
};

}  // namespace

// ---- public twirl bases ----

MatrixXd twirl_basis(int sites, int t) {
  if (sites < 1 || sites > 2) throw config_error("twirl_basis: 1 or 2 sites");
  static std::map<std::pair<int, int>, MatrixXd> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(sites, t);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, twirl_basis_uncached(sites, t)).first;
  return it->second;
}

MatrixXd fixed_space_orthonormal(int n, int t) {
  if (n < 1) throw config_error("fixed_space_orthonormal: n must be positive");
  if (2 * n * t > 22)
    throw capacity_error("fixed_space_orthonormal: dimension 4^" + std::to_string(n * t) +
                         " exceeds the dense-vector budget");
  const auto specs = perm_specs(t);
  const Index dim = pow_index(2, 2 * n * t);

  // Per-site complex coordinate tables; the global vector is their product
  // over sites (copy-permutation operators factorize site by site).
  std::vector<VectorXcd> site(specs.size());
  for (size_t s = 0; s < specs.size(); ++s) site[s] = perm_coords(specs[s], 1, t);

  std::vector<VectorXd> cols;
  VectorXcd v(dim);
  for (size_t s = 0; s < specs.size(); ++s) {
    const VectorXcd& tab = site[s];
#pragma omp parallel for schedule(static)
    for (Index idx = 0; idx < dim; ++idx) {
      cplx prod = 1.0;
      for (int k = 0; k < n; ++k) {
        Index sub = 0;
        for (int c = 0; c < t; ++c) {
          Index xbit = (idx >> (c * 2 * n + k)) & 1;
          Index zbit = (idx >> (c * 2 * n + n + k)) & 1;
          sub |= (xbit | (zbit << 1)) << (2 * c);
        }
        prod *= tab(sub);
      }
      v(idx) = prod;
    }
    if (specs[s].hermitian) {
      cols.push_back(v.real());
    } else {
      cols.push_back(v.real());
      cols.push_back(v.imag());
    }
  }

  // Modified Gram-Schmidt with rank drop (the antisymmetrizer direction
  // vanishes on a single qubit at t = 3).
  std::vector<VectorXd> q;
  const double scale = std::sqrt(double(dim));
  for (auto& c : cols) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : q) c.noalias() -= u.dot(c) * u;
    double nc = c.norm();
    if (nc > 1e-8 * scale) q.push_back(c / nc);
  }
  MatrixXd out(dim, Index(q.size()));
  for (size_t j = 0; j < q.size(); ++j) out.col(Index(j)) = q[j];
  return out;
}

MatrixXd haar_projector_dense(int n, int t) {
  const Index dim = pow_index(2, 2 * n * t);
  if (dim > kMomentDenseLimit)
    throw capacity_error("haar_projector_dense: dimension exceeds dense limit");
  MatrixXd q = fixed_space_orthonormal(n, t);
  return q * q.transpose();
}

// ---- moment operator assembly ----

MomentOperator moment_operator(const Ensemble& e, int t, const NoiseModel* noise) {
  e.validate();
  if (t < 1 || t > 3) throw config_error("moment_operator: t must be 1, 2, or 3");
  MomentOperator mo;
  mo.p = e.p;
  mo.n = e.n;
  mo.t = t;
  mo.ens = e;
  if (2 * e.n * t > 62) throw capacity_error("moment_operator: index overflow");
  mo.dim = pow_index(2, 2 * e.n * t);

  if (e.arch == Arch::exact) {
    switch (e.group) {
      case GroupKind::clifford:
      case GroupKind::unitary_2_group: {
        auto seq = std::make_shared<SeqTwirl>();
        seq->d = mo.dim;
        auto leaf = std::make_unique<GlobalProjLeaf>();
        leaf->q = fixed_space_orthonormal(e.n, t);
        seq->leaves.push_back(std::move(leaf));
        mo.op = seq;
        break;
      }
      case GroupKind::local_clifford: {
        auto seq = std::make_shared<SeqTwirl>();
        seq->d = mo.dim;
        for (int k = 0; k < e.n; ++k) seq->leaves.push_back(design_leaf({k}, e.n, t));
        mo.op = seq;
        break;
      }
      case GroupKind::heisenberg_weyl: {
        auto seq = std::make_shared<SeqTwirl>();
        seq->d = mo.dim;
        auto leaf = std::make_unique<DiagXorLeaf>();
        leaf->n = e.n;
        leaf->t = t;
        seq->leaves.push_back(std::move(leaf));
        mo.op = seq;
        break;
      }
    }
  } else if (e.arch == Arch::lrc) {
    auto avg = std::make_shared<AvgTwirl>();
    avg->d = mo.dim;
    const size_t ne = e.edges.size();
    for (size_t i = 0; i < ne; ++i) {
      avg->leaves.push_back(edge_leaf(e, e.edges[i], t));
      avg->w.push_back(e.edge_probs.empty() ? 1.0 / double(ne) : e.edge_probs[i]);
    }
    mo.op = avg;
  } else {  // brickwork: even-start sublayer (1-based) first, then odd-start
    auto seq = std::make_shared<SeqTwirl>();
    seq->d = mo.dim;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& ed : e.edges) {
        bool even_start = (ed.first % 2) == 1;  // 0-based odd index = 1-based even
        if ((pass == 0) == even_start) seq->leaves.push_back(edge_leaf(e, ed, t));
      }
    mo.op = seq;
  }

  if (mo.dim <= kMomentDenseLimit) {
    mo.dense.resize(mo.dim, mo.dim);
    VectorXd unit = VectorXd::Zero(mo.dim);
    VectorXd col(mo.dim);
    for (Index j = 0; j < mo.dim; ++j) {
      unit(j) = 1.0;
      mo.op->apply(unit.data(), col.data());
      mo.dense.col(j) = col;
      unit(j) = 0.0;
    }
    mo.has_dense = true;
  }

  if (noise != nullptr && noise->type != NoiseModel::Type::none) {
    if (!mo.has_dense)
      throw capacity_error("moment_operator: noisy operator needs dense dimension");
    MatrixXd nch = noise_channel_dense(*noise, e.p, e.n).mat;
    auto owned = std::make_shared<OwnedDense>();
    owned->m = kron_power(nch, t) * mo.dense;
    mo.dense = owned->m;
    mo.op = owned;
  }
  return mo;
}

MatrixXd moment_dense_of_elements(const std::vector<MatrixXd>& ops,
                                  const std::vector<double>& probs, int t) {
  if (ops.empty() || ops.size() != probs.size())
    throw config_error("moment_dense_of_elements: element/probability size mismatch");
  double tot = 0.0;
  for (double w : probs) {
    if (w < -1e-12) throw config_error("moment_dense_of_elements: negative weight");
    tot += w;
  }
  if (std::abs(tot - 1.0) > 1e-8)
    throw config_error("moment_dense_of_elements: weights do not sum to 1");
  Index d = ops[0].rows();
  Index dim = 1;
  for (int c = 0; c < t; ++c) {
    dim *= d;
    if (dim > kMomentDenseLimit)
      throw capacity_error("moment_dense_of_elements: dense dimension exceeded");
  }
  MatrixXd sum = MatrixXd::Zero(dim, dim);
  for (size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].rows() != d || ops[i].cols() != d)
      throw config_error("moment_dense_of_elements: inhomogeneous element dimensions");
    sum.noalias() += probs[i] * kron_power(ops[i], t);
  }
  return sum;
}

MatrixXd moment_operator_mc(const Ensemble& e, int t, Index n_samples,
                            std::mt19937_64& rng, double* frob_stderr) {
  e.validate();
  if (t < 1 || t > 3) throw config_error("moment_operator_mc: t must be 1, 2, or 3");
  if (n_samples < 1) throw config_error("moment_operator_mc: need at least one sample");
  const Index dim = pow_index(2, 2 * e.n * t);
  if (dim > kMomentDenseLimit)
    throw capacity_error("moment_operator_mc: dense dimension exceeded");

  MatrixXd sum = MatrixXd::Zero(dim, dim);
  MatrixXd sumsq = MatrixXd::Zero(dim, dim);
  for (Index s = 0; s < n_samples; ++s) {
    LayerSample layer = sample_layer(e, rng);
    MatrixXd k = kron_power(layer_superop(layer).mat, t);
    sum.noalias() += k;
    sumsq.noalias() += k.cwiseAbs2();
  }
  MatrixXd mean = sum / double(n_samples);
  if (frob_stderr != nullptr) {
    if (n_samples < 2) {
      *frob_stderr = std::numeric_limits<double>::quiet_NaN();
    } else {
      // Entrywise sample variance of the mean, summed into Frobenius form.
      MatrixXd var =
          (sumsq - double(n_samples) * mean.cwiseAbs2()) / double(n_samples - 1);
      *frob_stderr = std::sqrt(std::max(0.0, var.sum()) / double(n_samples));
    }
  }
  return mean;
}

// ---- spectral gap ----

GapResult spectral_gap(const MomentOperator& m, double tol) {
  if (!m.op) throw std::invalid_argument("spectral_gap: empty moment operator");
  GapResult out;

  if (m.dim > kMomentDenseLimit && m.dim > kMatrixFreeLimit) {
    if (m.ens.arch == Arch::lrc && m.t == 2 && m.ens.gateset != GateSet::generators) {
      out.gap = sector_gap(m.ens);
      out.method = "sector";
      out.residual = 0.0;
      return out;
    }
    throw capacity_error("spectral_gap: dimension " + std::to_string(m.dim) +
                         " beyond matrix-free budget with no sector reduction");
  }

  MatrixXd q = fixed_space_orthonormal(m.n, m.t);
  std::unique_ptr<SparseApply> dense_view;
  const SparseApply* base = m.op.get();
  if (m.has_dense) {
    dense_view = std::make_unique<DenseApply>(m.dense);
    base = dense_view.get();
    out.method = "dense";
  } else {
    out.method = "lanczos";
  }

  DeflatedGram gram;
  gram.m = base;
  gram.q = &q;
  EigPairs top = top_eigs(gram, 1, EigMethod::lanczos, tol, 20000, 11, &q);
  double lam = std::max(0.0, top.values(0));
  out.gap = 1.0 - std::sqrt(lam);

  VectorXd v = top.vectors.col(0);
  VectorXd gv(v.size());
  gram.apply(v.data(), gv.data());
  out.residual = (gv - top.values(0) * v).norm();
  return out;
}

double sector_gap(const Ensemble& e) {
  e.validate();
  if (e.arch != Arch::lrc || e.gateset == GateSet::generators)
    throw config_error("sector_gap: needs an LRC ensemble with Haar-type gates");
  const int n = e.n;
  if (n < 2 || n > 13) throw capacity_error("sector_gap: n out of the dense sector range");
  const Index dim = Index(1) << n;

  // Restriction of the edge twirls to the invariant sector spanned by
  // per-site identity/swap products e_s: equal bits on the edge are fixed,
  // mixed bits project to (2/5)(e_{..00..} + e_{..11..}).
  MatrixXd mv = MatrixXd::Zero(dim, dim);
  const size_t ne = e.edges.size();
  for (size_t ei = 0; ei < ne; ++ei) {
    const double w = e.edge_probs.empty() ? 1.0 / double(ne) : e.edge_probs[ei];
    const Index mi = Index(1) << e.edges[ei].first;
    const Index mj = Index(1) << e.edges[ei].second;
    for (Index s = 0; s < dim; ++s) {
      const bool bi = (s & mi) != 0, bj = (s & mj) != 0;
      if (bi == bj) {
        mv(s, s) += w;
      } else {
        const Index lo = s & ~(mi | mj);
        mv(lo, s) += 0.4 * w;
        mv(lo | mi | mj, s) += 0.4 * w;
      }
    }
  }

  // Gram matrix of the product basis: per site <i,i> = <s,s> = 4, <i,s> = 2.
  MatrixXd g(dim, dim);
  const double base = std::pow(4.0, double(n));
  for (Index a = 0; a < dim; ++a)
    for (Index b = 0; b < dim; ++b)
      g(a, b) = base * std::pow(0.5, double(__builtin_popcountll(std::uint64_t(a ^ b))));

  MatrixXd gm = g * mv;
  gm = 0.5 * (gm + gm.transpose());  // exact up to roundoff: M is G-self-adjoint
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(gm, g);
  if (es.info() != Eigen::Success)
    throw convergence_error("sector_gap: generalized eigensolver failed");
  const VectorXd& ev = es.eigenvalues();  // ascending
  if (std::abs(ev(dim - 1) - 1.0) > 1e-8 || std::abs(ev(dim - 2) - 1.0) > 1e-8)
    throw std::runtime_error("sector_gap: fixed-space eigenvalues not found");
  return 1.0 - ev(dim - 3);
}

double exact_nn_lrc_gap(int n, Boundary bc) {
  if (n < 2) throw config_error("exact_nn_lrc_gap: n must be at least 2");
  const double core = 1.0 - 0.8 * std::cos(M_PI / double(n));
  if (bc == Boundary::open) return core / double(n - 1);
  return 2.0 * core / double(n);
}

std::pair<double, std::string> tabulated_gap(const std::string& arch, int n, int t) {
  if (n < 2) throw config_error("tabulated_gap: n must be at least 2");
  const bool t23 = (t == 2 || t == 3);
  if (arch == "lrc_nn" && t23)
    return {1.0 / (5.0 * n), "NN-chain LRC: integrable-chain diagonalization, asymptote 1/(5n)"};
  if (arch == "lrc_nn_pbc" && t23)
    return {2.0 * (1.0 - 0.8 * std::cos(M_PI / double(n))) / double(n),
            "periodic NN-chain LRC: exact (2/n)(1 - (4/5)cos(pi/n))"};
  if (arch == "lrc_complete" && t23)
    return {5.0 / (6.0 * n), "complete-graph LRC: asymptotic bound 5/(6n)"};
  if (arch == "bw" && t == 2)
    return {9.0 / 50.0, "brickwork composite layer: two-sublayer bound 9/50"};
  if (arch == "bw" && t == 3)
    return {1.0 / 42.0, "brickwork composite layer: third-moment bound 1/42"};
  if (arch == "bw_odd" && t == 2)
    return {9.0 / 25.0, "single odd brickwork sublayer: bound 9/25"};
  if (arch == "generator_lrc_nn" && t23)
    return {1.0 / (55.0 * n),
            "NN-chain LRC over the weighted Clifford generator set: 1/(55n)"};
  if (arch == "generator_lrc_complete" && t23)
    return {1.0 / (14.0 * n),
            "complete-graph LRC over the weighted Clifford generator set: 1/(14n)"};
  if (arch == "generator_bw" && t23)
    return {1.0 / 134.0, "brickwork over the weighted Clifford generator set: 1/134"};
  if (arch == "generator_local" && t23)
    return {1.0 / 10.99, "single-edge weighted Clifford generator draw: 1/10.99"};
  throw config_error("tabulated_gap: no entry for arch '" + arch + "' at t=" +
                     std::to_string(t));
}

double local_to_global_gap(double local_gap, double arch_gap) {
  if (local_gap < 0.0 || local_gap > 1.0 || arch_gap < 0.0 || arch_gap > 1.0)
    throw std::invalid_argument("local_to_global_gap: gaps must lie in [0, 1]");
  return 1.0 - (1.0 - local_gap) * (1.0 - arch_gap);
}

// ---- Fourier operators and decay curves ----

MatrixXd fourier_operator(const Ensemble& e, const IrrepSpec& lambda,
                          const NoiseModel* noise) {
  e.validate();
  const Index d2 = pow_index(2, 2 * e.n);
  if (d2 * d2 > kMomentDenseLimit)
    throw capacity_error("fourier_operator: dense moment dimension exceeded (n <= 3)");
  MomentOperator m2 = moment_operator(e, 2);
  const std::vector<Index> supp = lambda.support();
  const Index dl = Index(supp.size());

  // Compress the low (copy-1) factor to the irrep support; the high factor
  // keeps full dimension and carries the noise channel.
  MatrixXd f(d2 * dl, d2 * dl);
  for (Index hi = 0; hi < d2; ++hi)
    for (Index a = 0; a < dl; ++a)
      for (Index hj = 0; hj < d2; ++hj)
        for (Index b = 0; b < dl; ++b)
          f(hi * dl + a, hj * dl + b) = m2.dense(hi * d2 + supp[size_t(a)],
                                                 hj * d2 + supp[size_t(b)]);
  if (noise == nullptr || noise->type == NoiseModel::Type::none) return f;

  MatrixXd nch = noise_channel_dense(*noise, e.p, e.n).mat;
  MatrixXd out = MatrixXd::Zero(f.rows(), f.cols());
  for (Index r = 0; r < d2; ++r)
    for (Index c = 0; c < d2; ++c)
      if (nch(r, c) != 0.0)
        out.block(r * dl, 0, dl, f.cols()).noalias() +=
            nch(r, c) * f.block(c * dl, 0, dl, f.cols());
  return out;
}

double implementation_error(const Ensemble& e, const IrrepSpec& lambda,
                            const NoiseModel& noise) {
  if (noise.type == NoiseModel::Type::none) return 0.0;
  if (noise.type == NoiseModel::Type::gate_dependent)
    throw std::invalid_argument(
        "implementation_error: gate-dependent noise is not supported");
  MatrixXd ideal = fourier_operator(e, lambda, nullptr);
  MatrixXd noisy = fourier_operator(e, lambda, &noise);
  MatrixXd diff = noisy - ideal;
  if (diff.rows() <= 1024) return spectral_norm(diff);
  DenseApply ap(diff);
  return spectral_norm(ap, 1e-11);
}

VectorXd ideal_decay_curve(const Ensemble& e, const IrrepSpec& lambda, int m_max) {
  e.validate();
  if (m_max < 1) throw config_error("ideal_decay_curve: m_max must be positive");
  const Index d2 = pow_index(2, 2 * e.n);
  const Index dim = d2 * d2;
  if (dim > kMatrixFreeLimit)
    throw capacity_error("ideal_decay_curve: second-moment dimension exceeded");
  MomentOperator m2 = moment_operator(e, 2);

  // Frame data of the generated group: every circuit ensemble here closes
  // into (at least) a 2-design, sharing the Clifford frame diagonal.
  GroupKind gk = e.arch == Arch::exact ? e.group : GroupKind::clifford;
  FrameOperator s = frame_operator(gk, e.p, e.n);
  auto it = s.blocks.find(lambda.name);
  if (it == s.blocks.end())
    throw config_error("ideal_decay_curve: irrep '" + lambda.name +
                       "' unknown to the frame operator");
  if (it->second <= 0.0)
    throw std::invalid_argument("ideal_decay_curve: irrep invisible to the measurement");

  const VectorXd rho = zero_state_coords(e.p, e.n);
  VectorXd a = VectorXd::Zero(d2);
  for (Index i : lambda.support()) a(i) = rho(i) / it->second;

  // vec(S_0) = vec(M): column-major, copy-1 index low.
  VectorXd vec = VectorXd::Zero(dim);
  VectorXd mdiag = measurement_diag(e.p, e.n);
  for (Index i = 0; i < d2; ++i) vec(i + i * d2) = mdiag(i);

  VectorXd out(m_max);
  VectorXd next(dim);
  for (int m = 1; m <= m_max; ++m) {
    m2.op->adjoint_apply(vec.data(), next.data());
    vec.swap(next);
    Eigen::Map<const MatrixXd> mat(vec.data(), d2, d2);
    out(m - 1) = a.dot(mat * rho);
  }
  return out;
}

}  // namespace frb
