#include "frb/tableau.hpp"

#include <deque>
#include <functional>
#include <unordered_set>

namespace frb {

PauliBits PauliBits::from_weyl(const WeylLabel& a) {
  PauliBits q;
  for (size_t k = 0; k < a.z.size(); ++k) {
    if (a.z[k]) q.z |= 1ULL << k;
    if (a.x[k]) q.x |= 1ULL << k;
  }
  q.s = (4 - __builtin_popcountll(q.z & q.x) % 4) % 4;  // i^{-z.x}
  return q;
}

PauliBits pauli_mul(const PauliBits& q1, const PauliBits& q2) {
  PauliBits r;
  r.z = q1.z ^ q2.z;
  r.x = q1.x ^ q2.x;
  r.s = (q1.s + q2.s + 2 * parity64(q1.x & q2.z)) % 4;
  return r;
}

Index pauli_to_weyl(const PauliBits& q, int n, int& sign) {
  int e = (q.s + __builtin_popcountll(q.z & q.x)) % 4;
  if (e % 2 != 0) throw std::invalid_argument("pauli_to_weyl: non-Hermitian phase");
  sign = (e == 0) ? 1 : -1;
  return (Index(q.z) << n) | Index(q.x);
}

namespace {

PauliBits from_bits(std::uint64_t z, std::uint64_t x) {
  PauliBits q;
  q.z = z;
  q.x = x;
  q.s = (4 - __builtin_popcountll(z & x) % 4) % 4;  // +w(z,x)
  return q;
}

int symp(const PauliBits& a, const PauliBits& b) {
  return parity64(a.z & b.x) ^ parity64(a.x & b.z);
}

}  // namespace

CliffordTableau CliffordTableau::identity(int n) {
  CliffordTableau c;
  c.n = n;
  c.img_x.resize(n);
  c.img_z.resize(n);
  for (int k = 0; k < n; ++k) {
    c.img_x[k] = from_bits(0, 1ULL << k);
    c.img_z[k] = from_bits(1ULL << k, 0);
  }
  return c;
}

bool CliffordTableau::is_valid() const {
  auto hermitian = [](const PauliBits& q) {
    return (q.s + __builtin_popcountll(q.z & q.x)) % 2 == 0;
  };
  for (int k = 0; k < n; ++k)
    if (!hermitian(img_x[k]) || !hermitian(img_z[k])) return false;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      if (symp(img_x[k], img_z[l]) != (k == l ? 1 : 0)) return false;
      if (symp(img_x[k], img_x[l]) != 0) return false;
      if (symp(img_z[k], img_z[l]) != 0) return false;
    }
  return true;
}

PauliBits CliffordTableau::conjugate(const PauliBits& q) const {
  PauliBits acc;
  acc.s = q.s;
  for (int k = 0; k < n; ++k)
    if ((q.z >> k) & 1) acc = pauli_mul(acc, img_z[k]);
  for (int k = 0; k < n; ++k)
    if ((q.x >> k) & 1) acc = pauli_mul(acc, img_x[k]);
  return acc;
}

CliffordTableau CliffordTableau::then(const CliffordTableau& second) const {
  if (n != second.n) throw std::invalid_argument("CliffordTableau::then: size mismatch");
  CliffordTableau r;
  r.n = n;
  r.img_x.resize(n);
  r.img_z.resize(n);
  for (int k = 0; k < n; ++k) {
    r.img_x[k] = second.conjugate(img_x[k]);
    r.img_z[k] = second.conjugate(img_z[k]);
  }
  return r;
}

CliffordTableau CliffordTableau::inverse() const {
  // Invert the symplectic part over F_2, then repair generator signs.
  int m = 2 * n;
  std::vector<std::uint64_t> rows(m);  // augmented [A | I], column c: bit c of each image
  // Build A with column layout (x-images | z-images), row layout (x-bits | z-bits).
  auto col_bits = [&](int c) -> std::uint64_t {
    const PauliBits& q = (c < n) ? img_x[c] : img_z[c - n];
    return (std::uint64_t(q.x) & ((1ULL << n) - 1)) | (std::uint64_t(q.z) << n);
  };
  for (int r = 0; r < m; ++r) {
    std::uint64_t row = 0;
    for (int c = 0; c < m; ++c)
      if ((col_bits(c) >> r) & 1) row |= 1ULL << c;
    rows[r] = row | (1ULL << (m + r));
  }
  // Gauss-Jordan.
  for (int c = 0; c < m; ++c) {
    int piv = -1;
    for (int r = c; r < m; ++r)
      if ((rows[r] >> c) & 1) {
        piv = r;
        break;
      }
    if (piv < 0) throw std::runtime_error("CliffordTableau::inverse: singular tableau");
    std::swap(rows[c], rows[piv]);
    for (int r = 0; r < m; ++r)
      if (r != c && ((rows[r] >> c) & 1)) rows[r] ^= rows[c];
  }
  CliffordTableau t0;
  t0.n = n;
  t0.img_x.resize(n);
  t0.img_z.resize(n);
  auto inv_col = [&](int c) {
    std::uint64_t z = 0, x = 0;
    for (int r = 0; r < m; ++r)
      if ((rows[r] >> (m + c)) & 1) {
        if (r < n)
          x |= 1ULL << r;
        else
          z |= 1ULL << (r - n);
      }
    return from_bits(z, x);
  };
  for (int k = 0; k < n; ++k) {
    t0.img_x[k] = inv_col(k);
    t0.img_z[k] = inv_col(n + k);
  }
  // D = t0 ∘ this has identity symplectic part; read off residual signs.
  CliffordTableau d = this->then(t0);
  std::uint64_t zq = 0, xq = 0;
  for (int k = 0; k < n; ++k) {
    int sgn;
    pauli_to_weyl(d.img_x[k], n, sgn);
    if (sgn < 0) zq |= 1ULL << k;
    pauli_to_weyl(d.img_z[k], n, sgn);
    if (sgn < 0) xq |= 1ULL << k;
  }
  PauliBits q;
  q.z = zq;
  q.x = xq;
  for (int k = 0; k < n; ++k) {
    t0.img_x[k].s = (t0.img_x[k].s + 2 * symp(q, t0.img_x[k])) % 4;
    t0.img_z[k].s = (t0.img_z[k].s + 2 * symp(q, t0.img_z[k])) % 4;
  }
  return t0;
}

bool CliffordTableau::operator==(const CliffordTableau& o) const {
  if (n != o.n) return false;
  for (int k = 0; k < n; ++k) {
    if (img_x[k].z != o.img_x[k].z || img_x[k].x != o.img_x[k].x ||
        img_x[k].s != o.img_x[k].s)
      return false;
    if (img_z[k].z != o.img_z[k].z || img_z[k].x != o.img_z[k].x ||
        img_z[k].s != o.img_z[k].s)
      return false;
  }
  return true;
}

CliffordTableau tab_h(int n, int k) {
  CliffordTableau c = CliffordTableau::identity(n);
  c.img_x[k] = from_bits(1ULL << k, 0);
  c.img_z[k] = from_bits(0, 1ULL << k);
  return c;
}

CliffordTableau tab_s(int n, int k) {
  CliffordTableau c = CliffordTableau::identity(n);
  c.img_x[k] = from_bits(1ULL << k, 1ULL << k);  // +Y
  return c;
}

CliffordTableau tab_cx(int n, int control, int target) {
  CliffordTableau c = CliffordTableau::identity(n);
  c.img_x[control] = from_bits(0, (1ULL << control) | (1ULL << target));
  c.img_z[target] = from_bits((1ULL << control) | (1ULL << target), 0);
  return c;
}

CliffordTableau pauli_times(const PauliBits& a, const CliffordTableau& c) {
  CliffordTableau r = c;
  for (int k = 0; k < c.n; ++k) {
    r.img_x[k].s = (r.img_x[k].s + 2 * symp(a, r.img_x[k])) % 4;
    r.img_z[k].s = (r.img_z[k].s + 2 * symp(a, r.img_z[k])) % 4;
  }
  return r;
}

// ---- signed permutation ----

SignedPerm SignedPerm::then(const SignedPerm& second) const {
  SignedPerm r;
  r.perm.resize(perm.size());
  r.sign.resize(perm.size());
  for (Index i = 0; i < dim(); ++i) {
    r.perm[i] = second.perm[perm[i]];
    r.sign[i] = int8_t(sign[i] * second.sign[perm[i]]);
  }
  return r;
}

SignedPerm SignedPerm::inverse() const {
  SignedPerm r;
  r.perm.resize(perm.size());
  r.sign.resize(perm.size());
  for (Index i = 0; i < dim(); ++i) {
    r.perm[perm[i]] = i;
    r.sign[perm[i]] = sign[i];
  }
  return r;
}

SignedPerm clifford_action(const CliffordTableau& c) {
  Index d2 = Index(1) << (2 * c.n);
  SignedPerm sp;
  sp.perm.resize(d2);
  sp.sign.resize(d2);
  for (Index i = 0; i < d2; ++i) {
    std::uint64_t z = std::uint64_t(i) >> c.n;
    std::uint64_t x = std::uint64_t(i) & ((1ULL << c.n) - 1);
    PauliBits q = from_bits(z, x);
    PauliBits img = c.conjugate(q);
    int sgn;
    sp.perm[i] = pauli_to_weyl(img, c.n, sgn);
    sp.sign[i] = int8_t(sgn);
  }
  return sp;
}

Superop to_superop(const CliffordTableau& c) {
  SignedPerm sp = clifford_action(c);
  Superop s(2, c.n);
  for (Index i = 0; i < sp.dim(); ++i) s.mat(sp.perm[i], i) = sp.sign[i];
  return s;
}

// ---- sampling ----

namespace {

// Symplectic form on packed vectors (x-part bits 0..n-1, z-part bits n..2n-1).
int symp_vec(std::uint64_t a, std::uint64_t b, int n) {
  std::uint64_t mask = (1ULL << n) - 1;
  return parity64((a & mask) & (b >> n)) ^ parity64((a >> n) & (b & mask));
}

}  // namespace

CliffordTableau sample_clifford(int n, std::mt19937_64& rng) {
  if (n < 1 || n > 31) throw std::invalid_argument("sample_clifford: n out of range");
  std::vector<std::uint64_t> basis(2 * n);
  for (int i = 0; i < 2 * n; ++i) basis[i] = 1ULL << i;
  std::vector<std::uint64_t> fs(n), gs(n);

  for (int j = 0; j < n; ++j) {
    int dim = 2 * (n - j);
    // f: uniform nonzero combination of the current basis.
    std::uint64_t c = std::uniform_int_distribution<std::uint64_t>(1, (1ULL << dim) - 1)(rng);
    std::uint64_t f = 0;
    for (int i = 0; i < dim; ++i)
      if ((c >> i) & 1) f ^= basis[i];
    // h: any partner with <f,h> = 1.
    int i0 = -1;
    for (int i = 0; i < dim; ++i)
      if (symp_vec(f, basis[i], n)) {
        i0 = i;
        break;
      }
    if (i0 < 0) throw std::runtime_error("sample_clifford: degenerate form");
    std::uint64_t h = basis[i0];
    // Kernel basis of <f, .> inside the current space.
    std::vector<std::uint64_t> kernel;
    for (int i = 0; i < dim; ++i) {
      if (i == i0) continue;
      std::uint64_t v = basis[i];
      if (symp_vec(f, v, n)) v ^= h;
      kernel.push_back(v);
    }
    // g: uniform over the affine set h + span(kernel).
    std::uint64_t g = h;
    std::uint64_t bitsel =
        std::uniform_int_distribution<std::uint64_t>(0, (1ULL << kernel.size()) - 1)(rng);
    for (size_t i = 0; i < kernel.size(); ++i)
      if ((bitsel >> i) & 1) g ^= kernel[i];
    fs[j] = f;
    gs[j] = g;
    // Next complement: kernel vectors made orthogonal to g, rank-reduced.
    std::vector<std::uint64_t> next;
    for (std::uint64_t v : kernel) {
      if (symp_vec(g, v, n)) v ^= f;
      next.push_back(v);
    }
    // Row-echelon reduction to an independent set of size dim - 2.
    std::vector<std::uint64_t> reduced;
    for (std::uint64_t v : next) {
      for (std::uint64_t r : reduced) {
        std::uint64_t low = r & ~(r - 1);  // lowest set bit of r
        if (v & low) v ^= r;
      }
      if (v) reduced.push_back(v);
    }
    if (int(reduced.size()) != dim - 2)
      throw std::runtime_error("sample_clifford: rank bookkeeping failed");
    basis.assign(reduced.begin(), reduced.end());
  }

  CliffordTableau t;
  t.n = n;
  t.img_x.resize(n);
  t.img_z.resize(n);
  std::uint64_t mask = (1ULL << n) - 1;
  for (int k = 0; k < n; ++k) {
    t.img_x[k] = from_bits(fs[k] >> n, fs[k] & mask);
    t.img_z[k] = from_bits(gs[k] >> n, gs[k] & mask);
    // Uniform signs.
    t.img_x[k].s = (t.img_x[k].s + 2 * int(rng() & 1)) % 4;
    t.img_z[k].s = (t.img_z[k].s + 2 * int(rng() & 1)) % 4;
  }
  return t;
}

// ---- enumeration ----

namespace {

std::uint64_t symplectic_key(const CliffordTableau& c) {
  // 2n images, 2n bits each; fits 64 bits for n <= 4.
  std::uint64_t key = 0;
  int w = 2 * c.n;
  auto pack = [&](const PauliBits& q) {
    return (std::uint64_t(q.x) & ((1ULL << c.n) - 1)) | (std::uint64_t(q.z) << c.n);
  };
  for (int k = 0; k < c.n; ++k) key = (key << w) | pack(c.img_x[k]);
  for (int k = 0; k < c.n; ++k) key = (key << w) | pack(c.img_z[k]);
  return key;
}

CliffordTableau key_to_tableau(std::uint64_t key, int n) {
  CliffordTableau c;
  c.n = n;
  c.img_x.resize(n);
  c.img_z.resize(n);
  int w = 2 * n;
  std::uint64_t mask = (1ULL << n) - 1;
  for (int k = n - 1; k >= 0; --k) {
    std::uint64_t v = key & ((1ULL << w) - 1);
    key >>= w;
    c.img_z[k] = from_bits(v >> n, v & mask);
  }
  for (int k = n - 1; k >= 0; --k) {
    std::uint64_t v = key & ((1ULL << w) - 1);
    key >>= w;
    c.img_x[k] = from_bits(v >> n, v & mask);
  }
  return c;
}

void bfs_symplectic(int n, const std::function<void(const CliffordTableau&)>& fn) {
  if (n < 1 || n > 3)
    throw capacity_error("enumerate_symplectic: n > 3 not enumerable at desk scale");
  std::vector<CliffordTableau> gens;
  for (int k = 0; k < n; ++k) {
    gens.push_back(tab_h(n, k));
    gens.push_back(tab_s(n, k));
  }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (a != b) gens.push_back(tab_cx(n, a, b));

  std::unordered_set<std::uint64_t> seen;
  std::deque<std::uint64_t> queue;
  CliffordTableau id = CliffordTableau::identity(n);
  seen.insert(symplectic_key(id));
  queue.push_back(symplectic_key(id));
  while (!queue.empty()) {
    std::uint64_t key = queue.front();
    queue.pop_front();
    CliffordTableau cur = key_to_tableau(key, n);
    fn(cur);
    for (const auto& g : gens) {
      std::uint64_t nk = symplectic_key(cur.then(g));
      if (seen.insert(nk).second) queue.push_back(nk);
    }
  }
}

}  // namespace

std::vector<CliffordTableau> enumerate_symplectic(int n) {
  if (n > 2) throw capacity_error("enumerate_symplectic: use streaming traversal for n = 3");
  std::vector<CliffordTableau> out;
  bfs_symplectic(n, [&](const CliffordTableau& c) { out.push_back(c); });
  return out;
}

void for_each_symplectic(int n, const std::function<void(const CliffordTableau&)>& fn) {
  bfs_symplectic(n, fn);
}

std::vector<CliffordTableau> enumerate_clifford(int n) {
  if (n > 2) throw capacity_error("enumerate_clifford: n > 2 not enumerable at desk scale");
  std::vector<CliffordTableau> symp = enumerate_symplectic(n);
  std::vector<CliffordTableau> out;
  out.reserve(symp.size() << (2 * n));
  for (const auto& base : symp) {
    for (std::uint64_t signs = 0; signs < (1ULL << (2 * n)); ++signs) {
      CliffordTableau c = base;
      for (int k = 0; k < n; ++k) {
        if ((signs >> k) & 1) c.img_x[k].s = (c.img_x[k].s + 2) % 4;
        if ((signs >> (n + k)) & 1) c.img_z[k].s = (c.img_z[k].s + 2) % 4;
      }
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace frb
