#include "frb/irreps.hpp"

#include <algorithm>
#include <stdexcept>

#include "frb/errors.hpp"

namespace frb {

// ---------------------------------------------------------------- groups ----

const char* group_name(GroupKind k) {
  switch (k) {
    case GroupKind::unitary_2_group: return "unitary_2_group";
    case GroupKind::clifford: return "clifford";
    case GroupKind::local_clifford: return "local_clifford";
    case GroupKind::heisenberg_weyl: return "heisenberg_weyl";
  }
  throw std::logic_error("group_name: bad enum value");
}

GroupKind parse_group(const std::string& name) {
  if (name == "unitary_2_group" || name == "haar") return GroupKind::unitary_2_group;
  if (name == "clifford") return GroupKind::clifford;
  if (name == "local_clifford") return GroupKind::local_clifford;
  if (name == "heisenberg_weyl" || name == "pauli") return GroupKind::heisenberg_weyl;
  throw config_error("parse_group: unknown group '" + name + "'");
}

Superop element_superop(const GroupElement& g) {
  switch (g.kind) {
    case GroupElement::Kind::weyl:
      return weyl_superop(g.a, g.p, g.n);
    case GroupElement::Kind::clifford:
      return to_superop(g.tab);
    case GroupElement::Kind::unitary:
      return ptm_of_unitary(g.u, g.p, g.n);
    case GroupElement::Kind::local_product: {
      std::vector<Superop> sites;
      sites.reserve(g.site_us.size());
      for (const auto& u : g.site_us) sites.push_back(ptm_of_unitary(u, g.p, 1));
      return local_superop(sites);
    }
  }
  throw std::logic_error("element_superop: bad element kind");
}

GroupElement element_inverse(const GroupElement& g) {
  GroupElement inv = g;
  switch (g.kind) {
    case GroupElement::Kind::weyl:
      inv.a = g.a.negated(g.p);
      inv.tau_power = ((-g.tau_power) % (2 * g.p) + 2 * g.p) % (2 * g.p);
      break;
    case GroupElement::Kind::clifford:
      inv.tab = g.tab.inverse();
      break;
    case GroupElement::Kind::unitary:
      inv.u = g.u.adjoint();
      break;
    case GroupElement::Kind::local_product:
      for (auto& u : inv.site_us) u = u.adjoint().eval();
      break;
  }
  return inv;
}

Superop local_superop(const std::vector<Superop>& sites) {
  if (sites.empty()) throw std::invalid_argument("local_superop: no sites");
  const int p = sites.front().p;
  const int n = int(sites.size());
  const Index d = pow_index(p, n);
  const Index p2 = Index(p) * p;
  for (const auto& s : sites) {
    if (s.p != p || s.n != 1 || s.mat.rows() != p2)
      throw std::invalid_argument("local_superop: sites must be single-site superoperators");
  }
  Superop out(p, n);
  const Index dim = d * d;
  // Digit table: pair index z_k * p + x_k of each global label at each site.
  std::vector<Index> pair(size_t(dim) * n);
  for (Index i = 0; i < dim; ++i) {
    Index z = i / d, x = i % d;
    for (int k = 0; k < n; ++k) {
      pair[size_t(i) * n + k] = (z % p) * p + (x % p);
      z /= p;
      x /= p;
    }
  }
  for (Index j = 0; j < dim; ++j) {
    for (Index i = 0; i < dim; ++i) {
      double v = 1.0;
      for (int k = 0; k < n && v != 0.0; ++k)
        v *= sites[k].mat(pair[size_t(i) * n + k], pair[size_t(j) * n + k]);
      out.mat(i, j) = v;
    }
  }
  return out;
}

// ---------------------------------------------------------------- irreps ----

std::vector<Index> IrrepSpec::support() const {
  std::vector<Index> idx;
  for (Index i = 0; i < diag.size(); ++i)
    if (diag[i] > 0.5) idx.push_back(i);
  return idx;
}

Superop IrrepSpec::projector() const {
  Superop s(p, n);
  s.mat = diag.asDiagonal();
  return s;
}

namespace {

// Pattern b in {0,1}^n of a label: b_k = 1 iff site k carries the identity.
std::string trivial_pattern(const WeylLabel& a, int n) {
  std::string b(size_t(n), '0');
  for (int k = 0; k < n; ++k)
    if (a.z[k] == 0 && a.x[k] == 0) b[size_t(k)] = '1';
  return b;
}

}  // namespace

std::vector<IrrepSpec> irrep_projectors(GroupKind kind, int p, int n) {
  const Index d = pow_index(p, n);
  const Index dim = d * d;
  if (dim > kDenseLimit)
    throw capacity_error("irrep_projectors: dimension exceeds dense limit");
  std::vector<IrrepSpec> out;

  auto blank = [&](const std::string& name) {
    IrrepSpec s;
    s.name = name;
    s.p = p;
    s.n = n;
    s.diag = VectorXd::Zero(dim);
    return s;
  };

  switch (kind) {
    case GroupKind::unitary_2_group:
    case GroupKind::clifford: {
      IrrepSpec triv = blank("1");
      triv.diag[0] = 1.0;
      triv.dim_lambda = 1;
      IrrepSpec ad = blank("ad");
      ad.diag = VectorXd::Ones(dim);
      ad.diag[0] = 0.0;
      ad.dim_lambda = dim - 1;
      out.push_back(std::move(triv));
      out.push_back(std::move(ad));
      break;
    }
    case GroupKind::local_clifford: {
      // One block per pattern b; enumerate patterns as bitmasks, site 0 first
      // in the printed name.
      for (Index mask = 0; mask < (Index(1) << n); ++mask) {
        std::string b(size_t(n), '0');
        int ones = 0;
        for (int k = 0; k < n; ++k)
          if (mask & (Index(1) << k)) {
            b[size_t(k)] = '1';
            ++ones;
          }
        IrrepSpec s = blank("b=" + b);
        s.dim_lambda = pow_index(Index(p) * p - 1, n - ones);
        out.push_back(std::move(s));
      }
      for (Index i = 0; i < dim; ++i) {
        WeylLabel a = WeylLabel::from_index(i, p, n);
        std::string b = trivial_pattern(a, n);
        for (auto& s : out)
          if (s.name == "b=" + b) {
            s.diag[i] = 1.0;
            break;
          }
      }
      break;
    }
    case GroupKind::heisenberg_weyl: {
      IrrepSpec triv = blank("1");
      triv.diag[0] = 1.0;
      triv.dim_lambda = 1;
      out.push_back(std::move(triv));
      std::vector<bool> seen(size_t(dim), false);
      seen[0] = true;
      for (Index i = 1; i < dim; ++i) {
        if (seen[size_t(i)]) continue;
        WeylLabel a = WeylLabel::from_index(i, p, n);
        Index ni = a.negated(p).index(p);
        IrrepSpec s = blank("w=(" + std::to_string(i / d) + "," + std::to_string(i % d) + ")");
        s.diag[i] = 1.0;
        seen[size_t(i)] = true;
        s.dim_lambda = 1;
        if (ni != i) {  // odd p: conjugate pair forms one 2-dim real block
          s.diag[ni] = 1.0;
          seen[size_t(ni)] = true;
          s.dim_lambda = 2;
        }
        out.push_back(std::move(s));
      }
      break;
    }
  }
  return out;
}

const IrrepSpec& find_irrep(const std::vector<IrrepSpec>& list, const std::string& name) {
  for (const auto& s : list)
    if (s.name == name) return s;
  throw config_error("find_irrep: unknown irrep '" + name + "'");
}

GroupKind group_of_irrep(const std::string& name) {
  if (name.rfind("b=", 0) == 0) return GroupKind::local_clifford;
  if (name.rfind("w=", 0) == 0) return GroupKind::heisenberg_weyl;
  if (name == "1" || name == "ad") return GroupKind::clifford;
  throw config_error("group_of_irrep: unrecognized irrep name '" + name + "'");
}

Superop character_projector(const std::vector<Superop>& rep, const std::vector<cplx>& chi,
                            double dim_tau) {
  if (rep.empty() || rep.size() != chi.size())
    throw std::invalid_argument("character_projector: representation/character size mismatch");
  const Index dim = rep.front().mat.rows();
  MatrixXd re = MatrixXd::Zero(dim, dim);
  MatrixXd im = MatrixXd::Zero(dim, dim);
  for (size_t g = 0; g < rep.size(); ++g) {
    if (rep[g].mat.rows() != dim)
      throw std::invalid_argument("character_projector: inhomogeneous representation");
    re += chi[g].real() * rep[g].mat;   // conj(chi) = re - i*im against real rep
    im -= chi[g].imag() * rep[g].mat;
  }
  const double scale = dim_tau / double(rep.size());
  re *= scale;
  im *= scale;
  const double tol = 1e-8 * std::max(1.0, re.norm());
  if (im.norm() > tol)
    throw std::invalid_argument("character_projector: projector is not real");
  if ((re * re - re).norm() > tol)
    throw std::invalid_argument("character_projector: result is not idempotent");
  Superop s(rep.front().p, rep.front().n);
  s.mat = std::move(re);
  return s;
}

}  // namespace frb
