#include "frb/frame.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "frb/tableau.hpp"

namespace frb {

VectorXd measurement_diag(int p, int n) {
  const Index d = pow_index(p, n);
  VectorXd m = VectorXd::Zero(d * d);
  for (Index z = 0; z < d; ++z) m[z * d] = 1.0;  // x = 0 labels
  return m;
}

Superop FrameOperator::dense() const {
  Superop s(p, n);
  s.mat = diag.asDiagonal();
  return s;
}

FrameOperator frame_operator(GroupKind kind, int p, int n) {
  const Index d = pow_index(p, n);
  const Index dim = d * d;
  if (dim > kDenseLimit)
    throw capacity_error("frame_operator: dimension exceeds dense limit");
  FrameOperator f;
  f.kind = kind;
  f.p = p;
  f.n = n;
  f.diag = VectorXd::Zero(dim);
  switch (kind) {
    case GroupKind::unitary_2_group:
    case GroupKind::clifford:
      f.diag.setConstant(1.0 / double(d + 1));
      f.diag[0] = 1.0;
      break;
    case GroupKind::local_clifford:
      for (Index i = 0; i < dim; ++i) {
        WeylLabel a = WeylLabel::from_index(i, p, n);
        int nontrivial = 0;
        for (int k = 0; k < n; ++k)
          if (a.z[k] != 0 || a.x[k] != 0) ++nontrivial;
        f.diag[i] = std::pow(double(p + 1), -nontrivial);
      }
      break;
    case GroupKind::heisenberg_weyl:
      f.diag = measurement_diag(p, n);
      break;
  }
  for (const auto& s : irrep_projectors(kind, p, n))
    f.blocks[s.name] = f.diag[s.support().front()];
  return f;
}

VectorXd frame_diag_by_averaging(GroupKind kind, int p, int n) {
  const Index d = pow_index(p, n);
  const Index dim = d * d;
  const VectorXd m = measurement_diag(p, n);
  VectorXd acc = VectorXd::Zero(dim);
  switch (kind) {
    case GroupKind::unitary_2_group:  // the Clifford group is an exact 2-design
    case GroupKind::clifford: {
      if (p != 2 || n > 3)
        throw capacity_error("frame_diag_by_averaging: clifford average needs p=2, n<=3");
      // The diagonal of w(g)^T M w(g) for a signed permutation is m[perm[i]]
      // independent of the signs, so the symplectic part alone suffices.
      std::uint64_t count = 0;
      for_each_symplectic(n, [&](const CliffordTableau& t) {
        SignedPerm sp = clifford_action(t);
        for (Index i = 0; i < dim; ++i) acc[i] += m[sp.perm[size_t(i)]];
        ++count;
      });
      acc /= double(count);
      break;
    }
    case GroupKind::local_clifford: {
      if (p != 2)
        throw capacity_error("frame_diag_by_averaging: local average needs p=2");
      // Sites average independently and m factorizes over site digit pairs,
      // so the n-site diagonal is a product of single-site averages.
      VectorXd m1 = measurement_diag(2, 1), s1 = VectorXd::Zero(4);
      auto group1 = enumerate_clifford(1);
      for (const auto& t : group1) {
        SignedPerm sp = clifford_action(t);
        for (Index i = 0; i < 4; ++i) s1[i] += m1[sp.perm[size_t(i)]];
      }
      s1 /= double(group1.size());
      for (Index i = 0; i < dim; ++i) {
        Index z = i / d, x = i % d;
        double v = 1.0;
        for (int k = 0; k < n; ++k) {
          v *= s1[(z % 2) * 2 + (x % 2)];
          z /= 2;
          x /= 2;
        }
        acc[i] = v;
      }
      break;
    }
    case GroupKind::heisenberg_weyl: {
      for (Index g = 0; g < dim; ++g) {
        Superop w = weyl_superop(WeylLabel::from_index(g, p, n), p, n);
        for (Index i = 0; i < dim; ++i)
          acc[i] += m.dot(w.mat.col(i).cwiseAbs2());
      }
      acc /= double(dim);
      break;
    }
  }
  return acc;
}

Superop frame_pinv_block(const FrameOperator& f, const IrrepSpec& lambda) {
  Superop s(f.p, f.n);
  const double sl = f.blocks.at(lambda.name);
  if (sl > 0.0)
    for (Index i : lambda.support()) s.mat(i, i) = 1.0 / sl;
  return s;
}

FrameEigBounds frame_eig_bounds(const FrameOperator& f, const IrrepSpec& lambda, bool aligned) {
  const double sl = f.blocks.at(lambda.name);
  if (sl <= 0.0)
    throw std::invalid_argument("frame_eig_bounds: irrep invisible to measurement");
  FrameEigBounds b;
  b.actual = 1.0 / sl;
  const double d = double(pow_index(f.p, f.n));
  b.lower = std::max(1.0, double(lambda.dim_lambda) / (d - 1.0));
  b.upper = aligned ? double(lambda.dim_lambda) : std::numeric_limits<double>::infinity();
  return b;
}

SpamVisibilities spam_visibilities(const IrrepSpec& lambda, const VectorXd& rho,
                                   const VectorXd& rho_tilde, const Superop* meas_channel) {
  if (rho.size() != lambda.diag.size() || rho_tilde.size() != lambda.diag.size())
    throw std::invalid_argument("spam_visibilities: state dimension mismatch");
  SpamVisibilities v;
  const double denom = rho.dot(lambda.diag.cwiseProduct(rho));
  if (std::abs(denom) < 1e-14)
    throw std::invalid_argument("spam_visibilities: state has no overlap with irrep");
  v.v_sp = rho.dot(lambda.diag.cwiseProduct(rho_tilde)) / denom;
  if (meas_channel != nullptr) {
    const VectorXd m = measurement_diag(lambda.p, lambda.n);
    double num = 0.0, den = 0.0;
    for (Index i = 0; i < m.size(); ++i) {
      if (lambda.diag[i] < 0.5 || m[i] == 0.0) continue;
      num += meas_channel->mat(i, i) * m[i];
      den += m[i];
    }
    if (std::abs(den) < 1e-14)
      throw std::invalid_argument("spam_visibilities: irrep invisible to measurement");
    v.v_m = num / den;
  }
  return v;
}

}  // namespace frb
