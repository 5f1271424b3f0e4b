#include "frb/kernels.hpp"

#include <stdexcept>

namespace frb {

namespace {

int bit_count(Index dim) {
  int b = 0;
  while ((Index(1) << b) < dim) ++b;
  if ((Index(1) << b) != dim)
    throw std::invalid_argument("apply_on_bits: dimension is not a power of two");
  return b;
}

// Deposit the bits of `packed` into the given positions.
inline Index deposit(Index packed, const std::vector<int>& pos) {
  Index out = 0;
  for (size_t i = 0; i < pos.size(); ++i)
    out |= ((packed >> i) & 1) << pos[i];
  return out;
}

}  // namespace

std::vector<int> free_bits(const std::vector<int>& bits, int total_bits) {
  std::vector<bool> used(size_t(total_bits), false);
  for (int b : bits) {
    if (b < 0 || b >= total_bits || used[size_t(b)])
      throw std::invalid_argument("free_bits: bad or repeated bit position");
    used[size_t(b)] = true;
  }
  std::vector<int> out;
  out.reserve(size_t(total_bits) - bits.size());
  for (int b = 0; b < total_bits; ++b)
    if (!used[size_t(b)]) out.push_back(b);
  return out;
}

#define FRB_KERNEL_BODY(PAR)                                                         \
  const int nb = bit_count(dim);                                                     \
  const int k = int(bits.size());                                                    \
  if (k > kMaxLocalBits) throw capacity_error("apply_on_bits: too many local bits"); \
  const Index sub = Index(1) << k;                                                   \
  if (op.rows() != sub || op.cols() != sub)                                          \
    throw std::invalid_argument("apply_on_bits: operator shape mismatch");           \
  const std::vector<int> fr = free_bits(bits, nb);                                   \
  const Index nfree = Index(1) << fr.size();                                         \
  std::vector<Index> offs(static_cast<size_t>(sub));                                 \
  for (Index r = 0; r < sub; ++r) offs[size_t(r)] = deposit(r, bits);                \
  PAR                                                                                \
  for (Index c = 0; c < nfree; ++c) {                                                \
    const Index base = deposit(c, fr);                                               \
    double buf[1 << kMaxLocalBits];                                                  \
    for (Index r = 0; r < sub; ++r) buf[r] = v[base + offs[size_t(r)]];              \
    for (Index r = 0; r < sub; ++r) {                                                \
      double acc = 0.0;                                                              \
      for (Index s = 0; s < sub; ++s) acc += op(r, s) * buf[s];                      \
      v[base + offs[size_t(r)]] = acc;                                               \
    }                                                                                \
  }

void apply_on_bits(const MatrixXd& op, const std::vector<int>& bits, double* v, Index dim) {
  FRB_KERNEL_BODY(_Pragma("omp parallel for schedule(static)"))
}

void apply_on_bits_serial(const MatrixXd& op, const std::vector<int>& bits, double* v,
                          Index dim) {
  FRB_KERNEL_BODY()
}

#undef FRB_KERNEL_BODY

#define FRB_PROJECT_BODY(PAR)                                                          \
  const int nb = bit_count(dim);                                                       \
  const int k = int(bits.size());                                                      \
  if (k > kMaxLocalBits) throw capacity_error("project_on_bits: too many local bits"); \
  const Index sub = Index(1) << k;                                                     \
  const Index rank = basis.cols();                                                     \
  if (basis.rows() != sub || ginv.rows() != rank || ginv.cols() != rank ||             \
      rank > kMaxRank)                                                                 \
    throw std::invalid_argument("project_on_bits: basis/gram shape mismatch");         \
  const std::vector<int> fr = free_bits(bits, nb);                                     \
  const Index nfree = Index(1) << fr.size();                                           \
  std::vector<Index> offs(static_cast<size_t>(sub));                                   \
  for (Index r = 0; r < sub; ++r) offs[size_t(r)] = deposit(r, bits);                  \
  PAR                                                                                  \
  for (Index c = 0; c < nfree; ++c) {                                                  \
    const Index base = deposit(c, fr);                                                 \
    double buf[1 << kMaxLocalBits], dot[kMaxRank], coef[kMaxRank];                     \
    for (Index r = 0; r < sub; ++r) buf[r] = v[base + offs[size_t(r)]];                \
    for (Index j = 0; j < rank; ++j) {                                                 \
      double acc = 0.0;                                                                \
      for (Index s = 0; s < sub; ++s) acc += basis(s, j) * buf[s];                     \
      dot[j] = acc;                                                                    \
    }                                                                                  \
    for (Index j = 0; j < rank; ++j) {                                                 \
      double acc = 0.0;                                                                \
      for (Index l = 0; l < rank; ++l) acc += ginv(j, l) * dot[l];                     \
      coef[j] = acc;                                                                   \
    }                                                                                  \
    for (Index r = 0; r < sub; ++r) {                                                  \
      double acc = 0.0;                                                                \
      for (Index j = 0; j < rank; ++j) acc += basis(r, j) * coef[j];                   \
      v[base + offs[size_t(r)]] = acc;                                                 \
    }                                                                                  \
  }

void project_on_bits(const MatrixXd& basis, const MatrixXd& ginv, const std::vector<int>& bits,
                     double* v, Index dim) {
  FRB_PROJECT_BODY(_Pragma("omp parallel for schedule(static)"))
}

void project_on_bits_serial(const MatrixXd& basis, const MatrixXd& ginv,
                            const std::vector<int>& bits, double* v, Index dim) {
  FRB_PROJECT_BODY()
}

#undef FRB_PROJECT_BODY

}  // namespace frb
