// Timing harness for the scatter-apply kernels: OpenMP version against the
// serial reference, with an agreement check on identical inputs.  Not a
// registered test; build target frb_bench.

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "frb/kernels.hpp"

using frb::Index;
using frb::MatrixXd;
using frb::VectorXd;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch())
      .count();
}

VectorXd random_vector(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  VectorXd v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = g(rng);
  return v;
}

MatrixXd random_matrix(Index r, Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

std::vector<int> spread_bits(int k, int nb) {
  std::vector<int> bits;
  for (int i = 0; i < k; ++i) bits.push_back(i * nb / k);
  return bits;
}

void bench_apply(int nb, int k, int reps, std::mt19937_64& rng) {
  const Index dim = Index(1) << nb;
  const Index sub = Index(1) << k;
  MatrixXd op = random_matrix(sub, sub, rng) / double(sub);
  std::vector<int> bits = spread_bits(k, nb);
  VectorXd v0 = random_vector(dim, rng);

  VectorXd vp = v0, vs = v0;
  frb::apply_on_bits(op, bits, vp.data(), dim);
  frb::apply_on_bits_serial(op, bits, vs.data(), dim);
  double diff = (vp - vs).cwiseAbs().maxCoeff();

  VectorXd w = v0;
  double t0 = now_ms();
  for (int r = 0; r < reps; ++r) frb::apply_on_bits_serial(op, bits, w.data(), dim);
  double serial = (now_ms() - t0) / reps;

  w = v0;
  t0 = now_ms();
  for (int r = 0; r < reps; ++r) frb::apply_on_bits(op, bits, w.data(), dim);
  double parallel = (now_ms() - t0) / reps;

  std::printf("apply    dim=2^%-2d k=%-2d  serial %8.3f ms  omp %8.3f ms  x%.2f  max|d|=%.2e\n",
              nb, k, serial, parallel, serial / parallel, diff);
}

void bench_project(int nb, int k, int rank, int reps, std::mt19937_64& rng) {
  const Index dim = Index(1) << nb;
  const Index sub = Index(1) << k;
  MatrixXd basis = random_matrix(sub, rank, rng);
  MatrixXd ginv = (basis.transpose() * basis).inverse();
  std::vector<int> bits = spread_bits(k, nb);
  VectorXd v0 = random_vector(dim, rng);

  VectorXd vp = v0, vs = v0;
  frb::project_on_bits(basis, ginv, bits, vp.data(), dim);
  frb::project_on_bits_serial(basis, ginv, bits, vs.data(), dim);
  double diff = (vp - vs).cwiseAbs().maxCoeff();

  VectorXd w = v0;
  double t0 = now_ms();
  for (int r = 0; r < reps; ++r)
    frb::project_on_bits_serial(basis, ginv, bits, w.data(), dim);
  double serial = (now_ms() - t0) / reps;

  w = v0;
  t0 = now_ms();
  for (int r = 0; r < reps; ++r) frb::project_on_bits(basis, ginv, bits, w.data(), dim);
  double parallel = (now_ms() - t0) / reps;

  std::printf("project  dim=2^%-2d k=%-2d r=%-2d serial %8.3f ms  omp %8.3f ms  x%.2f  max|d|=%.2e\n",
              nb, k, rank, serial, parallel, serial / parallel, diff);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (no OpenMP)\n");
#endif
  std::mt19937_64 rng(11);
  bench_apply(18, 2, 20, rng);
  bench_apply(20, 4, 10, rng);
  bench_apply(20, 8, 5, rng);
  bench_project(18, 4, 2, 20, rng);
  bench_project(20, 4, 2, 10, rng);
  bench_project(20, 8, 6, 5, rng);
  return 0;
}
