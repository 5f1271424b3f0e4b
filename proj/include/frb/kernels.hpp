#pragma once

#include <vector>

#include "frb/superop.hpp"

namespace frb {

// Scatter-apply kernels: act with a small operator on k chosen bit positions
// of a flat index, for every assignment of the remaining bits.  These are the
// hot loops of both the circuit simulator (gates on PTM vectors) and the
// matrix-free moment operators (edge twirls on t-copy vectors).
//
// `bits` lists the k distinct flat-index bit positions, least significant
// first: local row/column r corresponds to setting bit `bits[i]` to bit i of
// r.  dim must be a power of two and op 2^k x 2^k.

// Caps on the per-block working set (k <= kMaxLocalBits, projector rank <=
// kMaxRank) keep the gather buffers on the stack.
constexpr int kMaxLocalBits = 12;
constexpr int kMaxRank = 16;

// v <- op acting on the selected bits (OpenMP over the free-index range).
void apply_on_bits(const MatrixXd& op, const std::vector<int>& bits, double* v, Index dim);
// Serial reference implementation kept for testing and benchmarking.
void apply_on_bits_serial(const MatrixXd& op, const std::vector<int>& bits, double* v,
                          Index dim);

// v <- orthogonal projection onto span(basis columns) on the selected bits.
// basis is 2^k x r (columns need not be orthonormal), ginv the inverse Gram
// matrix of the columns.
void project_on_bits(const MatrixXd& basis, const MatrixXd& ginv, const std::vector<int>& bits,
                     double* v, Index dim);
void project_on_bits_serial(const MatrixXd& basis, const MatrixXd& ginv,
                            const std::vector<int>& bits, double* v, Index dim);

// Free-index helper shared by the kernels: positions not in `bits`, ascending.
std::vector<int> free_bits(const std::vector<int>& bits, int total_bits);

}  // namespace frb
