#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tnsketch/dense.hpp"
#include "tnsketch/hashing.hpp"
#include "tnsketch/tensor.hpp"

namespace tnsketch {

// Each sketch is described by an immutable spec holding its seeds. Two
// evaluation forms derive from the same spec: a per-nonzero hash form (the
// production path) and an explicit dense matrix (the small-size test oracle).
// Keeping both on one spec is what guarantees the estimator's hashed and
// combined evaluations apply the same random matrix.

/// Count sketch matrix: one +-1 per column. A complemented spec addresses the
/// circularly reversed row, the unique j in [m] with j = 2 - h(i) (mod m);
/// its DFT is the conjugate of the original's on real input.
struct CountSketchSpec {
  std::int64_t m = 1;
  std::int64_t n = 1;
  SignHash sign;
  KWiseHash row;
  bool complemented = false;

  static CountSketchSpec make(std::int64_t m, std::int64_t n, std::uint64_t seed);
  /// Test fixture with explicit row/sign tables.
  static CountSketchSpec fixture(std::vector<std::int64_t> rows, std::vector<int> signs,
                                 std::int64_t m);

  std::int64_t effective_row(std::int64_t i) const;
  int sign_at(std::int64_t i) const;
};

/// Same seeds, complemented flag toggled; an involution.
CountSketchSpec cs_complement(const CountSketchSpec& spec);

/// Bucket accumulation y[row(i)] += s(i) x_i over nonzeros of an order-1 tensor.
std::vector<double> cs_apply(const CountSketchSpec& spec, const SparseTensor& x);
std::vector<double> cs_apply(const CountSketchSpec& spec, std::span<const double> x);

/// Tensor sketch over q component count sketches with one shared m. Column
/// (i_1..i_q) carries sign prod_k s_k(i_k) in row ((sum_k h_k(i_k) - q) mod m) + 1.
struct TensorSketchSpec {
  std::vector<CountSketchSpec> parts;

  static TensorSketchSpec make(std::int64_t m, const Shape& domains, std::uint64_t seed);
  std::int64_t m() const { return parts.empty() ? 1 : parts.front().m; }
  int order() const { return static_cast<int>(parts.size()); }
};

std::pair<int, std::int64_t> ts_hash(const TensorSketchSpec& spec, const MultiIndex& i);
std::vector<double> ts_apply_tensor(const TensorSketchSpec& spec, const SparseTensor& x);

/// T(x (x) y) for a two-part spec over [m]^2, in O(m log m) via the FFT:
/// idft(dft(C_1 x) o dft(C_2 y)). Never materialises the outer product.
std::vector<double> ts_combine_pair(const TensorSketchSpec& spec, std::span<const double> x,
                                    std::span<const double> y);

/// Recursive sketch: count-sketched leaves reduced pairwise by tensor sketch
/// nodes along a binary tree. A logical order c is padded to the power-of-two
/// order (2 when c = 1); padded slots are pinned to index 1 and still consume
/// their seed slots. Logical order 0 is the 1x1 identity.
struct RecursiveSketchSpec {
  std::int64_t m = 1;
  int logical_order = 0;
  int padded_order = 0;
  std::vector<CountSketchSpec> leaves;               // padded_order entries
  std::vector<std::vector<TensorSketchSpec>> levels;  // widest level first, down to pairs

  /// One leaf domain per logical slot.
  static RecursiveSketchSpec make(std::int64_t m, const Shape& leaf_domains, std::uint64_t seed);
};

/// Sign and bucket of column i (length = logical order; trailing modes are
/// implicitly 1).
std::pair<int, std::int64_t> rs_hash(const RecursiveSketchSpec& spec, const MultiIndex& i);

/// R vec(X) accumulated per nonzero; X order must equal the logical order.
std::vector<double> rs_apply_tensor(const RecursiveSketchSpec& spec, const SparseTensor& x);

/// Applies the internal reduction of the sketch to child vectors that were
/// already passed through the matching leaf count sketches: pads to the
/// power-of-two order with leaf sketches of e_1, then combines pairwise level
/// by level. For unit-basis children C_l e_{i_l} the result is the single
/// nonzero rs_hash reports.
std::vector<double> rs_apply_children(const RecursiveSketchSpec& spec,
                                      const std::vector<std::vector<double>>& xs);

// Dense oracle forms; guarded to small sizes (<= 4096 columns).
DenseMatrix cs_dense(const CountSketchSpec& spec);
DenseMatrix ts_dense(const TensorSketchSpec& spec);
DenseMatrix rs_dense(const RecursiveSketchSpec& spec);

}  // namespace tnsketch
