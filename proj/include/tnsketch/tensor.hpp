#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace tnsketch {

/// 1-based mode position within a tensor (or a global mode number in a network).
using Mode = int;

/// 1-based index values, one per mode. An order-0 tensor is addressed by the
/// empty multi-index.
using MultiIndex = std::vector<std::int64_t>;

/// Mode sizes n_1..n_q.
using Shape = std::vector<std::int64_t>;

std::int64_t shape_cells(const Shape& shape);
bool index_in_shape(const MultiIndex& i, const Shape& shape);

/// Lexicographic position of i in [1, prod n_k]; i_1 varies slowest.
/// Throws ValidationError for out-of-range indices.
std::int64_t linear_index(const MultiIndex& i, const Shape& shape);

/// Inverse of linear_index.
MultiIndex multi_index(std::int64_t pos, const Shape& shape);

/// (row, col) of entry i inside the mode-k flattening: row = i_k, col = the
/// lexicographic rank of i with mode k removed. Both 1-based.
std::pair<std::int64_t, std::int64_t> mode_flatten_coords(const MultiIndex& i,
                                                          Mode k,
                                                          const Shape& shape);

/// Sparse coordinate-format tensor. Canonical form: no stored zeros, no
/// duplicate multi-indices. Entries are kept in a sorted map so iteration
/// order is deterministic. Treat instances as immutable once built and they
/// are safe to share across threads.
class SparseTensor {
 public:
  SparseTensor() = default;  // order-0 zero
  explicit SparseTensor(Shape shape);
  static SparseTensor scalar(double value);

  const Shape& shape() const { return shape_; }
  int order() const { return static_cast<int>(shape_.size()); }
  std::int64_t nnz() const { return static_cast<std::int64_t>(entries_.size()); }
  const std::map<MultiIndex, double>& entries() const { return entries_; }

  /// Value at i, zero when absent. Throws on an invalid index.
  double at(const MultiIndex& i) const;

  /// Overwrite the entry at i (value 0 erases it).
  void set(const MultiIndex& i, double value);

  /// Accumulate into the entry at i, erasing it when it lands on exact zero.
  void add(const MultiIndex& i, double delta);

  bool operator==(const SparseTensor& other) const = default;

 private:
  Shape shape_;
  std::map<MultiIndex, double> entries_;
};

double frobenius_norm(const SparseTensor& x);
double frobenius_norm_squared(const SparseTensor& x);

/// Keep only entries matching `fixed` (mode -> index value) and drop the fixed
/// modes. Fixing every mode yields an order-0 tensor.
SparseTensor slice(const SparseTensor& x, const std::map<Mode, std::int64_t>& fixed);

/// Re-key entries so new mode j is old mode perm[j-1]. perm must be a
/// permutation of 1..q. perm = (2,1) on a matrix is the transpose.
SparseTensor permute_modes(const SparseTensor& x, const std::vector<Mode>& perm);

/// Enlarge the declared shape, keeping the same entries. Shrinking any mode is
/// an error.
SparseTensor pad_modes(const SparseTensor& x, const Shape& new_shape);

bool all_entries_integral(const SparseTensor& x);

// COO text format: a header line "shape n1 n2 ... nq" followed by one entry
// per line, "i1 i2 ... iq v".
void write_coo(std::ostream& out, const SparseTensor& x);
SparseTensor read_coo(std::istream& in);
SparseTensor read_coo_file(const std::string& path);
void write_coo_file(const std::string& path, const SparseTensor& x);

/// Dense row-major tensor. Oracle/test scale only.
class DenseTensor {
 public:
  DenseTensor() = default;
  explicit DenseTensor(Shape shape);
  static DenseTensor from_sparse(const SparseTensor& x);
  SparseTensor to_sparse() const;

  const Shape& shape() const { return shape_; }
  int order() const { return static_cast<int>(shape_.size()); }
  double& at(const MultiIndex& i);
  double at(const MultiIndex& i) const;
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 private:
  Shape shape_;
  std::vector<double> values_;
};

}  // namespace tnsketch
