#include "tnsketch/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "tnsketch/errors.hpp"

namespace tnsketch {

std::int64_t shape_cells(const Shape& shape) {
  std::int64_t cells = 1;
  for (auto n : shape) cells *= n;
  return cells;
}

bool index_in_shape(const MultiIndex& i, const Shape& shape) {
  if (i.size() != shape.size()) return false;
  for (std::size_t k = 0; k < i.size(); ++k) {
    if (i[k] < 1 || i[k] > shape[k]) return false;
  }
  return true;
}

namespace {

void require_valid_index(const MultiIndex& i, const Shape& shape) {
  if (!index_in_shape(i, shape)) {
    std::ostringstream msg;
    msg << "index (";
    for (std::size_t k = 0; k < i.size(); ++k) msg << (k ? "," : "") << i[k];
    msg << ") invalid for shape (";
    for (std::size_t k = 0; k < shape.size(); ++k) msg << (k ? "," : "") << shape[k];
    msg << ")";
    throw ValidationError(msg.str());
  }
}

void require_valid_shape(const Shape& shape) {
  for (auto n : shape) {
    if (n < 1) throw ValidationError("mode sizes must be positive");
  }
}

}  // namespace

std::int64_t linear_index(const MultiIndex& i, const Shape& shape) {
  require_valid_index(i, shape);
  std::int64_t pos = 0;
  for (std::size_t k = 0; k < shape.size(); ++k) {
    pos = pos * shape[k] + (i[k] - 1);
  }
  return pos + 1;
}

MultiIndex multi_index(std::int64_t pos, const Shape& shape) {
  if (pos < 1 || pos > shape_cells(shape)) {
    throw ValidationError("linear position out of range");
  }
  MultiIndex i(shape.size());
  std::int64_t rem = pos - 1;
  for (std::size_t k = shape.size(); k-- > 0;) {
    i[k] = rem % shape[k] + 1;
    rem /= shape[k];
  }
  return i;
}

std::pair<std::int64_t, std::int64_t> mode_flatten_coords(const MultiIndex& i,
                                                          Mode k,
                                                          const Shape& shape) {
  if (k < 1 || static_cast<std::size_t>(k) > shape.size()) {
    throw ValidationError("flattening mode out of range");
  }
  require_valid_index(i, shape);
  MultiIndex rest;
  Shape rest_shape;
  for (std::size_t j = 0; j < shape.size(); ++j) {
    if (j + 1 == static_cast<std::size_t>(k)) continue;
    rest.push_back(i[j]);
    rest_shape.push_back(shape[j]);
  }
  return {i[k - 1], linear_index(rest, rest_shape)};
}

SparseTensor::SparseTensor(Shape shape) : shape_(std::move(shape)) {
  require_valid_shape(shape_);
}

SparseTensor SparseTensor::scalar(double value) {
  SparseTensor t;
  t.set({}, value);
  return t;
}

double SparseTensor::at(const MultiIndex& i) const {
  require_valid_index(i, shape_);
  auto it = entries_.find(i);
  return it == entries_.end() ? 0.0 : it->second;
}

void SparseTensor::set(const MultiIndex& i, double value) {
  require_valid_index(i, shape_);
  if (value == 0.0) {
    entries_.erase(i);
  } else {
    entries_[i] = value;
  }
}

void SparseTensor::add(const MultiIndex& i, double delta) {
  require_valid_index(i, shape_);
  auto [it, inserted] = entries_.try_emplace(i, delta);
  if (!inserted) it->second += delta;
  if (it->second == 0.0) entries_.erase(it);
}

double frobenius_norm_squared(const SparseTensor& x) {
  double s = 0.0;
  for (const auto& [i, v] : x.entries()) s += v * v;
  return s;
}

double frobenius_norm(const SparseTensor& x) {
  return std::sqrt(frobenius_norm_squared(x));
}

SparseTensor slice(const SparseTensor& x, const std::map<Mode, std::int64_t>& fixed) {
  const Shape& shape = x.shape();
  for (const auto& [k, v] : fixed) {
    if (k < 1 || k > x.order()) throw ValidationError("slice mode out of range");
    if (v < 1 || v > shape[k - 1]) throw ValidationError("slice index out of range");
  }
  Shape rest_shape;
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < shape.size(); ++j) {
    if (!fixed.count(static_cast<Mode>(j + 1))) {
      kept.push_back(j);
      rest_shape.push_back(shape[j]);
    }
  }
  SparseTensor out(rest_shape);
  for (const auto& [i, v] : x.entries()) {
    bool match = true;
    for (const auto& [k, want] : fixed) {
      if (i[k - 1] != want) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    MultiIndex key;
    key.reserve(kept.size());
    for (auto j : kept) key.push_back(i[j]);
    out.set(key, v);
  }
  return out;
}

SparseTensor permute_modes(const SparseTensor& x, const std::vector<Mode>& perm) {
  const int q = x.order();
  if (static_cast<int>(perm.size()) != q) throw ValidationError("permutation length mismatch");
  std::vector<bool> seen(q, false);
  for (Mode p : perm) {
    if (p < 1 || p > q || seen[p - 1]) throw ValidationError("not a permutation");
    seen[p - 1] = true;
  }
  Shape new_shape(q);
  for (int j = 0; j < q; ++j) new_shape[j] = x.shape()[perm[j] - 1];
  SparseTensor out(new_shape);
  for (const auto& [i, v] : x.entries()) {
    MultiIndex key(q);
    for (int j = 0; j < q; ++j) key[j] = i[perm[j] - 1];
    out.set(key, v);
  }
  return out;
}

SparseTensor pad_modes(const SparseTensor& x, const Shape& new_shape) {
  if (new_shape.size() != x.shape().size()) throw ValidationError("pad must keep the order");
  for (std::size_t j = 0; j < new_shape.size(); ++j) {
    if (new_shape[j] < x.shape()[j]) throw ValidationError("pad cannot shrink a mode");
  }
  SparseTensor out(new_shape);
  for (const auto& [i, v] : x.entries()) out.set(i, v);
  return out;
}

bool all_entries_integral(const SparseTensor& x) {
  for (const auto& [i, v] : x.entries()) {
    if (v != std::floor(v)) return false;
  }
  return true;
}

void write_coo(std::ostream& out, const SparseTensor& x) {
  out << "shape";
  for (auto n : x.shape()) out << ' ' << n;
  out << '\n';
  out.precision(17);
  for (const auto& [i, v] : x.entries()) {
    for (auto ik : i) out << ik << ' ';
    out << v << '\n';
  }
}

SparseTensor read_coo(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty COO input");
  std::istringstream head(line);
  std::string tag;
  head >> tag;
  if (tag != "shape") throw IoError("COO input must start with a shape line");
  Shape shape;
  std::int64_t n;
  while (head >> n) shape.push_back(n);
  SparseTensor out(shape);
  const std::size_t q = shape.size();
  while (std::getline(in, line)) {
    std::istringstream row(line);
    MultiIndex i(q);
    bool blank = true;
    for (std::size_t k = 0; k < q; ++k) {
      if (!(row >> i[k])) {
        if (k == 0) {
          blank = true;
          break;
        }
        throw IoError("truncated COO entry line: " + line);
      }
      blank = false;
    }
    double v;
    if (!(row >> v)) {
      if (blank && q > 0) continue;  // skip empty lines
      throw IoError("COO entry line missing a value: " + line);
    }
    out.add(i, v);
  }
  return out;
}

SparseTensor read_coo_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_coo(in);
}

void write_coo_file(const std::string& path, const SparseTensor& x) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_coo(out, x);
}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
  require_valid_shape(shape_);
  values_.assign(shape_cells(shape_), 0.0);
}

DenseTensor DenseTensor::from_sparse(const SparseTensor& x) {
  DenseTensor out(x.shape());
  for (const auto& [i, v] : x.entries()) out.at(i) = v;
  return out;
}

SparseTensor DenseTensor::to_sparse() const {
  SparseTensor out(shape_);
  for (std::int64_t pos = 1; pos <= shape_cells(shape_); ++pos) {
    double v = values_[pos - 1];
    if (v != 0.0) out.set(multi_index(pos, shape_), v);
  }
  return out;
}

double& DenseTensor::at(const MultiIndex& i) {
  return values_[linear_index(i, shape_) - 1];
}

double DenseTensor::at(const MultiIndex& i) const {
  return values_[linear_index(i, shape_) - 1];
}

}  // namespace tnsketch
