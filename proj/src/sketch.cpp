#include "tnsketch/sketch.hpp"

#include <algorithm>

#include "tnsketch/errors.hpp"
#include "tnsketch/fft.hpp"

namespace tnsketch {

namespace {

constexpr std::int64_t kDenseColumnGuard = 4096;

void dft_columns(ComplexMatrix& mat, bool inverse) {
  std::vector<Complex> col(mat.rows);
  for (std::int64_t c = 0; c < mat.cols; ++c) {
    for (std::int64_t r = 0; r < mat.rows; ++r) col[r] = mat.at(r, c);
    if (inverse) {
      idft_inplace(col);
    } else {
      dft_inplace(col);
    }
    for (std::int64_t r = 0; r < mat.rows; ++r) mat.at(r, c) = col[r];
  }
}

ComplexMatrix to_complex(const DenseMatrix& mat) {
  ComplexMatrix out(mat.rows, mat.cols);
  for (std::size_t i = 0; i < mat.a.size(); ++i) out.a[i] = mat.a[i];
  return out;
}

}  // namespace

CountSketchSpec CountSketchSpec::make(std::int64_t m, std::int64_t n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw ValidationError("count sketch sizes must be positive");
  return CountSketchSpec{m, n, SignHash(derive_seed(seed, "sign", 0), n),
                         KWiseHash(2, derive_seed(seed, "row", 0), n, m), false};
}

CountSketchSpec CountSketchSpec::fixture(std::vector<std::int64_t> rows, std::vector<int> signs,
                                         std::int64_t m) {
  if (rows.size() != signs.size()) throw ValidationError("fixture table lengths differ");
  auto n = static_cast<std::int64_t>(rows.size());
  return CountSketchSpec{m, n, SignHash::from_table(std::move(signs)),
                         KWiseHash::from_table(std::move(rows), m), false};
}

std::int64_t CountSketchSpec::effective_row(std::int64_t i) const {
  std::int64_t h = row(i);
  if (!complemented) return h;
  std::int64_t r = ((2 - h) % m + m) % m;
  return r == 0 ? m : r;
}

int CountSketchSpec::sign_at(std::int64_t i) const { return sign(i); }

CountSketchSpec cs_complement(const CountSketchSpec& spec) {
  CountSketchSpec out = spec;
  out.complemented = !spec.complemented;
  return out;
}

std::vector<double> cs_apply(const CountSketchSpec& spec, const SparseTensor& x) {
  if (x.order() != 1) throw ValidationError("cs_apply expects an order-1 tensor");
  if (x.shape()[0] > spec.n) throw ValidationError("vector longer than the sketch domain");
  std::vector<double> y(spec.m, 0.0);
  for (const auto& [i, v] : x.entries()) {
    y[spec.effective_row(i[0]) - 1] += spec.sign_at(i[0]) * v;
  }
  return y;
}

std::vector<double> cs_apply(const CountSketchSpec& spec, std::span<const double> x) {
  if (static_cast<std::int64_t>(x.size()) > spec.n) {
    throw ValidationError("vector longer than the sketch domain");
  }
  std::vector<double> y(spec.m, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) continue;
    auto idx = static_cast<std::int64_t>(i) + 1;
    y[spec.effective_row(idx) - 1] += spec.sign_at(idx) * x[i];
  }
  return y;
}

TensorSketchSpec TensorSketchSpec::make(std::int64_t m, const Shape& domains, std::uint64_t seed) {
  TensorSketchSpec spec;
  spec.parts.reserve(domains.size());
  for (std::size_t k = 0; k < domains.size(); ++k) {
    spec.parts.push_back(CountSketchSpec::make(m, domains[k], derive_seed(seed, "part", k)));
  }
  return spec;
}

std::pair<int, std::int64_t> ts_hash(const TensorSketchSpec& spec, const MultiIndex& i) {
  const auto q = spec.parts.size();
  if (i.size() != q) throw ValidationError("ts_hash index length mismatch");
  if (q == 0) return {1, 1};
  const std::int64_t m = spec.m();
  int sign = 1;
  std::int64_t sum = 0;
  for (std::size_t k = 0; k < q; ++k) {
    sign *= spec.parts[k].sign_at(i[k]);
    sum += spec.parts[k].effective_row(i[k]);
  }
  return {sign, (sum - static_cast<std::int64_t>(q)) % m + 1};
}

std::vector<double> ts_apply_tensor(const TensorSketchSpec& spec, const SparseTensor& x) {
  if (x.order() != spec.order()) throw ValidationError("tensor order does not match the sketch");
  std::vector<double> y(spec.m(), 0.0);
  for (const auto& [i, v] : x.entries()) {
    auto [sign, bucket] = ts_hash(spec, i);
    y[bucket - 1] += sign * v;
  }
  return y;
}

std::vector<double> ts_combine_pair(const TensorSketchSpec& spec, std::span<const double> x,
                                    std::span<const double> y) {
  if (spec.order() != 2) throw ValidationError("pair combination needs a two-part sketch");
  const auto m = static_cast<std::size_t>(spec.m());
  if (x.size() != m || y.size() != m) throw ValidationError("pair inputs must have length m");
  auto fx = dft(cs_apply(spec.parts[0], x));
  auto fy = dft(cs_apply(spec.parts[1], y));
  for (std::size_t i = 0; i < fx.size(); ++i) fx[i] *= fy[i];
  idft_inplace(fx);
  return real_part(fx);
}

RecursiveSketchSpec RecursiveSketchSpec::make(std::int64_t m, const Shape& leaf_domains,
                                              std::uint64_t seed) {
  RecursiveSketchSpec spec;
  spec.m = m;
  spec.logical_order = static_cast<int>(leaf_domains.size());
  if (spec.logical_order == 0) return spec;  // 1x1 identity
  spec.padded_order = static_cast<int>(std::max<std::int64_t>(2, next_pow2(spec.logical_order)));
  for (int j = 0; j < spec.padded_order; ++j) {
    std::int64_t domain = j < spec.logical_order ? leaf_domains[j] : 1;
    spec.leaves.push_back(CountSketchSpec::make(m, domain, derive_seed(seed, "leaf", j)));
  }
  for (int l = spec.padded_order; l >= 2; l /= 2) {
    std::vector<TensorSketchSpec> level;
    for (int k = 0; k < l / 2; ++k) {
      level.push_back(TensorSketchSpec::make(
          m, Shape{m, m}, derive_seed(seed, "node", static_cast<std::uint64_t>(l) * 65536 + k)));
    }
    spec.levels.push_back(std::move(level));
  }
  return spec;
}

std::pair<int, std::int64_t> rs_hash(const RecursiveSketchSpec& spec, const MultiIndex& i) {
  if (static_cast<int>(i.size()) != spec.logical_order) {
    throw ValidationError("rs_hash index length mismatch");
  }
  if (spec.logical_order == 0) return {1, 1};
  int sign = 1;
  std::vector<std::int64_t> rows(spec.padded_order);
  for (int j = 0; j < spec.padded_order; ++j) {
    std::int64_t idx = j < spec.logical_order ? i[j] : 1;
    sign *= spec.leaves[j].sign_at(idx);
    rows[j] = spec.leaves[j].effective_row(idx);
  }
  for (const auto& level : spec.levels) {
    for (std::size_t k = 0; k < level.size(); ++k) {
      auto [s, b] = ts_hash(level[k], {rows[2 * k], rows[2 * k + 1]});
      sign *= s;
      rows[k] = b;
    }
  }
  return {sign, rows[0]};
}

std::vector<double> rs_apply_tensor(const RecursiveSketchSpec& spec, const SparseTensor& x) {
  if (x.order() != spec.logical_order) {
    throw ValidationError("tensor order does not match the sketch");
  }
  if (spec.logical_order == 0) return {x.at({})};
  std::vector<double> y(spec.m, 0.0);
  for (const auto& [i, v] : x.entries()) {
    auto [sign, bucket] = rs_hash(spec, i);
    y[bucket - 1] += sign * v;
  }
  return y;
}

std::vector<double> rs_apply_children(const RecursiveSketchSpec& spec,
                                      const std::vector<std::vector<double>>& xs) {
  if (static_cast<int>(xs.size()) != spec.logical_order) {
    throw ValidationError("child count does not match the sketch order");
  }
  if (spec.logical_order == 0) return {1.0};
  std::vector<std::vector<double>> vecs(spec.padded_order);
  for (int j = 0; j < spec.padded_order; ++j) {
    if (j < spec.logical_order) {
      if (static_cast<std::int64_t>(xs[j].size()) != spec.m) {
        throw ValidationError("child vectors must have length m");
      }
      vecs[j] = xs[j];
    } else {
      // unused slots are pinned to index 1: they hold the leaf sketch of e_1
      std::vector<double> pad(spec.m, 0.0);
      pad[spec.leaves[j].effective_row(1) - 1] = spec.leaves[j].sign_at(1);
      vecs[j] = std::move(pad);
    }
  }
  for (const auto& level : spec.levels) {
    for (std::size_t k = 0; k < level.size(); ++k) {
      vecs[k] = ts_combine_pair(level[k], vecs[2 * k], vecs[2 * k + 1]);
    }
  }
  return vecs[0];
}

DenseMatrix cs_dense(const CountSketchSpec& spec) {
  if (spec.n > kDenseColumnGuard) throw ValidationError("dense count sketch too large");
  DenseMatrix mat(spec.m, spec.n);
  for (std::int64_t i = 1; i <= spec.n; ++i) {
    mat.at(spec.effective_row(i) - 1, i - 1) = spec.sign_at(i);
  }
  return mat;
}

DenseMatrix ts_dense(const TensorSketchSpec& spec) {
  if (spec.parts.empty()) return DenseMatrix::identity(1);
  std::int64_t cols = 1;
  for (const auto& part : spec.parts) cols *= part.n;
  if (cols > kDenseColumnGuard) throw ValidationError("dense tensor sketch too large");
  ComplexMatrix acc = to_complex(cs_dense(spec.parts[0]));
  dft_columns(acc, false);
  for (std::size_t k = 1; k < spec.parts.size(); ++k) {
    ComplexMatrix next = to_complex(cs_dense(spec.parts[k]));
    dft_columns(next, false);
    acc = row_kron(acc, next);
  }
  dft_columns(acc, true);
  DenseMatrix out(acc.rows, acc.cols);
  for (std::size_t i = 0; i < acc.a.size(); ++i) out.a[i] = acc.a[i].real();
  return out;
}

DenseMatrix rs_dense(const RecursiveSketchSpec& spec) {
  if (spec.logical_order == 0) return DenseMatrix::identity(1);
  std::int64_t cols = 1;
  for (const auto& leaf : spec.leaves) cols *= leaf.n;
  std::int64_t inner_rows = 1;
  for (int j = 0; j < spec.padded_order; ++j) inner_rows *= spec.m;
  if (cols > kDenseColumnGuard || inner_rows > 65536) {
    throw ValidationError("dense recursive sketch too large");
  }
  // S = C_1 (x) ... (x) C_q; padded leaves have a single column so the
  // product is already restricted to the embedded index range.
  DenseMatrix acc = cs_dense(spec.leaves[0]);
  for (int j = 1; j < spec.padded_order; ++j) acc = kron(acc, cs_dense(spec.leaves[j]));
  for (const auto& level : spec.levels) {
    DenseMatrix q = ts_dense(level[0]);
    for (std::size_t k = 1; k < level.size(); ++k) q = kron(q, ts_dense(level[k]));
    acc = matmul(q, acc);
  }
  return acc;
}

}  // namespace tnsketch
