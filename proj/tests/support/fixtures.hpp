#pragma once

// Shared fixtures and reference helpers for the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "tnsketch/dense.hpp"
#include "tnsketch/network.hpp"
#include "tnsketch/tensor.hpp"

namespace tnsketch::testing {

inline SparseTensor sparse_vector(const std::vector<double>& values) {
  SparseTensor t(Shape{static_cast<std::int64_t>(values.size())});
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) t.set({static_cast<std::int64_t>(i) + 1}, values[i]);
  }
  return t;
}

inline SparseTensor sparse_matrix(const std::vector<std::vector<double>>& rows) {
  SparseTensor t(Shape{static_cast<std::int64_t>(rows.size()),
                       static_cast<std::int64_t>(rows.front().size())});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (rows[r][c] != 0.0) {
        t.set({static_cast<std::int64_t>(r) + 1, static_cast<std::int64_t>(c) + 1}, rows[r][c]);
      }
    }
  }
  return t;
}

inline SparseTensor all_ones_tensor(const Shape& shape) {
  SparseTensor t(shape);
  MultiIndex i(shape.size(), 1);
  for (;;) {
    t.set(i, 1.0);
    std::size_t k = i.size();
    bool done = true;
    while (k-- > 0) {
      if (i[k] < shape[k]) {
        ++i[k];
        std::fill(i.begin() + k + 1, i.end(), 1);
        done = false;
        break;
      }
      i[k] = 1;
    }
    if (done || shape.empty()) break;
  }
  return t;
}

inline SparseTensor random_int_tensor(const Shape& shape, std::mt19937_64& rng, int lo = -2,
                                      int hi = 2, double density = 0.7) {
  SparseTensor t(shape);
  std::uniform_int_distribution<int> value(lo, hi);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (std::int64_t pos = 1; pos <= shape_cells(shape); ++pos) {
    if (coin(rng) > density) continue;
    int v = value(rng);
    if (v != 0) t.set(multi_index(pos, shape), v);
  }
  return t;
}

inline std::vector<double> random_real_vector(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

/// Three n-by-n integer matrices contracted in a 3-cycle; the value is
/// tr(X Y Z). The smallest genuinely cyclic fixture.
inline TensorNetwork cyclic_triangle_fixture(std::int64_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TensorNetwork net;
  for (int k = 0; k < 3; ++k) {
    net.tensors.push_back(random_int_tensor(Shape{n, n}, rng, -2, 2, 0.9));
  }
  net.contractions = {{2, 3}, {4, 5}, {1, 6}};
  return net;
}

/// Seven tensors forming a depth-three tree: a cubical root with a cube, a
/// vector and a matrix below it, and three leaf vectors at the bottom.
inline TensorNetwork seven_tensor_tree_fixture(std::int64_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TensorNetwork net;
  net.tensors.push_back(random_int_tensor(Shape{n, n, n}, rng));  // modes 1,2,3
  net.tensors.push_back(random_int_tensor(Shape{n, n, n}, rng));  // modes 4,5,6
  net.tensors.push_back(random_int_tensor(Shape{n}, rng));        // mode 7
  net.tensors.push_back(random_int_tensor(Shape{n, n}, rng));     // modes 8,9
  net.tensors.push_back(random_int_tensor(Shape{n}, rng));        // mode 10
  net.tensors.push_back(random_int_tensor(Shape{n}, rng));        // mode 11
  net.tensors.push_back(random_int_tensor(Shape{n}, rng));        // mode 12
  net.contractions = {{1, 4}, {2, 7}, {3, 8}, {5, 10}, {6, 11}, {9, 12}};
  return net;
}

/// Four tensors of orders 1,2,3,2 with two free modes (2 and 8); contracting
/// leaves an order-2 result.
inline TensorNetwork two_free_mode_fixture(std::int64_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TensorNetwork net;
  net.tensors.push_back(random_int_tensor(Shape{n}, rng, -1, 1, 1.0));        // mode 1
  net.tensors.push_back(random_int_tensor(Shape{n, n}, rng, -1, 1, 1.0));     // modes 2,3
  net.tensors.push_back(random_int_tensor(Shape{n, n, n}, rng, -1, 1, 1.0));  // modes 4,5,6
  net.tensors.push_back(random_int_tensor(Shape{n, n}, rng, -1, 1, 1.0));     // modes 7,8
  net.contractions = {{1, 5}, {3, 4}, {6, 7}};
  return net;
}

/// vector - (q-1 matrices) - vector, every entry 1; q contractions.
inline std::vector<SparseTensor> all_ones_chain(int q, std::int64_t n) {
  std::vector<SparseTensor> chain;
  chain.push_back(all_ones_tensor(Shape{n}));
  for (int k = 2; k <= q; ++k) chain.push_back(all_ones_tensor(Shape{n, n}));
  chain.push_back(all_ones_tensor(Shape{n}));
  return chain;
}

/// x - A_1..A_k - z chain with integer entries (t = k + 1 contractions).
inline std::vector<SparseTensor> random_int_chain(int matrices, std::int64_t n,
                                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<SparseTensor> chain;
  chain.push_back(random_int_tensor(Shape{n}, rng, -2, 2, 1.0));
  for (int k = 0; k < matrices; ++k) chain.push_back(random_int_tensor(Shape{n, n}, rng, -2, 2, 1.0));
  chain.push_back(random_int_tensor(Shape{n}, rng, -2, 2, 1.0));
  return chain;
}

/// Random full integer network: every mode is contracted, and with extra
/// pairings some modes land in several contractions, some pairs of tensors
/// get parallel contractions, and some contractions stay inside one tensor.
inline TensorNetwork random_full_network(std::mt19937_64& rng, int max_tensors = 4,
                                         int max_order = 3, std::int64_t max_size = 3,
                                         bool allow_self_pairs = true) {
  std::uniform_int_distribution<int> pick_tensors(allow_self_pairs ? 1 : 2, max_tensors);
  std::uniform_int_distribution<int> pick_order(1, max_order);
  int p = 0, q = 0;
  std::vector<int> orders;
  for (;;) {
    p = pick_tensors(rng);
    orders.assign(p, 0);
    q = 0;
    for (auto& o : orders) {
      o = pick_order(rng);
      q += o;
    }
    if (q % 2 == 1) {
      // make the mode count even so a perfect pairing exists
      orders[0] += 1;
      q += 1;
    }
    if (allow_self_pairs) break;
    // a pairing with distinct owners needs no tensor to hold over half the modes
    if (*std::max_element(orders.begin(), orders.end()) <= q / 2) break;
  }
  std::vector<int> owner(q + 1, 0);
  {
    int g = 1;
    for (int k = 0; k < p; ++k) {
      for (int l = 0; l < orders[k]; ++l) owner[g++] = k;
    }
  }

  std::vector<int> modes(q);
  std::iota(modes.begin(), modes.end(), 1);
  std::shuffle(modes.begin(), modes.end(), rng);
  std::vector<std::pair<Mode, Mode>> contractions;
  if (allow_self_pairs) {
    for (int i = 0; i + 1 < q; i += 2) contractions.push_back({modes[i], modes[i + 1]});
  } else {
    // owner-sorted halves: positions i and i + q/2 always differ in owner
    std::stable_sort(modes.begin(), modes.end(),
                     [&](int a, int b) { return owner[a] < owner[b]; });
    for (int i = 0; i < q / 2; ++i) contractions.push_back({modes[i], modes[i + q / 2]});
  }
  // extra pairings create shared modes and parallel edges (and self pairs
  // when allowed)
  std::uniform_int_distribution<int> extra_count(0, 2);
  std::uniform_int_distribution<int> pick_mode(1, q);
  int extras = extra_count(rng);
  for (int e = 0; e < extras; ++e) {
    int u = pick_mode(rng), v = pick_mode(rng);
    if (u == v) continue;
    if (!allow_self_pairs && owner[u] == owner[v]) continue;
    bool dup = false;
    for (auto [a, b] : contractions) {
      if ((a == u && b == v) || (a == v && b == u)) dup = true;
    }
    if (!dup) contractions.push_back({u, v});
  }

  // contracted modes must agree on size within their connected class
  std::vector<int> parent(q + 1);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [u, v] : contractions) parent[find(u)] = find(v);
  std::uniform_int_distribution<std::int64_t> pick_size(1, max_size);
  std::vector<std::int64_t> size_of(q + 1, 0);
  for (int g = 1; g <= q; ++g) {
    int r = find(g);
    if (size_of[r] == 0) size_of[r] = pick_size(rng);
    size_of[g] = size_of[r];
  }

  TensorNetwork net;
  int g = 1;
  for (int k = 0; k < p; ++k) {
    Shape shape;
    for (int l = 0; l < orders[k]; ++l) shape.push_back(size_of[g++]);
    net.tensors.push_back(random_int_tensor(shape, rng));
  }
  net.contractions = contractions;
  return net;
}

/// Random connected acyclic full network built from a random spanning tree.
inline TensorNetwork random_acyclic_network(std::mt19937_64& rng, int max_tensors = 6,
                                            std::int64_t max_size = 3) {
  std::uniform_int_distribution<int> pick_tensors(2, max_tensors);
  const int p = pick_tensors(rng);
  std::uniform_int_distribution<std::int64_t> pick_size(1, max_size);
  std::uniform_int_distribution<int> pick_parent(0, 1 << 20);
  std::vector<std::pair<int, int>> edges;  // (parent, child) tensor pairs
  std::vector<std::int64_t> edge_size;
  for (int k = 1; k < p; ++k) {
    edges.push_back({pick_parent(rng) % k, k});
    edge_size.push_back(pick_size(rng));
  }
  std::vector<Shape> shapes(p);
  std::vector<std::vector<std::pair<int, int>>> slots(p);  // per tensor: (edge, side)
  for (std::size_t e = 0; e < edges.size(); ++e) {
    slots[edges[e].first].push_back({static_cast<int>(e), 0});
    slots[edges[e].second].push_back({static_cast<int>(e), 1});
  }
  for (int k = 0; k < p; ++k) {
    for (auto [e, side] : slots[k]) shapes[k].push_back(edge_size[e]);
  }
  TensorNetwork net;
  for (int k = 0; k < p; ++k) net.tensors.push_back(random_int_tensor(shapes[k], rng));
  // global modes
  std::vector<int> offset(p + 1, 0);
  for (int k = 0; k < p; ++k) offset[k + 1] = offset[k] + static_cast<int>(shapes[k].size());
  std::vector<std::pair<Mode, Mode>> contractions(edges.size());
  std::vector<int> used(p, 0);
  for (int k = 0; k < p; ++k) {
    for (auto [e, side] : slots[k]) {
      Mode m = offset[k] + ++used[k];
      if (side == 0) {
        contractions[e].first = m;
      } else {
        contractions[e].second = m;
      }
    }
  }
  net.contractions = contractions;
  return net;
}

// Direct-summation references for the transform identities.
inline std::vector<double> circ_conv_direct(const std::vector<double>& x,
                                            const std::vector<double>& y) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  std::vector<double> out(n, 0.0);
  for (std::int64_t j = 1; j <= n; ++j) {
    for (std::int64_t i = 1; i <= n; ++i) {
      out[j - 1] += x[i - 1] * y[((j - i) % n + n) % n];
    }
  }
  return out;
}

inline std::vector<double> circ_xcorr_direct(const std::vector<double>& x,
                                             const std::vector<double>& y) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  std::vector<double> out(n, 0.0);
  for (std::int64_t j = 1; j <= n; ++j) {
    for (std::int64_t i = 1; i <= n; ++i) {
      out[j - 1] += x[i - 1] * y[(j + i - 2) % n];
    }
  }
  return out;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

/// mat(X): rows indexed by mode 1, columns by the remaining modes.
inline DenseMatrix mode1_flatten_dense(const SparseTensor& x) {
  const Shape& shape = x.shape();
  std::int64_t rows = shape.empty() ? 1 : shape[0];
  std::int64_t cols = shape_cells(shape) / rows;
  DenseMatrix mat(rows, cols);
  for (const auto& [i, v] : x.entries()) {
    auto [r, c] = mode_flatten_coords(i, 1, shape);
    mat.at(r - 1, c - 1) = v;
  }
  return mat;
}

inline std::vector<double> dense_vec(const SparseTensor& x) {
  std::vector<double> out(shape_cells(x.shape()), 0.0);
  for (const auto& [i, v] : x.entries()) out[linear_index(i, x.shape()) - 1] = v;
  return out;
}

struct Welford {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double v) {
    ++count;
    double d = v - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (v - mean);
  }
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
};

}  // namespace tnsketch::testing
