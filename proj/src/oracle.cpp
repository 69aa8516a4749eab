#include "tnsketch/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tnsketch/errors.hpp"

namespace tnsketch {

namespace {

// Modes tied together by contractions share one summation variable.
struct ModeClasses {
  std::vector<int> class_of;       // per global mode (1-based; [0] unused), -1 = free
  std::vector<std::int64_t> size;  // per class
  std::vector<Mode> free_modes;
};

ModeClasses build_classes(const TensorNetwork& net) {
  const int q = net.total_modes();
  std::vector<int> parent(q + 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [u, v] : net.contractions) parent[find(u)] = find(v);

  ModeClasses mc;
  mc.class_of.assign(q + 1, -1);
  auto deg = net.mode_degree();
  std::map<int, int> root_to_class;
  for (Mode g = 1; g <= q; ++g) {
    if (deg[g] == 0) {
      mc.free_modes.push_back(g);
      continue;
    }
    int r = find(g);
    auto [it, inserted] = root_to_class.try_emplace(r, static_cast<int>(mc.size.size()));
    if (inserted) mc.size.push_back(net.mode_size(g));
    mc.class_of[g] = it->second;
  }
  return mc;
}

bool integral_network(const TensorNetwork& net) {
  for (const auto& t : net.tensors) {
    if (!all_entries_integral(t)) return false;
    for (const auto& [i, v] : t.entries()) {
      if (std::abs(v) > 1e9) return false;
    }
  }
  return true;
}

// odometer over 1-based indices
bool advance(MultiIndex& idx, const Shape& sizes) {
  for (std::size_t k = idx.size(); k-- > 0;) {
    if (idx[k] < sizes[k]) {
      ++idx[k];
      std::fill(idx.begin() + k + 1, idx.end(), 1);
      return true;
    }
  }
  return false;
}

}  // namespace

SparseTensor contract_exact(const TensorNetwork& net, OracleBudget budget) {
  validate_or_throw(net);
  auto mc = build_classes(net);

  Shape free_sizes;
  for (Mode g : mc.free_modes) free_sizes.push_back(net.mode_size(g));
  std::int64_t summands = shape_cells(free_sizes);
  for (auto s : mc.size) {
    summands *= s;
    if (summands > budget.max_summands) break;
  }
  if (summands > budget.max_summands) {
    throw BudgetError("exact contraction would evaluate " + std::to_string(summands) +
                      " summands, over the budget of " + std::to_string(budget.max_summands));
  }

  // per tensor: each local mode is either a free slot or a class id
  struct Slot {
    bool free;
    int index;  // free slot or class id
  };
  std::vector<std::vector<Slot>> slots(net.tensors.size());
  {
    std::map<Mode, int> free_slot;
    for (std::size_t j = 0; j < mc.free_modes.size(); ++j) free_slot[mc.free_modes[j]] = static_cast<int>(j);
    Mode g = 1;
    for (std::size_t k = 0; k < net.tensors.size(); ++k) {
      for (int l = 0; l < net.tensors[k].order(); ++l, ++g) {
        if (mc.class_of[g] >= 0) {
          slots[k].push_back({false, mc.class_of[g]});
        } else {
          slots[k].push_back({true, free_slot[g]});
        }
      }
    }
  }

  const bool exact_ints = integral_network(net);
  SparseTensor out(free_sizes);
  MultiIndex free_idx(free_sizes.size(), 1);
  Shape class_sizes = mc.size;
  do {
    double acc_d = 0.0;
    long long acc_i = 0;
    MultiIndex class_idx(class_sizes.size(), 1);
    do {
      double prod = 1.0;
      for (std::size_t k = 0; k < net.tensors.size() && prod != 0.0; ++k) {
        MultiIndex key(slots[k].size());
        for (std::size_t l = 0; l < slots[k].size(); ++l) {
          const Slot& s = slots[k][l];
          key[l] = s.free ? free_idx[s.index] : class_idx[s.index];
        }
        prod *= net.tensors[k].at(key);
      }
      if (exact_ints) {
        acc_i += static_cast<long long>(prod);
      } else {
        acc_d += prod;
      }
    } while (advance(class_idx, class_sizes));
    double value = exact_ints ? static_cast<double>(acc_i) : acc_d;
    if (value != 0.0) out.set(free_idx, value);
  } while (advance(free_idx, free_sizes));
  return out;
}

namespace {

struct LabeledTensor {
  SparseTensor tensor;
  std::vector<Mode> labels;  // original global mode per local mode
};

int local_of(const LabeledTensor& t, Mode label) {
  for (std::size_t l = 0; l < t.labels.size(); ++l) {
    if (t.labels[l] == label) return static_cast<int>(l);
  }
  return -1;
}

// exact trace over two modes of one tensor
LabeledTensor trace_pair(const LabeledTensor& t, int la, int lb) {
  if (la > lb) std::swap(la, lb);
  Shape shape;
  std::vector<Mode> labels;
  for (int l = 0; l < t.tensor.order(); ++l) {
    if (l == la || l == lb) continue;
    shape.push_back(t.tensor.shape()[l]);
    labels.push_back(t.labels[l]);
  }
  LabeledTensor out{SparseTensor(shape), labels};
  for (const auto& [key, v] : t.tensor.entries()) {
    if (key[la] != key[lb]) continue;
    MultiIndex reduced;
    for (int l = 0; l < t.tensor.order(); ++l) {
      if (l != la && l != lb) reduced.push_back(key[l]);
    }
    out.tensor.add(reduced, v);
  }
  return out;
}

LabeledTensor contract_pair(const LabeledTensor& a, int la, const LabeledTensor& b, int lb) {
  Shape shape;
  std::vector<Mode> labels;
  for (int l = 0; l < a.tensor.order(); ++l) {
    if (l == la) continue;
    shape.push_back(a.tensor.shape()[l]);
    labels.push_back(a.labels[l]);
  }
  for (int l = 0; l < b.tensor.order(); ++l) {
    if (l == lb) continue;
    shape.push_back(b.tensor.shape()[l]);
    labels.push_back(b.labels[l]);
  }
  LabeledTensor out{SparseTensor(shape), labels};
  std::map<std::int64_t, std::vector<const std::pair<const MultiIndex, double>*>> by_value;
  for (const auto& entry : b.tensor.entries()) by_value[entry.first[lb]].push_back(&entry);
  for (const auto& [akey, av] : a.tensor.entries()) {
    auto it = by_value.find(akey[la]);
    if (it == by_value.end()) continue;
    MultiIndex key(shape.size());
    std::size_t pos = 0;
    for (int l = 0; l < a.tensor.order(); ++l) {
      if (l != la) key[pos++] = akey[l];
    }
    for (const auto* bentry : it->second) {
      std::size_t p = pos;
      for (int l = 0; l < b.tensor.order(); ++l) {
        if (l != lb) key[p++] = bentry->first[l];
      }
      out.tensor.add(key, av * bentry->second);
    }
  }
  return out;
}

LabeledTensor outer_product(const LabeledTensor& a, const LabeledTensor& b) {
  Shape shape = a.tensor.shape();
  shape.insert(shape.end(), b.tensor.shape().begin(), b.tensor.shape().end());
  std::vector<Mode> labels = a.labels;
  labels.insert(labels.end(), b.labels.begin(), b.labels.end());
  LabeledTensor out{SparseTensor(shape), labels};
  for (const auto& [ak, av] : a.tensor.entries()) {
    for (const auto& [bk, bv] : b.tensor.entries()) {
      MultiIndex key = ak;
      key.insert(key.end(), bk.begin(), bk.end());
      out.tensor.set(key, av * bv);
    }
  }
  return out;
}

}  // namespace

SparseTensor contract_exact_pairwise(const TensorNetwork& net, const std::vector<int>& order) {
  validate_or_throw(net);
  const auto t_count = net.contractions.size();
  if (order.size() != t_count) throw ValidationError("elimination order length mismatch");
  std::vector<bool> used(t_count, false);
  for (int e : order) {
    if (e < 0 || static_cast<std::size_t>(e) >= t_count || used[e]) {
      throw ValidationError("elimination order must be a permutation of the contraction indices");
    }
    used[e] = true;
  }

  std::vector<LabeledTensor> work;
  Mode g = 1;
  for (const auto& t : net.tensors) {
    std::vector<Mode> labels(t.order());
    for (auto& lab : labels) lab = g++;
    work.push_back({t, std::move(labels)});
  }

  for (int e : order) {
    auto [u, v] = net.contractions[e];
    int ti = -1, tj = -1, la = -1, lb = -1;
    for (std::size_t k = 0; k < work.size(); ++k) {
      int l = local_of(work[k], u);
      if (l >= 0) {
        ti = static_cast<int>(k);
        la = l;
      }
      l = local_of(work[k], v);
      if (l >= 0) {
        tj = static_cast<int>(k);
        lb = l;
      }
    }
    if (ti < 0 || tj < 0) throw ValidationError("contraction references a consumed mode");
    if (ti == tj) {
      work[ti] = trace_pair(work[ti], la, lb);
    } else {
      if (ti > tj) {
        std::swap(ti, tj);
        std::swap(la, lb);
      }
      LabeledTensor merged = contract_pair(work[ti], la, work[tj], lb);
      work.erase(work.begin() + tj);
      work[ti] = std::move(merged);
    }
  }

  LabeledTensor result{SparseTensor::scalar(1.0), {}};
  for (const auto& t : work) result = outer_product(result, t);
  // order the remaining free modes by their original global numbers
  std::vector<int> idx(result.labels.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](int a, int b) { return result.labels[a] < result.labels[b]; });
  std::vector<Mode> perm;
  for (int i : idx) perm.push_back(i + 1);
  return permute_modes(result.tensor, perm);
}

std::int64_t join_size_nested_loop(
    const std::vector<std::vector<std::vector<std::string>>>& relations,
    const std::vector<JoinPredicate>& predicates) {
  for (const auto& p : predicates) {
    if (p.r1 < 0 || p.r1 >= static_cast<int>(relations.size()) || p.r2 < 0 ||
        p.r2 >= static_cast<int>(relations.size())) {
      throw ValidationError("join predicate references a missing relation");
    }
  }
  std::int64_t count = 0;
  std::vector<std::size_t> pick(relations.size(), 0);
  for (const auto& r : relations) {
    if (r.empty()) return 0;
  }
  for (;;) {
    bool match = true;
    for (const auto& p : predicates) {
      if (relations[p.r1][pick[p.r1]].at(p.a1) != relations[p.r2][pick[p.r2]].at(p.a2)) {
        match = false;
        break;
      }
    }
    if (match) ++count;
    std::size_t k = relations.size();
    while (k-- > 0) {
      if (++pick[k] < relations[k].size()) break;
      pick[k] = 0;
      if (k == 0) return count;
    }
  }
}

double triangle_count_exact(const DenseMatrix& adjacency) {
  if (adjacency.rows != adjacency.cols) throw ValidationError("adjacency matrix must be square");
  const auto n = adjacency.rows;
  double trace = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      if (adjacency.at(i, j) == 0.0) continue;
      for (std::int64_t k = 0; k < n; ++k) {
        trace += adjacency.at(i, j) * adjacency.at(j, k) * adjacency.at(k, i);
      }
    }
  }
  return trace;
}

}  // namespace tnsketch
