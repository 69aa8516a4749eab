#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tnsketch/tensor.hpp"

namespace tnsketch {

/// A tensor list plus contractions over globally numbered modes. Modes are
/// numbered 1..q consecutively across tensors in list order. Every
/// contraction pairs two distinct equal-size modes; the first element of each
/// pair is the one estimators treat as the freshly drawn side.
struct TensorNetwork {
  std::vector<SparseTensor> tensors;
  std::vector<std::pair<Mode, Mode>> contractions;

  int total_modes() const;
  /// (tensor index 0-based, local mode 1-based) owning a global mode.
  std::pair<int, Mode> mode_owner(Mode global) const;
  Mode global_mode(int tensor, Mode local) const;
  std::int64_t mode_size(Mode global) const;
  /// Modes appearing in no contraction, ascending.
  std::vector<Mode> free_modes() const;
  /// Contraction count per global mode (1-based index 0 unused).
  std::vector<int> mode_degree() const;
};

struct Diagnostics {
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

Diagnostics validate(const TensorNetwork& net);
void validate_or_throw(const TensorNetwork& net);

/// Rewrites a valid network into the standard form every estimator assumes:
/// same-tensor contractions are contracted away exactly, parallel
/// contractions between a tensor pair are fused into one reshaped mode, a
/// mode shared by several contractions is expanded into diagonal copies
/// within its tensor, and finally all modes are zero-padded to one size.
/// Value preserving, never increases any nnz or Frobenius norm, idempotent.
struct NormalizeResult {
  TensorNetwork net;
  std::vector<std::string> log;
};
NormalizeResult normalize_wlog(const TensorNetwork& net);

/// True iff the multigraph (tensors as nodes, contractions as edges) has no
/// cycle; parallel edges and same-tensor edges count as cycles.
bool is_acyclic(const TensorNetwork& net);

/// Tensor indices along some cycle, empty when acyclic.
std::vector<int> find_cycle_tensors(const TensorNetwork& net);

/// Partition by contraction connectivity. The full contraction value of the
/// original equals the product over components.
std::vector<TensorNetwork> connected_components(const TensorNetwork& net);

/// Contraction plan for a connected acyclic full network: tensors are
/// permuted so every non-root tensor's first mode contracts with its parent,
/// and children are listed in the order of the remaining modes.
struct RootedTree {
  TensorNetwork net;  // permuted copy
  int root = 0;
  std::vector<int> parent;                 // -1 at the root
  std::vector<std::vector<int>> children;  // ordered per mode order
  std::vector<std::vector<Mode>> applied_perm;
};

/// Tensor of maximum order, ties broken by lowest index.
int default_root(const TensorNetwork& net);

RootedTree build_rooted_tree(const TensorNetwork& net, int root);

// JSON file format:
// {"tensors": [{"shape": [...], "entries": [[[i...], v], ...]}, ...],
//  "contractions": [[u, v], ...]}
TensorNetwork parse_network_json(const std::string& text);
std::string network_to_json(const TensorNetwork& net, int indent = -1);
TensorNetwork read_network_file(const std::string& path);
void write_network_file(const std::string& path, const TensorNetwork& net);

}  // namespace tnsketch
