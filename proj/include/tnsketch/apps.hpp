#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tnsketch/dense.hpp"
#include "tnsketch/network.hpp"
#include "tnsketch/oracle.hpp"

namespace tnsketch {

/// A named relation: attribute names plus tuples of attribute values.
struct Relation {
  std::string name;
  std::vector<std::string> attrs;
  std::vector<std::vector<std::string>> tuples;
};

/// CSV with a header row naming the attributes.
Relation read_csv(const std::string& path, const std::string& name);

/// Join spec file (JSON): {"relations": [{"name", "file", "attrs": [...]}],
/// "joins": [["R1.a", "R2.b"], ...]}. Files are resolved relative to the spec.
struct JoinSpec {
  struct Rel {
    std::string name;
    std::string file;
    std::vector<std::string> attrs;
  };
  std::vector<Rel> relations;
  std::vector<std::pair<std::string, std::string>> joins;
};
JoinSpec read_join_spec(const std::string& path);
std::vector<Relation> load_relations(const JoinSpec& spec, const std::string& base_dir);

/// Frequency-tensor network for a COUNT(*) equi-join query. One tensor per
/// relation over the attributes that participate in joins (others are summed
/// out); joined attributes share one dictionary built from the union of their
/// values.
struct JoinNetwork {
  TensorNetwork net;
  /// Per attribute class, the value -> 1-based index encoding.
  std::vector<std::map<std::string, std::int64_t>> dictionaries;
  /// Per relation, per join attribute: (attr index in the relation, class id).
  std::vector<std::vector<std::pair<int, int>>> tensor_modes;
  /// Predicates re-expressed over relation/attr indices for the oracle.
  std::vector<JoinPredicate> predicates;
};
JoinNetwork relations_to_network(const std::vector<Relation>& relations,
                                 const std::vector<std::pair<std::string, std::string>>& joins);

/// Directed graph as an edge list. Text format: first line "n", then one
/// "u v" line per edge (1-based).
struct EdgeList {
  std::int64_t n = 0;
  std::vector<std::pair<std::int64_t, std::int64_t>> edges;
};
EdgeList read_edge_list(const std::string& path);
DenseMatrix adjacency_dense(const EdgeList& graph);

/// Triangle-count network: three copies of the adjacency tensor wired in a
/// cycle, so the full contraction equals tr(A^3).
TensorNetwork triangles_to_network(const EdgeList& graph);

}  // namespace tnsketch
