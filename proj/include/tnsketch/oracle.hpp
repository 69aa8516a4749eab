#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tnsketch/dense.hpp"
#include "tnsketch/network.hpp"
#include "tnsketch/tensor.hpp"

namespace tnsketch {

struct OracleBudget {
  std::int64_t max_summands = 10'000'000;
};

/// Brute-force contraction by direct summation over the contracted index
/// space. Free modes (ascending global order) index the output tensor; a full
/// network yields an order-0 tensor. Integer-valued networks are accumulated
/// in integer arithmetic so equality assertions stay exact.
SparseTensor contract_exact(const TensorNetwork& net, OracleBudget budget = {});

/// Same value as contract_exact, computed by contracting one pair at a time
/// in the given elimination order (a permutation of the contraction indices).
SparseTensor contract_exact_pairwise(const TensorNetwork& net, const std::vector<int>& order);

/// Tuple-level join predicate: attribute a1 of relation r1 equals attribute
/// a2 of relation r2 (all 0-based).
struct JoinPredicate {
  int r1 = 0, a1 = 0, r2 = 0, a2 = 0;
};

/// Exact join size by nested loops over the tuples, independent of any tensor
/// machinery. Relations are lists of tuples of attribute values.
std::int64_t join_size_nested_loop(
    const std::vector<std::vector<std::vector<std::string>>>& relations,
    const std::vector<JoinPredicate>& predicates);

/// tr(A^3) by direct multiplication.
double triangle_count_exact(const DenseMatrix& adjacency);

}  // namespace tnsketch
