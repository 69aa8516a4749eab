#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tnsketch/network.hpp"
#include "tnsketch/sketch.hpp"
#include "tnsketch/tensor.hpp"

namespace tnsketch {

enum class Method { Exact, General, Acyclic, Auto };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

constexpr std::uint64_t kDefaultSeed = 42;

struct EstimatorConfig {
  std::optional<std::int64_t> m;  // rounded up to a power of two
  std::optional<int> reps;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::uint64_t seed = kDefaultSeed;
  Method method = Method::Auto;
  std::int64_t budget = 10'000'000;  // exact-path and free-mode enumeration guard
  int parallel = 1;
};

/// Sketch size and repetition count for a method on a network with t
/// contractions. Explicit settings win; (epsilon, delta) targets use
/// constant-probability Chebyshev sizing plus median repetitions.
struct ResolvedParams {
  std::int64_t m = 1;
  int reps = 1;
};
ResolvedParams resolve_params(const EstimatorConfig& config, Method effective, int t);

struct EstimateReport {
  double value = 0.0;
  bool is_partial = false;
  SparseTensor tensor;  // set when is_partial
  std::int64_t m = 0;
  int reps = 0;
  Method method = Method::Auto;
  std::uint64_t seed = 0;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::vector<double> per_rep;  // single-component full estimates only
  double elapsed_sec = 0.0;
  std::vector<std::string> notes;

  std::string to_json(int indent = -1) const;
};

/// Streaming sketch state for the general estimator. One bucket vector per
/// tensor; any component of any tensor may be changed by any signed amount in
/// O(order) time. The batch estimator is this state fed with every stored
/// entry, so streamed and batch builds agree bit for bit. Single writer;
/// estimate() only reads.
class GeneralSketchState {
 public:
  /// The schema fixes shapes and contractions; entry values are ignored.
  /// Requires a normalized full network (every mode in exactly one
  /// contraction; order-0 tensors are tracked exactly).
  GeneralSketchState(const TensorNetwork& schema, std::int64_t m, std::uint64_t seed);

  void update(int tensor, const MultiIndex& i, double delta);
  /// Feed every stored entry of every tensor.
  void load(const TensorNetwork& net);
  double estimate() const;

  std::int64_t sketch_size() const { return m_; }
  const std::vector<double>& bucket_vector(int tensor) const;

 private:
  std::int64_t m_ = 1;
  std::vector<Shape> shapes_;
  std::vector<std::vector<CountSketchSpec>> mode_specs_;  // per tensor, per local mode
  std::vector<std::vector<double>> buckets_;              // empty for order-0 tensors
  std::vector<double> scalars_;                           // order-0 accumulators
  std::vector<bool> is_scalar_;
};

/// Single-shot estimate of a normalized full contraction, cyclic or not. Each
/// contraction gets one fresh count sketch (first mode) and its complement
/// (second mode); per-tensor sketches combine in the frequency domain.
double estimate_general_once(const TensorNetwork& net, std::int64_t m, std::uint64_t seed);

/// Single-shot estimate of a connected acyclic normalized full contraction,
/// evaluated leaves-to-root over the given tree.
double estimate_acyclic_once(const TensorNetwork& net, const RootedTree& tree, std::int64_t m,
                             std::uint64_t seed);

/// y = C mat(X) R^T z accumulated per nonzero of X in O(order * nnz) time and
/// O(m) space. R's logical order must be X's order minus one; for an order-1
/// X, z is a single scalar slot.
std::vector<double> sketched_matvec(const CountSketchSpec& c, const SparseTensor& x,
                                    const RecursiveSketchSpec& r_spec, std::span<const double> z);

/// Median of `reps` independent single-shot estimates with derived seeds.
/// Even counts take the lower median. `parallel` > 1 runs repetitions
/// concurrently; results are ordered by repetition index either way.
double median_boost(const std::function<double(std::uint64_t)>& once, int reps,
                    std::uint64_t master_seed, int parallel = 1);

/// Full-contraction estimate honoring the configured method, with
/// normalization, per-component dispatch, and median boosting.
EstimateReport estimate_full(const TensorNetwork& net, const EstimatorConfig& config);

/// Contraction with free modes: every free-mode assignment is sliced to a
/// full network and estimated independently.
SparseTensor estimate_partial(const TensorNetwork& net, const EstimatorConfig& config);

/// Full or partial, decided by the presence of free modes after
/// normalization.
EstimateReport estimate(const TensorNetwork& net, const EstimatorConfig& config);

/// Prior-generation chain estimator combining sketches with circular
/// cross-correlation; kept as the comparison target for the variance
/// experiments. Input: vector, zero or more matrices, vector, contracted in
/// sequence.
double baseline_chain_once(const std::vector<SparseTensor>& chain, std::int64_t m,
                           std::uint64_t seed);

/// The chain as a network: each tensor's last mode contracts with the next
/// tensor's first mode.
TensorNetwork chain_to_network(const std::vector<SparseTensor>& chain);

struct VarianceRecord {
  std::string fixture;
  std::string method;
  std::int64_t m = 0;
  std::int64_t trials = 0;
  int t = 0;  // contraction count
  double oracle = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double mean_std_error = 0.0;
  double bound = 0.0;         // variance bound scaled by the product of squared norms
  double bound_factor = 0.0;  // variance bound alone
  double ratio = 0.0;         // variance / bound
  bool bound_is_lower = false;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

/// Monte-Carlo mean/variance of a method on a normalized full network,
/// against the applicable variance bound.
VarianceRecord variance_experiment(const TensorNetwork& net, Method method, std::int64_t m,
                                   std::int64_t trials, std::uint64_t seed, int parallel = 1);

/// Same harness for the baseline chain, against its variance lower bound.
VarianceRecord variance_experiment_baseline(const std::vector<SparseTensor>& chain, std::int64_t m,
                                            std::int64_t trials, std::uint64_t seed,
                                            int parallel = 1);

/// Product over tensors of the squared Frobenius norms (the scale in every
/// variance bound).
double norm_product_squared(const TensorNetwork& net);

double general_variance_bound_factor(int t, std::int64_t m);
double acyclic_variance_bound_factor(int t, std::int64_t m);
double baseline_variance_lower_factor(int q, std::int64_t m);

// Built-in experiment fixtures.

/// vector - (q-1 all-ones matrices) - vector over [n], q contractions.
std::vector<SparseTensor> all_ones_chain_fixture(int q, std::int64_t n);

/// Cycle of q unit-norm 2x2 matrices (t = q); q <= 2 degenerates to a dot
/// product of two unit-norm 4-vectors (t = 1). Unit norms make the variance
/// bound equal its formula factor.
TensorNetwork unit_norm_cycle_fixture(int q);

/// vector - (matrices) - vector with unit-norm factors; t = matrices + 1.
TensorNetwork unit_norm_chain_fixture(int matrices);

}  // namespace tnsketch
