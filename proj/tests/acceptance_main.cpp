// Acceptance suite: every release criterion with its pinned tolerance.
// Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <map>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "tnsketch/apps.hpp"
#include "tnsketch/dense.hpp"
#include "tnsketch/errors.hpp"
#include "tnsketch/estimators.hpp"
#include "tnsketch/fft.hpp"
#include "tnsketch/network.hpp"
#include "tnsketch/oracle.hpp"
#include "tnsketch/sketch.hpp"

using namespace tnsketch;
using namespace tnsketch::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += why;
    }
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Complement transform identity.

Outcome complement_identity() {
  Outcome out;
  std::mt19937_64 rng(0xACC1);
  double worst = 0.0;
  int cases = 0;
  for (std::int64_t m : {2, 4, 8, 16, 64}) {
    for (int round = 0; round < 80; ++round) {
      auto spec = CountSketchSpec::make(m, 12, derive_seed(101, "case", m * 1000 + round));
      auto x = random_int_tensor(Shape{12}, rng, -3, 3, 0.8);
      auto fc = dft(std::span<const double>(cs_apply(spec, x)));
      auto fcc = dft(std::span<const double>(cs_apply(cs_complement(spec), x)));
      for (std::int64_t i = 0; i < m; ++i) {
        worst = std::max(worst, std::abs(fcc[i] - std::conj(fc[i])));
      }
      ++cases;
    }
  }
  out.require(cases == 400, "expected 400 cases");
  out.require(worst <= 1e-9, "max deviation " + fmt(worst));
  out.detail = "400 cases, max |dft(C'x) - conj(dft(Cx))| = " + fmt(worst);
  return out;
}

// ---------------------------------------------------------------------------
// 2. Hash forms against dense oracles on exhaustive grids.

Outcome hash_dense_agreement() {
  Outcome out;
  double worst_fft = 0.0;
  // count sketch: exact
  for (std::int64_t m : {1, 2, 3, 4}) {
    for (std::int64_t n = 1; n <= 4; ++n) {
      for (int seed = 0; seed < 4; ++seed) {
        auto spec = CountSketchSpec::make(m, n, derive_seed(202, "cs", m * 100 + n * 10 + seed));
        auto dense = cs_dense(spec);
        auto comp = cs_dense(cs_complement(spec));
        for (std::int64_t i = 1; i <= n; ++i) {
          out.require(dense.at(spec.effective_row(i) - 1, i - 1) == spec.sign_at(i),
                      "count sketch dense/hash mismatch");
          auto cspec = cs_complement(spec);
          out.require(comp.at(cspec.effective_row(i) - 1, i - 1) == cspec.sign_at(i),
                      "complement dense/hash mismatch");
        }
      }
    }
  }
  // tensor sketch orders 1..4 (FFT path)
  for (std::int64_t m : {1, 2, 4}) {
    for (std::int64_t n = 2; n <= 4; ++n) {
      for (int q = 1; q <= 4; ++q) {
        if (std::pow(static_cast<double>(n), q) > 300) continue;
        auto spec = TensorSketchSpec::make(m, Shape(q, n), derive_seed(203, "ts", m * 100 + n * 10 + q));
        auto dense = ts_dense(spec);
        Shape domain(q, n);
        for (std::int64_t col = 1; col <= shape_cells(domain); ++col) {
          auto i = multi_index(col, domain);
          auto [sign, bucket] = ts_hash(spec, i);
          for (std::int64_t r = 0; r < m; ++r) {
            double want = r == bucket - 1 ? sign : 0.0;
            worst_fft = std::max(worst_fft, std::abs(dense.at(r, col - 1) - want));
          }
        }
      }
    }
  }
  // recursive sketch logical orders 1..4
  for (std::int64_t m : {2, 4}) {
    for (std::int64_t n = 2; n <= 4; ++n) {
      for (int c = 1; c <= 4; ++c) {
        if (std::pow(static_cast<double>(n), c) > 300) continue;
        auto spec = RecursiveSketchSpec::make(m, Shape(c, n), derive_seed(204, "rs", m * 100 + n * 10 + c));
        auto dense = rs_dense(spec);
        Shape domain(c, n);
        for (std::int64_t col = 1; col <= shape_cells(domain); ++col) {
          auto i = multi_index(col, domain);
          auto [sign, bucket] = rs_hash(spec, i);
          for (std::int64_t r = 0; r < m; ++r) {
            double want = r == bucket - 1 ? sign : 0.0;
            worst_fft = std::max(worst_fft, std::abs(dense.at(r, col - 1) - want));
          }
        }
      }
    }
  }
  out.require(worst_fft <= 1e-9, "FFT-path deviation " + fmt(worst_fft));
  out.detail = "count sketch exact; FFT paths within " + fmt(worst_fft);
  return out;
}

// ---------------------------------------------------------------------------
// 3. Combined sketching and matrix-vector product.

Outcome sketched_matvec_agreement() {
  Outcome out;
  std::mt19937_64 rng(0xACC3);
  double worst = 0.0;
  int cases = 0;
  while (cases < 200) {
    std::int64_t m = (cases % 2 == 0) ? 2 : 4;
    std::int64_t n = 2 + (cases % 3);
    int q = 1 + (cases % 3);
    Shape shape(q, n);
    auto x = random_int_tensor(shape, rng, -3, 3, 0.7);
    auto c = CountSketchSpec::make(m, n, derive_seed(301, "c", cases));
    auto r = RecursiveSketchSpec::make(m, Shape(q - 1, n), derive_seed(301, "r", cases));
    std::vector<double> z = random_real_vector(q == 1 ? 1 : m, rng);

    auto got = sketched_matvec(c, x, r, z);

    auto cd = cs_dense(c);
    auto rd = rs_dense(r);
    auto xd = mode1_flatten_dense(x);
    std::vector<double> rtz(rd.cols, 0.0);
    for (std::int64_t col = 0; col < rd.cols; ++col) {
      for (std::int64_t row = 0; row < rd.rows; ++row) rtz[col] += rd.at(row, col) * z[row];
    }
    std::vector<double> mx(xd.rows, 0.0);
    for (std::int64_t row = 0; row < xd.rows; ++row) {
      for (std::int64_t col = 0; col < xd.cols; ++col) mx[row] += xd.at(row, col) * rtz[col];
    }
    std::vector<double> want(cd.rows, 0.0);
    for (std::int64_t row = 0; row < cd.rows; ++row) {
      for (std::int64_t col = 0; col < cd.cols; ++col) want[row] += cd.at(row, col) * mx[col];
    }
    worst = std::max(worst, max_abs_diff(got, want));
    ++cases;
  }
  out.require(worst <= 1e-9, "deviation " + fmt(worst));
  out.detail = "200 instances, max deviation " + fmt(worst);
  return out;
}

// ---------------------------------------------------------------------------
// 4. Normalization preserves exact values.

Outcome normalization_value_preservation() {
  Outcome out;
  std::mt19937_64 rng(0xACC4);
  int checked = 0;
  // targeted shapes first: a trace, a parallel pair, a three-way shared mode
  std::vector<TensorNetwork> nets;
  {
    TensorNetwork trace;
    trace.tensors.push_back(random_int_tensor(Shape{3, 3}, rng, -2, 2, 1.0));
    trace.contractions = {{1, 2}};
    nets.push_back(trace);

    TensorNetwork parallel;
    parallel.tensors.push_back(random_int_tensor(Shape{2, 3}, rng, -2, 2, 1.0));
    parallel.tensors.push_back(random_int_tensor(Shape{2, 3}, rng, -2, 2, 1.0));
    parallel.contractions = {{1, 3}, {2, 4}};
    nets.push_back(parallel);

    TensorNetwork shared;
    shared.tensors.push_back(random_int_tensor(Shape{3}, rng, -2, 2, 1.0));
    shared.tensors.push_back(random_int_tensor(Shape{3}, rng, -2, 2, 1.0));
    shared.tensors.push_back(random_int_tensor(Shape{3}, rng, -2, 2, 1.0));
    shared.tensors.push_back(random_int_tensor(Shape{3}, rng, -2, 2, 1.0));
    shared.contractions = {{1, 2}, {2, 3}, {2, 4}};  // mode 2 in three contractions
    nets.push_back(shared);
  }
  while (nets.size() < 100) nets.push_back(random_full_network(rng));
  for (const auto& net : nets) {
    auto before = contract_exact(net).at({});
    auto norm = normalize_wlog(net);
    auto after = contract_exact(norm.net).at({});
    out.require(before == after,
                "value changed: " + fmt(before) + " -> " + fmt(after));
    ++checked;
  }
  out.detail = std::to_string(checked) + " networks, exact equality";
  return out;
}

// ---------------------------------------------------------------------------
// 5 + 6. General estimator moments on the cyclic triangle.

struct MomentStats {
  double oracle = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double bound = 0.0;
  std::int64_t trials = 0;
};

MomentStats g_triangle_stats;

Outcome general_unbiased_cyclic() {
  Outcome out;
  auto net = cyclic_triangle_fixture(4, 0xF16);
  const std::int64_t m = 64;
  const std::int64_t kSeeds = 20000;
  auto rec = variance_experiment(net, Method::General, m, kSeeds, 0xACC5);
  g_triangle_stats = {rec.oracle, rec.mean, rec.variance, rec.bound, kSeeds};
  double tol = 4.0 * std::sqrt(rec.bound / static_cast<double>(kSeeds));
  out.require(std::abs(rec.mean - rec.oracle) <= tol,
              "mean " + fmt(rec.mean) + " vs oracle " + fmt(rec.oracle) + " tol " + fmt(tol));
  out.detail = "mean " + fmt(rec.mean) + ", oracle " + fmt(rec.oracle) + ", tol " + fmt(tol);
  return out;
}

Outcome general_variance_cyclic() {
  Outcome out;
  const auto& s = g_triangle_stats;
  out.require(s.trials > 0, "depends on criterion 5's run");
  out.require(s.variance <= 1.2 * s.bound,
              "variance " + fmt(s.variance) + " above 1.2 * " + fmt(s.bound));
  out.detail = "variance " + fmt(s.variance) + " <= 1.2 * bound " + fmt(s.bound);
  return out;
}

// ---------------------------------------------------------------------------
// 7. Acyclic estimator moments on the seven-tensor tree.

Outcome acyclic_moments_tree() {
  Outcome out;
  auto net = seven_tensor_tree_fixture(3, 0x7EE);
  const std::int64_t m = 32;
  const std::int64_t kSeeds = 20000;
  auto rec = variance_experiment(net, Method::Acyclic, m, kSeeds, 0xACC7);
  double tol = 4.0 * std::sqrt(rec.bound / static_cast<double>(kSeeds));
  out.require(rec.t == 6, "tree fixture should have 6 contractions");
  out.require(std::abs(rec.mean - rec.oracle) <= tol,
              "mean " + fmt(rec.mean) + " vs oracle " + fmt(rec.oracle) + " tol " + fmt(tol));
  out.require(rec.variance <= 1.2 * rec.bound,
              "variance " + fmt(rec.variance) + " above 1.2 * " + fmt(rec.bound));
  out.detail = "mean " + fmt(rec.mean) + " (oracle " + fmt(rec.oracle) + "), variance " +
               fmt(rec.variance) + " <= 1.2 * " + fmt(rec.bound);
  return out;
}

// ---------------------------------------------------------------------------
// 8. Exponential floor of the cross-correlation chain.

Outcome baseline_lower_bound() {
  Outcome out;
  auto chain = all_ones_chain_fixture(4, 2);
  const std::int64_t m = 4;
  const std::int64_t kSeeds = 150000;
  auto baseline = variance_experiment_baseline(chain, m, kSeeds, 0xACC8);
  out.require(std::abs(baseline.bound - 392.0) <= 1e-9, "lower bound should be 392");
  out.require(baseline.variance >= 0.8 * baseline.bound,
              "variance " + fmt(baseline.variance) + " under 0.8 * " + fmt(baseline.bound));
  auto net = chain_to_network(chain);
  auto acyclic = variance_experiment(net, Method::Acyclic, m, kSeeds, 0xACC9);
  out.require(acyclic.variance <= 1.2 * acyclic.bound,
              "tree-estimator variance " + fmt(acyclic.variance) + " above 1.2 * " +
                  fmt(acyclic.bound));
  out.detail = "baseline variance " + fmt(baseline.variance) + " >= " + fmt(0.8 * baseline.bound) +
               "; tree estimator " + fmt(acyclic.variance) + " <= " + fmt(1.2 * acyclic.bound);
  return out;
}

// ---------------------------------------------------------------------------
// 9. End-to-end accuracy contract via the median trick.

Outcome accuracy_contract() {
  Outcome out;
  const double eps = 0.2, delta = 0.05;
  auto net = cyclic_triangle_fixture(4, 0xF16);  // same fixture as 5/6
  EstimatorConfig config;
  config.epsilon = eps;
  config.delta = delta;
  auto params = resolve_params(config, Method::General, 3);
  out.require(params.m == 4096 && params.reps == 24,
              "derived (m, reps) = (" + std::to_string(params.m) + ", " +
                  std::to_string(params.reps) + "), expected (4096, 24)");
  const double oracle = contract_exact(net).at({});
  double norm_prod = 1.0;
  for (const auto& t : net.tensors) norm_prod *= frobenius_norm(t);
  const double threshold = eps * norm_prod;
  const int kRuns = 500;
  int failures = 0;
  auto once = [&net, &params](std::uint64_t s) {
    return estimate_general_once(net, params.m, s);
  };
  for (int run = 0; run < kRuns; ++run) {
    double y = median_boost(once, params.reps, derive_seed(0xACCA, "run", run));
    if (std::abs(y - oracle) > threshold) ++failures;
  }
  double fraction = static_cast<double>(failures) / kRuns;
  out.require(fraction <= 0.07, "failure fraction " + fmt(fraction));
  out.detail = std::to_string(failures) + "/" + std::to_string(kRuns) +
               " failures (allowed 0.07), threshold " + fmt(threshold);
  return out;
}

// ---------------------------------------------------------------------------
// 10. Applications: join size and triangle counting.

Outcome applications() {
  Outcome out;
  // (a) star join: both oracles agree exactly, estimator mean within 4 SE
  std::vector<Relation> rels;
  rels.push_back({"R1", {"a"}, {{"1"}, {"2"}, {"2"}}});
  rels.push_back({"R2", {"a", "b"}, {{"1", "x"}, {"2", "y"}, {"2", "x"}, {"3", "x"}}});
  rels.push_back({"R3", {"a"}, {{"1"}, {"2"}, {"3"}, {"3"}}});
  rels.push_back({"R4", {"b"}, {{"x"}, {"x"}, {"y"}}});
  std::vector<std::pair<std::string, std::string>> joins{
      {"R1.a", "R2.a"}, {"R3.a", "R2.a"}, {"R4.b", "R2.b"}};
  auto jn = relations_to_network(rels, joins);
  std::vector<std::vector<std::vector<std::string>>> tuples;
  for (const auto& r : rels) tuples.push_back(r.tuples);
  auto nested = static_cast<double>(join_size_nested_loop(tuples, jn.predicates));
  auto exact = contract_exact(jn.net).at({});
  out.require(nested == exact, "join oracles disagree: " + fmt(nested) + " vs " + fmt(exact));

  auto norm = normalize_wlog(jn.net).net;
  const std::int64_t m_join = 64;
  const std::int64_t kSeeds = 20000;
  auto join_rec = variance_experiment(norm, Method::General, m_join, kSeeds, 0xACCB);
  double tol = 4.0 * std::sqrt(join_rec.bound / static_cast<double>(kSeeds));
  out.require(std::abs(join_rec.mean - nested) <= tol,
              "join mean " + fmt(join_rec.mean) + " vs " + fmt(nested) + " tol " + fmt(tol));

  // (b) complete digraph on four nodes
  EdgeList k4{4, {}};
  for (std::int64_t u = 1; u <= 4; ++u) {
    for (std::int64_t v = 1; v <= 4; ++v) {
      if (u != v) k4.edges.push_back({u, v});
    }
  }
  out.require(triangle_count_exact(adjacency_dense(k4)) == 24.0, "trace oracle is not 24");
  auto tri = triangles_to_network(k4);
  out.require(contract_exact(tri).at({}) == 24.0, "network oracle is not 24");
  auto tri_rec = variance_experiment(tri, Method::General, 64, kSeeds, 0xACCC);
  double tri_tol = 4.0 * std::sqrt(tri_rec.bound / static_cast<double>(kSeeds));
  out.require(std::abs(tri_rec.mean - 24.0) <= tri_tol,
              "triangle mean " + fmt(tri_rec.mean) + " tol " + fmt(tri_tol));
  out.detail = "join size " + fmt(nested) + " (both oracles), triangle mean " + fmt(tri_rec.mean) +
               " vs 24";
  return out;
}

// ---------------------------------------------------------------------------
// 11. Turnstile streaming equals batch construction bit for bit.

Outcome streaming_equivalence() {
  Outcome out;
  std::mt19937_64 rng(0xACCD);
  int fixtures = 0;
  for (int round = 0; round < 20; ++round) {
    TensorNetwork net;
    if (round % 3 == 0) {
      net = normalize_wlog(cyclic_triangle_fixture(3, 4000 + round)).net;
    } else if (round % 3 == 1) {
      net = normalize_wlog(seven_tensor_tree_fixture(2, 4000 + round)).net;
    } else {
      net = normalize_wlog(random_full_network(rng, 3, 2, 3, false)).net;
    }
    const std::int64_t m = 32;
    const std::uint64_t seed = derive_seed(0xACCE, "fixture", round);
    GeneralSketchState batch(net, m, seed);
    batch.load(net);
    GeneralSketchState stream(net, m, seed);
    for (std::size_t k = 0; k < net.tensors.size(); ++k) {
      for (const auto& [i, v] : net.tensors[k].entries()) {
        stream.update(static_cast<int>(k), i, v);
      }
    }
    bool same = batch.estimate() == stream.estimate();
    for (std::size_t k = 0; k < net.tensors.size(); ++k) {
      if (net.tensors[k].order() > 0) {
        same = same && batch.bucket_vector(static_cast<int>(k)) ==
                           stream.bucket_vector(static_cast<int>(k));
      }
    }
    out.require(same, "fixture " + std::to_string(round) + " diverged");
    ++fixtures;
  }
  out.detail = std::to_string(fixtures) + " fixtures bit-identical";
  return out;
}

// ---------------------------------------------------------------------------
// 12. Partial contractions: exact path and per-entry estimator means.

Outcome partial_contraction() {
  Outcome out;
  auto net = two_free_mode_fixture(2, 0xACCF);
  auto oracle = contract_exact(net);

  EstimatorConfig exact_cfg;
  exact_cfg.method = Method::Exact;
  auto exact_tensor = estimate_partial(net, exact_cfg);
  out.require(exact_tensor == oracle, "exact partial path deviates from the oracle tensor");

  const std::int64_t m = 64;
  const int kSeeds = 20000;
  auto norm = normalize_wlog(net).net;
  auto free = norm.free_modes();
  out.require(free.size() == 2, "fixture should keep two free modes");
  std::map<MultiIndex, Welford> stats;
  for (int s = 0; s < kSeeds; ++s) {
    EstimatorConfig cfg;
    cfg.m = m;
    cfg.reps = 1;
    cfg.method = Method::General;
    cfg.seed = derive_seed(0xACD0, "seed", static_cast<std::uint64_t>(s));
    auto est = estimate_partial(norm, cfg);
    for (std::int64_t a = 1; a <= 2; ++a) {
      for (std::int64_t b = 1; b <= 2; ++b) stats[{a, b}].add(est.at({a, b}));
    }
  }
  const double bound = general_variance_bound_factor(3, m) * norm_product_squared(norm);
  const double tol = 4.0 * std::sqrt(bound / static_cast<double>(kSeeds));
  for (auto& [entry, welford] : stats) {
    out.require(std::abs(welford.mean - oracle.at(entry)) <= tol,
                "entry (" + std::to_string(entry[0]) + "," + std::to_string(entry[1]) +
                    ") mean " + fmt(welford.mean) + " vs " + fmt(oracle.at(entry)) + " tol " +
                    fmt(tol));
  }
  out.detail = "exact tensor equality; 4 entry means within 4 standard errors";
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> criteria{
      {1, "complement-transform-identity", complement_identity},
      {2, "hash-vs-dense-agreement", hash_dense_agreement},
      {3, "sketched-matvec-agreement", sketched_matvec_agreement},
      {4, "normalization-value-preservation", normalization_value_preservation},
      {5, "general-estimator-unbiased-cyclic", general_unbiased_cyclic},
      {6, "general-estimator-variance-bound", general_variance_cyclic},
      {7, "acyclic-estimator-moments-tree", acyclic_moments_tree},
      {8, "baseline-chain-exponential-floor", baseline_lower_bound},
      {9, "epsilon-delta-contract", accuracy_contract},
      {10, "applications-join-and-triangles", applications},
      {11, "streaming-batch-equivalence", streaming_equivalence},
      {12, "partial-contraction", partial_contraction},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %02d %s (%.2fs): %s\n", outcome.pass ? "PASS" : "FAIL", criterion.id,
                criterion.name.c_str(), sec, outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
