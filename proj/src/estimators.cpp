#include "tnsketch/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <thread>

#include <json.hpp>

#include "tnsketch/errors.hpp"
#include "tnsketch/fft.hpp"
#include "tnsketch/hashing.hpp"
#include "tnsketch/oracle.hpp"

namespace tnsketch {

std::string to_string(Method m) {
  switch (m) {
    case Method::Exact: return "exact";
    case Method::General: return "general";
    case Method::Acyclic: return "acyclic";
    case Method::Auto: return "auto";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  if (s == "exact") return Method::Exact;
  if (s == "general") return Method::General;
  if (s == "acyclic") return Method::Acyclic;
  if (s == "auto") return Method::Auto;
  throw ValidationError("unknown method: " + s);
}

ResolvedParams resolve_params(const EstimatorConfig& config, Method effective, int t) {
  if (effective == Method::Auto) throw ValidationError("resolve_params needs a concrete method");
  if (effective == Method::Exact) return {1, 1};
  if (config.epsilon.has_value() != config.delta.has_value()) {
    throw ValidationError("epsilon and delta must be supplied together");
  }
  if (config.epsilon) {
    double eps = *config.epsilon;
    double delta = *config.delta;
    if (eps <= 0.0 || delta <= 0.0 || delta >= 1.0) {
      throw ValidationError("need epsilon > 0 and 0 < delta < 1");
    }
    // Chebyshev at failure probability 1/4 per repetition, then the median.
    const double budget = 0.25 * eps * eps;
    double m0;
    if (effective == Method::Acyclic) {
      m0 = std::max(16.0 * t, 32.0 * t / budget);
    } else {
      m0 = std::pow(3.0, t) / budget;
    }
    m0 = std::max(m0, 1.0);
    if (m0 > static_cast<double>(std::int64_t{1} << 40)) {
      throw ValidationError("derived sketch size is impractically large (t too big for epsilon)");
    }
    auto reps = static_cast<int>(std::ceil(8.0 * std::log(1.0 / delta)));
    return {next_pow2(static_cast<std::int64_t>(std::ceil(m0))), std::max(1, reps)};
  }
  std::int64_t m = config.m.value_or(256);
  int reps = config.reps.value_or(1);
  if (m < 1 || reps < 1) throw ValidationError("need m >= 1 and reps >= 1");
  return {next_pow2(m), reps};
}

GeneralSketchState::GeneralSketchState(const TensorNetwork& schema, std::int64_t m,
                                       std::uint64_t seed)
    : m_(next_pow2(m)) {
  validate_or_throw(schema);
  auto deg = schema.mode_degree();
  for (Mode g = 1; g <= schema.total_modes(); ++g) {
    if (deg[g] != 1) {
      throw ValidationError("general estimator needs a normalized full network; mode " +
                            std::to_string(g) + " is in " + std::to_string(deg[g]) +
                            " contractions");
    }
  }
  const auto p = schema.tensors.size();
  shapes_.reserve(p);
  for (const auto& t : schema.tensors) shapes_.push_back(t.shape());
  mode_specs_.resize(p);
  for (std::size_t k = 0; k < p; ++k) {
    mode_specs_[k].reserve(schema.tensors[k].order());
  }
  // one fresh sketch per contraction; its complement goes to the partner mode
  std::vector<CountSketchSpec> per_mode;
  std::vector<int> assigned(schema.total_modes() + 1, -1);
  for (std::size_t e = 0; e < schema.contractions.size(); ++e) {
    auto [u, v] = schema.contractions[e];
    auto spec = CountSketchSpec::make(m_, schema.mode_size(u), derive_seed(seed, "edge", e));
    assigned[u] = static_cast<int>(per_mode.size());
    per_mode.push_back(spec);
    assigned[v] = static_cast<int>(per_mode.size());
    per_mode.push_back(cs_complement(spec));
  }
  Mode g = 1;
  for (std::size_t k = 0; k < p; ++k) {
    for (int l = 0; l < schema.tensors[k].order(); ++l, ++g) {
      mode_specs_[k].push_back(per_mode[assigned[g]]);
    }
  }
  buckets_.resize(p);
  scalars_.assign(p, 0.0);
  is_scalar_.assign(p, false);
  for (std::size_t k = 0; k < p; ++k) {
    if (schema.tensors[k].order() == 0) {
      is_scalar_[k] = true;
    } else {
      buckets_[k].assign(m_, 0.0);
    }
  }
}

void GeneralSketchState::update(int tensor, const MultiIndex& i, double delta) {
  if (tensor < 0 || tensor >= static_cast<int>(shapes_.size())) {
    throw ValidationError("turnstile update on an unknown tensor");
  }
  if (!index_in_shape(i, shapes_[tensor])) {
    throw ValidationError("turnstile update index does not match the schema");
  }
  if (is_scalar_[tensor]) {
    scalars_[tensor] += delta;
    return;
  }
  const auto& specs = mode_specs_[tensor];
  int sign = 1;
  std::int64_t sum = 0;
  for (std::size_t l = 0; l < specs.size(); ++l) {
    sign *= specs[l].sign_at(i[l]);
    sum += specs[l].effective_row(i[l]);
  }
  std::int64_t bucket = (sum - static_cast<std::int64_t>(specs.size())) % m_;
  buckets_[tensor][bucket] += sign * delta;
}

void GeneralSketchState::load(const TensorNetwork& net) {
  if (net.tensors.size() != shapes_.size()) {
    throw ValidationError("network does not match the sketch schema");
  }
  for (std::size_t k = 0; k < net.tensors.size(); ++k) {
    if (net.tensors[k].shape() != shapes_[k]) {
      throw ValidationError("tensor shape does not match the sketch schema");
    }
    for (const auto& [i, v] : net.tensors[k].entries()) {
      update(static_cast<int>(k), i, v);
    }
  }
}

const std::vector<double>& GeneralSketchState::bucket_vector(int tensor) const {
  return buckets_.at(tensor);
}

double GeneralSketchState::estimate() const {
  std::vector<Complex> z(m_, Complex{1.0, 0.0});
  for (std::size_t k = 0; k < buckets_.size(); ++k) {
    if (is_scalar_[k]) continue;
    auto fx = dft(std::span<const double>(buckets_[k]));
    for (std::int64_t i = 0; i < m_; ++i) z[i] *= fx[i];
  }
  Complex total{0.0, 0.0};
  for (const auto& v : z) total += v;
  total /= static_cast<double>(m_);
  double re = total.real();
  double im = total.imag();
  if (std::abs(im) > 1e-6 * (1.0 + std::abs(re))) {
    throw std::runtime_error("estimate has a non-real residue: " + std::to_string(im));
  }
  double scalar_prod = 1.0;
  for (std::size_t k = 0; k < scalars_.size(); ++k) {
    if (is_scalar_[k]) scalar_prod *= scalars_[k];
  }
  return re * scalar_prod;
}

double estimate_general_once(const TensorNetwork& net, std::int64_t m, std::uint64_t seed) {
  GeneralSketchState state(net, m, seed);
  state.load(net);
  return state.estimate();
}

std::vector<double> sketched_matvec(const CountSketchSpec& c, const SparseTensor& x,
                                    const RecursiveSketchSpec& r_spec, std::span<const double> z) {
  if (x.order() < 1) throw ValidationError("sketched_matvec needs an order >= 1 tensor");
  if (r_spec.logical_order != x.order() - 1) {
    throw ValidationError("recursive sketch order must be the tensor order minus one");
  }
  const std::size_t want = r_spec.logical_order == 0 ? 1 : static_cast<std::size_t>(r_spec.m);
  if (z.size() != want) throw ValidationError("sketched_matvec vector length mismatch");
  std::vector<double> y(c.m, 0.0);
  MultiIndex rest(x.order() - 1);
  for (const auto& [i, v] : x.entries()) {
    std::copy(i.begin() + 1, i.end(), rest.begin());
    auto [sign, bucket] = rs_hash(r_spec, rest);
    y[c.effective_row(i[0]) - 1] += v * z[bucket - 1] * sign * c.sign_at(i[0]);
  }
  return y;
}

double estimate_acyclic_once(const TensorNetwork& net, const RootedTree& tree, std::int64_t m,
                             std::uint64_t seed) {
  m = next_pow2(m);
  if (tree.net.tensors.size() != net.tensors.size()) {
    throw ValidationError("tree does not belong to this network");
  }
  if (!is_acyclic(net)) throw ValidationError("network is cyclic");
  const auto p = tree.net.tensors.size();
  // Per-tensor sketch over its child modes; the root sketches all its modes.
  std::vector<RecursiveSketchSpec> specs;
  specs.reserve(p);
  for (std::size_t k = 0; k < p; ++k) {
    const Shape& shape = tree.net.tensors[k].shape();
    Shape domains;
    std::size_t first = (static_cast<int>(k) == tree.root) ? 0 : 1;
    for (std::size_t l = first; l < shape.size(); ++l) domains.push_back(shape[l]);
    specs.push_back(RecursiveSketchSpec::make(m, domains, derive_seed(seed, "rsk", k)));
  }

  std::function<std::vector<double>(int)> neighbors_sketch = [&](int k) -> std::vector<double> {
    const auto& kids = tree.children[k];
    if (kids.empty()) return {1.0};
    std::vector<std::vector<double>> xs;
    xs.reserve(kids.size());
    for (std::size_t slot = 0; slot < kids.size(); ++slot) {
      int l = kids[slot];
      auto r_l = neighbors_sketch(l);
      xs.push_back(sketched_matvec(specs[k].leaves[slot], tree.net.tensors[l], specs[l], r_l));
    }
    return rs_apply_children(specs[k], xs);
  };

  auto x_o = rs_apply_tensor(specs[tree.root], tree.net.tensors[tree.root]);
  auto r_o = neighbors_sketch(tree.root);
  if (x_o.size() != r_o.size()) throw std::runtime_error("sketch length mismatch at the root");
  double y = 0.0;
  for (std::size_t i = 0; i < x_o.size(); ++i) y += x_o[i] * r_o[i];
  return y;
}

namespace {

std::vector<double> run_reps(const std::function<double(std::uint64_t)>& once, int reps,
                             std::uint64_t master_seed, int parallel) {
  if (reps < 1) throw ValidationError("need at least one repetition");
  std::vector<double> values(reps);
  auto worker = [&](int begin, int end) {
    for (int r = begin; r < end; ++r) values[r] = once(derive_seed(master_seed, "rep", r));
  };
  int threads = std::min(parallel, reps);
  if (threads <= 1) {
    worker(0, reps);
  } else {
    std::vector<std::thread> pool;
    int chunk = (reps + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      int begin = t * chunk;
      int end = std::min(reps, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return values;
}

double lower_median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::size_t idx = values.size() % 2 == 1 ? values.size() / 2 : values.size() / 2 - 1;
  return values[idx];
}

}  // namespace

double median_boost(const std::function<double(std::uint64_t)>& once, int reps,
                    std::uint64_t master_seed, int parallel) {
  return lower_median(run_reps(once, reps, master_seed, parallel));
}

namespace {

struct ComponentRun {
  double value = 0.0;
  std::vector<double> per_rep;
  std::int64_t m = 0;
  int reps = 1;
  Method effective = Method::Exact;
  int t = 0;
  int root = -1;
};

ComponentRun run_component(const TensorNetwork& comp, const EstimatorConfig& config,
                           std::uint64_t comp_seed, int split) {
  ComponentRun run;
  run.t = static_cast<int>(comp.contractions.size());
  Method eff = config.method;
  if (eff == Method::Auto) eff = is_acyclic(comp) ? Method::Acyclic : Method::General;
  if (eff == Method::Acyclic && !is_acyclic(comp)) {
    auto cycle = find_cycle_tensors(comp);
    std::string path;
    for (std::size_t i = 0; i < cycle.size(); ++i) path += (i ? "->" : "") + std::to_string(cycle[i] + 1);
    throw ValidationError("network is cyclic (tensors " + path + "); the acyclic method does not apply");
  }
  run.effective = eff;
  if (eff == Method::Exact) {
    run.value = contract_exact(comp, {config.budget}).at({});
    run.m = 0;
    run.reps = 1;
    return run;
  }
  EstimatorConfig sub = config;
  if (config.epsilon && split > 1) {
    // conservative even split of the accuracy budget across components
    sub.epsilon = *config.epsilon / split;
    sub.delta = *config.delta / split;
  }
  auto params = resolve_params(sub, eff, run.t);
  run.m = params.m;
  run.reps = params.reps;
  std::function<double(std::uint64_t)> once;
  RootedTree tree;
  if (eff == Method::General) {
    once = [&comp, &params](std::uint64_t s) { return estimate_general_once(comp, params.m, s); };
  } else {
    run.root = default_root(comp);
    tree = build_rooted_tree(comp, run.root);
    once = [&comp, &tree, &params](std::uint64_t s) {
      return estimate_acyclic_once(comp, tree, params.m, s);
    };
  }
  run.per_rep = run_reps(once, params.reps, comp_seed, config.parallel);
  run.value = lower_median(run.per_rep);
  return run;
}

}  // namespace

EstimateReport estimate_full(const TensorNetwork& net, const EstimatorConfig& config) {
  auto start = std::chrono::steady_clock::now();
  validate_or_throw(net);
  auto norm = normalize_wlog(net);
  if (!norm.net.free_modes().empty()) {
    throw ValidationError("network has free modes; estimate_full needs a full contraction");
  }
  auto comps = connected_components(norm.net);
  if (comps.empty()) throw ValidationError("cannot estimate an empty network");

  EstimateReport report;
  report.method = config.method;
  report.seed = config.seed;
  report.epsilon = config.epsilon;
  report.delta = config.delta;
  report.value = 1.0;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    auto run = run_component(comps[c], config, derive_seed(config.seed, "component", c),
                             static_cast<int>(comps.size()));
    report.value *= run.value;
    report.m = std::max(report.m, run.m);
    report.reps = std::max(report.reps, run.reps);
    std::string note = "component " + std::to_string(c) + ": method=" + to_string(run.effective) +
                       " t=" + std::to_string(run.t) + " m=" + std::to_string(run.m) +
                       " reps=" + std::to_string(run.reps);
    if (run.root >= 0) note += " root=" + std::to_string(run.root + 1);
    report.notes.push_back(note);
    if (comps.size() == 1) report.per_rep = run.per_rep;
  }
  if (comps.size() > 1) {
    report.notes.push_back("value is the product over " + std::to_string(comps.size()) +
                           " disconnected components with independent seeds");
    if (config.epsilon) {
      report.notes.push_back("accuracy budget split evenly across components");
    }
  }
  report.elapsed_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

namespace {

// Fix the given global modes and renumber what remains.
TensorNetwork slice_network(const TensorNetwork& net, const std::vector<Mode>& fixed_modes,
                            const MultiIndex& values) {
  TensorNetwork out;
  std::vector<std::map<Mode, std::int64_t>> fixed_per_tensor(net.tensors.size());
  for (std::size_t j = 0; j < fixed_modes.size(); ++j) {
    auto [t, l] = net.mode_owner(fixed_modes[j]);
    fixed_per_tensor[t][l] = values[j];
  }
  std::vector<std::vector<int>> new_local(net.tensors.size());
  for (std::size_t k = 0; k < net.tensors.size(); ++k) {
    const auto& fixed = fixed_per_tensor[k];
    int q = net.tensors[k].order();
    new_local[k].assign(q, -1);
    int next = 0;
    for (int l = 0; l < q; ++l) {
      if (!fixed.count(l + 1)) new_local[k][l] = next++;
    }
    out.tensors.push_back(slice(net.tensors[k], fixed));
  }
  for (const auto& [u, v] : net.contractions) {
    auto [ut, ul] = net.mode_owner(u);
    auto [vt, vl] = net.mode_owner(v);
    out.contractions.push_back({out.global_mode(ut, new_local[ut][ul - 1] + 1),
                                out.global_mode(vt, new_local[vt][vl - 1] + 1)});
  }
  return out;
}

}  // namespace

SparseTensor estimate_partial(const TensorNetwork& net, const EstimatorConfig& config) {
  validate_or_throw(net);
  auto norm = normalize_wlog(net).net;
  auto free = norm.free_modes();
  if (free.empty()) {
    return SparseTensor::scalar(estimate_full(norm, config).value);
  }
  Shape free_sizes;
  for (Mode g : free) free_sizes.push_back(norm.mode_size(g));
  if (shape_cells(free_sizes) > config.budget) {
    throw BudgetError("free-mode enumeration of " + std::to_string(shape_cells(free_sizes)) +
                      " entries exceeds the budget");
  }
  SparseTensor out(free_sizes);
  MultiIndex assignment(free.size(), 1);
  for (;;) {
    auto sliced = slice_network(norm, free, assignment);
    EstimatorConfig sub = config;
    sub.seed = derive_seed(config.seed, "entry",
                           static_cast<std::uint64_t>(linear_index(assignment, free_sizes)));
    double value = estimate_full(sliced, sub).value;
    if (value != 0.0) out.set(assignment, value);
    std::size_t k = assignment.size();
    bool done = true;
    while (k-- > 0) {
      if (assignment[k] < free_sizes[k]) {
        ++assignment[k];
        std::fill(assignment.begin() + k + 1, assignment.end(), 1);
        done = false;
        break;
      }
      assignment[k] = 1;
    }
    if (done) break;
  }
  return out;
}

EstimateReport estimate(const TensorNetwork& net, const EstimatorConfig& config) {
  auto start = std::chrono::steady_clock::now();
  validate_or_throw(net);
  auto norm = normalize_wlog(net).net;
  if (norm.free_modes().empty()) {
    return estimate_full(norm, config);
  }
  EstimateReport report;
  report.method = config.method;
  report.seed = config.seed;
  report.epsilon = config.epsilon;
  report.delta = config.delta;
  report.is_partial = true;
  report.tensor = estimate_partial(norm, config);
  auto params_probe = resolve_params(
      config, config.method == Method::Auto ? Method::General : config.method,
      static_cast<int>(norm.contractions.size()));
  report.m = config.method == Method::Exact ? 0 : params_probe.m;
  report.reps = params_probe.reps;
  report.notes.push_back("partial contraction over " + std::to_string(norm.free_modes().size()) +
                         " free modes");
  report.elapsed_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

TensorNetwork chain_to_network(const std::vector<SparseTensor>& chain) {
  TensorNetwork net;
  net.tensors = chain;
  Mode g = 1;
  std::vector<Mode> first_mode, last_mode;
  for (const auto& t : chain) {
    first_mode.push_back(g);
    last_mode.push_back(g + t.order() - 1);
    g += t.order();
  }
  for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
    net.contractions.push_back({last_mode[k], first_mode[k + 1]});
  }
  return net;
}

double baseline_chain_once(const std::vector<SparseTensor>& chain, std::int64_t m,
                           std::uint64_t seed) {
  m = next_pow2(m);
  const auto p = chain.size();
  if (p < 2) throw ValidationError("chain needs at least two tensors");
  if (chain.front().order() != 1 || chain.back().order() != 1) {
    throw ValidationError("chain must start and end with vectors");
  }
  for (std::size_t k = 1; k + 1 < p; ++k) {
    if (chain[k].order() != 2) throw ValidationError("interior chain tensors must be matrices");
  }
  const auto q = p - 1;  // contraction count
  std::vector<CountSketchSpec> specs;
  specs.reserve(q);
  for (std::size_t e = 0; e < q; ++e) {
    std::int64_t n = chain[e].shape().back();
    if (n != chain[e + 1].shape().front()) {
      throw ValidationError("adjacent chain tensors disagree on the contracted size");
    }
    specs.push_back(CountSketchSpec::make(m, n, derive_seed(seed, "chain", e)));
  }
  std::vector<double> acc = cs_apply(specs[0], chain[0]);
  for (std::size_t k = 1; k + 1 < p; ++k) {
    TensorSketchSpec pair;
    pair.parts = {specs[k - 1], specs[k]};
    acc = circ_xcorr(acc, ts_apply_tensor(pair, chain[k]));
  }
  acc = circ_xcorr(acc, cs_apply(specs[q - 1], chain[p - 1]));
  return acc[0];
}

double norm_product_squared(const TensorNetwork& net) {
  double prod = 1.0;
  for (const auto& t : net.tensors) prod *= frobenius_norm_squared(t);
  return prod;
}

double general_variance_bound_factor(int t, std::int64_t m) {
  return std::pow(3.0, t) / static_cast<double>(m);
}

double acyclic_variance_bound_factor(int t, std::int64_t m) {
  return std::pow(1.0 + 8.0 / static_cast<double>(m), 2.0 * t) - 1.0;
}

double baseline_variance_lower_factor(int q, std::int64_t m) {
  return std::pow(3.0, q) / (2.0 * static_cast<double>(m) * static_cast<double>(m)) - 1.0;
}

namespace {

VarianceRecord run_trials(const std::function<double(std::uint64_t)>& once, std::int64_t trials,
                          std::uint64_t seed, int parallel) {
  if (trials < 2) throw ValidationError("variance experiments need at least two trials");
  std::vector<double> values(trials);
  auto worker = [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      values[i] = once(derive_seed(seed, "trial", static_cast<std::uint64_t>(i)));
    }
  };
  auto threads = static_cast<std::int64_t>(std::min<std::int64_t>(parallel, trials));
  if (threads <= 1) {
    worker(0, trials);
  } else {
    std::vector<std::thread> pool;
    std::int64_t chunk = (trials + threads - 1) / threads;
    for (std::int64_t t = 0; t < threads; ++t) {
      std::int64_t begin = t * chunk;
      std::int64_t end = std::min(trials, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  VarianceRecord rec;
  rec.trials = trials;
  rec.seed = seed;
  // accumulate in index order so thread count cannot change the record
  double mean = 0.0, m2 = 0.0;
  for (std::int64_t i = 0; i < trials; ++i) {
    double d = values[i] - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (values[i] - mean);
  }
  rec.mean = mean;
  rec.variance = m2 / static_cast<double>(trials - 1);
  rec.mean_std_error = std::sqrt(rec.variance / static_cast<double>(trials));
  return rec;
}

}  // namespace

VarianceRecord variance_experiment(const TensorNetwork& net, Method method, std::int64_t m,
                                   std::int64_t trials, std::uint64_t seed, int parallel) {
  Method eff = method;
  if (eff == Method::Auto) eff = is_acyclic(net) ? Method::Acyclic : Method::General;
  const int t = static_cast<int>(net.contractions.size());
  const double norms = norm_product_squared(net);
  const double oracle = contract_exact(net).at({});

  std::function<double(std::uint64_t)> once;
  RootedTree tree;
  switch (eff) {
    case Method::Exact:
      once = [oracle](std::uint64_t) { return oracle; };
      break;
    case Method::General:
      once = [&net, m](std::uint64_t s) { return estimate_general_once(net, m, s); };
      break;
    case Method::Acyclic:
      tree = build_rooted_tree(net, default_root(net));
      once = [&net, &tree, m](std::uint64_t s) { return estimate_acyclic_once(net, tree, m, s); };
      break;
    case Method::Auto:
      break;
  }
  auto rec = run_trials(once, trials, seed, parallel);
  rec.method = to_string(eff);
  rec.m = m;
  rec.t = t;
  rec.oracle = oracle;
  switch (eff) {
    case Method::Exact:
      rec.bound_factor = 0.0;
      break;
    case Method::General:
      rec.bound_factor = general_variance_bound_factor(t, m);
      break;
    default:
      rec.bound_factor = acyclic_variance_bound_factor(t, m);
      break;
  }
  rec.bound = rec.bound_factor * norms;
  rec.ratio = rec.bound > 0.0 ? rec.variance / rec.bound : 0.0;
  return rec;
}

VarianceRecord variance_experiment_baseline(const std::vector<SparseTensor>& chain, std::int64_t m,
                                            std::int64_t trials, std::uint64_t seed,
                                            int parallel) {
  auto net = chain_to_network(chain);
  const int q = static_cast<int>(chain.size()) - 1;
  auto rec = run_trials(
      [&chain, m](std::uint64_t s) { return baseline_chain_once(chain, m, s); }, trials, seed,
      parallel);
  rec.method = "baseline-chain";
  rec.m = m;
  rec.t = q;
  rec.oracle = contract_exact(net).at({});
  rec.bound_factor = baseline_variance_lower_factor(q, m);
  rec.bound = rec.bound_factor * norm_product_squared(net);
  rec.ratio = rec.bound > 0.0 ? rec.variance / rec.bound : 0.0;
  rec.bound_is_lower = true;
  return rec;
}

std::vector<SparseTensor> all_ones_chain_fixture(int q, std::int64_t n) {
  if (q < 2 || q % 2 != 0) throw ValidationError("the all-ones chain needs an even q >= 2");
  auto ones = [n](const Shape& shape) {
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
      if (done) break;
    }
    return t;
  };
  std::vector<SparseTensor> chain;
  chain.push_back(ones(Shape{n}));
  for (int k = 2; k <= q; ++k) chain.push_back(ones(Shape{n, n}));
  chain.push_back(ones(Shape{n}));
  return chain;
}

namespace {

// Unit Frobenius norms with exact dyadic entries: 4 * 0.5^2 = 1 and
// 16 * 0.25^2 = 1, so a bound equals its formula factor exactly.
SparseTensor unit_vector4(int flavor) {
  SparseTensor v(Shape{4});
  for (std::int64_t j = 1; j <= 4; ++j) {
    double sign = (j == 4 || (flavor % 2 == 1 && j == 2)) ? -1.0 : 1.0;
    v.set({j}, 0.5 * sign);
  }
  return v;
}

SparseTensor unit_matrix4(int flavor) {
  SparseTensor m(Shape{4, 4});
  for (std::int64_t r = 1; r <= 4; ++r) {
    for (std::int64_t c = 1; c <= 4; ++c) {
      double sign = ((r + flavor) * c) % 3 == 0 ? -1.0 : 1.0;
      m.set({r, c}, 0.25 * sign);
    }
  }
  return m;
}

}  // namespace

TensorNetwork unit_norm_cycle_fixture(int q) {
  TensorNetwork net;
  if (q <= 2) {
    net.tensors = {unit_vector4(0), unit_vector4(1)};
    net.contractions = {{1, 2}};
    return net;
  }
  for (int k = 0; k < q; ++k) net.tensors.push_back(unit_matrix4(k));
  // the second mode of tensor k contracts with the first mode of tensor k+1
  for (int k = 0; k < q; ++k) {
    Mode here = static_cast<Mode>(2 * k + 2);
    Mode next = static_cast<Mode>((2 * (k + 1)) % (2 * q) + 1);
    net.contractions.push_back({here, next});
  }
  return net;
}

TensorNetwork unit_norm_chain_fixture(int matrices) {
  if (matrices < 0) throw ValidationError("need a nonnegative matrix count");
  std::vector<SparseTensor> chain;
  chain.push_back(unit_vector4(0));
  for (int k = 0; k < matrices; ++k) chain.push_back(unit_matrix4(k));
  chain.push_back(unit_vector4(1));
  return chain_to_network(chain);
}

std::string EstimateReport::to_json(int indent) const {
  nlohmann::ordered_json j;
  if (is_partial) {
    j["tensor"]["shape"] = tensor.shape();
    j["tensor"]["entries"] = nlohmann::json::array();
    for (const auto& [i, v] : tensor.entries()) j["tensor"]["entries"].push_back({i, v});
  } else {
    j["value"] = value;
  }
  j["m"] = m;
  j["reps"] = reps;
  j["method"] = tnsketch::to_string(method);
  j["seed"] = seed;
  if (epsilon) j["epsilon"] = *epsilon;
  if (delta) j["delta"] = *delta;
  if (!per_rep.empty()) j["per_rep"] = per_rep;
  j["elapsed_sec"] = elapsed_sec;
  if (!notes.empty()) j["notes"] = notes;
  return j.dump(indent);
}

std::string VarianceRecord::to_json() const {
  nlohmann::ordered_json j;
  j["fixture"] = fixture;
  j["method"] = method;
  j["m"] = m;
  j["t"] = t;
  j["trials"] = trials;
  j["oracle"] = oracle;
  j["mean"] = mean;
  j["variance"] = variance;
  j["mean_std_error"] = mean_std_error;
  j[bound_is_lower ? "bound_lower" : "bound_upper"] = bound;
  j[bound_is_lower ? "bound_lower_factor" : "bound_upper_factor"] = bound_factor;
  j["ratio"] = ratio;
  j["seed"] = seed;
  return j.dump();
}

}  // namespace tnsketch
