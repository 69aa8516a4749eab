// tnc: approximate and exact tensor network contraction from the command line.
//
// Subcommands: contract (network JSON), joinsize (join spec + CSVs),
// triangles (edge list), experiment (variance studies as JSON lines).
// Exit codes: 0 success, 2 validation error, 3 I/O error, 4 budget exceeded.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tnsketch/apps.hpp"
#include "tnsketch/errors.hpp"
#include "tnsketch/estimators.hpp"
#include "tnsketch/fft.hpp"
#include "tnsketch/network.hpp"
#include "tnsketch/oracle.hpp"

namespace {

using namespace tnsketch;

struct CommonOptions {
  std::string method = "auto";
  std::optional<std::int64_t> m;
  std::optional<int> reps;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::uint64_t seed = kDefaultSeed;
  std::int64_t budget = 10'000'000;
  int parallel = 1;
  std::string output;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--method", opts.method, "exact|general|acyclic|auto")
      ->check(CLI::IsMember({"exact", "general", "acyclic", "auto"}));
  cmd->add_option("--m", opts.m, "sketch size (rounded up to a power of two)");
  cmd->add_option("--reps", opts.reps, "median repetitions");
  cmd->add_option("--epsilon", opts.epsilon, "relative error target");
  cmd->add_option("--delta", opts.delta, "failure probability target");
  cmd->add_option("--seed", opts.seed, "master seed")->envname("TNC_SEED");
  cmd->add_option("--budget", opts.budget, "exact-enumeration budget");
  cmd->add_option("--parallel", opts.parallel, "concurrent repetitions");
  cmd->add_option("--output", opts.output, "write the report here instead of stdout");
}

EstimatorConfig to_config(const CommonOptions& opts) {
  const bool sized = opts.m.has_value() || opts.reps.has_value();
  const bool targeted = opts.epsilon.has_value() || opts.delta.has_value();
  if (sized && targeted) {
    throw ValidationError("give either --m/--reps or --epsilon/--delta, not both");
  }
  if (opts.epsilon.has_value() != opts.delta.has_value()) {
    throw ValidationError("--epsilon and --delta must be given together");
  }
  EstimatorConfig config;
  config.m = opts.m;
  config.reps = opts.reps;
  config.epsilon = opts.epsilon;
  config.delta = opts.delta;
  config.seed = opts.seed;
  config.method = method_from_string(opts.method);
  config.budget = opts.budget;
  config.parallel = opts.parallel;
  return config;
}

void emit(const std::string& text, const std::string& output) {
  if (output.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream out(output);
    if (!out) throw IoError("cannot write " + output);
    out << text << '\n';
  }
}

nlohmann::ordered_json report_json(const EstimateReport& report) {
  return nlohmann::ordered_json::parse(report.to_json());
}

int run_contract(const std::string& path, const CommonOptions& opts) {
  auto config = to_config(opts);
  auto net = read_network_file(path);
  auto report = estimate(net, config);
  emit(report_json(report).dump(2), opts.output);
  return 0;
}

int run_joinsize(const std::string& spec_path, const CommonOptions& opts, bool with_oracle) {
  auto config = to_config(opts);
  auto spec = read_join_spec(spec_path);
  std::string base_dir = ".";
  if (auto slash = spec_path.find_last_of('/'); slash != std::string::npos) {
    base_dir = spec_path.substr(0, slash);
  }
  auto relations = load_relations(spec, base_dir);
  auto jn = relations_to_network(relations, spec.joins);
  auto report = estimate(jn.net, config);
  auto j = report_json(report);
  if (with_oracle) {
    std::vector<std::vector<std::vector<std::string>>> tuples;
    for (const auto& r : relations) tuples.push_back(r.tuples);
    j["oracle"] = join_size_nested_loop(tuples, jn.predicates);
    try {
      j["oracle_contraction"] = contract_exact(jn.net, {config.budget}).at({});
    } catch (const BudgetError&) {
      j["oracle_contraction"] = nullptr;
    }
  }
  emit(j.dump(2), opts.output);
  return 0;
}

int run_triangles(const std::string& edges_path, const CommonOptions& opts, bool with_oracle) {
  auto config = to_config(opts);
  auto graph = read_edge_list(edges_path);
  auto net = triangles_to_network(graph);
  auto report = estimate(net, config);
  auto j = report_json(report);
  if (with_oracle) {
    j["oracle"] = triangle_count_exact(adjacency_dense(graph));
  }
  emit(j.dump(2), opts.output);
  return 0;
}

int run_experiment(const std::string& fixture, std::vector<std::int64_t> ms, int q, std::int64_t n,
                   std::int64_t trials, const CommonOptions& opts) {
  if (ms.empty()) ms.push_back(4);
  std::string rows;
  for (std::int64_t m_req : ms) {
    std::int64_t m = next_pow2(m_req);
    if (fixture == "lowerbound-chain") {
      if (q < 2 || q % 2 != 0) throw ValidationError("lowerbound-chain needs an even q >= 2");
      auto chain = all_ones_chain_fixture(q, n);
      auto rec = variance_experiment_baseline(chain, m, trials, opts.seed, opts.parallel);
      rec.fixture = fixture;
      rows += rec.to_json() + "\n";
      auto net = chain_to_network(chain);
      auto rec2 = variance_experiment(net, Method::Acyclic, m, trials, opts.seed + 1, opts.parallel);
      rec2.fixture = fixture;
      rows += rec2.to_json() + "\n";
    } else if (fixture == "moments-general") {
      auto net = unit_norm_cycle_fixture(q);
      auto rec = variance_experiment(normalize_wlog(net).net, Method::General, m, trials, opts.seed,
                                     opts.parallel);
      rec.fixture = fixture;
      rows += rec.to_json() + "\n";
    } else if (fixture == "moments-acyclic") {
      auto net = unit_norm_chain_fixture(q);
      auto rec = variance_experiment(normalize_wlog(net).net, Method::Acyclic, m, trials, opts.seed,
                                     opts.parallel);
      rec.fixture = fixture;
      rows += rec.to_json() + "\n";
    } else {
      throw ValidationError("unknown experiment fixture: " + fixture);
    }
  }
  if (!rows.empty() && rows.back() == '\n') rows.pop_back();
  emit(rows, opts.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensor network contraction estimators"};
  app.require_subcommand(1);

  CommonOptions contract_opts, join_opts, tri_opts, exp_opts;
  std::string network_path, spec_path, edges_path, fixture;
  bool join_oracle = false, tri_oracle = false;
  std::vector<std::int64_t> exp_ms;
  int exp_q = 4;
  std::int64_t exp_n = 2;
  std::int64_t exp_trials = 1000;

  auto* contract = app.add_subcommand("contract", "estimate a network file");
  contract->add_option("network", network_path, "network JSON file")->required();
  add_common(contract, contract_opts);

  auto* joinsize = app.add_subcommand("joinsize", "estimate an equi-join count");
  joinsize->add_option("spec", spec_path, "join spec JSON file")->required();
  joinsize->add_flag("--with-oracle", join_oracle, "include exact counts");
  add_common(joinsize, join_opts);

  auto* triangles = app.add_subcommand("triangles", "estimate a triangle count");
  triangles->add_option("edges", edges_path, "edge list file")->required();
  triangles->add_flag("--with-oracle", tri_oracle, "include tr(A^3)");
  add_common(triangles, tri_opts);

  auto* experiment = app.add_subcommand("experiment", "variance studies as JSON lines");
  experiment->add_option("fixture", fixture, "lowerbound-chain|moments-general|moments-acyclic")
      ->required();
  experiment->add_option("--m", exp_ms, "sketch sizes (repeatable)");
  experiment->add_option("--q", exp_q, "fixture size parameter");
  experiment->add_option("--n", exp_n, "mode size");
  experiment->add_option("--trials", exp_trials, "Monte-Carlo trials per row");
  experiment->add_option("--seed", exp_opts.seed, "master seed")->envname("TNC_SEED");
  experiment->add_option("--parallel", exp_opts.parallel, "concurrent trials");
  experiment->add_option("--output", exp_opts.output, "write rows here instead of stdout");

  try {
    app.parse(argc, argv);
    if (contract->parsed()) return run_contract(network_path, contract_opts);
    if (joinsize->parsed()) return run_joinsize(spec_path, join_opts, join_oracle);
    if (triangles->parsed()) return run_triangles(edges_path, tri_opts, tri_oracle);
    if (experiment->parsed()) {
      return run_experiment(fixture, exp_ms, exp_q, exp_n, exp_trials, exp_opts);
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ValidationError& e) {
    std::cout << nlohmann::json{{"error", e.what()}, {"kind", "validation"}}.dump() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cout << nlohmann::json{{"error", e.what()}, {"kind", "io"}}.dump() << '\n';
    return 3;
  } catch (const BudgetError& e) {
    std::cout << nlohmann::json{{"error", e.what()}, {"kind", "budget"}}.dump() << '\n';
    return 4;
  }
  return 0;
}
