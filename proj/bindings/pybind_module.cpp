#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tnsketch/apps.hpp"
#include "tnsketch/errors.hpp"
#include "tnsketch/estimators.hpp"
#include "tnsketch/network.hpp"
#include "tnsketch/oracle.hpp"
#include "tnsketch/tensor.hpp"

namespace py = pybind11;
using namespace tnsketch;

namespace {

EstimatorConfig make_config(const std::string& method, std::optional<std::int64_t> m,
                            std::optional<int> reps, std::optional<double> epsilon,
                            std::optional<double> delta, std::uint64_t seed, std::int64_t budget,
                            int parallel) {
  EstimatorConfig config;
  config.method = method_from_string(method);
  config.m = m;
  config.reps = reps;
  config.epsilon = epsilon;
  config.delta = delta;
  config.seed = seed;
  config.budget = budget;
  config.parallel = parallel;
  return config;
}

py::dict report_to_dict(const EstimateReport& report) {
  py::dict d;
  if (report.is_partial) {
    d["tensor"] = report.tensor;
  } else {
    d["value"] = report.value;
  }
  d["m"] = report.m;
  d["reps"] = report.reps;
  d["method"] = to_string(report.method);
  d["seed"] = report.seed;
  if (report.epsilon) d["epsilon"] = *report.epsilon;
  if (report.delta) d["delta"] = *report.delta;
  d["per_rep"] = report.per_rep;
  d["elapsed_sec"] = report.elapsed_sec;
  d["notes"] = report.notes;
  return d;
}

py::dict record_to_dict(const VarianceRecord& rec) {
  py::dict d;
  d["fixture"] = rec.fixture;
  d["method"] = rec.method;
  d["m"] = rec.m;
  d["t"] = rec.t;
  d["trials"] = rec.trials;
  d["oracle"] = rec.oracle;
  d["mean"] = rec.mean;
  d["variance"] = rec.variance;
  d["mean_std_error"] = rec.mean_std_error;
  d[rec.bound_is_lower ? "bound_lower" : "bound_upper"] = rec.bound;
  d[rec.bound_is_lower ? "bound_lower_factor" : "bound_upper_factor"] = rec.bound_factor;
  d["ratio"] = rec.ratio;
  d["seed"] = rec.seed;
  return d;
}

}  // namespace

PYBIND11_MODULE(tnsketch, module) {
  module.doc() =
      "Approximate tensor network contraction by sketching: an exact "
      "contraction oracle plus randomized estimators for cyclic and acyclic "
      "networks, with join-size and triangle-count front ends.";

  py::register_exception<ValidationError>(module, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(module, "IoError", PyExc_IOError);
  py::register_exception<BudgetError>(module, "BudgetError", PyExc_RuntimeError);

  py::class_<SparseTensor>(module, "SparseTensor",
                           "Sparse coordinate-format tensor with 1-based indices.")
      .def(py::init<>())
      .def(py::init<Shape>(), py::arg("shape"))
      .def_static("scalar", &SparseTensor::scalar, py::arg("value"))
      .def_property_readonly("shape", &SparseTensor::shape)
      .def_property_readonly("order", &SparseTensor::order)
      .def_property_readonly("nnz", &SparseTensor::nnz)
      .def("at", &SparseTensor::at, py::arg("index"))
      .def("set", &SparseTensor::set, py::arg("index"), py::arg("value"))
      .def("add", &SparseTensor::add, py::arg("index"), py::arg("delta"))
      .def("entries",
           [](const SparseTensor& t) {
             py::list out;
             for (const auto& [i, v] : t.entries()) out.append(py::make_tuple(i, v));
             return out;
           })
      .def("frobenius_norm", [](const SparseTensor& t) { return frobenius_norm(t); })
      .def("__eq__", [](const SparseTensor& a, const SparseTensor& b) { return a == b; })
      .def("__repr__", [](const SparseTensor& t) {
        return "SparseTensor(order=" + std::to_string(t.order()) +
               ", nnz=" + std::to_string(t.nnz()) + ")";
      });

  py::class_<TensorNetwork>(module, "TensorNetwork",
                            "Tensor list plus contractions over global 1-based modes.")
      .def(py::init([](std::vector<SparseTensor> tensors,
                       std::vector<std::pair<Mode, Mode>> contractions) {
             TensorNetwork net;
             net.tensors = std::move(tensors);
             net.contractions = std::move(contractions);
             return net;
           }),
           py::arg("tensors"), py::arg("contractions"))
      .def_readwrite("tensors", &TensorNetwork::tensors)
      .def_readwrite("contractions", &TensorNetwork::contractions)
      .def_property_readonly("total_modes", &TensorNetwork::total_modes)
      .def("free_modes", &TensorNetwork::free_modes)
      .def("mode_size", &TensorNetwork::mode_size, py::arg("global_mode"))
      .def("to_json", [](const TensorNetwork& net) { return network_to_json(net, -1); })
      .def("__repr__", [](const TensorNetwork& net) {
        return "TensorNetwork(tensors=" + std::to_string(net.tensors.size()) +
               ", contractions=" + std::to_string(net.contractions.size()) + ")";
      });

  module.def("parse_network_json", &parse_network_json, py::arg("text"));
  module.def("read_network_file", &read_network_file, py::arg("path"));
  module.def("write_network_file", &write_network_file, py::arg("path"), py::arg("network"));
  module.def("read_coo_file", &read_coo_file, py::arg("path"),
             "Read a tensor in COO text form: a 'shape n1 ... nq' header line, "
             "then one 'i1 ... iq v' line per entry.");
  module.def("write_coo_file", &write_coo_file, py::arg("path"), py::arg("tensor"));

  module.def(
      "validate",
      [](const TensorNetwork& net) { return validate(net).problems; }, py::arg("network"),
      "Diagnostics for a network; empty means valid.");
  module.def(
      "normalize",
      [](const TensorNetwork& net) {
        auto result = normalize_wlog(net);
        return py::make_tuple(result.net, result.log);
      },
      py::arg("network"),
      "Standard form: exact same-tensor contractions, merged parallel "
      "contractions, diagonal copies for shared modes, uniform mode sizes. "
      "Returns (network, log).");
  module.def("is_acyclic", &is_acyclic, py::arg("network"));
  module.def("connected_components", &connected_components, py::arg("network"));

  module.def(
      "contract_exact",
      [](const TensorNetwork& net, std::int64_t budget) {
        return contract_exact(net, {budget});
      },
      py::arg("network"), py::arg("budget") = 10'000'000,
      "Exact contraction by direct summation; order-0 result for full networks.");

  module.def(
      "estimate",
      [](const TensorNetwork& net, const std::string& method, std::optional<std::int64_t> m,
         std::optional<int> reps, std::optional<double> epsilon, std::optional<double> delta,
         std::uint64_t seed, std::int64_t budget, int parallel) {
        return report_to_dict(
            estimate(net, make_config(method, m, reps, epsilon, delta, seed, budget, parallel)));
      },
      py::arg("network"), py::arg("method") = "auto", py::arg("m") = py::none(),
      py::arg("reps") = py::none(), py::arg("epsilon") = py::none(),
      py::arg("delta") = py::none(), py::arg("seed") = kDefaultSeed,
      py::arg("budget") = 10'000'000, py::arg("parallel") = 1,
      "Estimate a contraction; full networks report a value, networks with "
      "free modes report a tensor.");

  module.def("estimate_general_once", &estimate_general_once, py::arg("network"), py::arg("m"),
             py::arg("seed"), "Single-shot estimate of a normalized full network.");

  py::class_<GeneralSketchState>(module, "GeneralSketchState",
                                 "Streaming sketch state with turnstile updates.")
      .def(py::init<const TensorNetwork&, std::int64_t, std::uint64_t>(), py::arg("schema"),
           py::arg("m"), py::arg("seed"))
      .def("update", &GeneralSketchState::update, py::arg("tensor"), py::arg("index"),
           py::arg("delta"))
      .def("load", &GeneralSketchState::load, py::arg("network"))
      .def("estimate", &GeneralSketchState::estimate)
      .def_property_readonly("sketch_size", &GeneralSketchState::sketch_size);

  module.def(
      "variance_experiment",
      [](const TensorNetwork& net, const std::string& method, std::int64_t m, std::int64_t trials,
         std::uint64_t seed) {
        return record_to_dict(variance_experiment(net, method_from_string(method), m, trials, seed));
      },
      py::arg("network"), py::arg("method"), py::arg("m"), py::arg("trials"),
      py::arg("seed") = kDefaultSeed);

  // application front ends
  module.def(
      "relations_to_network",
      [](const std::vector<std::tuple<std::string, std::vector<std::string>,
                                      std::vector<std::vector<std::string>>>>& relations,
         const std::vector<std::pair<std::string, std::string>>& joins) {
        std::vector<Relation> rels;
        for (const auto& [name, attrs, tuples] : relations) rels.push_back({name, attrs, tuples});
        auto jn = relations_to_network(rels, joins);
        py::list dicts;
        for (const auto& d : jn.dictionaries) dicts.append(d);
        return py::make_tuple(jn.net, dicts);
      },
      py::arg("relations"), py::arg("joins"),
      "Frequency-tensor network for an equi-join COUNT(*) query. Relations "
      "are (name, attrs, tuples); joins are ('R1.a', 'R2.b') pairs. Returns "
      "(network, dictionaries).");

  module.def(
      "join_size_nested_loop",
      [](const std::vector<std::vector<std::vector<std::string>>>& relations,
         const std::vector<std::tuple<int, int, int, int>>& predicates) {
        std::vector<JoinPredicate> preds;
        for (const auto& [r1, a1, r2, a2] : predicates) preds.push_back({r1, a1, r2, a2});
        return join_size_nested_loop(relations, preds);
      },
      py::arg("relations"), py::arg("predicates"),
      "Exact join size by nested loops; predicates are (rel, attr, rel, attr), 0-based.");

  module.def(
      "triangles_to_network",
      [](std::int64_t n, const std::vector<std::pair<std::int64_t, std::int64_t>>& edges) {
        return triangles_to_network({n, edges});
      },
      py::arg("n"), py::arg("edges"),
      "Three-copy adjacency network whose contraction is the triangle count.");

  module.def(
      "triangle_count_exact",
      [](std::int64_t n, const std::vector<std::pair<std::int64_t, std::int64_t>>& edges) {
        return triangle_count_exact(adjacency_dense({n, edges}));
      },
      py::arg("n"), py::arg("edges"), "tr(A^3) by direct multiplication.");
}
