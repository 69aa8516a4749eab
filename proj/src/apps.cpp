#include "tnsketch/apps.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tnsketch/errors.hpp"

namespace tnsketch {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    // trim surrounding whitespace
    auto begin = field.find_first_not_of(" \t\r");
    auto end = field.find_last_not_of(" \t\r");
    fields.push_back(begin == std::string::npos ? "" : field.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

Relation read_csv(const std::string& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Relation rel;
  rel.name = name;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + " is empty; a header row is required");
  rel.attrs = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != rel.attrs.size()) {
      throw IoError(path + ": row has " + std::to_string(fields.size()) + " fields, header has " +
                    std::to_string(rel.attrs.size()));
    }
    rel.tuples.push_back(std::move(fields));
  }
  return rel;
}

JoinSpec read_join_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("join spec parse failure: ") + e.what());
  }
  try {
    JoinSpec spec;
    for (const auto& jr : j.at("relations")) {
      JoinSpec::Rel rel;
      rel.name = jr.at("name").get<std::string>();
      rel.file = jr.at("file").get<std::string>();
      if (jr.contains("attrs")) rel.attrs = jr.at("attrs").get<std::vector<std::string>>();
      spec.relations.push_back(std::move(rel));
    }
    for (const auto& jj : j.at("joins")) {
      spec.joins.push_back({jj.at(0).get<std::string>(), jj.at(1).get<std::string>()});
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("join spec has an unexpected structure: ") + e.what());
  }
}

std::vector<Relation> load_relations(const JoinSpec& spec, const std::string& base_dir) {
  std::vector<Relation> out;
  for (const auto& r : spec.relations) {
    std::string path = r.file;
    if (!base_dir.empty() && !path.empty() && path.front() != '/') {
      path = base_dir + "/" + path;
    }
    Relation rel = read_csv(path, r.name);
    if (!r.attrs.empty()) {
      // keep only the listed attributes, in the listed order
      std::vector<int> keep;
      for (const auto& a : r.attrs) {
        auto it = std::find(rel.attrs.begin(), rel.attrs.end(), a);
        if (it == rel.attrs.end()) {
          throw ValidationError("relation " + r.name + " has no attribute " + a);
        }
        keep.push_back(static_cast<int>(it - rel.attrs.begin()));
      }
      Relation trimmed;
      trimmed.name = rel.name;
      trimmed.attrs = r.attrs;
      for (auto& tuple : rel.tuples) {
        std::vector<std::string> t;
        t.reserve(keep.size());
        for (int k : keep) t.push_back(tuple[k]);
        trimmed.tuples.push_back(std::move(t));
      }
      rel = std::move(trimmed);
    }
    out.push_back(std::move(rel));
  }
  return out;
}

JoinNetwork relations_to_network(const std::vector<Relation>& relations,
                                 const std::vector<std::pair<std::string, std::string>>& joins) {
  // resolve "R.attr" references
  auto resolve = [&](const std::string& ref) -> std::pair<int, int> {
    auto dot = ref.find('.');
    if (dot == std::string::npos) {
      throw ValidationError("join reference '" + ref + "' must look like Relation.attribute");
    }
    std::string rel_name = ref.substr(0, dot);
    std::string attr = ref.substr(dot + 1);
    for (std::size_t r = 0; r < relations.size(); ++r) {
      if (relations[r].name != rel_name) continue;
      const auto& attrs = relations[r].attrs;
      auto it = std::find(attrs.begin(), attrs.end(), attr);
      if (it == attrs.end()) {
        throw ValidationError("relation " + rel_name + " has no attribute " + attr);
      }
      return {static_cast<int>(r), static_cast<int>(it - attrs.begin())};
    }
    throw ValidationError("unknown relation in join reference: " + rel_name);
  };

  std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> pairs;
  for (const auto& [lhs, rhs] : joins) {
    auto a = resolve(lhs);
    auto b = resolve(rhs);
    if (a == b) throw ValidationError("join pairs an attribute with itself: " + lhs);
    pairs.push_back({a, b});
  }

  // join attributes per relation, in attribute order
  std::vector<std::vector<int>> join_attrs(relations.size());
  {
    std::vector<std::set<int>> seen(relations.size());
    for (const auto& [a, b] : pairs) {
      seen[a.first].insert(a.second);
      seen[b.first].insert(b.second);
    }
    for (std::size_t r = 0; r < relations.size(); ++r) {
      join_attrs[r].assign(seen[r].begin(), seen[r].end());
    }
  }

  // one dictionary per join-connected class of attributes
  std::vector<std::pair<int, int>> nodes;
  for (std::size_t r = 0; r < relations.size(); ++r) {
    for (int a : join_attrs[r]) nodes.push_back({static_cast<int>(r), a});
  }
  auto node_id = [&](std::pair<int, int> node) {
    auto it = std::find(nodes.begin(), nodes.end(), node);
    return static_cast<int>(it - nodes.begin());
  };
  std::vector<int> parent(nodes.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [a, b] : pairs) parent[find(node_id(a))] = find(node_id(b));

  JoinNetwork jn;
  std::vector<int> class_of(nodes.size(), -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    int r = find(static_cast<int>(i));
    if (class_of[r] < 0) {
      class_of[r] = static_cast<int>(jn.dictionaries.size());
      jn.dictionaries.push_back({});
    }
    class_of[i] = class_of[r];
  }
  // dictionaries: union of values over every column of the class, sorted for
  // stable encodings
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto [r, a] = nodes[i];
    auto& dict = jn.dictionaries[class_of[i]];
    for (const auto& tuple : relations[r].tuples) dict.emplace(tuple[a], 0);
  }
  for (auto& dict : jn.dictionaries) {
    std::int64_t next = 1;
    for (auto& [value, code] : dict) code = next++;
  }

  jn.tensor_modes.resize(relations.size());
  for (std::size_t r = 0; r < relations.size(); ++r) {
    Shape shape;
    for (int a : join_attrs[r]) {
      int cls = class_of[node_id({static_cast<int>(r), a})];
      jn.tensor_modes[r].push_back({a, cls});
      shape.push_back(std::max<std::int64_t>(1, jn.dictionaries[cls].size()));
    }
    SparseTensor freq(shape);
    for (const auto& tuple : relations[r].tuples) {
      MultiIndex key;
      key.reserve(join_attrs[r].size());
      for (auto [a, cls] : jn.tensor_modes[r]) key.push_back(jn.dictionaries[cls].at(tuple[a]));
      freq.add(key, 1.0);
    }
    jn.net.tensors.push_back(std::move(freq));
  }

  auto global_of = [&](std::pair<int, int> node) {
    const auto& modes = jn.tensor_modes[node.first];
    for (std::size_t l = 0; l < modes.size(); ++l) {
      if (modes[l].first == node.second) {
        return jn.net.global_mode(node.first, static_cast<int>(l) + 1);
      }
    }
    throw ValidationError("join attribute lost during network construction");
  };
  for (const auto& [a, b] : pairs) {
    jn.net.contractions.push_back({global_of(a), global_of(b)});
    jn.predicates.push_back({a.first, a.second, b.first, b.second});
  }
  return jn;
}

EdgeList read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  EdgeList graph;
  if (!(in >> graph.n) || graph.n < 1) {
    throw IoError(path + " must start with the node count");
  }
  std::int64_t u, v;
  while (in >> u >> v) {
    if (u < 1 || u > graph.n || v < 1 || v > graph.n) {
      throw ValidationError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                            ") outside 1.." + std::to_string(graph.n));
    }
    graph.edges.push_back({u, v});
  }
  return graph;
}

DenseMatrix adjacency_dense(const EdgeList& graph) {
  DenseMatrix a(graph.n, graph.n);
  for (auto [u, v] : graph.edges) a.at(u - 1, v - 1) += 1.0;
  return a;
}

TensorNetwork triangles_to_network(const EdgeList& graph) {
  SparseTensor a(Shape{graph.n, graph.n});
  for (auto [u, v] : graph.edges) a.add({u, v}, 1.0);
  TensorNetwork net;
  net.tensors = {a, a, a};
  net.contractions = {{1, 6}, {2, 3}, {4, 5}};
  return net;
}

}  // namespace tnsketch
