#include "tnsketch/network.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "tnsketch/errors.hpp"

namespace tnsketch {

int TensorNetwork::total_modes() const {
  int q = 0;
  for (const auto& t : tensors) q += t.order();
  return q;
}

std::pair<int, Mode> TensorNetwork::mode_owner(Mode global) const {
  if (global < 1) throw ValidationError("global mode numbers are 1-based");
  Mode rem = global;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    int q = tensors[k].order();
    if (rem <= q) return {static_cast<int>(k), rem};
    rem -= q;
  }
  throw ValidationError("global mode " + std::to_string(global) + " out of range");
}

Mode TensorNetwork::global_mode(int tensor, Mode local) const {
  Mode offset = 0;
  for (int k = 0; k < tensor; ++k) offset += tensors[k].order();
  return offset + local;
}

std::int64_t TensorNetwork::mode_size(Mode global) const {
  auto [t, l] = mode_owner(global);
  return tensors[t].shape()[l - 1];
}

std::vector<int> TensorNetwork::mode_degree() const {
  std::vector<int> deg(total_modes() + 1, 0);
  for (const auto& [u, v] : contractions) {
    if (u >= 1 && u < static_cast<int>(deg.size())) ++deg[u];
    if (v >= 1 && v < static_cast<int>(deg.size())) ++deg[v];
  }
  return deg;
}

std::vector<Mode> TensorNetwork::free_modes() const {
  auto deg = mode_degree();
  std::vector<Mode> out;
  for (Mode g = 1; g <= total_modes(); ++g) {
    if (deg[g] == 0) out.push_back(g);
  }
  return out;
}

Diagnostics validate(const TensorNetwork& net) {
  Diagnostics d;
  const int q = net.total_modes();
  std::vector<std::pair<Mode, Mode>> seen;
  for (const auto& [u, v] : net.contractions) {
    if (u < 1 || u > q || v < 1 || v > q) {
      d.problems.push_back("contraction (" + std::to_string(u) + "," + std::to_string(v) +
                           ") references a mode outside 1.." + std::to_string(q));
      continue;
    }
    if (u == v) {
      d.problems.push_back("contraction (" + std::to_string(u) + "," + std::to_string(v) +
                           ") pairs a mode with itself");
      continue;
    }
    if (net.mode_size(u) != net.mode_size(v)) {
      d.problems.push_back("contracted modes " + std::to_string(u) + " and " + std::to_string(v) +
                           " have sizes " + std::to_string(net.mode_size(u)) + " and " +
                           std::to_string(net.mode_size(v)));
    }
    auto key = std::minmax(u, v);
    std::pair<Mode, Mode> norm{key.first, key.second};
    if (std::find(seen.begin(), seen.end(), norm) != seen.end()) {
      d.problems.push_back("duplicate contraction between modes " + std::to_string(u) + " and " +
                           std::to_string(v));
    }
    seen.push_back(norm);
  }
  return d;
}

void validate_or_throw(const TensorNetwork& net) {
  auto d = validate(net);
  if (!d.ok()) {
    std::string msg = "invalid network:";
    for (const auto& p : d.problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
}

namespace {

struct ModeRef {
  int t = 0;  // tensor index, 0-based
  int l = 0;  // local mode, 0-based
  bool operator==(const ModeRef&) const = default;
};

struct Work {
  std::vector<SparseTensor> tensors;
  std::vector<std::pair<ModeRef, ModeRef>> edges;
};

Work to_work(const TensorNetwork& net) {
  Work w;
  w.tensors = net.tensors;
  for (const auto& [u, v] : net.contractions) {
    auto [ut, ul] = net.mode_owner(u);
    auto [vt, vl] = net.mode_owner(v);
    w.edges.push_back({{ut, ul - 1}, {vt, vl - 1}});
  }
  return w;
}

TensorNetwork from_work(const Work& w) {
  TensorNetwork net;
  net.tensors = w.tensors;
  std::vector<Mode> offset(w.tensors.size() + 1, 0);
  for (std::size_t k = 0; k < w.tensors.size(); ++k) {
    offset[k + 1] = offset[k] + w.tensors[k].order();
  }
  for (const auto& [a, b] : w.edges) {
    net.contractions.push_back({offset[a.t] + a.l + 1, offset[b.t] + b.l + 1});
  }
  return net;
}

int degree_of(const Work& w, ModeRef m) {
  int d = 0;
  for (const auto& [a, b] : w.edges) {
    if (a == m) ++d;
    if (b == m) ++d;
  }
  return d;
}

// Shift locals on tensor t after `removed` (sorted, to delete) and an optional
// insertion of `inserted` extra locals at position `at`.
void remap_endpoints(Work& w, int t, const std::vector<int>& removed, int at, int inserted) {
  for (auto& [a, b] : w.edges) {
    for (ModeRef* m : {&a, &b}) {
      if (m->t != t) continue;
      int shift = 0;
      for (int r : removed) {
        if (m->l > r) --shift;
      }
      if (inserted > 0 && m->l > at) shift += inserted;
      m->l += shift;
    }
  }
}

// Contract a same-tensor pair exactly (generalised trace over two modes).
bool apply_trace(Work& w, std::vector<std::string>& log) {
  for (std::size_t e = 0; e < w.edges.size(); ++e) {
    auto [a, b] = w.edges[e];
    if (a.t != b.t) continue;
    if (degree_of(w, a) != 1 || degree_of(w, b) != 1) continue;  // copies come first
    int t = a.t;
    int la = std::min(a.l, b.l), lb = std::max(a.l, b.l);
    const SparseTensor& x = w.tensors[t];
    Shape shape;
    for (int l = 0; l < x.order(); ++l) {
      if (l != la && l != lb) shape.push_back(x.shape()[l]);
    }
    SparseTensor traced(shape);
    for (const auto& [key, v] : x.entries()) {
      if (key[la] != key[lb]) continue;
      MultiIndex reduced;
      for (int l = 0; l < x.order(); ++l) {
        if (l != la && l != lb) reduced.push_back(key[l]);
      }
      traced.add(reduced, v);
    }
    w.tensors[t] = std::move(traced);
    w.edges.erase(w.edges.begin() + e);
    remap_endpoints(w, t, {la, lb}, 0, 0);
    log.push_back("tensor " + std::to_string(t + 1) + ": contracted same-tensor modes " +
                  std::to_string(la + 1) + " and " + std::to_string(lb + 1) + " exactly");
    return true;
  }
  return false;
}

// Fuse the modes of tensor t listed in `locals` (edge order) into one mode at
// position min(locals), keyed by the lexicographic rank of the tuple.
void fuse_modes(Work& w, int t, const std::vector<int>& locals) {
  const SparseTensor& x = w.tensors[t];
  int pos = *std::min_element(locals.begin(), locals.end());
  Shape fused_shape;
  for (int l : locals) fused_shape.push_back(x.shape()[l]);
  std::int64_t fused_size = shape_cells(fused_shape);

  std::vector<int> old_to_new(x.order(), -1);
  Shape new_shape;
  int fused_pos = -1;
  for (int l = 0; l < x.order(); ++l) {
    if (l == pos) {
      fused_pos = static_cast<int>(new_shape.size());
      new_shape.push_back(fused_size);
    } else if (std::find(locals.begin(), locals.end(), l) != locals.end()) {
      continue;
    } else {
      old_to_new[l] = static_cast<int>(new_shape.size());
      new_shape.push_back(x.shape()[l]);
    }
  }
  SparseTensor fused(new_shape);
  for (const auto& [key, v] : x.entries()) {
    MultiIndex nk(new_shape.size());
    MultiIndex tuple;
    for (int l : locals) tuple.push_back(key[l]);
    nk[fused_pos] = linear_index(tuple, fused_shape);
    for (int l = 0; l < x.order(); ++l) {
      if (old_to_new[l] >= 0) nk[old_to_new[l]] = key[l];
    }
    fused.set(nk, v);
  }
  w.tensors[t] = std::move(fused);

  // remap every endpoint on t: dropped locals were all rewired by the caller
  std::vector<int> removed;
  for (int l : locals) {
    if (l != pos) removed.push_back(l);
  }
  std::sort(removed.begin(), removed.end());
  remap_endpoints(w, t, removed, 0, 0);
}

// Merge parallel contractions between one tensor pair into a single
// contraction over reshaped (fused) modes.
bool apply_merge(Work& w, std::vector<std::string>& log) {
  for (std::size_t e = 0; e < w.edges.size(); ++e) {
    auto [a, b] = w.edges[e];
    if (a.t == b.t) continue;
    if (degree_of(w, a) != 1 || degree_of(w, b) != 1) continue;
    std::vector<std::size_t> group{e};
    for (std::size_t f = e + 1; f < w.edges.size(); ++f) {
      auto [c, d] = w.edges[f];
      if (c.t == d.t) continue;
      if (!((c.t == a.t && d.t == b.t) || (c.t == b.t && d.t == a.t))) continue;
      if (degree_of(w, c) != 1 || degree_of(w, d) != 1) continue;
      group.push_back(f);
    }
    if (group.size() < 2) continue;

    int ta = a.t, tb = b.t;
    std::vector<int> locals_a, locals_b;
    for (std::size_t f : group) {
      auto [c, d] = w.edges[f];
      if (c.t == ta) {
        locals_a.push_back(c.l);
        locals_b.push_back(d.l);
      } else {
        locals_a.push_back(d.l);
        locals_b.push_back(c.l);
      }
    }
    // the fused mode lands at the smallest participating local; every other
    // participating local sits above it, so removals do not shift it
    int fused_a = *std::min_element(locals_a.begin(), locals_a.end());
    int fused_b = *std::min_element(locals_b.begin(), locals_b.end());
    fuse_modes(w, ta, locals_a);
    fuse_modes(w, tb, locals_b);

    std::vector<std::pair<ModeRef, ModeRef>> kept;
    for (std::size_t f = 0; f < w.edges.size(); ++f) {
      if (std::find(group.begin(), group.end(), f) == group.end()) kept.push_back(w.edges[f]);
    }
    kept.insert(kept.begin() + e, {{ta, fused_a}, {tb, fused_b}});
    w.edges = std::move(kept);
    log.push_back("merged " + std::to_string(group.size()) + " parallel contractions between tensors " +
                  std::to_string(ta + 1) + " and " + std::to_string(tb + 1));
    return true;
  }
  return false;
}

// Expand a mode used by several contractions into diagonal copies inside its
// own tensor, one copy per contraction. Keeps nnz and norm unchanged.
bool apply_split(Work& w, std::vector<std::string>& log) {
  for (std::size_t t = 0; t < w.tensors.size(); ++t) {
    for (int l = 0; l < w.tensors[t].order(); ++l) {
      ModeRef target{static_cast<int>(t), l};
      std::vector<std::pair<std::size_t, int>> incidences;  // (edge, side 0/1)
      for (std::size_t e = 0; e < w.edges.size(); ++e) {
        if (w.edges[e].first == target) incidences.push_back({e, 0});
        if (w.edges[e].second == target) incidences.push_back({e, 1});
      }
      int c = static_cast<int>(incidences.size());
      if (c < 2) continue;

      const SparseTensor& x = w.tensors[t];
      Shape new_shape;
      for (int j = 0; j < x.order(); ++j) {
        new_shape.push_back(x.shape()[j]);
        if (j == l) {
          for (int extra = 1; extra < c; ++extra) new_shape.push_back(x.shape()[j]);
        }
      }
      SparseTensor expanded(new_shape);
      for (const auto& [key, v] : x.entries()) {
        MultiIndex nk;
        for (int j = 0; j < x.order(); ++j) {
          nk.push_back(key[j]);
          if (j == l) {
            for (int extra = 1; extra < c; ++extra) nk.push_back(key[j]);
          }
        }
        expanded.set(nk, v);
      }
      w.tensors[t] = std::move(expanded);

      // shift locals > l on this tensor, then point each contraction at its copy
      remap_endpoints(w, static_cast<int>(t), {}, l, c - 1);
      for (int j = 0; j < c; ++j) {
        auto [e, side] = incidences[j];
        ModeRef& endpoint = side == 0 ? w.edges[e].first : w.edges[e].second;
        endpoint = ModeRef{static_cast<int>(t), l + j};
      }
      log.push_back("tensor " + std::to_string(t + 1) + " mode " + std::to_string(l + 1) +
                    ": expanded into " + std::to_string(c) + " diagonal copies");
      return true;
    }
  }
  return false;
}

bool apply_pad(Work& w, std::vector<std::string>& log) {
  std::int64_t max_size = 0;
  bool uniform = true;
  for (const auto& t : w.tensors) {
    for (auto n : t.shape()) {
      if (max_size != 0 && n != max_size) uniform = false;
      max_size = std::max(max_size, n);
    }
  }
  if (uniform || max_size == 0) return false;
  for (auto& t : w.tensors) {
    if (t.order() == 0) continue;
    t = pad_modes(t, Shape(t.order(), max_size));
  }
  log.push_back("padded all modes to size " + std::to_string(max_size));
  return true;
}

}  // namespace

NormalizeResult normalize_wlog(const TensorNetwork& net) {
  validate_or_throw(net);
  Work w = to_work(net);
  std::vector<std::string> log;
  // Exact reductions first, copies only after parallel edges are merged.
  for (int guard = 0;; ++guard) {
    if (guard > 100000) throw ValidationError("normalization did not reach a fixpoint");
    if (apply_trace(w, log)) continue;
    if (apply_merge(w, log)) continue;
    if (apply_split(w, log)) continue;
    break;
  }
  apply_pad(w, log);
  NormalizeResult result{from_work(w), std::move(log)};
  validate_or_throw(result.net);
  return result;
}

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace

bool is_acyclic(const TensorNetwork& net) {
  UnionFind uf(static_cast<int>(net.tensors.size()));
  for (const auto& [u, v] : net.contractions) {
    int a = net.mode_owner(u).first;
    int b = net.mode_owner(v).first;
    if (a == b || !uf.unite(a, b)) return false;
  }
  return true;
}

std::vector<int> find_cycle_tensors(const TensorNetwork& net) {
  const int p = static_cast<int>(net.tensors.size());
  std::vector<std::vector<std::pair<int, int>>> adj(p);  // (neighbor, edge id)
  for (std::size_t e = 0; e < net.contractions.size(); ++e) {
    int a = net.mode_owner(net.contractions[e].first).first;
    int b = net.mode_owner(net.contractions[e].second).first;
    if (a == b) return {a};
    adj[a].push_back({b, static_cast<int>(e)});
    adj[b].push_back({a, static_cast<int>(e)});
  }
  std::vector<int> state(p, 0), parent(p, -1), parent_edge(p, -1);
  for (int start = 0; start < p; ++start) {
    if (state[start] != 0) continue;
    std::vector<int> stack{start};
    parent[start] = -1;
    parent_edge[start] = -1;
    while (!stack.empty()) {
      int u = stack.back();
      if (state[u] == 0) state[u] = 1;
      bool advanced = false;
      for (auto [v, e] : adj[u]) {
        if (e == parent_edge[u]) continue;
        if (state[v] == 0) {
          parent[v] = u;
          parent_edge[v] = e;
          stack.push_back(v);
          advanced = true;
          break;
        }
        if (state[v] == 1) {
          std::vector<int> cycle{v};
          for (int w = u; w != v; w = parent[w]) cycle.push_back(w);
          std::reverse(cycle.begin() + 1, cycle.end());
          return cycle;
        }
      }
      if (!advanced) {
        state[u] = 2;
        stack.pop_back();
      }
    }
  }
  return {};
}

std::vector<TensorNetwork> connected_components(const TensorNetwork& net) {
  const int p = static_cast<int>(net.tensors.size());
  UnionFind uf(p);
  for (const auto& [u, v] : net.contractions) {
    uf.unite(net.mode_owner(u).first, net.mode_owner(v).first);
  }
  std::vector<int> comp_of(p, -1);
  std::vector<std::vector<int>> members;
  for (int t = 0; t < p; ++t) {
    int r = uf.find(t);
    if (comp_of[r] < 0) {
      comp_of[r] = static_cast<int>(members.size());
      members.push_back({});
    }
    comp_of[t] = comp_of[r];
    members[comp_of[t]].push_back(t);
  }
  std::vector<TensorNetwork> out(members.size());
  std::vector<int> local_index(p, -1);
  for (std::size_t c = 0; c < members.size(); ++c) {
    for (std::size_t j = 0; j < members[c].size(); ++j) {
      local_index[members[c][j]] = static_cast<int>(j);
      out[c].tensors.push_back(net.tensors[members[c][j]]);
    }
  }
  for (const auto& [u, v] : net.contractions) {
    auto [ut, ul] = net.mode_owner(u);
    auto [vt, vl] = net.mode_owner(v);
    TensorNetwork& target = out[comp_of[ut]];
    target.contractions.push_back(
        {target.global_mode(local_index[ut], ul), target.global_mode(local_index[vt], vl)});
  }
  return out;
}

int default_root(const TensorNetwork& net) {
  if (net.tensors.empty()) throw ValidationError("empty network has no root");
  int best = 0;
  for (std::size_t k = 1; k < net.tensors.size(); ++k) {
    if (net.tensors[k].order() > net.tensors[best].order()) best = static_cast<int>(k);
  }
  return best;
}

RootedTree build_rooted_tree(const TensorNetwork& net, int root) {
  validate_or_throw(net);
  const int p = static_cast<int>(net.tensors.size());
  if (root < 0 || root >= p) throw ValidationError("root tensor index out of range");
  auto deg = net.mode_degree();
  for (Mode g = 1; g <= net.total_modes(); ++g) {
    if (deg[g] != 1) {
      throw ValidationError("rooted tree needs a normalized full network (mode " +
                            std::to_string(g) + " is in " + std::to_string(deg[g]) +
                            " contractions)");
    }
  }
  if (!is_acyclic(net)) throw ValidationError("network is cyclic; no rooted tree exists");
  if (connected_components(net).size() != 1) {
    throw ValidationError("rooted tree needs a connected network");
  }

  // adjacency per tensor ordered by local mode
  struct Link {
    int local;  // 0-based
    int other;
    int other_local;
  };
  std::vector<std::vector<Link>> adj(p);
  for (const auto& [u, v] : net.contractions) {
    auto [ut, ul] = net.mode_owner(u);
    auto [vt, vl] = net.mode_owner(v);
    adj[ut].push_back({ul - 1, vt, vl - 1});
    adj[vt].push_back({vl - 1, ut, ul - 1});
  }
  for (auto& links : adj) {
    std::sort(links.begin(), links.end(), [](const Link& a, const Link& b) { return a.local < b.local; });
  }

  RootedTree tree;
  tree.root = root;
  tree.parent.assign(p, -1);
  tree.children.assign(p, {});
  std::vector<int> parent_local(p, -1);
  std::vector<int> order{root};
  std::vector<bool> seen(p, false);
  seen[root] = true;
  for (std::size_t head = 0; head < order.size(); ++head) {
    int k = order[head];
    for (const auto& link : adj[k]) {
      if (seen[link.other]) continue;
      seen[link.other] = true;
      tree.parent[link.other] = k;
      parent_local[link.other] = link.other_local;
      tree.children[k].push_back(link.other);
      order.push_back(link.other);
    }
  }

  tree.net.tensors.reserve(p);
  tree.applied_perm.assign(p, {});
  for (int k = 0; k < p; ++k) {
    int q = net.tensors[k].order();
    std::vector<Mode> perm;
    if (k == root || q == 0) {
      perm.resize(q);
      std::iota(perm.begin(), perm.end(), 1);
    } else {
      perm.push_back(parent_local[k] + 1);
      for (int l = 0; l < q; ++l) {
        if (l != parent_local[k]) perm.push_back(l + 1);
      }
    }
    tree.applied_perm[k] = perm;
    tree.net.tensors.push_back(permute_modes(net.tensors[k], perm));
  }
  // re-point contractions through the permutations
  std::vector<std::vector<int>> new_local(p);
  for (int k = 0; k < p; ++k) {
    new_local[k].assign(net.tensors[k].order(), -1);
    for (std::size_t j = 0; j < tree.applied_perm[k].size(); ++j) {
      new_local[k][tree.applied_perm[k][j] - 1] = static_cast<int>(j);
    }
  }
  for (const auto& [u, v] : net.contractions) {
    auto [ut, ul] = net.mode_owner(u);
    auto [vt, vl] = net.mode_owner(v);
    tree.net.contractions.push_back({tree.net.global_mode(ut, new_local[ut][ul - 1] + 1),
                                     tree.net.global_mode(vt, new_local[vt][vl - 1] + 1)});
  }
  return tree;
}

TensorNetwork parse_network_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("network JSON parse failure: ") + e.what());
  }
  try {
    TensorNetwork net;
    for (const auto& jt : j.at("tensors")) {
      Shape shape = jt.at("shape").get<Shape>();
      SparseTensor t(shape);
      if (jt.contains("entries")) {
        for (const auto& je : jt.at("entries")) {
          MultiIndex idx = je.at(0).get<MultiIndex>();
          t.add(idx, je.at(1).get<double>());
        }
      }
      net.tensors.push_back(std::move(t));
    }
    if (j.contains("contractions")) {
      for (const auto& jc : j.at("contractions")) {
        net.contractions.push_back({jc.at(0).get<Mode>(), jc.at(1).get<Mode>()});
      }
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("network JSON has an unexpected structure: ") + e.what());
  }
}

std::string network_to_json(const TensorNetwork& net, int indent) {
  nlohmann::json j;
  j["tensors"] = nlohmann::json::array();
  for (const auto& t : net.tensors) {
    nlohmann::json jt;
    jt["shape"] = t.shape();
    jt["entries"] = nlohmann::json::array();
    for (const auto& [i, v] : t.entries()) jt["entries"].push_back({i, v});
    j["tensors"].push_back(std::move(jt));
  }
  j["contractions"] = nlohmann::json::array();
  for (const auto& [u, v] : net.contractions) j["contractions"].push_back({u, v});
  return j.dump(indent);
}

TensorNetwork read_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_network_json(buf.str());
}

void write_network_file(const std::string& path, const TensorNetwork& net) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << network_to_json(net, 2) << '\n';
}

}  // namespace tnsketch
