#include "cmh/digraph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace cmh {

void DiGraph::add_arc(int u, int v) {
  nodes_.insert(u);
  nodes_.insert(v);
  arcs_.insert({u, v});
}

std::vector<int> DiGraph::successors(int u) const {
  std::vector<int> out;
  for (auto it = arcs_.lower_bound({u, INT32_MIN}); it != arcs_.end() && it->first == u; ++it)
    out.push_back(it->second);
  return out;
}

DiGraph DiGraph::restricted_to(const std::vector<int>& keep) const {
  std::set<int> keep_set(keep.begin(), keep.end());
  DiGraph r;
  for (int v : nodes_)
    if (keep_set.count(v)) r.add_node(v);
  for (const auto& [u, v] : arcs_)
    if (keep_set.count(u) && keep_set.count(v)) r.add_arc(u, v);
  return r;
}

DiGraph DiGraph::united_with(const DiGraph& other) const {
  DiGraph r = *this;
  for (int v : other.nodes_) r.add_node(v);
  for (const auto& [u, v] : other.arcs_) r.add_arc(u, v);
  return r;
}

namespace {

struct TarjanState {
  const DiGraph* g = nullptr;
  std::map<int, int> index;
  std::map<int, int> lowlink;
  std::map<int, bool> on_stack;
  std::vector<int> stack;
  int counter = 0;
  std::vector<std::vector<int>> components;

  void run(int v) {
    // Iterative Tarjan; recursion depth is bounded only by |V| but we avoid
    // native stack use for safety on larger random graphs.
    struct Frame {
      int v;
      std::vector<int> succ;
      std::size_t next = 0;
    };
    std::vector<Frame> frames;
    frames.push_back({v, g->successors(v), 0});
    index[v] = lowlink[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;

    while (!frames.empty()) {
      Frame& f = frames.back();
      if (f.next < f.succ.size()) {
        int w = f.succ[f.next++];
        if (!index.count(w)) {
          index[w] = lowlink[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          frames.push_back({w, g->successors(w), 0});
        } else if (on_stack[w]) {
          lowlink[f.v] = std::min(lowlink[f.v], index[w]);
        }
      } else {
        if (lowlink[f.v] == index[f.v]) {
          std::vector<int> comp;
          while (true) {
            int w = stack.back();
            stack.pop_back();
            on_stack[w] = false;
            comp.push_back(w);
            if (w == f.v) break;
          }
          std::sort(comp.begin(), comp.end());
          components.push_back(std::move(comp));
        }
        int done = f.v;
        frames.pop_back();
        if (!frames.empty())
          lowlink[frames.back().v] = std::min(lowlink[frames.back().v], lowlink[done]);
      }
    }
  }
};

}  // namespace

std::vector<std::vector<int>> strong_components(const DiGraph& g) {
  TarjanState st;
  st.g = &g;
  for (int v : g.nodes())
    if (!st.index.count(v)) st.run(v);

  // Canonical order: topological over the condensation (sources first),
  // ties by smallest member node.
  std::map<int, int> comp_of;
  for (std::size_t c = 0; c < st.components.size(); ++c)
    for (int v : st.components[c]) comp_of[v] = static_cast<int>(c);

  std::vector<std::set<int>> succ(st.components.size());
  std::vector<int> indeg(st.components.size(), 0);
  for (const auto& [u, v] : g.arcs()) {
    int cu = comp_of[u], cv = comp_of[v];
    if (cu != cv && succ[cu].insert(cv).second) ++indeg[cv];
  }

  auto cmp = [&](int a, int b) { return st.components[a].front() > st.components[b].front(); };
  std::priority_queue<int, std::vector<int>, decltype(cmp)> ready(cmp);
  for (std::size_t c = 0; c < st.components.size(); ++c)
    if (indeg[c] == 0) ready.push(static_cast<int>(c));

  std::vector<std::vector<int>> ordered;
  while (!ready.empty()) {
    int c = ready.top();
    ready.pop();
    ordered.push_back(st.components[c]);
    for (int d : succ[c])
      if (--indeg[d] == 0) ready.push(d);
  }
  return ordered;
}

bool component_is_nontrivial(const DiGraph& g, const std::vector<int>& component) {
  if (component.size() > 1) return true;
  return !component.empty() && g.has_arc(component.front(), component.front());
}

std::vector<std::vector<int>> final_classes(const DiGraph& g) {
  std::vector<std::vector<int>> comps = strong_components(g);
  std::vector<std::vector<int>> out;
  for (const auto& c : comps) {
    std::set<int> members(c.begin(), c.end());
    bool leaves = false;
    for (int u : c) {
      for (int v : g.successors(u)) {
        if (!members.count(v)) {
          leaves = true;
          break;
        }
      }
      if (leaves) break;
    }
    if (!leaves) out.push_back(c);
  }
  return out;
}

DiGraph compose_arcs(const DiGraph& a, const DiGraph& b) {
  DiGraph r;
  for (int v : a.nodes()) r.add_node(v);
  for (int v : b.nodes()) r.add_node(v);
  for (const auto& [u, m] : a.arcs())
    for (int w : b.successors(m)) r.add_arc(u, w);
  return r;
}

DiGraph graph_power(const DiGraph& g, int k) {
  if (k < 1) throw std::invalid_argument("graph_power: k must be >= 1");
  DiGraph acc = g;
  for (int i = 1; i < k; ++i) acc = compose_arcs(acc, g);
  for (int v : g.nodes()) acc.add_node(v);
  return acc;
}

long long component_cyclicity(const DiGraph& g, const std::vector<int>& component) {
  if (!component_is_nontrivial(g, component))
    throw std::invalid_argument("cyclicity: trivial strong component has no circuit");
  std::set<int> members(component.begin(), component.end());

  std::map<int, long long> level;
  std::deque<int> queue;
  int root = component.front();
  level[root] = 0;
  queue.push_back(root);
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int v : g.successors(u)) {
      if (!members.count(v) || level.count(v)) continue;
      level[v] = level[u] + 1;
      queue.push_back(v);
    }
  }

  long long period = 0;
  for (int u : component)
    for (int v : g.successors(u))
      if (members.count(v)) period = std::gcd(period, level[u] + 1 - level[v]);
  return period;
}

long long cyclicity(const DiGraph& g) {
  long long c = 1;
  for (const auto& comp : strong_components(g))
    c = std::lcm(c, component_cyclicity(g, comp));
  return c;
}

std::string to_dot(const DiGraph& g, const std::vector<std::vector<int>>& clusters,
                   const std::string& name) {
  std::ostringstream os;
  os << "digraph " << name << " {\n";
  std::set<int> clustered;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    os << "  subgraph cluster_" << c << " {\n";
    os << "    label=\"C" << (c + 1) << "\";\n";
    for (int v : clusters[c]) {
      os << "    n" << v << " [label=\"" << v << "\"];\n";
      clustered.insert(v);
    }
    os << "  }\n";
  }
  for (int v : g.nodes())
    if (!clustered.count(v)) os << "  n" << v << " [label=\"" << v << "\"];\n";
  for (const auto& [u, v] : g.arcs()) os << "  n" << u << " -> n" << v << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace cmh
