#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "cmh/calculus.hpp"
#include "cmh/digraph.hpp"
#include "cmh/markov.hpp"
#include "cmh/model.hpp"

namespace cmh {

template <class S>
S eigen_residual(const MapModel<S>& m, const S& lambda, const Vec<S>& v) {
  Vec<S> fv = eval(m, v);
  for (Eigen::Index i = 0; i < fv.size(); ++i) fv[i] = fv[i] - lambda - v[i];
  return sup_norm(fv);
}

template <class S>
void require_eigenpair(const MapModel<S>& m, const S& lambda, const Vec<S>& v, const S& tol) {
  if (tol < ScalarOps<S>::zero()) throw PreconditionError("negative tolerance");
  S res = eigen_residual(m, lambda, v);
  if (!ScalarOps<S>::leq(res, tol, ScalarOps<S>::zero()))
    throw EigenpairError("not an eigenpair: residual exceeds tolerance");
}

namespace detail {

template <class S>
struct RectRecursion {
  const S* row_tol;

  bool one_sum(const Vec<S>& p) const {
    return ScalarOps<S>::eq(row_sum(p), ScalarOps<S>::one(), *row_tol);
  }

  /// Recursion over the live index set. Rows hold vectors that are already
  /// stochastic on the live columns, with support inside the live set.
  DiGraph run(std::map<int, std::vector<Vec<S>>> rows) const {
    // A node whose row has no stochastic vector can never join a final
    // class, and no final-class row may put mass on it; peel such nodes off
    // (and the vectors charging them) until the live rows stabilize.
    bool changed = true;
    while (changed) {
      changed = false;
      std::vector<int> dead;
      for (const auto& [i, vecs] : rows)
        if (vecs.empty()) dead.push_back(i);
      if (dead.empty()) break;
      for (int d : dead) rows.erase(d);
      for (auto& [i, vecs] : rows) {
        std::vector<Vec<S>> kept;
        for (auto& p : vecs) {
          bool charges_dead = false;
          for (int d : dead)
            if (ScalarOps<S>::zero() < p[d - 1]) {
              charges_dead = true;
              break;
            }
          if (!charges_dead) kept.push_back(std::move(p));
        }
        if (kept.size() != vecs.size()) changed = true;
        vecs.swap(kept);
      }
    }
    if (rows.empty()) return DiGraph();

    DiGraph g;
    for (const auto& [i, vecs] : rows) {
      g.add_node(i);
      for (const auto& p : vecs)
        for (Eigen::Index j = 0; j < p.size(); ++j)
          if (ScalarOps<S>::zero() < p[j]) g.add_arc(i, static_cast<int>(j) + 1);
    }

    // Every live node has an out-arc, so final classes are nontrivial and at
    // least one exists; the recursion therefore always makes progress.
    std::set<int> frozen;
    DiGraph answer;
    for (const auto& cls : final_classes(g)) {
      for (int u : cls) {
        frozen.insert(u);
        answer.add_node(u);
        for (int w : g.successors(u))
          answer.add_arc(u, w);  // arcs from a final class stay inside it
      }
    }

    std::map<int, std::vector<Vec<S>>> rest;
    for (auto& [i, vecs] : rows) {
      if (frozen.count(i)) continue;
      std::vector<Vec<S>>& bucket = rest[i];
      for (auto& p : vecs) {
        bool charges_frozen = false;
        for (int u : frozen)
          if (ScalarOps<S>::zero() < p[u - 1]) {
            charges_frozen = true;
            break;
          }
        if (!charges_frozen) bucket.push_back(std::move(p));
      }
    }
    if (rest.empty()) return answer;
    return answer.united_with(run(std::move(rest)));
  }
};

}  // namespace detail

/// Final graph of the convex hull of a rectangular set given by finite lists
/// of (sub)stochastic rows: keep the stochastic vectors per row, freeze the
/// final classes of the induced graph, and recurse on the rest with the
/// vectors supported there.
template <class S>
DiGraph final_graph_of_rect(const RectangularSet<S>& rect,
                            const S& row_tol = ScalarOps<S>::default_tol()) {
  detail::RectRecursion<S> rec{&row_tol};
  std::map<int, std::vector<Vec<S>>> rows;
  for (int i = 0; i < rect.n(); ++i) {
    auto& bucket = rows[i + 1];
    for (const auto& p : rect.rows[i])
      if (rec.one_sum(p)) bucket.push_back(p);
  }
  return rec.run(std::move(rows));
}

/// Critical graph, classes, nodes, cyclicity and class count of a map at a
/// verified eigenpair. Independent of the eigenvector used.
struct CriticalData {
  DiGraph graph;                         // G^c(f)
  std::vector<std::vector<int>> classes; // C_1..C_s, canonical order
  std::vector<int> nodes;                // N^c(f), sorted
  long long cyclicity = 1;               // c(f) = lcm of class cyclicities
  int class_count = 0;                   // m(f)
};

template <class S>
CriticalData critical_data_from_rect(const RectangularSet<S>& rect, const S& row_tol) {
  CriticalData cd;
  cd.graph = final_graph_of_rect(rect, row_tol);
  cd.classes = strong_components(cd.graph);
  cd.class_count = static_cast<int>(cd.classes.size());
  for (const auto& cls : cd.classes) cd.nodes.insert(cd.nodes.end(), cls.begin(), cls.end());
  std::sort(cd.nodes.begin(), cd.nodes.end());
  cd.cyclicity = 1;
  for (const auto& cls : cd.classes)
    cd.cyclicity = std::lcm(cd.cyclicity, component_cyclicity(cd.graph, cls));
  return cd;
}

template <class S>
CriticalData critical_data(const MapModel<S>& m, const Vec<S>& v, const S& lambda, const S& tol) {
  require_eigenpair(m, lambda, v, tol);
  // The active set of f - lambda at v equals the active set of f at v, so no
  // offset shift is needed.
  RectangularSet<S> rect = subdiff_generators(m, v, tol);
  return critical_data_from_rect(rect, m.row_tol);
}

/// A matrix P in the subdifferential with final graph G^c(f): critical rows
/// average the active generators supported inside their class, other rows
/// take any active generator. The postcondition G^f(P) = G^c(f) is checked.
template <class S>
Mat<S> witness_matrix(const MapModel<S>& m, const Vec<S>& v, const S& lambda, const S& tol) {
  require_eigenpair(m, lambda, v, tol);
  RectangularSet<S> rect = subdiff_generators(m, v, tol);
  CriticalData cd = critical_data_from_rect(rect, m.row_tol);

  std::map<int, const std::vector<int>*> class_of;
  for (const auto& cls : cd.classes)
    for (int u : cls) class_of[u] = &cls;

  Mat<S> p(m.n, m.n);
  for (int i = 1; i <= m.n; ++i) {
    auto it = class_of.find(i);
    if (it == class_of.end()) {
      for (Eigen::Index j = 0; j < m.n; ++j) p(i - 1, j) = rect.rows[i - 1].front()[j];
      continue;
    }
    const std::vector<int>& cls = *it->second;
    std::set<int> members(cls.begin(), cls.end());
    Vec<S> acc = zero_vec<S>(m.n);
    int used = 0;
    for (const auto& row : rect.rows[i - 1]) {
      bool inside = true;
      for (Eigen::Index j = 0; j < row.size(); ++j)
        if (ScalarOps<S>::zero() < row[j] && !members.count(static_cast<int>(j) + 1)) {
          inside = false;
          break;
        }
      if (inside && ScalarOps<S>::eq(row_sum(row), ScalarOps<S>::one(), m.row_tol)) {
        acc += row;
        ++used;
      }
    }
    if (used == 0) throw Error("witness_matrix: no class-supported active generator");
    for (Eigen::Index j = 0; j < m.n; ++j) p(i - 1, j) = acc[j] / S(used);
  }

  if (final_graph(p, m.row_tol) != cd.graph)
    throw Error("witness_matrix: postcondition G^f(P) = G^c(f) failed");
  return p;
}

/// Critical classes invariant by every matrix of the subdifferential at v:
/// no listed active generator of a class row puts mass outside the class.
template <class S>
std::vector<std::vector<int>> invariant_critical_classes(const MapModel<S>& m, const Vec<S>& v,
                                                         const S& lambda, const S& tol) {
  require_eigenpair(m, lambda, v, tol);
  RectangularSet<S> rect = subdiff_generators(m, v, tol);
  CriticalData cd = critical_data_from_rect(rect, m.row_tol);

  std::vector<std::vector<int>> out;
  for (const auto& cls : cd.classes) {
    std::set<int> members(cls.begin(), cls.end());
    bool invariant = true;
    for (int u : cls) {
      for (const auto& row : rect.rows[u - 1]) {
        for (Eigen::Index j = 0; j < row.size(); ++j)
          if (ScalarOps<S>::zero() < row[j] && !members.count(static_cast<int>(j) + 1)) {
            invariant = false;
            break;
          }
        if (!invariant) break;
      }
      if (!invariant) break;
    }
    if (invariant) out.push_back(cls);
  }
  if (out.empty() && !cd.classes.empty())
    throw Error("invariant_critical_classes: none found, contradicting existence");
  return out;
}

enum class SectionRule { SmallestNode };

/// A set meeting each critical class at exactly one node.
inline std::vector<int> section(const CriticalData& cd, SectionRule rule = SectionRule::SmallestNode) {
  (void)rule;
  std::vector<int> s;
  for (const auto& cls : cd.classes) s.push_back(cls.front());
  std::sort(s.begin(), s.end());
  return s;
}

/// Validates an explicit section choice.
inline std::vector<int> section(const CriticalData& cd, const std::vector<int>& explicit_nodes) {
  for (const auto& cls : cd.classes) {
    int hits = 0;
    for (int v : explicit_nodes)
      if (std::find(cls.begin(), cls.end(), v) != cls.end()) ++hits;
    if (hits != 1) throw PreconditionError("section: set must meet each critical class exactly once");
  }
  std::set<int> all(cd.nodes.begin(), cd.nodes.end());
  for (int v : explicit_nodes)
    if (!all.count(v)) throw PreconditionError("section: node outside the critical node set");
  std::vector<int> s = explicit_nodes;
  std::sort(s.begin(), s.end());
  return s;
}

}  // namespace cmh
