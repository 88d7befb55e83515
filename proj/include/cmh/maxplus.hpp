#pragma once

#include <optional>
#include <vector>

#include "cmh/digraph.hpp"
#include "cmh/model.hpp"
#include "cmh/types.hpp"

namespace cmh {

/// Square matrix over the max-plus semiring (R union -inf, max, +), with at
/// least one finite entry per row so that f_A maps R^n to R^n.
template <class S>
struct MaxPlusMatrix {
  int n = 0;
  std::vector<std::vector<std::optional<S>>> a;  // nullopt encodes -inf

  const std::optional<S>& at(int i, int j) const { return a[i][j]; }
};

template <class S>
void require_valid(const MaxPlusMatrix<S>& m) {
  if (m.n <= 0 || static_cast<int>(m.a.size()) != m.n)
    throw ValidationError("maxplus: bad shape");
  for (int i = 0; i < m.n; ++i) {
    if (static_cast<int>(m.a[i].size()) != m.n) throw ValidationError("maxplus: bad row length");
    bool finite = false;
    for (int j = 0; j < m.n; ++j)
      if (m.a[i][j]) finite = true;
    if (!finite) throw ValidationError("maxplus: row without finite entry");
  }
}

template <class S>
DiGraph maxplus_graph(const MaxPlusMatrix<S>& m) {
  DiGraph g;
  for (int i = 1; i <= m.n; ++i) g.add_node(i);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j)
      if (m.a[i][j]) g.add_arc(i + 1, j + 1);
  return g;
}

/// Max-affine encoding of f_A(x)_i = max_j (A_ij + x_j).
template <class S>
MapModel<S> maxplus_to_map(const MaxPlusMatrix<S>& m) {
  require_valid(m);
  MapModel<S> model;
  model.n = m.n;
  model.coords.resize(m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j)
      if (m.a[i][j]) {
        Vec<S> dirac = zero_vec<S>(m.n);
        dirac[j] = ScalarOps<S>::one();
        model.coords[i].gens.push_back({dirac, *m.a[i][j]});
      }
  return model;
}

/// Maximum cycle mean rho(A) by Karp's algorithm, run per nontrivial
/// strongly connected component. Exact in exact mode.
template <class S>
S maxplus_rho(const MaxPlusMatrix<S>& m) {
  require_valid(m);
  DiGraph g = maxplus_graph(m);
  std::optional<S> best;
  for (const auto& comp : strong_components(g)) {
    if (!component_is_nontrivial(g, comp)) continue;
    const int k = static_cast<int>(comp.size());
    std::vector<int> local(comp.begin(), comp.end());  // 1-based global ids

    // d[t][v]: max weight of a path of length t from the source to v.
    std::vector<std::vector<std::optional<S>>> d(
        k + 1, std::vector<std::optional<S>>(k, std::nullopt));
    d[0][0] = ScalarOps<S>::zero();
    for (int t = 1; t <= k; ++t)
      for (int u = 0; u < k; ++u) {
        if (!d[t - 1][u]) continue;
        for (int v = 0; v < k; ++v) {
          const auto& w = m.a[local[u] - 1][local[v] - 1];
          if (!w) continue;
          S cand = *d[t - 1][u] + *w;
          if (!d[t][v] || *d[t][v] < cand) d[t][v] = cand;
        }
      }

    for (int v = 0; v < k; ++v) {
      if (!d[k][v]) continue;
      std::optional<S> inner;
      for (int t = 0; t < k; ++t) {
        if (!d[t][v]) continue;
        S mean = (*d[k][v] - *d[t][v]) / S(k - t);
        if (!inner || mean < *inner) inner = mean;
      }
      if (inner && (!best || *best < *inner)) best = inner;
    }
  }
  if (!best) throw Error("maxplus_rho: no circuit (violates row invariant)");
  return *best;
}

/// Kleene star I + A + A^2 + ... over the max-plus semiring, via relaxation.
/// Throws when A has a circuit of positive weight (the star diverges).
template <class S>
MaxPlusMatrix<S> kleene_star(const MaxPlusMatrix<S>& m) {
  MaxPlusMatrix<S> star;
  star.n = m.n;
  star.a = m.a;
  for (int i = 0; i < m.n; ++i) {
    if (!star.a[i][i] || *star.a[i][i] < ScalarOps<S>::zero())
      star.a[i][i] = ScalarOps<S>::zero();
  }
  for (int k = 0; k < m.n; ++k)
    for (int i = 0; i < m.n; ++i) {
      if (!star.a[i][k]) continue;
      for (int j = 0; j < m.n; ++j) {
        if (!star.a[k][j]) continue;
        S cand = *star.a[i][k] + *star.a[k][j];
        if (!star.a[i][j] || *star.a[i][j] < cand) star.a[i][j] = cand;
      }
    }
  for (int i = 0; i < m.n; ++i)
    if (ScalarOps<S>::zero() < *star.a[i][i])
      throw PreconditionError("kleene_star: positive-mean circuit");
  return star;
}

template <class S>
struct MaxPlusEigen {
  S rho = ScalarOps<S>::zero();
  Vec<S> v;
};

/// Max-plus eigenpair of an irreducible matrix: rho by Karp, eigenvector as
/// a Kleene-star column indexed by a node on a zero-mean circuit of
/// A - rho.
template <class S>
MaxPlusEigen<S> maxplus_eigen(const MaxPlusMatrix<S>& m) {
  require_valid(m);
  {
    DiGraph g = maxplus_graph(m);
    auto comps = strong_components(g);
    if (comps.size() != 1)
      throw PreconditionError("maxplus_eigen: matrix is reducible");
  }
  MaxPlusEigen<S> out;
  out.rho = maxplus_rho(m);

  MaxPlusMatrix<S> shifted;
  shifted.n = m.n;
  shifted.a = m.a;
  for (auto& row : shifted.a)
    for (auto& e : row)
      if (e) e = *e - out.rho;

  MaxPlusMatrix<S> star = kleene_star(shifted);

  // Critical node: (shifted x star) has a zero diagonal entry there.
  int critical = -1;
  for (int i = 0; i < m.n && critical < 0; ++i) {
    std::optional<S> plus;
    for (int j = 0; j < m.n; ++j) {
      if (!shifted.a[i][j] || !star.a[j][i]) continue;
      S cand = *shifted.a[i][j] + *star.a[j][i];
      if (!plus || *plus < cand) plus = cand;
    }
    if (plus && ScalarOps<S>::eq(*plus, ScalarOps<S>::zero(), ScalarOps<S>::dedup_tol()))
      critical = i;
  }
  if (critical < 0) throw Error("maxplus_eigen: no zero-mean circuit found");

  out.v = Vec<S>(m.n);
  for (int j = 0; j < m.n; ++j) {
    if (!star.a[j][critical])
      throw Error("maxplus_eigen: star column not finite (matrix not irreducible?)");
    out.v[j] = *star.a[j][critical];
  }
  return out;
}

/// Arcs realizing lambda + v_i = A_ij + v_j.
template <class S>
DiGraph saturation_graph(const MaxPlusMatrix<S>& m, const S& lambda, const Vec<S>& v,
                         const S& tol = ScalarOps<S>::default_tol()) {
  require_valid(m);
  for (int i = 0; i < m.n; ++i) {
    std::optional<S> best;
    for (int j = 0; j < m.n; ++j)
      if (m.a[i][j]) {
        S cand = *m.a[i][j] + v[j];
        if (!best || *best < cand) best = cand;
      }
    if (!ScalarOps<S>::eq(*best, lambda + v[i], tol))
      throw EigenpairError("saturation_graph: (lambda, v) is not a max-plus eigenpair");
  }
  DiGraph sat;
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j)
      if (m.a[i][j] && ScalarOps<S>::eq(*m.a[i][j] + v[j], lambda + v[i], tol))
        sat.add_arc(i + 1, j + 1);
  return sat;
}

/// Max-plus critical graph: arcs inside the nontrivial strongly connected
/// components of the saturation graph.
template <class S>
DiGraph maxplus_critical(const MaxPlusMatrix<S>& m, const S& lambda, const Vec<S>& v,
                         const S& tol = ScalarOps<S>::default_tol()) {
  DiGraph sat = saturation_graph(m, lambda, v, tol);
  DiGraph out;
  for (const auto& comp : strong_components(sat)) {
    if (!component_is_nontrivial(sat, comp)) continue;
    DiGraph sub = sat.restricted_to(comp);
    out = out.united_with(sub);
  }
  return out;
}

}  // namespace cmh
