#pragma once

#include <algorithm>
#include <vector>

#include "cmh/digraph.hpp"
#include "cmh/linsolve.hpp"
#include "cmh/types.hpp"

namespace cmh {

/// Arc i->j iff P_ij > 0. Nodes are 1-based.
template <class S>
DiGraph matrix_graph(const Mat<S>& p) {
  DiGraph g;
  for (Eigen::Index i = 0; i < p.rows(); ++i) g.add_node(static_cast<int>(i) + 1);
  for (Eigen::Index i = 0; i < p.rows(); ++i)
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      if (ScalarOps<S>::zero() < p(i, j)) g.add_arc(static_cast<int>(i) + 1, static_cast<int>(j) + 1);
  return g;
}

template <class S>
bool is_substochastic(const Mat<S>& p, const S& tol) {
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    S s = ScalarOps<S>::zero();
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (p(i, j) < ScalarOps<S>::zero()) return false;
      s += p(i, j);
    }
    if (!ScalarOps<S>::leq(s, ScalarOps<S>::one(), tol)) return false;
  }
  return true;
}

template <class S>
bool is_stochastic(const Mat<S>& p, const S& tol) {
  if (!is_substochastic(p, tol)) return false;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    S s = ScalarOps<S>::zero();
    for (Eigen::Index j = 0; j < p.cols(); ++j) s += p(i, j);
    if (!ScalarOps<S>::eq(s, ScalarOps<S>::one(), tol)) return false;
  }
  return true;
}

/// Final classes of a (sub)stochastic matrix: classes of G(P) with no
/// outgoing arc whose submatrix is stochastic. The second condition is what
/// excludes strictly substochastic sinks.
template <class S>
std::vector<std::vector<int>> final_classes_of_matrix(const Mat<S>& p,
                                                      const S& tol = ScalarOps<S>::default_tol()) {
  DiGraph g = matrix_graph(p);
  std::vector<std::vector<int>> out;
  for (const auto& cls : final_classes(g)) {
    bool stochastic_rows = true;
    for (int v : cls) {
      S s = ScalarOps<S>::zero();
      for (Eigen::Index j = 0; j < p.cols(); ++j) s += p(v - 1, j);
      if (!ScalarOps<S>::eq(s, ScalarOps<S>::one(), tol)) {
        stochastic_rows = false;
        break;
      }
    }
    if (stochastic_rows) out.push_back(cls);
  }
  return out;
}

/// Final graph G^f(P): union of the graphs of P restricted to its final
/// classes.
template <class S>
DiGraph final_graph(const Mat<S>& p, const S& tol = ScalarOps<S>::default_tol()) {
  DiGraph out;
  for (const auto& cls : final_classes_of_matrix(p, tol)) {
    for (int u : cls) {
      out.add_node(u);
      for (int v : cls)
        if (ScalarOps<S>::zero() < p(u - 1, v - 1)) out.add_arc(u, v);
    }
  }
  return out;
}

/// Unique stochastic left fixed vector of P_FF for a final class F; all
/// entries positive. Exact mode solves the linear system exactly, float mode
/// checks the residual afterwards.
template <class S>
Vec<S> invariant_measure(const Mat<S>& p, const std::vector<int>& final_class,
                         const S& tol = ScalarOps<S>::default_tol()) {
  const int k = static_cast<int>(final_class.size());
  if (k == 0) throw PreconditionError("invariant_measure: empty class");
  {
    auto classes = final_classes_of_matrix(p, tol);
    std::vector<int> sorted = final_class;
    std::sort(sorted.begin(), sorted.end());
    bool found = false;
    for (const auto& c : classes)
      if (c == sorted) {
        found = true;
        break;
      }
    if (!found) throw PreconditionError("invariant_measure: not a final class of P");
  }

  // Rows 0..k-2: (P_FF^T - I) m = 0; last row: sum m = 1.
  Mat<S> a(k, k);
  Vec<S> b = zero_vec<S>(k);
  for (int r = 0; r < k - 1; ++r)
    for (int c = 0; c < k; ++c) {
      a(r, c) = p(final_class[c] - 1, final_class[r] - 1);
      if (r == c) a(r, c) -= ScalarOps<S>::one();
    }
  for (int c = 0; c < k; ++c) a(k - 1, c) = ScalarOps<S>::one();
  b[k - 1] = ScalarOps<S>::one();

  Vec<S> m(k);
  if constexpr (ScalarOps<S>::is_exact) {
    auto sol = solve_exact(a, b);
    if (!sol) throw Error("invariant_measure: singular system on a final class");
    m = *sol;
  } else {
    auto sol = solve_float(a, b);
    if (!sol) throw Error("invariant_measure: singular system on a final class");
    m = *sol;
    // Residual check of m P_FF = m.
    for (int c = 0; c < k; ++c) {
      double acc = 0.0;
      for (int r = 0; r < k; ++r) acc += m[r] * p(final_class[r] - 1, final_class[c] - 1);
      if (std::abs(acc - m[c]) > 1e-10) throw Error("invariant_measure: residual too large");
    }
  }
  for (int c = 0; c < k; ++c)
    if (!(ScalarOps<S>::zero() < m[c]))
      throw Error("invariant_measure: nonpositive entry on a final class");
  return m;
}

/// Cesaro mean reward of the chain: constant m_F . r_F on each final class,
/// harmonic extension (I - Q) h = R . classvalues on transient nodes.
template <class S>
Vec<S> mean_reward(const Mat<S>& p, const Vec<S>& r,
                   const S& tol = ScalarOps<S>::default_tol()) {
  const Eigen::Index n = p.rows();
  if (!is_stochastic(p, tol)) throw PreconditionError("mean_reward: matrix must be stochastic");
  if (r.size() != n) throw PreconditionError("mean_reward: reward length mismatch");

  Vec<S> mu = zero_vec<S>(n);
  std::vector<bool> is_final(n, false);
  auto classes = final_classes_of_matrix(p, tol);
  for (const auto& cls : classes) {
    Vec<S> m = invariant_measure(p, cls, tol);
    S value = ScalarOps<S>::zero();
    for (std::size_t idx = 0; idx < cls.size(); ++idx) value += m[idx] * r[cls[idx] - 1];
    for (int v : cls) {
      mu[v - 1] = value;
      is_final[v - 1] = true;
    }
  }

  std::vector<int> transient;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!is_final[i]) transient.push_back(static_cast<int>(i));
  if (transient.empty()) return mu;

  const int t = static_cast<int>(transient.size());
  Mat<S> a(t, t);
  Vec<S> b = zero_vec<S>(t);
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < t; ++j) {
      a(i, j) = -p(transient[i], transient[j]);
      if (i == j) a(i, j) += ScalarOps<S>::one();
    }
    for (Eigen::Index j = 0; j < n; ++j)
      if (is_final[j]) b[i] += p(transient[i], j) * mu[j];
  }
  Vec<S> h(t);
  if constexpr (ScalarOps<S>::is_exact) {
    auto sol = solve_exact(a, b);
    if (!sol) throw Error("mean_reward: singular transient solve");
    h = *sol;
  } else {
    auto sol = solve_float(a, b);
    if (!sol) throw Error("mean_reward: singular transient solve");
    h = *sol;
  }
  for (int i = 0; i < t; ++i) mu[transient[i]] = h[i];
  return mu;
}

/// k-th exact matrix power.
template <class S>
Mat<S> matrix_power(const Mat<S>& p, int k) {
  if (k < 1) throw std::invalid_argument("matrix_power: k must be >= 1");
  Mat<S> acc = p;
  for (int i = 1; i < k; ++i) {
    Mat<S> next(p.rows(), p.cols());
    for (Eigen::Index a = 0; a < p.rows(); ++a)
      for (Eigen::Index b = 0; b < p.cols(); ++b) {
        S s = ScalarOps<S>::zero();
        for (Eigen::Index c = 0; c < p.cols(); ++c) s += acc(a, c) * p(c, b);
        next(a, b) = s;
      }
    acc = next;
  }
  return acc;
}

}  // namespace cmh
