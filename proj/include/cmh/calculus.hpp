#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "cmh/model.hpp"

namespace cmh {

/// Generator presentation of a rectangular set of (sub)stochastic matrices:
/// per row, a finite list of row vectors. The set denoted is the convex hull
/// of the product rows_1 x ... x rows_n.
template <class S>
struct RectangularSet {
  std::vector<std::vector<Vec<S>>> rows;

  int n() const { return static_cast<int>(rows.size()); }
};

/// Active generators at v, row by row. The convex hull of row i is the
/// subdifferential of f_i at v: max_affine keeps the generators attaining
/// f_i(v) within tol (tol must be 0 in exact mode); log_sum_exp contributes
/// its singleton gradient row.
template <class S>
RectangularSet<S> subdiff_generators(const MapModel<S>& m, const Vec<S>& v, const S& tol) {
  require_valid(m);
  if (ScalarOps<S>::is_exact && !(tol == ScalarOps<S>::zero()))
    throw PreconditionError("subdiff_generators: exact mode forces tol = 0");
  if (tol < ScalarOps<S>::zero()) throw PreconditionError("subdiff_generators: negative tol");

  RectangularSet<S> rect;
  rect.rows.resize(m.n);
  for (int i = 0; i < m.n; ++i) {
    const auto& coord = m.coords[i];
    if (coord.kind == CoordKind::MaxAffine) {
      S fi = eval_coordinate(m, i, v);
      for (const auto& g : coord.gens) {
        S value = g.p.dot(v) + g.r;
        if (ScalarOps<S>::eq(value, fi, tol)) rect.rows[i].push_back(g.p);
      }
      if (rect.rows[i].empty())
        throw Error("subdiff_generators: empty active set (float cancellation)");
    } else {
      if constexpr (!ScalarOps<S>::is_exact)
        rect.rows[i].push_back(detail::log_sum_exp_gradient(coord.weights, v));
    }
  }
  return rect;
}

/// Directional-derivative map f'_v: the bihomogeneous max-affine model whose
/// row-i generators are the active generators at v with zero offsets.
template <class S>
MapModel<S> directional_derivative(const MapModel<S>& m, const Vec<S>& v, const S& tol) {
  RectangularSet<S> rect = subdiff_generators(m, v, tol);
  MapModel<S> d;
  d.n = m.n;
  d.row_tol = m.row_tol;
  d.coords.resize(m.n);
  for (int i = 0; i < m.n; ++i)
    for (const auto& p : rect.rows[i]) d.coords[i].gens.push_back({p, ScalarOps<S>::zero()});
  return d;
}

/// Additive recession of a (sub)homogeneous model: lim -rho + f(rho + y).
/// Max-affine rows keep only the generators with row sum one (offsets kept);
/// a row with none is flagged instead of evaluated. Log-sum-exp rows are
/// already homogeneous and pass through unchanged.
template <class S>
struct RecessionResult {
  MapModel<S> map;            // rows flagged below have an empty generator list
  std::vector<bool> finite;   // finite[i] == false means row i recedes to -inf
};

template <class S>
RecessionResult<S> additive_recession(const MapModel<S>& m) {
  require_valid(m);
  RecessionResult<S> out;
  out.map.n = m.n;
  out.map.row_tol = m.row_tol;
  out.map.coords.resize(m.n);
  out.finite.assign(m.n, true);
  for (int i = 0; i < m.n; ++i) {
    const auto& coord = m.coords[i];
    if (coord.kind == CoordKind::LogSumExp) {
      out.map.coords[i] = coord;
      continue;
    }
    for (const auto& g : coord.gens)
      if (is_one_sum(m, g.p)) out.map.coords[i].gens.push_back(g);
    if (out.map.coords[i].gens.empty()) out.finite[i] = false;
  }
  return out;
}

/// Multiplicative recession lim mu^{-1} f(mu x): the support function of
/// dom f*. Offsets are zeroed; a log-sum-exp row with weights M_i becomes the
/// max of the coordinates in its support.
template <class S>
MapModel<S> multiplicative_recession(const MapModel<S>& m) {
  require_valid(m);
  if (homogeneity(m) != Homogeneity::Homogeneous)
    throw PreconditionError("multiplicative_recession: model must be homogeneous");
  MapModel<S> out;
  out.n = m.n;
  out.row_tol = m.row_tol;
  out.coords.resize(m.n);
  for (int i = 0; i < m.n; ++i) {
    const auto& coord = m.coords[i];
    if (coord.kind == CoordKind::MaxAffine) {
      for (const auto& g : coord.gens) out.coords[i].gens.push_back({g.p, ScalarOps<S>::zero()});
    } else {
      for (Eigen::Index j = 0; j < coord.weights.size(); ++j) {
        if (!(ScalarOps<S>::zero() < coord.weights[j])) continue;
        Vec<S> dirac = zero_vec<S>(m.n);
        dirac[j] = ScalarOps<S>::one();
        out.coords[i].gens.push_back({dirac, ScalarOps<S>::zero()});
      }
    }
  }
  return out;
}

/// Restriction f_NN = r_N o f o i_N to a nonempty node subset (1-based).
/// Generator rows become substochastic in general, so the result is
/// subhomogeneous.
template <class S>
MapModel<S> restrict_model(const MapModel<S>& m, const std::vector<int>& nodes) {
  require_valid(m);
  if (nodes.empty()) throw PreconditionError("restrict: empty node set");
  for (int v : nodes)
    if (v < 1 || v > m.n) throw PreconditionError("restrict: node out of range");
  std::vector<int> sorted = nodes;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  MapModel<S> out;
  out.n = static_cast<int>(sorted.size());
  out.row_tol = m.row_tol;
  out.coords.resize(out.n);
  for (int k = 0; k < out.n; ++k) {
    const auto& coord = m.coords[sorted[k] - 1];
    if (coord.kind == CoordKind::MaxAffine) {
      for (const auto& g : coord.gens) {
        Vec<S> p(out.n);
        for (int j = 0; j < out.n; ++j) p[j] = g.p[sorted[j] - 1];
        out.coords[k].gens.push_back({p, g.r});
      }
    } else {
      out.coords[k].kind = CoordKind::LogSumExp;
      Vec<S> w(out.n);
      bool any = false;
      for (int j = 0; j < out.n; ++j) {
        w[j] = coord.weights[sorted[j] - 1];
        if (ScalarOps<S>::zero() < w[j]) any = true;
      }
      if (!any)
        throw ValidationError("restrict: log_sum_exp row has support disjoint from N");
      out.coords[k].weights = w;
    }
  }
  return out;
}

/// Gunawardena-Keane lift of a subhomogeneous map to a homogeneous map on
/// R^{n+1}: g(x, y) = (y + f(-y + x), y). z is a fixed point of f iff (z, 0)
/// is an eigenvector of the lift with eigenvalue 0.
template <class S>
MapModel<S> lift_subhomogeneous(const MapModel<S>& m) {
  require_valid(m);
  if (!is_pure_max_affine(m))
    throw PreconditionError("lift_subhomogeneous: log_sum_exp rows are already homogeneous");
  MapModel<S> out;
  out.n = m.n + 1;
  out.row_tol = m.row_tol;
  out.coords.resize(out.n);
  for (int i = 0; i < m.n; ++i) {
    for (const auto& g : m.coords[i].gens) {
      Vec<S> p(out.n);
      for (int j = 0; j < m.n; ++j) p[j] = g.p[j];
      p[m.n] = ScalarOps<S>::one() - row_sum(g.p);
      out.coords[i].gens.push_back({p, g.r});
    }
  }
  Vec<S> cemetery = zero_vec<S>(out.n);
  cemetery[m.n] = ScalarOps<S>::one();
  out.coords[m.n].gens.push_back({cemetery, ScalarOps<S>::zero()});
  return out;
}

namespace detail {

template <class S>
bool gen_equal(const Generator<S>& a, const Generator<S>& b, const S& tol) {
  if (!ScalarOps<S>::eq(a.r, b.r, tol)) return false;
  for (Eigen::Index j = 0; j < a.p.size(); ++j)
    if (!ScalarOps<S>::eq(a.p[j], b.p[j], tol)) return false;
  return true;
}

template <class S>
void dedup_generators(std::vector<Generator<S>>& gens, const S& tol) {
  std::sort(gens.begin(), gens.end(), [](const Generator<S>& a, const Generator<S>& b) {
    for (Eigen::Index j = 0; j < a.p.size(); ++j) {
      if (a.p[j] < b.p[j]) return true;
      if (b.p[j] < a.p[j]) return false;
    }
    return a.r < b.r;
  });
  std::vector<Generator<S>> unique;
  for (auto& g : gens)
    if (unique.empty() || !gen_equal(unique.back(), g, tol)) unique.push_back(std::move(g));
  gens.swap(unique);
}

}  // namespace detail

/// Symbolic composition f1 o f2 of pure max-affine models. Row i collects,
/// for each generator (p, r) of f1 row i and each choice of one f2 generator
/// per coordinate in the support of p, the generator
/// (sum_j p_j q^(j), r + sum_j p_j s_j). Duplicates are removed.
template <class S>
MapModel<S> compose(const MapModel<S>& m1, const MapModel<S>& m2,
                    long long cap = 1000000) {
  require_valid(m1);
  require_valid(m2);
  if (m1.n != m2.n) throw PreconditionError("compose: dimension mismatch");
  if (!is_pure_max_affine(m1) || !is_pure_max_affine(m2))
    throw PreconditionError("compose: both models must be pure max_affine");

  // Count the raw product before generating anything.
  long long total = 0;
  for (int i = 0; i < m1.n; ++i) {
    for (const auto& g : m1.coords[i].gens) {
      long long count = 1;
      for (Eigen::Index j = 0; j < g.p.size(); ++j) {
        if (!(ScalarOps<S>::zero() < g.p[j])) continue;
        count *= static_cast<long long>(m2.coords[j].gens.size());
        if (count > cap) throw CapExceeded("compose: generator product exceeds cap");
      }
      total += count;
      if (total > cap) throw CapExceeded("compose: generator product exceeds cap");
    }
  }

  const S dedup_tol = ScalarOps<S>::dedup_tol();
  MapModel<S> out;
  out.n = m1.n;
  out.row_tol = m1.row_tol;
  out.coords.resize(out.n);
  for (int i = 0; i < m1.n; ++i) {
    for (const auto& g : m1.coords[i].gens) {
      std::vector<int> support;
      for (Eigen::Index j = 0; j < g.p.size(); ++j)
        if (ScalarOps<S>::zero() < g.p[j]) support.push_back(static_cast<int>(j));

      std::vector<std::size_t> pick(support.size(), 0);
      while (true) {
        Generator<S> gen;
        gen.p = zero_vec<S>(out.n);
        gen.r = g.r;
        for (std::size_t s = 0; s < support.size(); ++s) {
          const auto& q = m2.coords[support[s]].gens[pick[s]];
          gen.p += g.p[support[s]] * q.p;
          gen.r += g.p[support[s]] * q.r;
        }
        out.coords[i].gens.push_back(std::move(gen));

        // Odometer over the per-coordinate generator choices.
        std::size_t s = 0;
        for (; s < support.size(); ++s) {
          if (++pick[s] < m2.coords[support[s]].gens.size()) break;
          pick[s] = 0;
        }
        if (s == support.size()) break;
        if (support.empty()) break;
      }
    }
    detail::dedup_generators(out.coords[i].gens, dedup_tol);
  }
  return out;
}

template <class S>
MapModel<S> power(const MapModel<S>& m, int k, long long cap = 1000000) {
  if (k < 1) throw PreconditionError("power: k must be >= 1");
  MapModel<S> acc = m;
  for (int i = 1; i < k; ++i) acc = compose(m, acc, cap);
  return acc;
}

}  // namespace cmh
