#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cmh/digraph.hpp"
#include "cmh/types.hpp"

namespace cmh {

enum class CoordKind { MaxAffine, LogSumExp };
enum class Homogeneity { Homogeneous, Subhomogeneous };

/// One affine piece p.x + r of a max-affine coordinate. For a monotone
/// (sub)homogeneous coordinate, p is a (sub)stochastic row.
template <class S>
struct Generator {
  Vec<S> p;
  S r;
};

template <class S>
struct Coordinate {
  CoordKind kind = CoordKind::MaxAffine;
  std::vector<Generator<S>> gens;  // MaxAffine: nonempty list
  Vec<S> weights;                  // LogSumExp: nonnegative, >=1 positive entry
};

/// A convex monotone (sub)homogeneous map f: R^n -> R^n given coordinatewise
/// by max-affine generator lists or log-sum-exp weight rows. Immutable after
/// validation; all operations on it are pure.
template <class S>
struct MapModel {
  int n = 0;
  std::vector<Coordinate<S>> coords;

  /// Tolerance for float-mode row-sum and active-set tests; must be 0 in
  /// exact mode. Carried by the model so calculus operations agree on it.
  S row_tol = ScalarOps<S>::default_tol();
};

template <class S>
S row_sum(const Vec<S>& p) {
  S s = ScalarOps<S>::zero();
  for (Eigen::Index j = 0; j < p.size(); ++j) s += p[j];
  return s;
}

template <class S>
bool is_one_sum(const MapModel<S>& m, const Vec<S>& p) {
  return ScalarOps<S>::eq(row_sum(p), ScalarOps<S>::one(), m.row_tol);
}

/// Derived, not stored: a model is homogeneous iff every max-affine
/// generator row sums to one (log-sum-exp coordinates always are).
template <class S>
Homogeneity homogeneity(const MapModel<S>& m) {
  for (const auto& coord : m.coords)
    if (coord.kind == CoordKind::MaxAffine)
      for (const auto& g : coord.gens)
        if (!is_one_sum(m, g.p)) return Homogeneity::Subhomogeneous;
  return Homogeneity::Homogeneous;
}

struct ValidationReport {
  bool ok = true;
  int coordinate = -1;  // 1-based index of first offending coordinate
  int generator = -1;   // 1-based index of first offending generator
  std::string message;
};

template <class S>
ValidationReport validate_model(const MapModel<S>& m) {
  auto fail = [&](int ci, int gi, const std::string& msg) {
    ValidationReport r;
    r.ok = false;
    r.coordinate = ci;
    r.generator = gi;
    std::ostringstream os;
    os << "coordinate " << ci;
    if (gi > 0) os << ", generator " << gi;
    os << ": " << msg;
    r.message = os.str();
    return r;
  };

  if (m.n <= 0) return fail(0, -1, "dimension must be positive");
  if (static_cast<int>(m.coords.size()) != m.n)
    return fail(0, -1, "coordinate count differs from dimension");
  if (ScalarOps<S>::is_exact && !(m.row_tol == ScalarOps<S>::zero()))
    return fail(0, -1, "exact mode requires zero tolerance");

  for (int i = 0; i < m.n; ++i) {
    const auto& coord = m.coords[i];
    if (coord.kind == CoordKind::MaxAffine) {
      if (coord.gens.empty()) return fail(i + 1, -1, "max_affine generator list is empty");
      for (int g = 0; g < static_cast<int>(coord.gens.size()); ++g) {
        const auto& gen = coord.gens[g];
        if (gen.p.size() != m.n) return fail(i + 1, g + 1, "generator row has wrong length");
        for (Eigen::Index j = 0; j < gen.p.size(); ++j)
          if (gen.p[j] < ScalarOps<S>::zero()) return fail(i + 1, g + 1, "negative entry in row");
        S s = row_sum(gen.p);
        if (!ScalarOps<S>::leq(s, ScalarOps<S>::one(), m.row_tol)) {
          std::ostringstream os;
          os << "row sum exceeds 1";
          return fail(i + 1, g + 1, os.str());
        }
        if constexpr (!ScalarOps<S>::is_exact) {
          if (!std::isfinite(ScalarOps<S>::to_double(s)) ||
              !std::isfinite(ScalarOps<S>::to_double(gen.r)))
            return fail(i + 1, g + 1, "non-finite entry");
        }
      }
    } else {
      if constexpr (ScalarOps<S>::is_exact)
        return fail(i + 1, -1, "log_sum_exp coordinates require float mode");
      if (coord.weights.size() != m.n) return fail(i + 1, -1, "weight row has wrong length");
      bool any_positive = false;
      for (Eigen::Index j = 0; j < coord.weights.size(); ++j) {
        if (coord.weights[j] < ScalarOps<S>::zero()) return fail(i + 1, -1, "negative weight");
        if (ScalarOps<S>::zero() < coord.weights[j]) any_positive = true;
      }
      if (!any_positive) return fail(i + 1, -1, "log_sum_exp row has empty support");
    }
  }
  return {};
}

template <class S>
void require_valid(const MapModel<S>& m) {
  ValidationReport r = validate_model(m);
  if (!r.ok) throw ValidationError(r.message);
}

namespace detail {

inline double log_sum_exp_row(const VecD& weights, const VecD& x) {
  // Max-shift keeps the exponentials bounded.
  double shift = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < weights.size(); ++j)
    if (weights[j] > 0.0 && x[j] > shift) shift = x[j];
  double acc = 0.0;
  for (Eigen::Index j = 0; j < weights.size(); ++j)
    if (weights[j] > 0.0) acc += weights[j] * std::exp(x[j] - shift);
  return shift + std::log(acc);
}

inline VecD log_sum_exp_gradient(const VecD& weights, const VecD& x) {
  double shift = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < weights.size(); ++j)
    if (weights[j] > 0.0 && x[j] > shift) shift = x[j];
  VecD grad = zero_vec<double>(weights.size());
  double denom = 0.0;
  for (Eigen::Index j = 0; j < weights.size(); ++j)
    if (weights[j] > 0.0) {
      grad[j] = weights[j] * std::exp(x[j] - shift);
      denom += grad[j];
    }
  grad /= denom;
  return grad;
}

}  // namespace detail

template <class S>
S eval_coordinate(const MapModel<S>& m, int i, const Vec<S>& x) {
  const auto& coord = m.coords[i];
  if (coord.kind == CoordKind::MaxAffine) {
    std::optional<S> best;
    for (const auto& g : coord.gens) {
      S v = g.p.dot(x) + g.r;
      if (!best || *best < v) best = v;
    }
    return *best;
  }
  if constexpr (ScalarOps<S>::is_exact)
    throw ValidationError("log_sum_exp coordinate in exact mode");
  else
    return detail::log_sum_exp_row(coord.weights, x);
}

template <class S>
Vec<S> eval(const MapModel<S>& m, const Vec<S>& x) {
  if (x.size() != m.n) throw std::invalid_argument("eval: dimension mismatch");
  Vec<S> y(m.n);
  for (int i = 0; i < m.n; ++i) y[i] = eval_coordinate(m, i, x);
  return y;
}

template <class S>
Vec<S> iterate(const MapModel<S>& m, Vec<S> x, long long k) {
  if (k < 0) throw std::invalid_argument("iterate: k must be >= 0");
  for (long long i = 0; i < k; ++i) x = eval(m, x);
  return x;
}

/// Graph of the map: arc i->j iff some generator of row i puts mass on j
/// (max_affine) or the weight M_ij is positive (log_sum_exp). For these
/// coordinate kinds this coincides with the lim f_i(nu e_j) = +inf test.
template <class S>
DiGraph graph_of_map(const MapModel<S>& m) {
  DiGraph g;
  for (int i = 1; i <= m.n; ++i) g.add_node(i);
  for (int i = 0; i < m.n; ++i) {
    const auto& coord = m.coords[i];
    if (coord.kind == CoordKind::MaxAffine) {
      for (const auto& gen : coord.gens)
        for (Eigen::Index j = 0; j < gen.p.size(); ++j)
          if (ScalarOps<S>::zero() < gen.p[j]) g.add_arc(i + 1, static_cast<int>(j) + 1);
    } else {
      for (Eigen::Index j = 0; j < coord.weights.size(); ++j)
        if (ScalarOps<S>::zero() < coord.weights[j]) g.add_arc(i + 1, static_cast<int>(j) + 1);
    }
  }
  return g;
}

template <class S>
bool is_pure_max_affine(const MapModel<S>& m) {
  for (const auto& coord : m.coords)
    if (coord.kind != CoordKind::MaxAffine) return false;
  return true;
}

/// Float copy of an exact model (for long iterations where exact arithmetic
/// would be needlessly heavy).
inline MapModel<double> to_float(const MapModel<Rat>& m) {
  MapModel<double> f;
  f.n = m.n;
  f.row_tol = 1e-9;
  f.coords.resize(m.coords.size());
  for (std::size_t i = 0; i < m.coords.size(); ++i) {
    f.coords[i].kind = CoordKind::MaxAffine;
    for (const auto& g : m.coords[i].gens) {
      Generator<double> gd;
      gd.p = VecD(g.p.size());
      for (Eigen::Index j = 0; j < g.p.size(); ++j) gd.p[j] = g.p[j].to_double();
      gd.r = g.r.to_double();
      f.coords[i].gens.push_back(std::move(gd));
    }
  }
  return f;
}

}  // namespace cmh
