#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "cmh/calculus.hpp"
#include "cmh/critical.hpp"
#include "cmh/linsolve.hpp"
#include "cmh/model.hpp"
#include "cmh/types.hpp"

namespace cmh {

/// H-representation with exact rational coefficients: a.x = b equalities and
/// a.x <= b inequalities over R^dim.
struct RationalPolyhedron {
  int dim = 0;
  std::vector<std::pair<VecR, Rat>> equalities;
  std::vector<std::pair<VecR, Rat>> inequalities;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  VecR point;  // feasible/optimal point (Optimal), base point (Unbounded)
  Rat value;   // objective at `point` when Optimal
  VecR ray;    // improving recession direction when Unbounded
};

namespace detail {

/// Dense exact simplex with Bland's rule. Free variables are split as
/// x = u - w; inequalities get slacks; phase 1 minimizes artificials.
class ExactSimplex {
public:
  explicit ExactSimplex(const RationalPolyhedron& poly) : n_(poly.dim) {
    const int m = static_cast<int>(poly.equalities.size() + poly.inequalities.size());
    nslack_ = static_cast<int>(poly.inequalities.size());
    cols_ = 2 * n_ + nslack_ + m;  // artificials uniformly, one per row
    art0_ = 2 * n_ + nslack_;
    t_.setConstant(m, cols_ + 1, Rat(0));
    basis_.assign(m, -1);

    int row = 0, slack = 0;
    auto fill_row = [&](const VecR& a, const Rat& b, bool ineq) {
      for (int j = 0; j < n_; ++j) {
        t_(row, j) = a[j];
        t_(row, n_ + j) = -a[j];
      }
      if (ineq) t_(row, 2 * n_ + slack) = Rat(1);
      t_(row, cols_) = b;
      if (t_(row, cols_) < Rat(0)) t_.row(row) = -t_.row(row);
      ++row;
      if (ineq) ++slack;
    };
    for (const auto& [a, b] : poly.equalities) fill_row(a, b, false);
    for (const auto& [a, b] : poly.inequalities) fill_row(a, b, true);

    for (int i = 0; i < m; ++i) {
      t_(i, art0_ + i) = Rat(1);
      basis_[i] = art0_ + i;
    }
  }

  /// Runs phase 1. Returns false when infeasible.
  bool phase1() {
    VecR cost = zero_vec<Rat>(cols_);
    for (int j = art0_; j < cols_; ++j) cost[j] = Rat(1);
    // Price the artificial basis out of the cost rows first.
    run(cost, art0_);
    Rat obj(0);
    for (int i = 0; i < rows(); ++i)
      if (basis_[i] >= art0_) obj += t_(i, cols_);
    if (!(obj == Rat(0))) return false;

    // Drive zero-valued artificials out of the basis; drop redundant rows.
    for (int i = 0; i < rows(); ++i) {
      if (basis_[i] < art0_) continue;
      int pivot_col = -1;
      for (int j = 0; j < art0_; ++j)
        if (!t_(i, j).is_zero()) {
          pivot_col = j;
          break;
        }
      if (pivot_col >= 0) pivot(i, pivot_col);
    }
    std::vector<int> keep;
    for (int i = 0; i < rows(); ++i)
      if (basis_[i] < art0_) keep.push_back(i);
    if (static_cast<int>(keep.size()) != rows()) {
      MatR nt(static_cast<Eigen::Index>(keep.size()), cols_ + 1);
      std::vector<int> nb;
      for (std::size_t k = 0; k < keep.size(); ++k) {
        nt.row(static_cast<Eigen::Index>(k)) = t_.row(keep[k]);
        nb.push_back(basis_[keep[k]]);
      }
      t_ = std::move(nt);
      basis_ = std::move(nb);
    }
    return true;
  }

  /// Phase 2 on c (minimization over the split variables); artificials are
  /// barred from entering.
  LpStatus phase2(const VecR& cost) {
    return run(cost, art0_);
  }

  VecR extract_point() const {
    VecR x = zero_vec<Rat>(n_);
    for (int i = 0; i < rows(); ++i) {
      int b = basis_[i];
      if (b < n_)
        x[b] += t_(i, cols_);
      else if (b < 2 * n_)
        x[b - n_] -= t_(i, cols_);
    }
    return x;
  }

  VecR extract_ray() const {
    VecR d = zero_vec<Rat>(n_);
    auto add = [&](int var, const Rat& delta) {
      if (var < n_)
        d[var] += delta;
      else if (var < 2 * n_)
        d[var - n_] -= delta;
    };
    add(ray_col_, Rat(1));
    for (int i = 0; i < rows(); ++i) add(basis_[i], -t_(i, ray_col_));
    return d;
  }

private:
  int rows() const { return static_cast<int>(t_.rows()); }

  void pivot(int r, int c) {
    t_.row(r) /= t_(r, c);
    for (int i = 0; i < rows(); ++i) {
      if (i == r || t_(i, c).is_zero()) continue;
      Rat f = t_(i, c);
      t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = c;
  }

  /// Bland-rule simplex minimizing cost over the current feasible basis.
  LpStatus run(const VecR& cost, int entering_limit) {
    while (true) {
      // Reduced costs r_j = c_j - c_B . column_j over the reduced tableau.
      int enter = -1;
      for (int j = 0; j < entering_limit; ++j) {
        Rat rj = cost[j];
        for (int i = 0; i < rows(); ++i) {
          if (cost[basis_[i]].is_zero() || t_(i, j).is_zero()) continue;
          rj -= cost[basis_[i]] * t_(i, j);
        }
        if (rj < Rat(0)) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::Optimal;

      int leave = -1;
      Rat best_ratio(0);
      for (int i = 0; i < rows(); ++i) {
        if (!(Rat(0) < t_(i, enter))) continue;
        Rat ratio = t_(i, cols_) / t_(i, enter);
        if (leave < 0 || ratio < best_ratio ||
            (ratio == best_ratio && basis_[i] < basis_[leave]))   {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) {
        ray_col_ = enter;
        return LpStatus::Unbounded;
      }
      pivot(leave, enter);
    }
  }

  int n_ = 0;
  int nslack_ = 0;
  int cols_ = 0;
  int art0_ = 0;
  int ray_col_ = -1;
  MatR t_;
  std::vector<int> basis_;
};

}  // namespace detail

/// Exact feasibility via phase-1 simplex: a rational feasible point or
/// nothing.
inline std::optional<VecR> lp_feasible(const RationalPolyhedron& poly) {
  detail::ExactSimplex s(poly);
  if (!s.phase1()) return std::nullopt;
  return s.extract_point();
}

/// Exact optimization of objective . x over the polyhedron.
inline LpSolution lp_optimize(const RationalPolyhedron& poly, const VecR& objective,
                              bool maximize) {
  LpSolution out;
  detail::ExactSimplex s(poly);
  if (!s.phase1()) {
    out.status = LpStatus::Infeasible;
    return out;
  }
  const int n = poly.dim;
  VecR cost = zero_vec<Rat>(2 * n + static_cast<int>(poly.inequalities.size()) +
                            static_cast<int>(poly.equalities.size() + poly.inequalities.size()));
  for (int j = 0; j < n; ++j) {
    Rat c = maximize ? -objective[j] : objective[j];
    cost[j] = c;
    cost[n + j] = -c;
  }
  LpStatus st = s.phase2(cost);
  out.status = st;
  out.point = s.extract_point();
  if (st == LpStatus::Optimal) out.value = objective.dot(out.point);
  if (st == LpStatus::Unbounded) out.ray = s.extract_ray();
  return out;
}

/// Indices of inequalities that are implicit equalities (a.x = b forced on
/// the whole polyhedron), found by minimizing a.x per inequality.
inline std::optional<std::vector<int>> implicit_equalities(const RationalPolyhedron& poly) {
  if (!lp_feasible(poly)) return std::nullopt;
  std::vector<int> out;
  for (std::size_t i = 0; i < poly.inequalities.size(); ++i) {
    const auto& [a, b] = poly.inequalities[i];
    LpSolution s = lp_optimize(poly, a, /*maximize=*/false);
    if (s.status == LpStatus::Optimal && s.value == b) out.push_back(static_cast<int>(i));
  }
  return out;
}

/// Affine dimension: -1 when infeasible, else ambient dimension minus the
/// rank of the full (given + implicit) equality system.
inline int affine_dimension(const RationalPolyhedron& poly) {
  auto implicit = implicit_equalities(poly);
  if (!implicit) return -1;
  const int rows = static_cast<int>(poly.equalities.size() + implicit->size());
  if (rows == 0) return poly.dim;
  MatR e(rows, poly.dim);
  int r = 0;
  for (const auto& [a, b] : poly.equalities) e.row(r++) = a.transpose();
  for (int idx : *implicit) e.row(r++) = poly.inequalities[idx].first.transpose();
  return poly.dim - rank_exact(e);
}

struct AffineHull {
  int dim = -1;               // affine dimension, -1 when empty
  std::vector<VecR> points;   // dim + 1 affinely independent members
};

/// Points of the polyhedron spanning its affine hull: a feasible point, then
/// optimizers of +-e_j objectives (unbounded directions contribute x0 + ray),
/// completed by separating functionals until the hull dimension is reached.
inline AffineHull affine_hull_points(const RationalPolyhedron& poly) {
  AffineHull out;
  auto x0 = lp_feasible(poly);
  if (!x0) return out;

  auto implicit = implicit_equalities(poly);
  MatR efull(static_cast<Eigen::Index>(poly.equalities.size() + implicit->size()), poly.dim);
  {
    int r = 0;
    for (const auto& [a, b] : poly.equalities) efull.row(r++) = a.transpose();
    for (int idx : *implicit) efull.row(r++) = poly.inequalities[idx].first.transpose();
  }
  const int target = poly.dim - (efull.rows() > 0 ? rank_exact(efull) : 0);

  out.dim = target;
  out.points.push_back(*x0);
  MatR dirs(0, poly.dim);

  auto try_direction = [&](const VecR& candidate_point) {
    VecR d = candidate_point - *x0;
    MatR trial(dirs.rows() + 1, poly.dim);
    trial.topRows(dirs.rows()) = dirs;
    trial.row(dirs.rows()) = d.transpose();
    if (rank_exact(trial) > static_cast<int>(dirs.rows())) {
      dirs = std::move(trial);
      out.points.push_back(candidate_point);
      return true;
    }
    return false;
  };
  auto optimize_and_collect = [&](const VecR& c, bool maximize) {
    LpSolution s = lp_optimize(poly, c, maximize);
    if (s.status == LpStatus::Optimal) return try_direction(s.point);
    if (s.status == LpStatus::Unbounded) return try_direction(*x0 + s.ray);
    return false;
  };

  // Cheap pass: coordinate objectives.
  for (int j = 0; j < poly.dim && static_cast<int>(dirs.rows()) < target; ++j) {
    VecR ej = zero_vec<Rat>(poly.dim);
    ej[j] = Rat(1);
    optimize_and_collect(ej, true);
    if (static_cast<int>(dirs.rows()) < target) optimize_and_collect(ej, false);
  }

  // Completion: pick functionals vanishing on the directions found but not
  // constant on the affine hull; each adds one dimension.
  while (static_cast<int>(dirs.rows()) < target) {
    std::vector<VecR> kernel =
        dirs.rows() > 0 ? null_space_exact(dirs) : [&] {
          std::vector<VecR> id;
          for (int j = 0; j < poly.dim; ++j) {
            VecR e = zero_vec<Rat>(poly.dim);
            e[j] = Rat(1);
            id.push_back(e);
          }
          return id;
        }();
    const int base_rank = efull.rows() > 0 ? rank_exact(efull) : 0;
    bool progressed = false;
    for (const VecR& c : kernel) {
      MatR trial(efull.rows() + 1, poly.dim);
      if (efull.rows() > 0) trial.topRows(efull.rows()) = efull;
      trial.row(efull.rows()) = c.transpose();
      if (rank_exact(trial) == base_rank) continue;  // constant on the hull
      if (optimize_and_collect(c, true) || optimize_and_collect(c, false)) {
        progressed = true;
        break;
      }
    }
    if (!progressed) throw Error("affine_hull_points: failed to reach hull dimension");
  }
  return out;
}

/// One K_phi cell of the eigenspace: the generator selection, its
/// polyhedron, and a feasible witness point.
struct EigenspaceCell {
  std::vector<int> selection;  // generator index per coordinate (0-based)
  RationalPolyhedron poly;
  VecR witness;
};

/// Builds the polyhedron {x : x_i = p.x + r - lambda >= q.x + s - lambda}
/// for one generator selection.
inline RationalPolyhedron policy_polyhedron(const MapModel<Rat>& m, const Rat& lambda,
                                            const std::vector<int>& selection) {
  RationalPolyhedron poly;
  poly.dim = m.n;
  for (int i = 0; i < m.n; ++i) {
    const auto& gens = m.coords[i].gens;
    const auto& chosen = gens[selection[i]];
    VecR a = -chosen.p;
    a[i] += Rat(1);
    poly.equalities.push_back({a, chosen.r - lambda});
    for (std::size_t g = 0; g < gens.size(); ++g) {
      if (static_cast<int>(g) == selection[i]) continue;
      poly.inequalities.push_back({gens[g].p - chosen.p, chosen.r - gens[g].r});
    }
  }
  return poly;
}

/// Exact eigenspace enumeration E(f) = union of nonempty K_phi over policy
/// selections (one generator per coordinate).
inline std::vector<EigenspaceCell> eigenspace_enumerate(const MapModel<Rat>& m, const Rat& lambda,
                                                        long long cap = 100000) {
  require_valid(m);
  if (!is_pure_max_affine(m))
    throw PreconditionError("eigenspace_enumerate: model must be pure max_affine");
  long long total = 1;
  for (const auto& coord : m.coords) {
    total *= static_cast<long long>(coord.gens.size());
    if (total > cap) throw CapExceeded("eigenspace_enumerate: policy count exceeds cap");
  }

  std::vector<EigenspaceCell> cells;
  std::vector<int> selection(m.n, 0);
  while (true) {
    RationalPolyhedron poly = policy_polyhedron(m, lambda, selection);
    if (auto point = lp_feasible(poly)) {
      EigenspaceCell cell;
      cell.selection = selection;
      cell.poly = std::move(poly);
      cell.witness = *point;
      cells.push_back(std::move(cell));
    }
    int i = 0;
    for (; i < m.n; ++i) {
      if (++selection[i] < static_cast<int>(m.coords[i].gens.size())) break;
      selection[i] = 0;
    }
    if (i == m.n) break;
  }
  return cells;
}

/// Direct membership test: x is in E(f) iff f(x) = lambda + x within tol.
template <class S>
bool eigenspace_membership(const MapModel<S>& m, const S& lambda, const Vec<S>& x, const S& tol) {
  return ScalarOps<S>::leq(eigen_residual(m, lambda, x), tol, ScalarOps<S>::zero());
}

/// Dimension of the eigenspace: affine dimension of the restriction of
/// E(f) to the critical nodes, computed from affine-hull witness points of
/// every nonempty K_phi. The restriction of E(f) is convex, so the affine
/// hull of the collected projections is the affine hull of r_C(E(f)).
inline int eigenspace_dimension(const MapModel<Rat>& m, const Rat& lambda, const CriticalData& cd,
                                long long cap = 100000) {
  std::vector<EigenspaceCell> cells = eigenspace_enumerate(m, lambda, cap);
  if (cells.empty()) return -1;
  std::vector<VecR> projected;
  for (const auto& cell : cells) {
    AffineHull hull = affine_hull_points(cell.poly);
    for (const auto& pt : hull.points) {
      VecR proj(static_cast<Eigen::Index>(cd.nodes.size()));
      for (std::size_t k = 0; k < cd.nodes.size(); ++k) proj[static_cast<Eigen::Index>(k)] = pt[cd.nodes[k] - 1];
      projected.push_back(std::move(proj));
    }
  }
  return affine_span_dimension(projected);
}

}  // namespace cmh
