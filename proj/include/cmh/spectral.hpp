#pragma once

#include <deque>
#include <utility>
#include <vector>

#include "cmh/calculus.hpp"
#include "cmh/critical.hpp"
#include "cmh/model.hpp"

namespace cmh {

enum class IterationStatus { Converged, MaxIter, DivergedBracket };

inline const char* to_string(IterationStatus s) {
  switch (s) {
    case IterationStatus::Converged: return "converged";
    case IterationStatus::MaxIter: return "max_iter";
    case IterationStatus::DivergedBracket: return "diverged-bracket";
  }
  return "?";
}

template <class S>
struct EigenResult {
  S lambda = ScalarOps<S>::zero();
  Vec<S> v;
  S residual = ScalarOps<S>::zero();
  long long iterations = 0;
  IterationStatus status = IterationStatus::MaxIter;
  S bracket_lo = ScalarOps<S>::zero();
  S bracket_hi = ScalarOps<S>::zero();
};

template <class S>
struct VerifyResult {
  bool ok = false;
  S residual = ScalarOps<S>::zero();
};

/// min / max over coordinates of f^k(x0) - f^{k-1}(x0). The lower bound is
/// nondecreasing and the upper bound nonincreasing in k, and both bracket
/// the eigenvalue whenever an eigenvector exists.
template <class S>
std::pair<S, S> eigenvalue_bounds(const MapModel<S>& m, const Vec<S>& x0, long long k) {
  if (k < 1) throw PreconditionError("eigenvalue_bounds: k must be >= 1");
  Vec<S> prev = iterate(m, x0, k - 1);
  Vec<S> next = eval(m, prev);
  S lo = next[0] - prev[0], hi = lo;
  for (Eigen::Index i = 1; i < next.size(); ++i) {
    S d = next[i] - prev[i];
    if (d < lo) lo = d;
    if (hi < d) hi = d;
  }
  return {lo, hi};
}

template <class S>
VerifyResult<S> verify_eigenpair(const MapModel<S>& m, const S& lambda, const Vec<S>& v,
                                 const S& tol) {
  VerifyResult<S> r;
  r.residual = eigen_residual(m, lambda, v);
  r.ok = ScalarOps<S>::leq(r.residual, tol, ScalarOps<S>::zero());
  return r;
}

/// Eigenvector search: brackets the eigenvalue by iterating until the
/// one-step difference envelope is narrow, then runs the damped iteration
/// x <- (x + f(x) - lambda)/2 with periodic re-centering and bracket
/// refreshes. This is a heuristic with an explicit failure status;
/// non-convergence does not prove that no eigenvector exists.
template <class S>
EigenResult<S> find_eigenvector(const MapModel<S>& m, Vec<S> x0, const S& tol,
                                long long max_iter) {
  require_valid(m);
  if (x0.size() == 0) x0 = zero_vec<S>(m.n);
  EigenResult<S> out;

  const S two = S(2);
  const S width_goal = tol / S(10);
  auto one_step_bounds = [&](const Vec<S>& at, const Vec<S>& image) {
    S lo = image[0] - at[0], hi = lo;
    for (Eigen::Index i = 1; i < image.size(); ++i) {
      S d = image[i] - at[i];
      if (d < lo) lo = d;
      if (hi < d) hi = d;
    }
    return std::pair<S, S>(lo, hi);
  };

  // Bracket stage: the one-step difference envelope brackets the eigenvalue
  // and is monotone in k; it narrows to a point only when the cyclicity is
  // one, so a wide bracket is not fatal for the damped stage below.
  long long bracket_budget = std::max<long long>(64, std::min<long long>(max_iter / 2, 65536));
  Vec<S> prev = x0;
  Vec<S> next = eval(m, prev);
  auto [lo, hi] = one_step_bounds(prev, next);
  for (long long k = 1; k < bracket_budget; ++k) {
    if (ScalarOps<S>::leq(hi - lo, width_goal, ScalarOps<S>::zero())) break;
    prev = next;
    next = eval(m, prev);
    std::tie(lo, hi) = one_step_bounds(prev, next);
    ++out.iterations;
  }
  out.bracket_lo = lo;
  out.bracket_hi = hi;
  const bool bracket_narrow = ScalarOps<S>::leq(hi - lo, width_goal, ScalarOps<S>::zero());
  S lambda_hat = (lo + hi) / two;

  // Damped stage: x <- (x + f(x) - lambda)/2 is the half-average of a
  // nonexpansive map; its critical graph carries a loop at every node, so
  // its iterates converge whenever an eigenvector exists, and the periodic
  // refresh corrects lambda from the current one-step envelope.
  Vec<S> x = next;
  for (long long it = 0;; ++it) {
    Vec<S> fx = eval(m, x);
    S res = ScalarOps<S>::zero();
    for (Eigen::Index i = 0; i < fx.size(); ++i) {
      S a = ScalarOps<S>::abs_val(fx[i] - lambda_hat - x[i]);
      if (res < a) res = a;
    }
    if (ScalarOps<S>::leq(res, tol, ScalarOps<S>::zero())) {
      out.status = IterationStatus::Converged;
      out.lambda = lambda_hat;
      out.v = x;
      out.residual = res;
      return out;
    }
    if (it >= max_iter) break;
    ++out.iterations;
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = (x[i] + fx[i] - lambda_hat) / two;
    if (it % 64 == 63) {
      S base = x[m.n - 1];
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] -= base;
      Vec<S> fy = eval(m, x);
      auto [l2, h2] = one_step_bounds(x, fy);
      lambda_hat = (l2 + h2) / two;
    }
  }
  out.status = bracket_narrow ? IterationStatus::MaxIter : IterationStatus::DivergedBracket;
  out.lambda = lambda_hat;
  out.v = x;
  out.residual = eigen_residual(m, lambda_hat, x);
  return out;
}

template <class S>
struct ProjectorResult {
  Vec<S> w;
  long long iterations = 0;
  S residual = ScalarOps<S>::zero();
  IterationStatus status = IterationStatus::MaxIter;
};

namespace detail {

template <class S>
bool step_settled(const Vec<S>& a, const Vec<S>& b, const S& tol) {
  if constexpr (ScalarOps<S>::is_exact) {
    (void)tol;
    return a == b;
  } else {
    return sup_norm<S>(a - b) <= tol;
  }
}

}  // namespace detail

/// Spectral projector f^omega: iterates the normalized map g = f - lambda
/// from a super-eigenvector z (f(z) <= lambda + z, checked with `pre_slack`
/// play in float mode). The sequence is nonincreasing and its limit is an
/// eigenvector agreeing with z on the critical nodes.
template <class S>
ProjectorResult<S> spectral_projector(const MapModel<S>& m, const S& lambda, const Vec<S>& z,
                                      const S& tol, long long max_iter,
                                      const S& pre_slack = ScalarOps<S>::default_tol()) {
  require_valid(m);
  Vec<S> fz = eval(m, z);
  for (Eigen::Index i = 0; i < fz.size(); ++i)
    if (!ScalarOps<S>::leq(fz[i], lambda + z[i], pre_slack))
      throw PreconditionError("spectral_projector: f(z) <= lambda + z fails");

  ProjectorResult<S> out;
  Vec<S> w = z;
  for (long long it = 0; it < max_iter; ++it) {
    Vec<S> next = eval(m, w);
    for (Eigen::Index i = 0; i < next.size(); ++i) next[i] -= lambda;
    ++out.iterations;
    if (detail::step_settled(w, next, tol)) {
      out.w = next;
      out.residual = sup_norm<S>(next - w);
      out.status = IterationStatus::Converged;
      return out;
    }
    w = next;
  }
  out.w = w;
  out.residual = eigen_residual(m, lambda, w);
  out.status = IterationStatus::MaxIter;
  return out;
}

template <class S>
struct OrbitResult {
  int period = 0;
  std::vector<Vec<S>> points;
  S residual = ScalarOps<S>::zero();
  long long iterations = 0;
  IterationStatus status = IterationStatus::MaxIter;
};

/// Periodic-orbit limit of g = f - lambda: iterates until g^{k+c} and g^k
/// agree (c = cyclicity or an upper bound for it), then finds the minimal
/// period among the divisors of c.
template <class S>
OrbitResult<S> periodic_limit(const MapModel<S>& m, const S& lambda, const Vec<S>& x,
                              long long c, const S& tol, long long max_iter) {
  require_valid(m);
  if (c < 1) throw PreconditionError("periodic_limit: cyclicity bound must be >= 1");
  OrbitResult<S> out;

  std::deque<Vec<S>> window;  // last c+1 iterates, oldest first
  window.push_back(x);
  Vec<S> w = x;
  for (long long it = 0; it < max_iter; ++it) {
    Vec<S> next = eval(m, w);
    for (Eigen::Index i = 0; i < next.size(); ++i) next[i] -= lambda;
    w = next;
    window.push_back(w);
    ++out.iterations;
    if (static_cast<long long>(window.size()) > c + 1) window.pop_front();
    if (static_cast<long long>(window.size()) == c + 1 &&
        detail::step_settled(window.front(), window.back(), tol)) {
      long long period = c;
      for (long long d = 1; d < c; ++d) {
        if (c % d != 0) continue;
        if (detail::step_settled(window.front(), window[d], tol)) {
          period = d;
          break;
        }
      }
      out.period = static_cast<int>(period);
      for (long long i = 0; i < period; ++i) out.points.push_back(window[i]);
      out.residual = sup_norm<S>(window.back() - window.front());
      out.status = IterationStatus::Converged;
      return out;
    }
  }
  out.status = IterationStatus::MaxIter;
  out.residual = eigen_residual(m, lambda, w);
  return out;
}

namespace detail {

template <class S>
Vec<S> lattice_limit(const MapModel<S>& m, const S& lambda, Vec<S> z, const S& tol,
                     long long max_iter) {
  for (long long it = 0; it < max_iter; ++it) {
    Vec<S> next = eval(m, z);
    for (Eigen::Index i = 0; i < next.size(); ++i) next[i] -= lambda;
    if (step_settled(z, next, tol)) return next;
    z = next;
  }
  throw Error("lattice operation: iteration budget exhausted");
}

}  // namespace detail

/// Greatest eigenvector below x and y: the limit of (f - lambda)^k (x /\ y).
template <class S>
Vec<S> lattice_meet(const MapModel<S>& m, const S& lambda, const Vec<S>& x, const Vec<S>& y,
                    const S& tol, long long max_iter) {
  require_eigenpair(m, lambda, x, tol);
  require_eigenpair(m, lambda, y, tol);
  return detail::lattice_limit(m, lambda, cwise_min(x, y), tol, max_iter);
}

/// Least eigenvector above x and y: the limit of (f - lambda)^k (x \/ y).
template <class S>
Vec<S> lattice_join(const MapModel<S>& m, const S& lambda, const Vec<S>& x, const Vec<S>& y,
                    const S& tol, long long max_iter) {
  require_eigenpair(m, lambda, x, tol);
  require_eigenpair(m, lambda, y, tol);
  return detail::lattice_limit(m, lambda, cwise_max(x, y), tol, max_iter);
}

/// Existence diagnostic: critical data of the multiplicative recession at
/// its trivial fixed point 0. A single critical class certifies that the
/// map has an eigenvector; several classes prove nothing either way.
template <class S>
CriticalData recession_critical_diagnostic(const MapModel<S>& m) {
  MapModel<S> rec = multiplicative_recession(m);
  return critical_data(rec, zero_vec<S>(rec.n), ScalarOps<S>::zero(),
                       ScalarOps<S>::dedup_tol());
}

}  // namespace cmh
