#pragma once

// Shared fixture maps used across the test suites. F1..F4 are small hand
// checked models with known eigenvalues, critical structure and eigenspaces.

#include <cmath>

#include "cmh/calculus.hpp"
#include "cmh/maxplus.hpp"
#include "cmh/mdp.hpp"
#include "cmh/model.hpp"

namespace cmh::fixtures {

template <class S>
Vec<S> row(std::initializer_list<S> vals) {
  Vec<S> v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (const S& x : vals) v[i++] = x;
  return v;
}

inline Rat q(long long num, long long den = 1) { return Rat(num, den); }

/// F1: f(x) = ( x1 v (x1+x2)/2 v (-3+x3) v (x1+x3)/2,
///              x2 v (2x1+x2)/3 v (-1+x1),
///              x3 v (-2+x1) ),  f(0) = 0.
inline MapModel<Rat> f1() {
  MapModel<Rat> m;
  m.n = 3;
  m.row_tol = Rat(0);
  m.coords.resize(3);
  m.coords[0].gens = {{row<Rat>({q(1), q(0), q(0)}), q(0)},
                      {row<Rat>({q(1, 2), q(1, 2), q(0)}), q(0)},
                      {row<Rat>({q(0), q(0), q(1)}), q(-3)},
                      {row<Rat>({q(1, 2), q(0), q(1, 2)}), q(0)}};
  m.coords[1].gens = {{row<Rat>({q(0), q(1), q(0)}), q(0)},
                      {row<Rat>({q(2, 3), q(1, 3), q(0)}), q(0)},
                      {row<Rat>({q(1), q(0), q(0)}), q(-1)}};
  m.coords[2].gens = {{row<Rat>({q(0), q(0), q(1)}), q(0)},
                      {row<Rat>({q(1), q(0), q(0)}), q(-2)}};
  return m;
}

/// F2: f(x) = ( (x1+x2)/2, log(e^{x2} + 8 e^{x3}), x1 v (-1+x3) );
/// eigenvalue log 2, eigenvector (log 2, 3 log 2, 0).
inline MapModel<double> f2() {
  MapModel<double> m;
  m.n = 3;
  m.coords.resize(3);
  m.coords[0].gens = {{row<double>({0.5, 0.5, 0.0}), 0.0}};
  m.coords[1].kind = CoordKind::LogSumExp;
  m.coords[1].weights = row<double>({0.0, 1.0, 8.0});
  m.coords[2].gens = {{row<double>({1.0, 0.0, 0.0}), 0.0},
                      {row<double>({0.0, 0.0, 1.0}), -1.0}};
  return m;
}

inline VecD f2_eigenvector() {
  const double l2 = std::log(2.0);
  return row<double>({l2, 3 * l2, 0.0});
}

/// F3: f(x) = (x2 v x3, x2, x3); eigenspace is a nonconvex union.
inline MapModel<Rat> f3() {
  MapModel<Rat> m;
  m.n = 3;
  m.row_tol = Rat(0);
  m.coords.resize(3);
  m.coords[0].gens = {{row<Rat>({q(0), q(1), q(0)}), q(0)},
                      {row<Rat>({q(0), q(0), q(1)}), q(0)}};
  m.coords[1].gens = {{row<Rat>({q(0), q(1), q(0)}), q(0)}};
  m.coords[2].gens = {{row<Rat>({q(0), q(0), q(1)}), q(0)}};
  return m;
}

/// F4: the cyclicity-2 map with a1=a2=a3=1:
/// f(x) = ( x2 v (-1+(x1+x3)/2), x1 v (-1+(x2+x3)/2), x3 v (-1+(x1+x2)/2) ).
inline MapModel<Rat> f4() {
  MapModel<Rat> m;
  m.n = 3;
  m.row_tol = Rat(0);
  m.coords.resize(3);
  m.coords[0].gens = {{row<Rat>({q(0), q(1), q(0)}), q(0)},
                      {row<Rat>({q(1, 2), q(0), q(1, 2)}), q(-1)}};
  m.coords[1].gens = {{row<Rat>({q(1), q(0), q(0)}), q(0)},
                      {row<Rat>({q(0), q(1, 2), q(1, 2)}), q(-1)}};
  m.coords[2].gens = {{row<Rat>({q(0), q(0), q(1)}), q(0)},
                      {row<Rat>({q(1, 2), q(1, 2), q(0)}), q(-1)}};
  return m;
}

/// The invariant-class example: f(x) = (x2, x2 v x3, x3).
inline MapModel<Rat> shift_max() {
  MapModel<Rat> m;
  m.n = 3;
  m.row_tol = Rat(0);
  m.coords.resize(3);
  m.coords[0].gens = {{row<Rat>({q(0), q(1), q(0)}), q(0)}};
  m.coords[1].gens = {{row<Rat>({q(0), q(1), q(0)}), q(0)},
                      {row<Rat>({q(0), q(0), q(1)}), q(0)}};
  m.coords[2].gens = {{row<Rat>({q(0), q(0), q(1)}), q(0)}};
  return m;
}

/// The piecewise-affine map k(x) = (x1 v x2, x1 v x2): one critical class
/// {1,2}, eigenspace the diagonal (dimension 1).
inline MapModel<Rat> pair_max() {
  MapModel<Rat> m;
  m.n = 2;
  m.row_tol = Rat(0);
  m.coords.resize(2);
  for (int i = 0; i < 2; ++i)
    m.coords[i].gens = {{row<Rat>({q(1), q(0)}), q(0)}, {row<Rat>({q(0), q(1)}), q(0)}};
  return m;
}

template <class S>
MapModel<S> identity_model(int n) {
  MapModel<S> m;
  m.n = n;
  m.coords.resize(n);
  for (int i = 0; i < n; ++i) {
    Vec<S> p = zero_vec<S>(n);
    p[i] = ScalarOps<S>::one();
    m.coords[i].gens.push_back({p, ScalarOps<S>::zero()});
  }
  return m;
}

/// MDP whose dynamic programming operator is F1 (one action per generator).
inline MdpModel<Rat> f1_mdp() {
  MdpModel<Rat> mdp;
  mdp.states = {"s1", "s2", "s3"};
  MapModel<Rat> m = f1();
  mdp.actions.resize(3);
  for (int i = 0; i < 3; ++i) {
    int k = 0;
    for (const auto& g : m.coords[i].gens) {
      MdpAction<Rat> a;
      a.name = "a" + std::to_string(++k);
      a.reward = g.r;
      a.transition = g.p;
      mdp.actions[i].push_back(std::move(a));
    }
  }
  return mdp;
}

inline MdpModel<Rat> f4_mdp() {
  MdpModel<Rat> mdp;
  mdp.states = {"s1", "s2", "s3"};
  MapModel<Rat> m = f4();
  mdp.actions.resize(3);
  for (int i = 0; i < 3; ++i) {
    int k = 0;
    for (const auto& g : m.coords[i].gens) {
      MdpAction<Rat> a;
      a.name = "a" + std::to_string(++k);
      a.reward = g.r;
      a.transition = g.p;
      mdp.actions[i].push_back(std::move(a));
    }
  }
  return mdp;
}

inline MaxPlusMatrix<Rat> maxplus_2cycle() {
  MaxPlusMatrix<Rat> a;
  a.n = 2;
  a.a = {{std::nullopt, q(0)}, {q(0), std::nullopt}};
  return a;
}

}  // namespace cmh::fixtures
