#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

#include "cmh/rational.hpp"

namespace cmh {

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

using VecR = Vec<Rat>;
using MatR = Mat<Rat>;
using VecD = Vec<double>;
using MatD = Mat<double>;

/// Per-scalar arithmetic policy. Exact scalars compare exactly and reject
/// nonzero tolerances where the contract demands exactness; floats compare
/// within an absolute tolerance.
template <class S>
struct ScalarOps;

template <>
struct ScalarOps<Rat> {
  static constexpr bool is_exact = true;
  static const char* mode_name() { return "exact"; }
  static Rat zero() { return Rat(0); }
  static Rat one() { return Rat(1); }
  static bool eq(const Rat& a, const Rat& b, const Rat& tol) {
    if (!(tol == Rat(0))) return abs(a - b) <= tol;
    return a == b;
  }
  static bool leq(const Rat& a, const Rat& b, const Rat& tol) { return a <= b + tol; }
  static Rat abs_val(const Rat& a) { return abs(a); }
  static double to_double(const Rat& a) { return a.to_double(); }
  static Rat default_tol() { return Rat(0); }
  static Rat dedup_tol() { return Rat(0); }
  static Rat from_double(double d) { return Rat::from_double(d); }
};

template <>
struct ScalarOps<double> {
  static constexpr bool is_exact = false;
  static const char* mode_name() { return "float"; }
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static bool eq(double a, double b, double tol) { return std::abs(a - b) <= tol; }
  static bool leq(double a, double b, double tol) { return a <= b + tol; }
  static double abs_val(double a) { return std::abs(a); }
  static double to_double(double a) { return a; }
  static double default_tol() { return 1e-9; }
  static double dedup_tol() { return 1e-12; }
  static double from_double(double d) { return d; }
};

template <class S>
S sup_norm(const Vec<S>& x) {
  S m = ScalarOps<S>::zero();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    S a = ScalarOps<S>::abs_val(x[i]);
    if (m < a) m = a;
  }
  return m;
}

template <class S>
Vec<S> constant_vec(Eigen::Index n, const S& value) {
  Vec<S> v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = value;
  return v;
}

template <class S>
Vec<S> zero_vec(Eigen::Index n) {
  return constant_vec<S>(n, ScalarOps<S>::zero());
}

template <class S>
bool leq_componentwise(const Vec<S>& a, const Vec<S>& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (!(a[i] <= b[i])) return false;
  return true;
}

template <class S>
Vec<S> cwise_min(const Vec<S>& a, const Vec<S>& b) {
  Vec<S> r(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) r[i] = a[i] < b[i] ? a[i] : b[i];
  return r;
}

template <class S>
Vec<S> cwise_max(const Vec<S>& a, const Vec<S>& b) {
  Vec<S> r(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) r[i] = a[i] > b[i] ? a[i] : b[i];
  return r;
}

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& m) : std::runtime_error(m) {}
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& m) : Error(m) {}
};

struct EigenpairError : Error {
  explicit EigenpairError(const std::string& m) : Error(m) {}
};

struct PreconditionError : Error {
  explicit PreconditionError(const std::string& m) : Error(m) {}
};

struct CapExceeded : Error {
  explicit CapExceeded(const std::string& m) : Error(m) {}
};

}  // namespace cmh
