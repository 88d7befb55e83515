#pragma once

#include <gmpxx.h>

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace cmh {

/// Exact rational scalar. Thin value wrapper around GMP's mpq_class that
/// keeps every result canonicalized and hides gmpxx expression templates,
/// so the type can be used as an Eigen scalar.
class Rat {
public:
  Rat() : v_(0) {}
  Rat(int n) : v_(n) {}
  Rat(long n) : v_(static_cast<long int>(n)) {}
  Rat(long long n) { v_ = make_int(n); }
  Rat(long long num, long long den) {
    if (den == 0) throw std::domain_error("Rat: zero denominator");
    v_ = mpq_class(make_int(num)) / mpq_class(make_int(den));
    v_.canonicalize();
  }
  explicit Rat(const mpq_class& q) : v_(q) { v_.canonicalize(); }
  Rat(double) = delete;  // use Rat::from_double for the exact binary value

  /// Parses "a", "-a" or "a/b". Throws std::invalid_argument on junk.
  static Rat parse(const std::string& text);

  /// Exact value of a finite binary double.
  static Rat from_double(double d) {
    mpq_class q(d);
    q.canonicalize();
    return Rat(q);
  }

  std::string str() const { return v_.get_str(); }
  double to_double() const { return v_.get_d(); }

  const mpq_class& raw() const { return v_; }

  int sign() const { return sgn(v_); }
  bool is_zero() const { return sgn(v_) == 0; }
  bool is_integer() const { return v_.get_den() == 1; }

  friend Rat operator+(const Rat& a, const Rat& b) { return from(a.v_ + b.v_); }
  friend Rat operator-(const Rat& a, const Rat& b) { return from(a.v_ - b.v_); }
  friend Rat operator*(const Rat& a, const Rat& b) { return from(a.v_ * b.v_); }
  friend Rat operator/(const Rat& a, const Rat& b) {
    if (sgn(b.v_) == 0) throw std::domain_error("Rat: division by zero");
    return from(a.v_ / b.v_);
  }
  Rat operator-() const { return from(-v_); }

  Rat& operator+=(const Rat& o) { v_ += o.v_; v_.canonicalize(); return *this; }
  Rat& operator-=(const Rat& o) { v_ -= o.v_; v_.canonicalize(); return *this; }
  Rat& operator*=(const Rat& o) { v_ *= o.v_; v_.canonicalize(); return *this; }
  Rat& operator/=(const Rat& o) { *this = *this / o; return *this; }

  friend bool operator==(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) == 0; }
  friend bool operator!=(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) != 0; }
  friend bool operator<(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) < 0; }
  friend bool operator<=(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) <= 0; }
  friend bool operator>(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) > 0; }
  friend bool operator>=(const Rat& a, const Rat& b) { return cmp(a.v_, b.v_) >= 0; }

  friend std::ostream& operator<<(std::ostream& os, const Rat& r);

private:
  static mpq_class from_raw(const mpq_class& q) { mpq_class c(q); c.canonicalize(); return c; }
  template <class E> static Rat from(const E& expr) {
    Rat r;
    r.v_ = expr;
    r.v_.canonicalize();
    return r;
  }
  static mpz_class make_int(long long n) {
    // mpz_class has no long long constructor on LP64-agnostic paths; go via string.
    return mpz_class(std::to_string(n));
  }

  mpq_class v_;
};

inline Rat abs(const Rat& r) { return r.sign() < 0 ? -r : r; }

Rat parse_rat(const std::string& text);

}  // namespace cmh

namespace Eigen {

template <>
struct NumTraits<cmh::Rat> : GenericNumTraits<cmh::Rat> {
  typedef cmh::Rat Real;
  typedef cmh::Rat NonInteger;
  typedef cmh::Rat Nested;
  typedef cmh::Rat Literal;

  static inline Real epsilon() { return cmh::Rat(0); }
  static inline Real dummy_precision() { return cmh::Rat(0); }
  static inline int digits10() { return 0; }

  enum {
    IsInteger = 0,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 1,
    ReadCost = 8,
    AddCost = 60,
    MulCost = 40,
  };
};

}  // namespace Eigen
