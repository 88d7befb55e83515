#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cmh/calculus.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace cmh;
using namespace cmh::fixtures;

namespace {

bool rows_equal(const std::vector<VecR>& got, const std::vector<VecR>& want) {
  if (got.size() != want.size()) return false;
  for (const auto& w : want) {
    bool found = false;
    for (const auto& g : got)
      if (g == w) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("subdiff at 0 recovers the running example's rectangular set") {
  auto rect = subdiff_generators(f1(), zero_vec<Rat>(3), Rat(0));
  CHECK(rows_equal(rect.rows[0], {row<Rat>({q(1), q(0), q(0)}), row<Rat>({q(1, 2), q(1, 2), q(0)}),
                                  row<Rat>({q(1, 2), q(0), q(1, 2)})}));
  CHECK(rows_equal(rect.rows[1], {row<Rat>({q(0), q(1), q(0)}), row<Rat>({q(2, 3), q(1, 3), q(0)})}));
  CHECK(rows_equal(rect.rows[2], {row<Rat>({q(0), q(0), q(1)})}));
}

TEST_CASE("subdiff at (0,0,-2): rows 1 and 3 change as computed by hand") {
  VecR v = row<Rat>({q(0), q(0), q(-2)});
  auto rect = subdiff_generators(f1(), v, Rat(0));
  CHECK(rows_equal(rect.rows[0], {row<Rat>({q(1), q(0), q(0)}), row<Rat>({q(1, 2), q(1, 2), q(0)})}));
  CHECK(rows_equal(rect.rows[1], {row<Rat>({q(0), q(1), q(0)}), row<Rat>({q(2, 3), q(1, 3), q(0)})}));
  CHECK(rows_equal(rect.rows[2], {row<Rat>({q(0), q(0), q(1)}), row<Rat>({q(1), q(0), q(0)})}));
}

TEST_CASE("subdiff of the log-sum-exp row is the gradient (0, 1/2, 1/2)") {
  auto rect = subdiff_generators(f2(), f2_eigenvector(), 1e-9);
  REQUIRE(rect.rows[1].size() == 1);
  CHECK(rect.rows[1][0][0] == doctest::Approx(0.0));
  CHECK(rect.rows[1][0][1] == doctest::Approx(0.5));
  CHECK(rect.rows[1][0][2] == doctest::Approx(0.5));
  // Row 3: only x1 is active at the eigenvector.
  REQUIRE(rect.rows[2].size() == 1);
  CHECK(rect.rows[2][0][0] == doctest::Approx(1.0));
}

TEST_CASE("subdiff rejects nonzero tolerance in exact mode") {
  CHECK_THROWS_AS(subdiff_generators(f1(), zero_vec<Rat>(3), Rat(1, 10)), PreconditionError);
}

TEST_CASE("subgradient inequality for every listed generator") {
  std::mt19937_64 rng(37);
  for (const auto& m : {f1(), f3(), f4()}) {
    VecR v = oracles::random_rational_vector(rng, 3);
    auto rect = subdiff_generators(m, v, Rat(0));
    VecR fv = eval(m, v);
    for (int t = 0; t < 50; ++t) {
      VecR x = oracles::random_rational_vector(rng, 3);
      VecR fx = eval(m, x);
      for (int i = 0; i < 3; ++i)
        for (const auto& p : rect.rows[i]) CHECK(fx[i] - fv[i] >= p.dot(x - v));
    }
  }
}

TEST_CASE("directional derivative at 0 drops offsets, keeps active rows") {
  MapModel<Rat> d = directional_derivative(f1(), zero_vec<Rat>(3), Rat(0));
  CHECK(d.coords[0].gens.size() == 3);
  CHECK(d.coords[1].gens.size() == 2);
  CHECK(d.coords[2].gens.size() == 1);
  for (const auto& coord : d.coords)
    for (const auto& g : coord.gens) CHECK(g.r == Rat(0));
  CHECK(homogeneity(d) == Homogeneity::Homogeneous);
}

TEST_CASE("directional derivative of a linear model is the model itself") {
  MapModel<Rat> lin;
  lin.n = 2;
  lin.coords.resize(2);
  lin.coords[0].gens = {{row<Rat>({q(1, 3), q(2, 3)}), q(0)}};
  lin.coords[1].gens = {{row<Rat>({q(1), q(0)}), q(0)}};
  std::mt19937_64 rng(41);
  for (int t = 0; t < 20; ++t) {
    VecR v = oracles::random_rational_vector(rng, 2);
    MapModel<Rat> d = directional_derivative(lin, v, Rat(0));
    VecR x = oracles::random_rational_vector(rng, 2);
    CHECK(eval(d, x) == eval(lin, x));
  }
}

TEST_CASE("directional derivative of F4 at 0 is the permutation matrix map") {
  MapModel<Rat> d = directional_derivative(f4(), zero_vec<Rat>(3), Rat(0));
  for (const auto& coord : d.coords) CHECK(coord.gens.size() == 1);
  CHECK(d.coords[0].gens[0].p == row<Rat>({q(0), q(1), q(0)}));
  CHECK(d.coords[1].gens[0].p == row<Rat>({q(1), q(0), q(0)}));
  CHECK(d.coords[2].gens[0].p == row<Rat>({q(0), q(0), q(1)}));
}

TEST_CASE("additive recession keeps only stochastic generators") {
  MapModel<Rat> m;
  m.n = 2;
  m.coords.resize(2);
  m.coords[0].gens = {{row<Rat>({q(1, 2), q(1, 2)}), q(0)}, {row<Rat>({q(1, 3), q(1, 3)}), q(1)}};
  m.coords[1].gens = {{row<Rat>({q(1, 4), q(1, 4)}), q(2)}};
  auto rec = additive_recession(m);
  CHECK(rec.finite[0]);
  CHECK_FALSE(rec.finite[1]);
  REQUIRE(rec.map.coords[0].gens.size() == 1);
  CHECK(rec.map.coords[0].gens[0].p == row<Rat>({q(1, 2), q(1, 2)}));
  CHECK(rec.map.coords[0].gens[0].r == Rat(0));
}

TEST_CASE("additive recession of the restriction example gives (x2, x2)") {
  MapModel<Rat> gnn = restrict_model(shift_max(), {1, 2});
  // g_NN(x1, x2) = (x2, x2 v 0)
  VecR x = row<Rat>({q(5), q(-3)});
  CHECK(eval(gnn, x) == row<Rat>({q(-3), q(0)}));
  auto rec = additive_recession(gnn);
  CHECK(rec.finite[0]);
  CHECK(rec.finite[1]);
  VecR y = row<Rat>({q(7), q(-4)});
  CHECK(eval(rec.map, y) == row<Rat>({q(-4), q(-4)}));
}

TEST_CASE("additive recession is the identity transformation on homogeneous models") {
  auto rec = additive_recession(f1());
  for (int i = 0; i < 3; ++i) {
    CHECK(rec.finite[i]);
    CHECK(rec.map.coords[i].gens.size() == f1().coords[i].gens.size());
  }
  std::mt19937_64 rng(43);
  VecR x = oracles::random_rational_vector(rng, 3);
  CHECK(eval(rec.map, x) == eval(f1(), x));
}

TEST_CASE("recession consistency: -rho + f(rho + y) decreases to the recession") {
  MapModel<Rat> m;
  m.n = 2;
  m.coords.resize(2);
  m.coords[0].gens = {{row<Rat>({q(1, 2), q(1, 2)}), q(0)}, {row<Rat>({q(1, 3), q(1, 3)}), q(7)}};
  m.coords[1].gens = {{row<Rat>({q(0), q(1)}), q(-1)}, {row<Rat>({q(1, 4), q(0)}), q(9)}};
  auto rec = additive_recession(m);
  std::mt19937_64 rng(47);
  for (int t = 0; t < 20; ++t) {
    VecR y = oracles::random_rational_vector(rng, 2);
    VecR limit = eval(rec.map, y);
    VecR prev;
    bool have_prev = false;
    for (long long rho : {10, 100, 1000}) {
      VecR shifted = y + constant_vec<Rat>(2, Rat(rho));
      VecR val = eval(m, shifted) - constant_vec<Rat>(2, Rat(rho));
      CHECK(leq_componentwise(limit, val));
      if (have_prev) CHECK(leq_componentwise(val, prev));
      prev = val;
      have_prev = true;
    }
    CHECK(prev == limit);  // the sub-1 rows have decayed by rho = 1000
  }
}

TEST_CASE("multiplicative recession zeroes offsets and turns lse into maxima") {
  MapModel<Rat> rec = multiplicative_recession(f1());
  for (std::size_t i = 0; i < rec.coords.size(); ++i) {
    CHECK(rec.coords[i].gens.size() == f1().coords[i].gens.size());
    for (const auto& g : rec.coords[i].gens) CHECK(g.r == Rat(0));
  }

  MapModel<double> recf = multiplicative_recession(f2());
  // Row 2 with weights (0,1,8) becomes max(x2, x3).
  REQUIRE(recf.coords[1].gens.size() == 2);
  VecD x = row<double>({0.3, 1.4, -0.2});
  CHECK(eval_coordinate(recf, 1, x) == doctest::Approx(1.4));
  // Numerical check of the limit mu^-1 log(e^{mu x2} + 8 e^{mu x3}) at mu = 1e3.
  double mu = 1000.0;
  VecD scaled = mu * x;
  double limit_estimate = eval_coordinate(f2(), 1, scaled) / mu;
  CHECK(limit_estimate == doctest::Approx(1.4).epsilon(1e-2));

  // Bihomogeneous models are their own multiplicative recession.
  MapModel<Rat> bi = directional_derivative(f1(), zero_vec<Rat>(3), Rat(0));
  MapModel<Rat> rec2 = multiplicative_recession(bi);
  std::mt19937_64 rng(53);
  VecR y = oracles::random_rational_vector(rng, 3);
  CHECK(eval(rec2, y) == eval(bi, y));
}

TEST_CASE("restriction: the invariant-class example gives (x2, x2 v 0)") {
  MapModel<Rat> r = restrict_model(shift_max(), {1, 2});
  CHECK(r.n == 2);
  CHECK(homogeneity(r) == Homogeneity::Subhomogeneous);
  VecR x = row<Rat>({q(3), q(-1)});
  CHECK(eval(r, x) == row<Rat>({q(-1), q(0)}));
}

TEST_CASE("restriction to the full set changes nothing") {
  MapModel<Rat> r = restrict_model(f1(), {1, 2, 3});
  std::mt19937_64 rng(59);
  for (int t = 0; t < 20; ++t) {
    VecR x = oracles::random_rational_vector(rng, 3);
    CHECK(eval(r, x) == eval(f1(), x));
  }
}

TEST_CASE("restriction of F1 to {3} is y -> y v (-2)") {
  MapModel<Rat> r = restrict_model(f1(), {3});
  CHECK(r.n == 1);
  VecR low = row<Rat>({q(-7)});
  CHECK(eval(r, low) == row<Rat>({q(-2)}));
  VecR high = row<Rat>({q(4)});
  CHECK(eval(r, high) == row<Rat>({q(4)}));
}

TEST_CASE("restriction rejects a log_sum_exp row losing all support") {
  MapModel<double> m;
  m.n = 3;
  m.coords.resize(3);
  m.coords[0].kind = CoordKind::LogSumExp;
  m.coords[0].weights = row<double>({0.0, 0.0, 2.0});  // support {3} only
  m.coords[1].gens = {{row<double>({0.0, 1.0, 0.0}), 0.0}};
  m.coords[2].gens = {{row<double>({0.0, 0.0, 1.0}), 0.0}};
  CHECK_THROWS_AS(restrict_model(m, {1, 2}), ValidationError);
  CHECK_NOTHROW(restrict_model(f2(), {1}));  // the lse row itself is dropped
}

TEST_CASE("lift of x v 0 matches the hand construction") {
  MapModel<Rat> g;
  g.n = 1;
  g.coords.resize(1);
  g.coords[0].gens = {{row<Rat>({q(1)}), q(0)}, {row<Rat>({q(0)}), q(0)}};
  MapModel<Rat> lift = lift_subhomogeneous(g);
  CHECK(lift.n == 2);
  CHECK(homogeneity(lift) == Homogeneity::Homogeneous);
  CHECK(rows_equal({lift.coords[0].gens[0].p, lift.coords[0].gens[1].p},
                   {row<Rat>({q(1), q(0)}), row<Rat>({q(0), q(1)})}));
  REQUIRE(lift.coords[1].gens.size() == 1);
  CHECK(lift.coords[1].gens[0].p == row<Rat>({q(0), q(1)}));
}

TEST_CASE("lift of a homogeneous model only adds the cemetery row") {
  MapModel<Rat> lift = lift_subhomogeneous(f1());
  CHECK(lift.n == 4);
  for (int i = 0; i < 3; ++i)
    for (std::size_t g = 0; g < lift.coords[i].gens.size(); ++g)
      CHECK(lift.coords[i].gens[g].p[3] == Rat(0));
}

TEST_CASE("lift fixed-point round trip") {
  MapModel<Rat> gnn = restrict_model(shift_max(), {1, 2});
  MapModel<Rat> lift = lift_subhomogeneous(gnn);
  VecR z = row<Rat>({q(0), q(0)});
  REQUIRE(eval(gnn, z) == z);
  VecR lifted = row<Rat>({q(0), q(0), q(0)});
  CHECK(eval(lift, lifted) == lifted);
}

TEST_CASE("compose with the identity is the identity transformation") {
  MapModel<Rat> id = identity_model<Rat>(3);
  MapModel<Rat> c = compose(id, f1());
  std::mt19937_64 rng(61);
  for (int t = 0; t < 20; ++t) {
    VecR x = oracles::random_rational_vector(rng, 3);
    CHECK(eval(c, x) == eval(f1(), x));
  }
}

TEST_CASE("power(F4, 2) evaluates like two applications on random points") {
  MapModel<Rat> sq = power(f4(), 2);
  std::mt19937_64 rng(67);
  for (int t = 0; t < 100; ++t) {
    VecR x = oracles::random_rational_vector(rng, 3);
    CHECK(eval(sq, x) == iterate(f4(), x, 2));
  }
}

TEST_CASE("composition cap throws") {
  MapModel<Rat> m = f1();
  CHECK_THROWS_AS(compose(m, m, 2), CapExceeded);
}

TEST_CASE("compose rejects log_sum_exp coordinates") {
  MapModel<double> f = to_float(f1());
  CHECK_NOTHROW(compose(f, f));
  CHECK_THROWS_AS(compose(f2(), f2()), PreconditionError);
}

TEST_CASE("chain rule: support functions of subdiff(compose) match products") {
  std::mt19937_64 rng(71);
  for (int t = 0; t < 40; ++t) {
    MapModel<Rat> m1 = oracles::random_model_fixing_zero(rng, 3);
    MapModel<Rat> m2 = oracles::random_model_fixing_zero(rng, 3);
    MapModel<Rat> c = compose(m1, m2);
    VecR v = oracles::random_rational_vector(rng, 3);
    auto rect_c = subdiff_generators(c, v, Rat(0));
    auto rect_outer = subdiff_generators(m1, eval(m2, v), Rat(0));
    auto rect_inner = subdiff_generators(m2, v, Rat(0));
    for (int dir = 0; dir < 5; ++dir) {
      VecR y = oracles::random_rational_vector(rng, 3);
      // Inner maxima per coordinate.
      VecR inner_sup(3);
      for (int j = 0; j < 3; ++j) {
        bool first = true;
        for (const auto& qrow : rect_inner.rows[j]) {
          Rat val = qrow.dot(y);
          if (first || inner_sup[j] < val) inner_sup[j] = val;
          first = false;
        }
      }
      for (int i = 0; i < 3; ++i) {
        Rat lhs;
        bool first = true;
        for (const auto& p : rect_c.rows[i]) {
          Rat val = p.dot(y);
          if (first || lhs < val) lhs = val;
          first = false;
        }
        Rat rhs;
        first = true;
        for (const auto& p : rect_outer.rows[i]) {
          Rat val = p.dot(inner_sup);
          if (first || rhs < val) rhs = val;
          first = false;
        }
        CHECK(lhs == rhs);
      }
    }
  }
}
