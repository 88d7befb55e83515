#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cmh/spectral.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace cmh;
using namespace cmh::fixtures;

namespace {

const double L2 = std::log(2.0);

/// Eigenvectors of F1 have the shape (a, a, b) with a >= b >= a - 2.
VecR f1_eigvec(const Rat& a, const Rat& b) { return row<Rat>({a, a, b}); }

/// From a bounded orbit of g = f - lambda, the pointwise minimum over one
/// window is a super-eigenvector; projecting it gives an eigenvector.
VecD super_from_orbit(const MapModel<double>& m, double lambda, VecD x, int burn, int window) {
  for (int k = 0; k < burn; ++k) {
    VecD fx = eval(m, x);
    for (int i = 0; i < x.size(); ++i) x[i] = fx[i] - lambda;
  }
  VecD z = x;
  for (int k = 0; k < window; ++k) {
    VecD fx = eval(m, x);
    for (int i = 0; i < x.size(); ++i) x[i] = fx[i] - lambda;
    z = cwise_min(z, x);
  }
  return z;
}

}  // namespace

TEST_CASE("eigenvalue bounds: fixed point, log-sum-exp, cyclic fixture") {
  auto [lo1, hi1] = eigenvalue_bounds(f1(), zero_vec<Rat>(3), 5);
  CHECK(lo1 == Rat(0));
  CHECK(hi1 == Rat(0));

  auto [lo2, hi2] = eigenvalue_bounds(f2(), zero_vec<double>(3), 200);
  CHECK(lo2 <= L2 + 1e-12);
  CHECK(L2 <= hi2 + 1e-12);
  CHECK(hi2 - lo2 < 1e-6);

  // F4 has cyclicity 2: the envelope brackets 0 but need not collapse.
  VecR x0 = row<Rat>({q(5), q(-3), q(1)});
  auto [lo4, hi4] = eigenvalue_bounds(f4(), x0, 60);
  CHECK(lo4 <= Rat(0));
  CHECK(Rat(0) <= hi4);

  // Monotone envelope in k.
  auto [plo, phi] = eigenvalue_bounds(f4(), x0, 3);
  CHECK(plo <= lo4);
  CHECK(hi4 <= phi);
}

TEST_CASE("find_eigenvector on F2 reaches log 2") {
  EigenResult<double> r = find_eigenvector(f2(), VecD(), 1e-8, 200000);
  REQUIRE(r.status == IterationStatus::Converged);
  CHECK(std::abs(r.lambda - L2) <= 1e-8);
  CHECK(r.residual <= 1e-8);
  VecD delta = r.v - f2_eigenvector();
  CHECK(delta.maxCoeff() - delta.minCoeff() <= 1e-7);
}

TEST_CASE("find_eigenvector in exact mode: F1 and the identity") {
  EigenResult<Rat> r = find_eigenvector(f1(), VecR(), Rat(0), 100);
  REQUIRE(r.status == IterationStatus::Converged);
  CHECK(r.lambda == Rat(0));
  CHECK(r.bracket_lo == Rat(0));
  CHECK(r.bracket_hi == Rat(0));
  CHECK(eval(f1(), r.v) == r.v);

  MapModel<Rat> id = identity_model<Rat>(4);
  EigenResult<Rat> ri = find_eigenvector(id, VecR(), Rat(0), 1);
  CHECK(ri.status == IterationStatus::Converged);
  CHECK(ri.lambda == Rat(0));
}

TEST_CASE("verify_eigenpair examples") {
  CHECK(verify_eigenpair(f2(), L2, f2_eigenvector(), 1e-9).ok);
  CHECK(verify_eigenpair(f1(), Rat(0), f1_eigvec(q(0), q(-2)), Rat(0)).ok);
  auto bad = verify_eigenpair(f1(), Rat(0), row<Rat>({q(0), q(0), q(-3)}), Rat(0));
  CHECK_FALSE(bad.ok);
  CHECK(bad.residual == Rat(1));  // f_3(0,0,-3) = -2, off by 1
}

TEST_CASE("spectral projector: precondition failure on F1 with z=(0,0,1)") {
  VecR z = row<Rat>({q(0), q(0), q(1)});
  CHECK_THROWS_AS(spectral_projector(f1(), Rat(0), z, Rat(0), 100, Rat(0)), PreconditionError);
}

TEST_CASE("spectral projector: fixed points are left alone") {
  VecR z = f1_eigvec(q(1), q(0));
  auto r = spectral_projector(f1(), Rat(0), z, Rat(0), 10, Rat(0));
  REQUIRE(r.status == IterationStatus::Converged);
  CHECK(r.w == z);
}

TEST_CASE("spectral projector on F3 from (2,1,0)") {
  MapModel<Rat> m = f3();
  VecR z = row<Rat>({q(2), q(1), q(0)});
  auto r = spectral_projector(m, Rat(0), z, Rat(0), 100, Rat(0));
  REQUIRE(r.status == IterationStatus::Converged);
  CHECK(r.w == row<Rat>({q(1), q(1), q(0)}));
  // It coincides with z on the critical nodes {2,3}.
  CHECK(r.w[1] == z[1]);
  CHECK(r.w[2] == z[2]);
}

TEST_CASE("spectral projector: monotone nonincreasing iteration, idempotent") {
  MapModel<Rat> m = f3();
  std::mt19937_64 rng(139);
  for (int t = 0; t < 50; ++t) {
    VecR base = oracles::random_rational_vector(rng, 3);
    VecR z = base;
    z[0] = base[1] > base[2] ? base[1] : base[2];   // on E(f)
    z[0] += abs(oracles::random_rational_vector(rng, 1)[0]);  // super: z1 >= x2 v x3
    VecR fz = eval(m, z);
    REQUIRE(leq_componentwise(fz, z));
    // Manual iteration: componentwise nonincreasing at every step.
    VecR w = z;
    for (int k = 0; k < 5; ++k) {
      VecR next = eval(m, w);
      CHECK(leq_componentwise(next, w));
      w = next;
    }
    auto proj = spectral_projector(m, Rat(0), z, Rat(0), 100, Rat(0));
    REQUIRE(proj.status == IterationStatus::Converged);
    auto again = spectral_projector(m, Rat(0), proj.w, Rat(0), 100, Rat(0));
    CHECK(again.w == proj.w);  // f^omega is a projector
    // Critical coordinates are preserved.
    CHECK(proj.w[1] == z[1]);
    CHECK(proj.w[2] == z[2]);
  }
}

TEST_CASE("projector is monotone on comparable super-eigenvectors") {
  MapModel<Rat> m = f3();
  std::mt19937_64 rng(149);
  for (int t = 0; t < 30; ++t) {
    VecR z = oracles::random_rational_vector(rng, 3);
    z[0] = (z[1] > z[2] ? z[1] : z[2]) + Rat(1 + static_cast<int>(rng() % 3));
    VecR d(3);
    for (int i = 0; i < 3; ++i) d[i] = Rat(static_cast<int>(rng() % 3));
    VecR z2 = z + d;
    if (!leq_componentwise(eval(m, z2), z2)) continue;
    auto p1 = spectral_projector(m, Rat(0), z, Rat(0), 100, Rat(0));
    auto p2 = spectral_projector(m, Rat(0), z2, Rat(0), 100, Rat(0));
    CHECK(leq_componentwise(p1.w, p2.w));
  }
}

TEST_CASE("saturation: f(u) <= u implies equality on critical nodes") {
  MapModel<Rat> m = f3();  // critical nodes {2,3}
  std::mt19937_64 rng(151);
  for (int t = 0; t < 50; ++t) {
    VecR u = oracles::random_rational_vector(rng, 3);
    u[0] = (u[1] > u[2] ? u[1] : u[2]) + Rat(static_cast<int>(rng() % 3));
    VecR fu = eval(m, u);
    if (!leq_componentwise(fu, u)) continue;
    CHECK(fu[1] == u[1]);
    CHECK(fu[2] == u[2]);
  }
}

TEST_CASE("periodic limit of F4 from (1,0,0): period 2") {
  VecR x = row<Rat>({q(1), q(0), q(0)});
  auto orbit = periodic_limit(f4(), Rat(0), x, 2, Rat(0), 1000);
  REQUIRE(orbit.status == IterationStatus::Converged);
  CHECK(orbit.period == 2);
  REQUIRE(orbit.points.size() == 2);
  // Orbit alternates (1,0,0) <-> (0,1,0); detection may start at either.
  VecR a = row<Rat>({q(1), q(0), q(0)}), b = row<Rat>({q(0), q(1), q(0)});
  CHECK(((orbit.points[0] == a && orbit.points[1] == b) ||
         (orbit.points[0] == b && orbit.points[1] == a)));
  CHECK(orbit.residual == Rat(0));
}

TEST_CASE("periodic limit: fixed points have period 1") {
  auto orbit = periodic_limit(f1(), Rat(0), f1_eigvec(q(2), q(1)), 4, Rat(0), 100);
  REQUIRE(orbit.status == IterationStatus::Converged);
  CHECK(orbit.period == 1);
}

TEST_CASE("periodic limit on F1 converges to period 1 from random points") {
  // c(F1) = 1; run in float mode since the averaging rows only converge
  // geometrically.
  MapModel<double> m = to_float(f1());
  std::mt19937_64 rng(157);
  for (int t = 0; t < 20; ++t) {
    VecD x = oracles::random_double_vector(rng, 3);
    auto orbit = periodic_limit(m, 0.0, x, 1, 1e-9, 20000);
    REQUIRE(orbit.status == IterationStatus::Converged);
    CHECK(orbit.period == 1);
    CHECK(orbit.residual <= 1e-9);
  }
}

TEST_CASE("lattice meet and join on F3") {
  MapModel<Rat> m = f3();
  VecR x = row<Rat>({q(1), q(1), q(0)});
  VecR y = row<Rat>({q(1), q(0), q(1)});
  VecR meet = lattice_meet(m, Rat(0), x, y, Rat(0), 100);
  CHECK(meet == row<Rat>({q(0), q(0), q(0)}));
  VecR join = lattice_join(m, Rat(0), x, y, Rat(0), 100);
  CHECK(join == row<Rat>({q(1), q(1), q(1)}));
  CHECK(lattice_meet(m, Rat(0), x, x, Rat(0), 100) == x);

  VecR low = row<Rat>({q(0), q(0), q(0)});
  VecR high = row<Rat>({q(2), q(2), q(2)});
  CHECK(lattice_meet(m, Rat(0), low, high, Rat(0), 100) == low);
  CHECK(lattice_join(m, Rat(0), low, high, Rat(0), 100) == high);
}

TEST_CASE("lattice bounds are the tightest among sampled eigenvectors") {
  MapModel<Rat> m = f3();
  VecR x = row<Rat>({q(2), q(2), q(-1)});
  VecR y = row<Rat>({q(2), q(0), q(2)});
  VecR meet = lattice_meet(m, Rat(0), x, y, Rat(0), 100);
  std::mt19937_64 rng(163);
  for (int t = 0; t < 100; ++t) {
    VecR w = oracles::random_rational_vector(rng, 3);
    w[0] = w[1] > w[2] ? w[1] : w[2];
    if (leq_componentwise(w, x) && leq_componentwise(w, y)) CHECK(leq_componentwise(w, meet));
  }
}

TEST_CASE("lattice rejects non-fixed arguments") {
  MapModel<Rat> m = f3();
  VecR bad = row<Rat>({q(0), q(1), q(2)});  // f(bad) != bad
  CHECK_THROWS_AS(lattice_meet(m, Rat(0), bad, bad, Rat(0), 100), EigenpairError);
}

TEST_CASE("two eigenvectors differ by a classwise constant (fixtures)") {
  // F1: classes {1,2}, {3}.
  VecR v1 = f1_eigvec(q(0), q(0)), v2 = f1_eigvec(q(3), q(2));
  VecR d = v2 - v1;
  CHECK(d[0] == d[1]);
  // F4: classes {1,2}, {3}.
  MapModel<Rat> m4 = f4();
  VecR w1 = row<Rat>({q(0), q(0), q(0)}), w2 = row<Rat>({q(0), q(0), q(1)});
  REQUIRE(eval(m4, w1) == w1);
  REQUIRE(eval(m4, w2) == w2);
  VecR dd = w2 - w1;
  CHECK(dd[0] == dd[1]);
}

TEST_CASE("equality on the critical nodes implies equality (projector round trip)") {
  MapModel<Rat> m = f3();  // N^c = {2,3}
  std::mt19937_64 rng(167);
  for (int t = 0; t < 30; ++t) {
    VecR v = oracles::random_rational_vector(rng, 3);
    v[0] = v[1] > v[2] ? v[1] : v[2];
    REQUIRE(eval(m, v) == v);
    VecR z = v;
    z[0] += Rat(1 + static_cast<int>(rng() % 4));  // perturb off-critical, stay super
    auto proj = spectral_projector(m, Rat(0), z, Rat(0), 100, Rat(0));
    CHECK(proj.w == v);  // same critical values force the same eigenvector
  }
}

TEST_CASE("orbit lengths divide the cyclicity on random models") {
  std::mt19937_64 rng(173);
  int done = 0;
  for (int t = 0; t < 60 && done < 40; ++t) {
    int n = 2 + static_cast<int>(rng() % 5);  // n <= 6
    MapModel<Rat> m = oracles::random_model_fixing_zero(rng, n);
    CriticalData cd = critical_data(m, zero_vec<Rat>(n), Rat(0), Rat(0));
    MapModel<double> mf = to_float(m);
    VecD x = oracles::random_double_vector(rng, n);
    auto orbit = periodic_limit(mf, 0.0, x, cd.cyclicity, 1e-9, 200000);
    if (orbit.status != IterationStatus::Converged) continue;
    ++done;
    CHECK(cd.cyclicity % orbit.period == 0);
  }
  CHECK(done >= 30);
}

TEST_CASE("a periodic orbit yields a fixed point from its pointwise minimum") {
  // Exact version on F4.
  MapModel<Rat> m = f4();
  VecR x = row<Rat>({q(1), q(0), q(0)});
  auto orbit = periodic_limit(m, Rat(0), x, 2, Rat(0), 100);
  REQUIRE(orbit.status == IterationStatus::Converged);
  VecR z = orbit.points[0];
  for (const auto& p : orbit.points) z = cwise_min(z, p);
  auto proj = spectral_projector(m, Rat(0), z, Rat(0), 1000, Rat(0));
  REQUIRE(proj.status == IterationStatus::Converged);
  CHECK(eval(m, proj.w) == proj.w);

  // Float version on random models.
  std::mt19937_64 rng(179);
  int done = 0;
  for (int t = 0; t < 40 && done < 20; ++t) {
    int n = 2 + static_cast<int>(rng() % 4);
    MapModel<Rat> mr = oracles::random_model_fixing_zero(rng, n);
    CriticalData cd = critical_data(mr, zero_vec<Rat>(n), Rat(0), Rat(0));
    MapModel<double> mf = to_float(mr);
    VecD x0 = oracles::random_double_vector(rng, n);
    auto orb = periodic_limit(mf, 0.0, x0, cd.cyclicity, 1e-10, 200000);
    if (orb.status != IterationStatus::Converged) continue;
    VecD z = orb.points[0];
    for (const auto& p : orb.points) z = cwise_min(z, p);
    auto proj = spectral_projector(mf, 0.0, z, 1e-10, 200000, 1e-8);
    if (proj.status != IterationStatus::Converged) continue;
    ++done;
    CHECK(eigen_residual(mf, 0.0, proj.w) <= 1e-8);
  }
  CHECK(done >= 10);
}

TEST_CASE("projected perturbations of the F2 eigenvector agree after normalization") {
  MapModel<double> m = f2();
  VecD v = f2_eigenvector();
  std::mt19937_64 rng(181);
  auto normalize = [](VecD w) {
    double base = w[w.size() - 1];
    for (int i = 0; i < w.size(); ++i) w[i] -= base;
    return w;
  };
  VecD z1 = v + constant_vec<double>(3, 0.5);  // exact super-eigenvector
  auto p1 = spectral_projector(m, L2, z1, 1e-12, 100000, 1e-9);
  REQUIRE(p1.status == IterationStatus::Converged);
  VecD z2 = super_from_orbit(m, L2, oracles::random_double_vector(rng, 3), 300, 4);
  auto p2 = spectral_projector(m, L2, z2, 1e-12, 100000, 1e-7);
  REQUIRE(p2.status == IterationStatus::Converged);
  VecD n1 = normalize(p1.w), n2 = normalize(p2.w), nv = normalize(v);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(n1[i] - nv[i]) <= 1e-7);
    CHECK(std::abs(n2[i] - nv[i]) <= 1e-7);
  }
}

TEST_CASE("recession diagnostic: F2 has one critical class (existence certified)") {
  CriticalData cd = recession_critical_diagnostic(f2());
  CHECK(cd.class_count == 1);
  CHECK(cd.nodes == std::vector<int>{1, 2, 3});
}
