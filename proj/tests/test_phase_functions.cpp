#include "doctest.h"

#include "sgcalc/errors.hpp"
#include "sgcalc/phase_functions.hpp"

#include <cmath>

using namespace sgcalc;

namespace {

PhaseFunction kg_phase() {
  Dims dm{2, 2};
  return make_phase(Expression::parse("dot(x,t) - jb(t)", dm),
                    PrincipalTriple{Expression::parse("dot(x,t)", dm),
                                    Expression::parse("dot(x,t) - sqrt(norm2(t))", dm),
                                    Expression::parse("dot(x,t)", dm)});
}

} // namespace

TEST_CASE("growth functional matches the hand formula") {
  Dims dm{2, 2};
  PhaseFunction p = make_phase(Expression::parse("dot(x,t)", dm));
  CHECK(p.sym.order == OrderPair{1, 1});
  double cases[3][4] = {{1.0, 2.0, -0.5, 3.0}, {0.0, 0.0, 4.0, 0.0}, {2.0, 0.0, 0.0, 0.0}};
  for (auto& c : cases) {
    double x[2] = {c[0], c[1]}, t[2] = {c[2], c[3]};
    double nx2 = 1 + x[0] * x[0] + x[1] * x[1], nt2 = 1 + t[0] * t[0] + t[1] * t[1];
    double want = nx2 * (t[0] * t[0] + t[1] * t[1]) + nt2 * (x[0] * x[0] + x[1] * x[1]);
    CHECK(big_phi(p, x, t) == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("hyperbolic phase is admissible") {
  AdmissibilityReport rep = admissibility_check(kg_phase());
  CHECK(rep.admissible);
  CHECK(rep.interior_min > 0.1);
  CHECK(rep.e.nonvanishing);
  CHECK(rep.psi.nonvanishing);
  CHECK(rep.corner.nonvanishing);
  // e pair bottoms out at t = 0 where only the x-hat row survives.
  CHECK(rep.e.min_norm == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("plane pairing with an idle coordinate is rejected") {
  PhaseFunction p = make_phase(Expression::parse("x1*t1", Dims{2, 1}));
  AdmissibilityReport rep = admissibility_check(p);
  CHECK_FALSE(rep.admissible);
  CHECK(rep.interior_min <= 1e-12);
  // Structural zero at x on the idle axis, t = 0.
  CHECK(std::fabs(rep.interior_x[0]) <= 1e-9);
  CHECK(std::fabs(std::fabs(rep.interior_x[1]) - 8.0) <= 1e-9);
  CHECK(rep.interior_t.norm() <= 1e-9);
  CHECK_FALSE(rep.e.nonvanishing);
}

TEST_CASE("corner pair zero on orthogonal directions is found") {
  Dims dm{2, 2};
  PhaseFunction p = make_phase(Expression::parse("dot(x,t)^2/(jb(x)*jb(t))", dm));
  AdmissibilityReport rep = admissibility_check(p);
  CHECK_FALSE(rep.admissible);
  CHECK_FALSE(rep.corner.nonvanishing);
  CHECK(std::fabs(rep.corner.x.dot(rep.corner.t)) <= 1e-3);

  // The plain pairing keeps its corner pair at constant magnitude sqrt(2).
  PhaseFunction q = make_phase(Expression::parse("dot(x,t)", dm));
  AdmissibilityReport rq = admissibility_check(q);
  CHECK(rq.admissible);
  CHECK(rq.corner.min_norm == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
  CHECK(rq.corner.scale == doctest::Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("stationary system rank at face points") {
  PhaseFunction kg = kg_phase();
  double xq[2] = {1.0, 0.0}, tq[2] = {3.0, 0.0};
  NondegeneracyInfo psi = nondegeneracy_at(kg, Face::Psi, xq, tq);
  CHECK(psi.nondegenerate);
  CHECK(psi.rows == 2);
  CHECK(psi.cols == 3);
  CHECK(psi.sigma_min > 0.5);

  // dot's e face never reaches rank s = 2 from a single sphere chart column
  // with a vanishing theta Hessian.
  NondegeneracyInfo e = nondegeneracy_at(kg, Face::E, xq, tq);
  CHECK_FALSE(e.nondegenerate);

  // Gaussian-bump phase: theta Hessian -3|x| I carries full rank at t = 0.
  Dims dm{2, 2};
  PhaseFunction bump = make_phase(Expression::parse("jb(x)*(jb(t) + 2*exp(-norm2(t)))", dm));
  double xb[2] = {0.6, 0.8}, tb[2] = {0.0, 0.0};
  NondegeneracyInfo be = nondegeneracy_at(bump, Face::E, xb, tb);
  CHECK(be.nondegenerate);
  CHECK(be.sigma_min == doctest::Approx(3.0).epsilon(1e-5));

  CHECK_THROWS_AS(nondegeneracy_at(kg, Face::Interior, xq, tq), InvalidInput);
}
