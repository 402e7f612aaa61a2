#include "doctest.h"

#include "sgcalc/compactification.hpp"
#include "sgcalc/errors.hpp"
#include "sgcalc/stationary_geometry.hpp"

#include <cmath>

using namespace sgcalc;

namespace {

PhaseFunction kg_phase() {
  Dims dm{2, 2};
  PrincipalTriple tr;
  tr.e = Expression::parse("dot(x,t)", dm);
  tr.psi = Expression::parse("dot(x,t) - sqrt(norm2(t))", dm);
  tr.psie = Expression::parse("dot(x,t)", dm);
  return make_phase(Expression::parse("dot(x,t) - jb(t)", dm), tr);
}

PhaseFunction bump_phase() {
  Dims dm{2, 2};
  PrincipalTriple tr;
  tr.e = Expression::parse("sqrt(norm2(x)) * (jb(t) + 2*exp(-norm2(t)))", dm);
  tr.psi = Expression::parse("jb(x) * sqrt(norm2(t))", dm);
  tr.psie = Expression::parse("sqrt(norm2(x)) * sqrt(norm2(t))", dm);
  return make_phase(Expression::parse("jb(x) * (jb(t) + 2*exp(-norm2(t)))", dm), tr);
}

PhaseFunction planar_corner_phase() {
  Dims dm{2, 1};
  Expression e = Expression::parse("x2*t1", dm);
  PrincipalTriple tr;
  tr.e = e;
  tr.psi = e;
  tr.psie = e;
  return make_phase(e, tr);
}

} // namespace

TEST_CASE("stationary systems reject the interior") {
  PhaseFunction p = kg_phase();
  CHECK_THROWS_AS(stationary_solve(p, Face::Interior), InvalidInput);
  CHECK_THROWS_AS(stationary_refine(p, Face::Interior, Eigen::Vector2d(1, 0),
                                    Eigen::Vector2d(1, 0)),
                  InvalidInput);
}

TEST_CASE("kg psi stationary set is the unit-sphere graph x = that") {
  PhaseFunction p = kg_phase();
  StationarySet set = stationary_solve(p, Face::Psi);
  CHECK(set.points.size() >= 16);
  for (const StationaryPoint& q : set.points) {
    CHECK(q.residual <= 1e-10);
    CHECK(q.nondegenerate);
    CHECK(std::fabs(q.t.norm() - 1.0) <= 1e-12);
    CHECK((q.x - q.t).norm() <= 1e-8);

    LambdaPoint lp = lambda_extend(p, q);
    CHECK(std::fabs(lp.phase_value) <= 1e-10);
    CHECK((lp.xi - q.t).norm() <= 1e-8);
    CHECK((lp.embed.head(2) - iota(q.x)).norm() <= 1e-12);
    CHECK((lp.embed.tail(2) - lp.xi).norm() <= 1e-12);
  }

  CHECK(stationary_solve(p, Face::E).points.empty());
  CHECK(stationary_solve(p, Face::PsiE).points.empty());
}

TEST_CASE("kg tangent frame follows the diagonal circle") {
  PhaseFunction p = kg_phase();
  StationarySet set = stationary_solve(p, Face::Psi);
  REQUIRE(!set.points.empty());
  const StationaryPoint& q = set.points.front();

  TangentFrame fr = tangent_frame(p, q);
  REQUIRE(fr.chart.cols() == 1);
  REQUIRE(fr.chart.rows() == 3);
  REQUIRE(fr.cloud.rows() == 4);

  // the cloud tangent of {(that, that)} moves base and fiber together
  Eigen::VectorXd dx = fr.cloud.col(0).head(2);
  Eigen::VectorXd dxi = fr.cloud.col(0).tail(2);
  CHECK(dx.norm() > 0.1);
  CHECK((dx - dxi).norm() <= 1e-8);
  CHECK(std::fabs(dx.dot(q.x)) <= 1e-8);
}

TEST_CASE("bump phase e-face cloud sits on the radius-three sphere section") {
  PhaseFunction p = bump_phase();
  SolveOptions opt;
  opt.free_radius_cap = 1.0;
  StationarySet set = stationary_solve(p, Face::E, opt);
  CHECK(set.points.size() >= 16);
  for (const StationaryPoint& q : set.points) {
    CHECK(q.t.norm() <= 1e-8);
    CHECK(q.nondegenerate);
    CHECK(q.sigma_min == doctest::Approx(3.0).epsilon(1e-6));

    LambdaPoint lp = lambda_extend(p, q);
    CHECK((lp.xi - 3.0 * q.x).norm() <= 1e-8);
    CHECK((lp.embed.tail(2) - (2.0 / 3.0) * q.x).norm() <= 1e-8);
    CHECK(lp.phase_value == doctest::Approx(3.0).epsilon(1e-9));
  }
  CHECK(stationary_solve(p, Face::Psi).points.empty());
  CHECK(stationary_solve(p, Face::PsiE).points.empty());
}

TEST_CASE("bump phase neatness depends on the stationary ring") {
  PhaseFunction p = bump_phase();

  SolveOptions capped;
  capped.free_radius_cap = 1.0;
  NeatnessReport inside = neatness_report(p, capped);
  CHECK(inside.neat);
  CHECK(inside.e.points.size() >= 16);
  CHECK(inside.psi.points.empty());
  CHECK(inside.corner.points.empty());
  CHECK(inside.degenerate_points == 0);
  CHECK(inside.unmatched_corners == 0);

  // without the window the degenerate ring |t| ~ 1.3 enters the e system
  NeatnessReport full = neatness_report(p);
  CHECK(full.degenerate_points > 0);
  CHECK_FALSE(full.neat);
  bool found_ring = false;
  for (const StationaryPoint& q : full.e.points)
    if (!q.nondegenerate && q.t.norm() > 1.0) found_ring = true;
  CHECK(found_ring);
}

TEST_CASE("planar corner phase continues onto both faces") {
  PhaseFunction p = planar_corner_phase();
  StationarySet corner = stationary_solve(p, Face::PsiE);
  REQUIRE(corner.points.size() == 4);
  for (const StationaryPoint& q : corner.points) {
    CHECK(q.nondegenerate);
    CHECK(std::fabs(std::fabs(q.x[0]) - 1.0) <= 1e-10);
    CHECK(std::fabs(q.x[1]) <= 1e-10);

    CornerContinuation cc = corner_continuation(p, q);
    CHECK(cc.e_matched);
    CHECK(cc.psi_matched);
    CHECK(cc.gap_e <= 1e-3);
    CHECK(cc.gap_psi <= 1e-3);
  }

  NeatnessReport rep = neatness_report(p);
  CHECK(rep.neat);
  CHECK(rep.corner.points.size() == 4);
  CHECK(rep.unmatched_corners == 0);
  CHECK(rep.max_corner_gap <= 1e-3);
  CHECK(rep.max_corner_gap > 0.0);
  CHECK(!rep.e.points.empty());
  CHECK(!rep.psi.points.empty());
}

TEST_CASE("synthetic corner on a corner-free phase is flagged") {
  Dims dm{2, 2};
  Expression e = Expression::parse("dot(x,t)", dm);
  PrincipalTriple tr;
  tr.e = e;
  tr.psi = e;
  tr.psie = e;
  PhaseFunction p = make_phase(e, tr);

  StationaryPoint fake;
  fake.face = Face::PsiE;
  fake.x = Eigen::Vector2d(1, 0);
  fake.t = Eigen::Vector2d(0, 1);
  CornerContinuation cc = corner_continuation(p, fake);
  CHECK_FALSE(cc.e_matched);
  CHECK_FALSE(cc.psi_matched);

  CHECK_THROWS_AS(corner_continuation(p, StationaryPoint{}), InvalidInput);
}

TEST_CASE("stationary refinement converges from a rough seed") {
  PhaseFunction p = kg_phase();
  std::optional<StationaryPoint> q = stationary_refine(
      p, Face::Psi, Eigen::Vector2d(2.0, 0.3), Eigen::Vector2d(1.0, 0.1));
  REQUIRE(q.has_value());
  CHECK(q->residual <= 1e-10);
  CHECK((q->x - q->t).norm() <= 1e-8);

  CHECK_THROWS_AS(stationary_refine(p, Face::Psi, Eigen::Vector3d(1, 0, 0),
                                    Eigen::Vector2d(1, 0)),
                  InvalidInput);
}

TEST_CASE("csv export lists faces, coordinates, residuals") {
  PhaseFunction p = planar_corner_phase();
  NeatnessReport rep = neatness_report(p);
  std::string csv = stationary_csv(p, rep);
  CHECK(csv.rfind("face,x1,x2,xi1,xi2,residual,sigma_min\n", 0) == 0);
  CHECK(csv.find("\ne,") != std::string::npos);
  CHECK(csv.find("\npsi,") != std::string::npos);
  CHECK(csv.find("\npsie,") != std::string::npos);

  std::size_t rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  CHECK(rows == 1 + rep.e.points.size() + rep.psi.points.size() + rep.corner.points.size());
}
