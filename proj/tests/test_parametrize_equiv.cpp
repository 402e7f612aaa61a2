#include "doctest.h"

#include "sgcalc/classical_symbols.hpp"
#include "sgcalc/errors.hpp"
#include "sgcalc/parametrize_equiv.hpp"

#include <cmath>
#include <string>

using namespace sgcalc;

namespace {

PhaseFunction kg1_phase() {
  Dims dm{1, 1};
  PrincipalTriple tr;
  tr.e = Expression::parse("dot(x,t)", dm);
  tr.psi = Expression::parse("dot(x,t) - sqrt(norm2(t))", dm);
  tr.psie = Expression::parse("dot(x,t)", dm);
  return make_phase(Expression::parse("dot(x,t) - jb(t)", dm), tr);
}

PhaseFunction dot_phase(Dims dm) {
  Expression e = Expression::parse("dot(x,t)", dm);
  PrincipalTriple tr{e, e, e};
  return make_phase(e, tr);
}

PhaseFunction exact_phase(const std::string& text, Dims dm) {
  Expression e = Expression::parse(text, dm);
  PrincipalTriple tr{e, e, e};
  return make_phase(e, tr);
}

PhaseFunction bump_phase(const std::string& width_suffix) {
  Dims dm{2, 2};
  PrincipalTriple tr;
  tr.e = Expression::parse("sqrt(norm2(x)) * (jb(t) + 2*exp(-norm2(t)" + width_suffix + "))",
                           dm);
  tr.psi = Expression::parse("jb(x) * sqrt(norm2(t))", dm);
  tr.psie = Expression::parse("sqrt(norm2(x)) * sqrt(norm2(t))", dm);
  return make_phase(
      Expression::parse("jb(x) * (jb(t) + 2*exp(-norm2(t)" + width_suffix + "))", dm), tr);
}

std::string thrown_message(const std::function<void()>& f) {
  try {
    f();
  } catch (const InvalidInput& e) {
    return e.what();
  }
  return "";
}

} // namespace

TEST_CASE("zero graph data rebuilds the pairing phase exactly") {
  Dims dm{2, 2};
  LagrangianGraphData g;
  g.dims = dm;
  g.has_e = true;
  g.has_psi = true;
  g.Xe = {Expression::constant(0.0, dm), Expression::constant(0.0, dm)};
  g.Xpsi = {Expression::constant(0.0, dm), Expression::constant(0.0, dm)};
  ReconstructedPhase rec = build_phase(g);

  PhaseFunction src = dot_phase(dm);
  RoundtripReport rt = roundtrip_verify(src, rec.phase, 1e-9);
  CHECK(rt.pass);
  CHECK(rt.hausdorff_e == 0.0);
  CHECK(rt.hausdorff_psi <= 1e-12);
  CHECK(rt.hausdorff_corner == 0.0);
  CHECK(rt.diagnosis.empty());

  double x[2] = {3.0, -1.0}, t[2] = {0.5, 2.0};
  CHECK(rec.phase.sym.symbol.eval(x, t) ==
        doctest::Approx(3.0 * 0.5 - 2.0).epsilon(1e-14));
  CHECK(verify_declared(rec.phase.sym).consistent);
}

TEST_CASE("fiber-direction graph data rebuilds the hyperbolic normal phase") {
  Dims dm{1, 1};
  LagrangianGraphData g;
  g.dims = dm;
  g.has_psi = true;
  g.Xpsi = {Expression::parse("t1 / sqrt(norm2(t))", dm)};
  ReconstructedPhase rec = build_phase(g);

  // The base-face limit drops the bounded correction, leaving the pairing.
  StationarySet e_set = stationary_solve(rec.phase, Face::E);
  CHECK(e_set.points.empty());
  StationarySet c_set = stationary_solve(rec.phase, Face::PsiE);
  CHECK(c_set.points.empty());

  PhaseFunction src = kg1_phase();
  RoundtripReport rt = roundtrip_verify(src, rec.phase, 1e-6);
  CHECK(rt.pass);
  CHECK(rt.hausdorff_psi <= 1e-6);
  CHECK(rt.hausdorff_e == 0.0);
  CHECK(rt.hausdorff_corner == 0.0);

  // Far from the excision collar the glued representative equals the
  // original symbol: chi factors are 1 and the corner term cancels.
  double x = 5.0, t = 7.0;
  CHECK(rec.glued->value(&x, &t) == doctest::Approx(5.0 * 7.0 - 7.0).epsilon(1e-12));
  CHECK(verify_declared(rec.phase.sym).consistent);
}

TEST_CASE("roundtrip separates phases with different stationary geometry") {
  Dims dm{1, 1};
  PhaseFunction p1 = dot_phase(dm);
  PhaseFunction p2 = kg1_phase();
  RoundtripReport rt = roundtrip_verify(p1, p2);
  CHECK_FALSE(rt.pass);
  CHECK(rt.diagnosis.find("psi") != std::string::npos);
  CHECK(rt.hausdorff_psi > 1e-2);
}

TEST_CASE("eliminated-block anchor cannot change the reconstruction") {
  Dims dm{2, 1};
  LagrangianGraphData g;
  g.dims = dm;
  g.has_e = true;
  g.Xie = {Expression::parse("t1", dm)};
  ReconstructedPhase r0 = build_phase(g);
  Eigen::VectorXd xi0(1);
  xi0[0] = 1.0;
  ReconstructedPhase r1 = build_phase(g, xi0);
  CHECK(structurally_equal(r0.phase.sym.symbol, r1.phase.sym.symbol));
  RoundtripReport rt = roundtrip_verify(r0.phase, r1.phase, 1e-12);
  CHECK(rt.pass);

  Eigen::VectorXd bad_anchor(3);
  bad_anchor.setZero();
  CHECK_THROWS_AS(build_phase(g, bad_anchor), InvalidInput);
}

TEST_CASE("corner-incompatible graph data is rejected") {
  Dims dm{2, 1};
  LagrangianGraphData g;
  g.dims = dm;
  g.has_e = true;
  g.has_psi = true;
  g.Xie = {Expression::parse("t1", dm)};
  g.Xpsi = {Expression::parse("-x2", dm)};
  // Consistent pair: both sides describe phi = (x1 + x2) t1.
  ReconstructedPhase rec = build_phase(g);
  CHECK(verify_declared(rec.phase.sym).consistent);

  // Doubling the e-side fiber block plants a mismatch along x2.
  g.Xie = {Expression::parse("2*t1", dm)};
  std::string msg = thrown_message([&] { build_phase(g); });
  CHECK(msg.find("violates conormality") != std::string::npos);
}

TEST_CASE("graph data gates catch shape, scaling, and variable misuse") {
  Dims dm{2, 1};
  LagrangianGraphData g;
  g.dims = dm;
  CHECK(thrown_message([&] { build_phase(g); }).find("invalid input") == 0);

  g.has_psi = true;
  g.Xpsi = {Expression::parse("t1", dm)};  // scales in the fiber, not the base
  CHECK(thrown_message([&] { build_phase(g); }).find("scale") != std::string::npos);

  g.Xpsi = {Expression::parse("x1", dm)};  // leans on the paired base slot
  CHECK(thrown_message([&] { build_phase(g); }).find("paired base") != std::string::npos);

  g.Xpsi = {Expression::parse("x2", dm)};
  g.Xipsi = {Expression::parse("t1", dm)};  // violates the derivative identity
  CHECK(thrown_message([&] { build_phase(g); }).find("identity") != std::string::npos);

  g.Xipsi.clear();
  g.Xe = {Expression::parse("x2", dm)};  // stray without has_e
  CHECK(thrown_message([&] { build_phase(g); }).find("stray") != std::string::npos);
}

TEST_CASE("redundant blocks pass when they satisfy the graph identities") {
  Dims dm{2, 1};
  LagrangianGraphData g;
  g.dims = dm;
  g.has_e = true;
  g.has_psi = true;
  g.Xie = {Expression::parse("t1", dm)};
  g.Xe = {Expression::parse("-x2", dm)};
  g.Xpsi = {Expression::parse("-x2", dm)};
  g.Xipsi = {Expression::parse("t1", dm)};
  ReconstructedPhase rec = build_phase(g);
  double x[2] = {0.3, 1.7}, t[1] = {2.0};
  CHECK(rec.phase.sym.symbol.eval(x, t) == doctest::Approx(2.0 * 2.0).epsilon(1e-14));
}

TEST_CASE("small quadratic matrix equation solver") {
  WSolveResult zero = solve_W(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Identity(2, 2));
  CHECK(zero.converged);
  CHECK(zero.W.norm() == 0.0);

  Eigen::MatrixXd B(2, 2);
  B << 0.2, -0.1, 0.05, 0.3;
  WSolveResult lin = solve_W(B, Eigen::MatrixXd::Zero(2, 2));
  CHECK(lin.converged);
  CHECK((lin.W - B).norm() == 0.0);

  Eigen::MatrixXd b1(1, 1), c1(1, 1);
  b1 << 0.1;
  c1 << 1.0;
  WSolveResult scalar = solve_W(b1, c1);
  CHECK(scalar.converged);
  CHECK(scalar.residual <= 1e-10);
  double root = (-1.0 + std::sqrt(1.4)) / 2.0;
  CHECK(std::fabs(scalar.W(0, 0) - root) <= 1e-11);

  b1 << 1.0;
  WSolveResult osc = solve_W(b1, c1);
  CHECK_FALSE(osc.converged);
  CHECK(osc.message == "no small solution found");

  b1 << 3.0;
  WSolveResult div = solve_W(b1, c1);
  CHECK_FALSE(div.converged);

  CHECK_THROWS_AS(solve_W(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 3)),
                  InvalidInput);
}

TEST_CASE("theta-Hessian signatures at stationary representatives") {
  PhaseFunction dot22 = dot_phase(Dims{2, 2});
  StationarySet set = stationary_solve(dot22, Face::Psi);
  REQUIRE(!set.points.empty());
  CHECK(hessian_signature(dot22, set.points[0]) == Signature{0, 0, 2});

  PhaseFunction kg1 = kg1_phase();
  StationarySet kset = stationary_solve(kg1, Face::Psi);
  REQUIRE(!kset.points.empty());
  CHECK(hessian_signature(kg1, kset.points[0]) == Signature{0, 0, 1});

  Dims dm{2, 2};
  PrincipalTriple tr;
  tr.e = Expression::parse("dot(x,t)", dm);
  tr.psi = Expression::parse("dot(x,t) - sqrt(norm2(t))", dm);
  tr.psie = Expression::parse("dot(x,t)", dm);
  PhaseFunction kg2 = make_phase(Expression::parse("dot(x,t) - jb(t)", dm), tr);
  StationarySet k2 = stationary_solve(kg2, Face::Psi);
  REQUIRE(!k2.points.empty());
  CHECK(hessian_signature(kg2, k2.points[0]) == Signature{0, 1, 1});

  CHECK_THROWS_AS(hessian_signature(kg2, StationaryPoint{}), InvalidInput);
}

TEST_CASE("signature is stable under fiber coordinate relabeling") {
  Dims dm{2, 2};
  auto aniso = [&](const std::string& body) {
    Expression e = Expression::parse(body, dm);
    PrincipalTriple tr{Expression::parse("sqrt(norm2(x))", dm) *
                           Expression::parse(body, dm) /
                           Expression::parse("jb(x)", dm),
                       Expression::parse("jb(x) * sqrt(norm2(t))", dm),
                       Expression::parse("sqrt(norm2(x)) * sqrt(norm2(t))", dm)};
    return make_phase(Expression::parse("jb(x)", dm) * e, tr);
  };
  PhaseFunction pa = aniso("jb(t) + 2*exp(-(t1*t1) - 0.5*(t2*t2))");
  PhaseFunction pb = aniso("jb(t) + 2*exp(-(t2*t2) - 0.5*(t1*t1))");
  Eigen::Vector2d xhat(1.0, 0.0), zero(0.0, 0.0);
  auto qa = stationary_refine(pa, Face::E, xhat, zero);
  auto qb = stationary_refine(pb, Face::E, xhat, zero);
  REQUIRE(qa);
  REQUIRE(qb);
  CHECK(hessian_signature(pa, *qa) == hessian_signature(pb, *qb));
  CHECK(hessian_signature(pa, *qa) == Signature{0, 2, 0});
}

TEST_CASE("linearly related pairing phases are equivalent") {
  Dims dm{2, 2};
  PhaseFunction p1 = dot_phase(dm);
  PhaseFunction p2 = exact_phase("x1*(2*t1 + t2) + x2*t2", dm);
  EquivalenceReport rep = equivalence_check(p1, p2);
  CHECK(rep.equivalent);
  CHECK(rep.verdict == "equivalent (principal level)");
  CHECK(rep.unmatched == 0);
  CHECK(rep.max_cloud_gap <= 1e-6);
  CHECK(rep.max_value_gap <= 1e-9);
  CHECK_FALSE(rep.solver_W.has_value());
}

TEST_CASE("a bounded fiber correction moves the stationary set") {
  Dims dm{1, 1};
  PhaseFunction p1 = dot_phase(dm);
  PrincipalTriple tr;
  tr.e = Expression::parse("dot(x,t)", dm);
  tr.psi = Expression::parse("dot(x,t) + sqrt(norm2(t))", dm);
  tr.psie = Expression::parse("dot(x,t)", dm);
  PhaseFunction p2 = make_phase(Expression::parse("dot(x,t) + jb(t)", dm), tr);
  EquivalenceReport rep = equivalence_check(p1, p2);
  CHECK_FALSE(rep.equivalent);
  CHECK(rep.verdict == "Lagrangians differ");
  CHECK(rep.unmatched == 4);
}

TEST_CASE("same cloud with opposite concavity is flagged by signature") {
  PhaseFunction p1 = bump_phase("");
  PhaseFunction p2 = bump_phase("/8");
  SolveOptions region;
  region.free_radius_cap = 1.0;
  EquivalenceReport rep = equivalence_check(p1, p2, region);
  CHECK_FALSE(rep.equivalent);
  CHECK(rep.verdict == "signature mismatch");
  CHECK(rep.unmatched == 0);
  CHECK(rep.max_cloud_gap <= 1e-8);
  CHECK(rep.max_value_gap <= 1e-9);
  CHECK_FALSE(rep.solver_W.has_value());
}

TEST_CASE("self comparison attaches the zero intertwiner") {
  PhaseFunction p = bump_phase("");
  SolveOptions region;
  region.free_radius_cap = 1.0;
  EquivalenceReport rep = equivalence_check(p, p, region);
  CHECK(rep.equivalent);
  CHECK(rep.verdict == "equivalent (principal level)");
  REQUIRE(rep.solver_W.has_value());
  CHECK(rep.solver_W->norm() <= 1e-10);
}

TEST_CASE("cross-dimension comparisons are rejected") {
  PhaseFunction p1 = dot_phase(Dims{1, 1});
  PhaseFunction p2 = dot_phase(Dims{2, 2});
  CHECK_THROWS_AS(equivalence_check(p1, p2), InvalidInput);
  CHECK_THROWS_AS(roundtrip_verify(p1, p2), InvalidInput);
}
