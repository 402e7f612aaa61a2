#include "doctest.h"

#include "sgcalc/compactification.hpp"
#include "sgcalc/errors.hpp"
#include "sgcalc/geometry.hpp"

#include <cmath>

using namespace sgcalc;

namespace {
Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}
} // namespace

TEST_CASE("radial profile basics") {
  CHECK(radial_profile(0.0) == 0.0);
  CHECK(radial_profile(3.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(radial_profile(4.0) == 0.75);
  // Strictly increasing on a fine grid.
  double prev = -1.0;
  for (int i = 0; i <= 2000; ++i) {
    double r = i * 0.005;
    double y = radial_profile(r);
    CHECK(y > prev);
    CHECK(y < 1.0);
    prev = y;
  }
}

TEST_CASE("radial profile is C2 at the seam") {
  const double h = 1e-5;
  double below = (radial_profile(3.0) - radial_profile(3.0 - h)) / h;
  double above = (radial_profile(3.0 + h) - radial_profile(3.0)) / h;
  CHECK(below == doctest::Approx(1.0 / 9.0).epsilon(1e-4));
  CHECK(above == doctest::Approx(1.0 / 9.0).epsilon(1e-4));
  double c_below =
      (radial_profile(3.0) - 2 * radial_profile(3.0 - h) + radial_profile(3.0 - 2 * h)) / (h * h);
  double c_above =
      (radial_profile(3.0 + 2 * h) - 2 * radial_profile(3.0 + h) + radial_profile(3.0)) / (h * h);
  CHECK(c_below == doctest::Approx(-2.0 / 27.0).epsilon(1e-2));
  CHECK(c_above == doctest::Approx(-2.0 / 27.0).epsilon(1e-2));
}

TEST_CASE("radial profile inverse round trips") {
  for (int i = 0; i <= 500; ++i) {
    double r = i * 0.1;
    double y = radial_profile(r);
    CHECK(radial_profile_inv(y) == doctest::Approx(r).epsilon(1e-12));
  }
  for (int i = 0; i < 100; ++i) {
    double y = i * 0.0099;
    CHECK(radial_profile(radial_profile_inv(y)) == doctest::Approx(y).epsilon(1e-12));
  }
  CHECK_THROWS_AS(radial_profile_inv(1.0), InvalidInput);
}

TEST_CASE("gauge times radius is exactly one on dyadic axis points") {
  for (int dim : {1, 2, 3})
    for (int k = 2; k <= 10; ++k)
      for (int axis = 0; axis < dim; ++axis)
        for (int sgn : {1, -1}) {
          Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
          x[axis] = sgn * std::ldexp(1.0, k);
          Eigen::VectorXd y = iota(x);
          double prod = (1.0 - y.norm()) * x.norm();
          CHECK(prod == 1.0);  // bitwise
          CHECK(boundary_gauge(y) * x.norm() == 1.0);
        }
}

TEST_CASE("gauge times radius is one to 1e-12 on a general mesh") {
  Rng rng(5);
  for (int dim : {1, 2, 3})
    for (int q = 0; q < 200; ++q) {
      Eigen::VectorXd x(dim);
      for (int i = 0; i < dim; ++i) x[i] = rng.normal();
      double r = rng.uniform(3.0, 1000.0);
      x *= r / x.norm();
      Eigen::VectorXd y = iota(x);
      CHECK(std::fabs((1.0 - y.norm()) * x.norm() - 1.0) <= 1e-12);
    }
}

TEST_CASE("ball chart round trips") {
  Rng rng(6);
  for (int dim : {1, 2, 3})
    for (int q = 0; q < 200; ++q) {
      Eigen::VectorXd x(dim);
      for (int i = 0; i < dim; ++i) x[i] = rng.normal();
      double r = rng.uniform(0.0, 100.0);
      if (x.norm() > 0) x *= r / x.norm();
      Eigen::VectorXd back = iota_inv(iota(x));
      CHECK((back - x).norm() <= 1e-10 * (1.0 + x.norm()));

      Eigen::VectorXd y(dim);
      for (int i = 0; i < dim; ++i) y[i] = rng.normal();
      y *= rng.uniform(0.0, 0.999) / y.norm();
      Eigen::VectorXd fwd = iota(iota_inv(y));
      CHECK((fwd - y).norm() <= 1e-10);
    }
  CHECK(iota(Eigen::VectorXd::Zero(2)).norm() == 0.0);
  CHECK(iota_inv(Eigen::VectorXd::Zero(2)).norm() == 0.0);
}

TEST_CASE("boundary gauge") {
  CHECK(boundary_gauge(vec2(1.0, 0.0)) == 0.0);
  CHECK(boundary_gauge(vec2(0.0, 0.0)) == 1.0);
  CHECK(boundary_gauge(vec2(0.8, 0.0)) == doctest::Approx(0.2).epsilon(1e-15));
  // Seam continuity and positivity inside.
  double prev = 1.0 + 1e-12;
  for (int i = 0; i <= 1000; ++i) {
    double r = i * 0.001;
    double gv = boundary_gauge(vec2(r, 0.0));
    CHECK(gv > 0.0 - (i == 1000 ? 1e-300 : 0.0));
    CHECK(gv < prev + 1e-12);
    prev = gv;
  }
  const double h = 1e-5, s = 2.0 / 3.0;
  double d_below = (boundary_gauge(vec2(s, 0)) - boundary_gauge(vec2(s - h, 0))) / h;
  double d_above = (boundary_gauge(vec2(s + h, 0)) - boundary_gauge(vec2(s, 0))) / h;
  CHECK(d_below == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(d_above == doctest::Approx(-1.0).epsilon(1e-4));
}

TEST_CASE("face points and names") {
  FacePoint e = make_face_point(vec2(1.0 - 1e-14, 0.0), vec2(0.2, 0.1));
  CHECK(e.face == Face::E);
  CHECK(e.y.norm() == 1.0);
  FacePoint psi = make_face_point(vec2(0.2, 0.1), vec2(0.6, 0.8));
  CHECK(psi.face == Face::Psi);
  FacePoint c = make_face_point(vec2(0.0, 1.0), vec2(0.6, 0.8));
  CHECK(c.face == Face::PsiE);
  FacePoint i = make_face_point(vec2(0.2, 0.1), vec2(0.3, 0.0));
  CHECK(i.face == Face::Interior);
  CHECK_THROWS_AS(make_face_point(vec2(1.1, 0.0), vec2(0.0, 0.0)), InvalidInput);

  for (Face f : {Face::Interior, Face::E, Face::Psi, Face::PsiE})
    CHECK(face_from_name(face_name(f)) == f);
  CHECK_THROWS_AS(face_from_name("corner"), InvalidInput);

  FacePoint cp = compactify(vec2(4.0, 0.0), vec2(0.0, 0.0));
  CHECK(cp.face == Face::Interior);
  CHECK(cp.y[0] == 0.75);
}

TEST_CASE("transport reproduces closed-form boundary values") {
  Dims d{2, 2};
  Expression a = Expression::parse("jb(x)^2", d);
  FacePoint e = make_face_point(vec2(0.6, 0.8), vec2(0.2, -0.1));
  auto r = transport_value(a, OrderPair{2, 0}, e);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));

  // dot(x,t) on the e face: limit is gauge(g) * (yhat . t).
  Expression q = Expression::parse("dot(x,t)", d);
  Eigen::VectorXd t = iota_inv(e.g);
  double expect = boundary_gauge(e.g) * (e.y[0] * t[0] + e.y[1] * t[1]);
  auto rq = transport_value(q, OrderPair{1, 1}, e);
  CHECK(rq.converged);
  CHECK(rq.value == doctest::Approx(expect).epsilon(1e-9));

  // Corner limit of jb(x)*jb(t) at orders (1,1) is 1.
  FacePoint corner = make_face_point(vec2(0.0, 1.0), vec2(1.0, 0.0));
  Expression p = Expression::parse("jb(x)*jb(t)", d);
  auto rc = transport_value(p, OrderPair{1, 1}, corner);
  CHECK(rc.converged);
  CHECK(rc.value == doctest::Approx(1.0).epsilon(1e-9));

  // Interior evaluation is direct.
  FacePoint interior = compactify(vec2(1.0, 2.0), vec2(0.5, 0.0));
  auto ri = transport_value(p, OrderPair{1, 1}, interior);
  CHECK(ri.converged);
  double direct = boundary_gauge(interior.y) * boundary_gauge(interior.g) *
                  std::sqrt(6.0) * std::sqrt(1.25);
  CHECK(ri.value == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("transport is multiplicative in the symbol") {
  Dims d{2, 2};
  struct Entry {
    const char* src;
    OrderPair m;
  };
  const Entry catalog[] = {
    {"jb(x)", {1, 0}},
    {"jb(t)", {0, 1}},
    {"1/jb(x)", {-1, 0}},
    {"dot(x,t)", {1, 1}},
  };
  const FacePoint pts[] = {
    make_face_point(vec2(0.6, 0.8), vec2(0.2, -0.1)),
    make_face_point(vec2(0.1, 0.2), vec2(-0.8, 0.6)),
    make_face_point(vec2(1.0, 0.0), vec2(0.0, 1.0)),
    compactify(vec2(1.5, -0.5), vec2(2.0, 1.0)),
  };
  for (const auto& ea : catalog)
    for (const auto& eb : catalog)
      for (const auto& p : pts) {
        Expression a = Expression::parse(ea.src, d);
        Expression b = Expression::parse(eb.src, d);
        auto ra = transport_value(a, ea.m, p);
        auto rb = transport_value(b, eb.m, p);
        auto rab = transport_value(a * b, OrderPair{ea.m.me + eb.m.me, ea.m.mpsi + eb.m.mpsi}, p);
        REQUIRE(ra.converged);
        REQUIRE(rb.converged);
        REQUIRE(rab.converged);
        CHECK(rab.value == doctest::Approx(ra.value * rb.value).epsilon(1e-8));
      }
}

TEST_CASE("transport at the wrong order does not converge") {
  Dims d{2, 2};
  Expression a = Expression::parse("jb(x)", d);
  FacePoint e = make_face_point(vec2(1.0, 0.0), vec2(0.0, 0.0));
  auto r = transport_value(a, OrderPair{0, 0}, e);
  CHECK_FALSE(r.converged);
}

TEST_CASE("iota derivative matches directional differences on both branches") {
  for (int dim : {1, 2, 3}) {
    std::vector<double> radii = {0.0, 0.4, 1.3, 2.9, 3.5, 8.0, 50.0};
    std::vector<Eigen::VectorXd> dirs = sphere_directions(dim, 6);
    for (double r : radii) {
      for (const Eigen::VectorXd& u : dirs) {
        Eigen::VectorXd x = r * u;
        Eigen::MatrixXd J = iota_jacobian(x);
        double h = 1e-6 * (1.0 + r);
        for (const Eigen::VectorXd& v : dirs) {
          Eigen::VectorXd fd = (iota(x + h * v) - iota(x - h * v)) / (2.0 * h);
          CHECK((J * v - fd).norm() <= 2e-7 * (1.0 + (J * v).norm()));
        }
      }
    }
  }
}

TEST_CASE("iota derivative is continuous across the profile seam") {
  Eigen::Vector2d u(0.6, -0.8);
  Eigen::MatrixXd lo = iota_jacobian(Eigen::VectorXd(2.9999999 * u));
  Eigen::MatrixXd hi = iota_jacobian(Eigen::VectorXd(3.0000001 * u));
  CHECK((lo - hi).norm() <= 1e-5);
  // At the origin the map is conformal with the interior slope.
  Eigen::MatrixXd J0 = iota_jacobian(Eigen::VectorXd::Zero(2));
  CHECK((J0 - (7.0 / 24.0) * Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-15);
}
