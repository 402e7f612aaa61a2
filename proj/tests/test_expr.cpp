#include "doctest.h"

#include "sgcalc/errors.hpp"
#include "sgcalc/expr.hpp"
#include "sgcalc/geometry.hpp"

#include <cmath>
#include <string>
#include <vector>

using namespace sgcalc;

namespace {

const Dims kD22{2, 2};

// Taylor polynomial evaluated at a displacement from the base point.
double poly_at(const TruncPoly& p, const std::vector<double>& delta) {
  double sum = 0.0;
  const auto& tab = p.table();
  for (int k = 0; k < p.size(); ++k) {
    double term = p.coeff(k);
    for (int v = 0; v < tab.nvars(); ++v)
      for (int e = 0; e < tab.exps(k)[v]; ++e) term *= delta[v];
    sum += term;
  }
  return sum;
}

} // namespace

TEST_CASE("parse and unparse round trip") {
  const std::vector<std::string> sources = {
    "dot(x,t) - jb(t)",
    "x1^2*t1 + sqrt(1 + norm2(x))",
    "-x1 + t1*(x2 - t2)",
    "jb(x)^1.5",
    "exp(-norm2(t)/8)",
    "sin(x1)*cos(t1) - 2/jb(t)",
    "x1^-2 + t1^-3",
    "(x1 + t1)^3",
    "norm2(x1 - t1)",
    "jb(x)*(jb(t) + 2*exp(-norm2(t)))",
    "x1*(2*t1 + t2) + x2*t2",
  };
  for (const auto& src : sources) {
    CAPTURE(src);
    Expression e = Expression::parse(src, kD22);
    std::string u = e.unparse();
    Expression e2 = Expression::parse(u, kD22);
    CHECK(structurally_equal(e, e2));
    CHECK(e2.unparse() == u);
  }
}

TEST_CASE("canonical surface forms") {
  auto canon = [](const std::string& s) { return Expression::parse(s, kD22).unparse(); };
  CHECK(canon("x1 * ( t1 + t2 )") == "x1*(t1 + t2)");
  CHECK(canon("- ( x1 - t1 )") == "-(x1 - t1)");
  CHECK(canon("x1-(t1-t2)") == "x1 - (t1 - t2)");
  CHECK(canon("x_1 + t_2") == "x1 + t2");
  CHECK(canon("2.0*x1") == "2*x1");
  CHECK(canon("x1^2") == "x1^2");
  CHECK(canon("jb(x)^1.5") == "jb(x)^1.5");
  CHECK(canon("(x1+t1)^-2") == "(x1 + t1)^-2");
  CHECK(canon("x1/(t1*t2)") == "x1/(t1*t2)");
  CHECK(canon("(x1/t1)*t2") == "x1/t1*t2");
}

TEST_CASE("negation stays reparseable") {
  Dims d11{1, 1};
  Expression a = Expression::var_x(0, d11);
  Expression b = Expression::var_t(0, d11);
  Expression sum = a + (-b);
  std::string u = sum.unparse();
  Expression re = Expression::parse(u, d11);
  CHECK(structurally_equal(sum, re));
  Expression prod = a * (-b);
  u = prod.unparse();
  CHECK(structurally_equal(prod, Expression::parse(u, d11)));
  Expression negneg = -(-a);
  u = negneg.unparse();
  CHECK(structurally_equal(negneg, Expression::parse(u, d11)));
}

TEST_CASE("parser rejects malformed and out-of-dims input") {
  CHECK_THROWS_AS(Expression::parse("x3", kD22), ParseError);
  CHECK_THROWS_AS(Expression::parse("t3 + 1", kD22), ParseError);
  CHECK_THROWS_AS(Expression::parse("dot(x,t)", Dims{2, 1}), ParseError);
  CHECK_THROWS_AS(Expression::parse("x + t1", kD22), ParseError);
  CHECK_THROWS_AS(Expression::parse("y1", kD22), ParseError);
  CHECK_THROWS_AS(Expression::parse("x1 +", kD22), ParseError);
  CHECK_THROWS_AS(Expression::parse("x1 t1", kD22), ParseError);
  CHECK_THROWS_AS(Expression::parse("sin()", kD22), ParseError);
  CHECK_THROWS_AS(Expression::parse("dot(x1,t)", kD22), ParseError);
  CHECK_THROWS_AS(Expression::parse("x1^t1", kD22), ParseError);
  CHECK_THROWS_AS(Expression::parse("x1^0.3", kD22), ParseError);
  CHECK_THROWS_AS(Expression::parse("", kD22), ParseError);

  try {
    Expression::parse("x1 + $", kD22);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 5);
  }
}

TEST_CASE("half-integer exponents require a provably positive base") {
  CHECK_THROWS_AS(Expression::parse("norm2(x)^0.5", kD22), ParseError);
  CHECK_THROWS_AS(Expression::parse("x1^1.5", kD22), ParseError);
  CHECK_THROWS_AS(Expression::parse("sqrt(norm2(x))^1.5", kD22), ParseError);
  CHECK_NOTHROW(Expression::parse("(norm2(x) + 1)^0.5", kD22));
  CHECK_NOTHROW(Expression::parse("(jb(x)*jb(t))^2.5", kD22));
  CHECK_NOTHROW(Expression::parse("exp(x1)^0.5", kD22));
  CHECK_NOTHROW(Expression::parse("(2 + norm2(t))^-0.5", kD22));
}

TEST_CASE("plain evaluation") {
  Expression e = Expression::parse("dot(x,t) - jb(t)", kD22);
  std::vector<double> x{1.0, 2.0}, t{3.0, 4.0};
  CHECK(e.eval(x, t) == doctest::Approx(11.0 - std::sqrt(26.0)));

  Expression n = Expression::parse("norm2(x1 - t1)", kD22);
  CHECK(n.eval(x, t) == doctest::Approx(4.0));

  Expression p = Expression::parse("t1^-2", kD22);
  CHECK(p.eval(x, t) == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("domain errors cite the offending subtree") {
  Expression e = Expression::parse("x1 + 1/(x1 - t1)", kD22);
  std::vector<double> x{1.0, 0.0}, t{1.0, 0.0};
  try {
    e.eval(x, t);
    FAIL("expected DomainError");
  } catch (const DomainError& err) {
    std::string msg = err.what();
    CHECK(msg.find("division by zero") != std::string::npos);
    CHECK(msg.find("1/(x1 - t1)") != std::string::npos);
  }
  CHECK_THROWS_AS(e.eval_jet(x.data(), t.data(), 2), DomainError);

  Expression s = Expression::parse("sqrt(x1 - 2)", kD22);
  CHECK_THROWS_AS(s.eval(x, t), DomainError);

  // sqrt at an interior zero has no jet even though the value exists.
  Expression s0 = Expression::parse("sqrt(norm2(x))", kD22);
  std::vector<double> zero{0.0, 0.0};
  CHECK(s0.eval(zero, t) == 0.0);
  CHECK_THROWS_AS(s0.eval_jet(zero.data(), t.data(), 1), DomainError);
}

TEST_CASE("jets match hand-written derivatives") {
  Dims d12{1, 2};
  Expression f = Expression::parse("sin(x1)*jb(t)", d12);
  std::vector<double> x{0.6}, t{1.1, -0.7};
  double jb = std::sqrt(1.0 + t[0] * t[0] + t[1] * t[1]);
  Jet j = f.eval_jet(x.data(), t.data(), 2);
  CHECK(j.value() == doctest::Approx(std::sin(x[0]) * jb));
  CHECK(j.dx(0) == doctest::Approx(std::cos(x[0]) * jb));
  CHECK(j.dt(0) == doctest::Approx(std::sin(x[0]) * t[0] / jb));
  CHECK(j.dxt(0, 0) == doctest::Approx(std::cos(x[0]) * t[0] / jb));
  CHECK(j.dtt(0, 1) == doctest::Approx(-std::sin(x[0]) * t[0] * t[1] / (jb * jb * jb)));
  CHECK(j.dtt(0, 0) == doctest::Approx(std::sin(x[0]) * (1.0 / jb - t[0] * t[0] / (jb * jb * jb))));
  CHECK(j.dxx(0, 0) == doctest::Approx(-std::sin(x[0]) * jb));

  Expression g = Expression::parse("exp(-norm2(t)/8)*x1^2", d12);
  Jet jg = g.eval_jet(x.data(), t.data(), 2);
  double env = std::exp(-(t[0] * t[0] + t[1] * t[1]) / 8.0);
  CHECK(jg.value() == doctest::Approx(env * x[0] * x[0]));
  CHECK(jg.dx(0) == doctest::Approx(env * 2.0 * x[0]));
  CHECK(jg.dt(0) == doctest::Approx(env * x[0] * x[0] * (-t[0] / 4.0)));
  CHECK(jg.dxx(0, 0) == doctest::Approx(env * 2.0));
  CHECK(jg.dxt(0, 1) == doctest::Approx(env * 2.0 * x[0] * (-t[1] / 4.0)));
  CHECK(jg.dtt(0, 0) ==
        doctest::Approx(env * x[0] * x[0] * (t[0] * t[0] / 16.0 - 0.25)));
}

TEST_CASE("third-order jets leave a fourth-order Taylor remainder") {
  const std::vector<std::string> sources = {
    "sin(x1)*cos(t1)",
    "jb(x)",
    "exp(-norm2(t)/8)",
    "sqrt(1 + norm2(x) + norm2(t))",
    "dot(x,t)/jb(x)",
    "(x1 + t1)^3 - t1^-2",
    "jb(x)^1.5",
  };
  std::vector<double> x{0.7, -0.4}, t{1.2, 0.9};
  Rng rng(7);
  for (const auto& src : sources) {
    CAPTURE(src);
    Expression f = Expression::parse(src, kD22);
    TruncPoly p = f.eval_poly(x.data(), t.data(), 3);
    for (int trial = 0; trial < 4; ++trial) {
      std::vector<double> v(4);
      double norm = 0.0;
      for (auto& c : v) {
        c = rng.uniform(-1.0, 1.0);
        norm += c * c;
      }
      norm = std::sqrt(norm);
      for (auto& c : v) c /= norm;

      auto remainder = [&](double h) {
        std::vector<double> xs{x[0] + h * v[0], x[1] + h * v[1]};
        std::vector<double> ts{t[0] + h * v[2], t[1] + h * v[3]};
        std::vector<double> delta{h * v[0], h * v[1], h * v[2], h * v[3]};
        return f.eval(xs, ts) - poly_at(p, delta);
      };

      double r1 = remainder(0.1);
      double r2 = remainder(0.05);
      // Quartic scaling: halving the step divides the remainder by ~16.
      if (std::fabs(r1) > 1e-10) {
        double ratio = std::fabs(r1) / std::fabs(r2);
        CHECK(ratio > 8.0);
        CHECK(ratio < 40.0);
      }
      CHECK(std::fabs(r2) < 1e-4);
    }
  }
}

TEST_CASE("compiled evaluation agrees with the tree") {
  const std::vector<std::string> sources = {
    "dot(x,t) - jb(t)",
    "x1^2*t1 + sqrt(1 + norm2(x))",
    "exp(-norm2(t)/8)*cos(x1 + t2)",
    "jb(x)^1.5/(1 + norm2(t))",
    "-x1 + sin(t1)*(x2 - t2)^3",
  };
  Rng rng(11);
  for (const auto& src : sources) {
    CAPTURE(src);
    Expression f = Expression::parse(src, kD22);
    const CompiledExpr& ce = f.compiled();
    std::vector<double> scratch(ce.scratch_size());
    for (int trial = 0; trial < 16; ++trial) {
      std::vector<double> x{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
      std::vector<double> t{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
      CHECK(ce.eval(x.data(), t.data(), scratch.data()) == f.eval(x, t));
    }
  }
}

TEST_CASE("mixed partial accessor uses the variable split") {
  Dims d11{1, 1};
  Expression f = Expression::parse("x1*t1^2", d11);
  std::vector<double> x{2.0}, t{3.0};
  Jet j = f.eval_jet(x.data(), t.data(), 3);
  CHECK(j.partial({1}, {2}) == doctest::Approx(2.0));
  CHECK(j.partial({0}, {2}) == doctest::Approx(2.0 * x[0]));
  CHECK(j.partial({1}, {1}) == doctest::Approx(2.0 * t[0]));
  CHECK(j.partial({1}, {0}) == doctest::Approx(t[0] * t[0]));
  CHECK(j.partial({0}, {0}) == doctest::Approx(x[0] * t[0] * t[0]));
}

TEST_CASE("programmatic construction matches parsed trees") {
  Expression x1 = Expression::var_x(0, kD22);
  Expression t1 = Expression::var_t(0, kD22);
  Expression two = Expression::constant(2.0, kD22);
  Expression built = x1 * t1 + two;
  CHECK(structurally_equal(built, Expression::parse("x1*t1 + 2", kD22)));
  CHECK(built.unparse() == "x1*t1 + 2");

  Expression trig = sin(x1) * cos(t1) - pow(t1, -2);
  CHECK(structurally_equal(trig, Expression::parse("sin(x1)*cos(t1) - t1^-2", kD22)));

  CHECK_THROWS_AS(Expression::var_x(2, kD22), InvalidInput);
  Dims d21{2, 1};
  Expression other = Expression::var_x(0, d21);
  CHECK_THROWS_AS(x1 + other, InvalidInput);
}
