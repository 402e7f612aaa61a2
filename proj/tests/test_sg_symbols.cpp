#include "doctest.h"

#include "sgcalc/errors.hpp"
#include "sgcalc/sg_symbols.hpp"

#include <cmath>

using namespace sgcalc;

namespace {
const Dims kD22{2, 2};

EstimateReport check(const std::string& src, double me, double mpsi, Dims dims = kD22) {
  return check_sg_estimates(Expression::parse(src, dims), OrderPair{me, mpsi});
}
} // namespace

TEST_CASE("weight function") {
  double x[] = {3.0, 4.0};
  double t[] = {2.0};
  double w = sg_weight(x, 2, t, 1, OrderPair{2.0, -1.0});
  CHECK(w == doctest::Approx(26.0 / std::sqrt(5.0)));
}

TEST_CASE("true symbols pass at their natural orders") {
  CHECK(check("jb(x)", 1, 0).satisfied);
  CHECK(check("jb(t)", 0, 1).satisfied);
  CHECK(check("jb(x)*jb(t)", 1, 1).satisfied);
  CHECK(check("dot(x,t)", 1, 1).satisfied);
  CHECK(check("1/jb(x)", -1, 0).satisfied);
  CHECK(check("exp(-norm2(t))", 0, 0).satisfied);
  CHECK(check("exp(-norm2(t))", 0, -3).satisfied);
  CHECK(check("x1*t1/(jb(x)*jb(t))", 0, 0).satisfied);
  CHECK(check("jb(x)^1.5*jb(t)^-0.5", 1.5, -0.5).satisfied);
}

TEST_CASE("order deficits are detected in the right factor") {
  auto r1 = check("jb(x)", 0, 0);
  CHECK_FALSE(r1.satisfied);
  REQUIRE(!r1.violations.empty());
  CHECK(r1.worst_slope > 0.5);
  // The zeroth derivative already grows in x.
  bool found = false;
  for (const auto& v : r1.violations) {
    int nb = 0, na = 0;
    for (int e : v.beta_x) nb += e;
    for (int e : v.alpha_t) na += e;
    if (nb == 0 && na == 0) found = true;
  }
  CHECK(found);

  CHECK_FALSE(check("dot(x,t)", 0, 1).satisfied);
  CHECK_FALSE(check("dot(x,t)", 1, 0).satisfied);
  CHECK_FALSE(check("exp(-norm2(t))", -1, 0).satisfied);
}

TEST_CASE("oscillation breaks the symbol estimates") {
  // Every x-derivative of sin(x1) stays O(1) instead of gaining decay.
  auto r = check("sin(x1)", 0, 0);
  CHECK_FALSE(r.satisfied);
  bool derivative_flagged = false;
  for (const auto& v : r.violations) {
    int nb = 0;
    for (int e : v.beta_x) nb += e;
    if (nb >= 1) derivative_flagged = true;
  }
  CHECK(derivative_flagged);

  // Bounded, but the same problem in t.
  CHECK_FALSE(check("cos(t1)/jb(x)", 0, 0).satisfied);
}

TEST_CASE("product of symbols has the sum of the orders") {
  struct Entry {
    const char* src;
    OrderPair m;
  };
  const Entry catalog[] = {
    {"jb(x)", {1, 0}},
    {"jb(t)", {0, 1}},
    {"1/jb(t)", {0, -1}},
    {"dot(x,t)/(jb(x)*jb(t))", {0, 0}},
  };
  for (const auto& a : catalog)
    for (const auto& b : catalog) {
      Expression prod = Expression::parse(a.src, kD22) * Expression::parse(b.src, kD22);
      OrderPair m{a.m.me + b.m.me, a.m.mpsi + b.m.mpsi};
      CAPTURE(prod.unparse());
      CHECK(check_sg_estimates(prod, m).satisfied);
    }
}

TEST_CASE("reported constant bounds the sampled ratios") {
  auto r = check("2*jb(x)", 1, 0);
  CHECK(r.satisfied);
  CHECK(r.best_constant >= 2.0);
  CHECK(r.best_constant < 4.0);
}

TEST_CASE("one dimensional factors") {
  Dims d11{1, 1};
  CHECK(check("dot(x,t) - jb(t)", 1, 1, d11).satisfied);
  CHECK_FALSE(check("x1^2*t1", 1, 1, d11).satisfied);
}

TEST_CASE("non-smooth input surfaces as a domain error") {
  // |t| has no jet on the zero section, which the scan visits.
  CHECK_THROWS_AS(check("sqrt(norm2(t))", 0, 1), DomainError);
}
