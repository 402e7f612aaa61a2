#include "doctest.h"

#include "sgcalc/errors.hpp"
#include "sgcalc/geometry.hpp"
#include "sgcalc/trunc_poly.hpp"

#include <cmath>

using namespace sgcalc;

TEST_CASE("multi-index table sizes and graded prefix") {
  const auto& t32 = MultiIndexTable::get(3, 2);
  const auto& t33 = MultiIndexTable::get(3, 3);
  CHECK(t32.size() == 10);
  CHECK(t33.size() == 20);

  // Lower-order table is a prefix of the higher-order one.
  for (int k = 0; k < t32.size(); ++k) {
    CHECK(t32.degree(k) == t33.degree(k));
    for (int v = 0; v < 3; ++v) CHECK(t32.exps(k)[v] == t33.exps(k)[v]);
  }

  // product_index adds exponent vectors or rejects on overflow.
  for (int i = 0; i < t33.size(); ++i)
    for (int j = 0; j < t33.size(); ++j) {
      int k = t33.product_index(i, j);
      if (t33.degree(i) + t33.degree(j) > 3) {
        CHECK(k == -1);
      } else {
        REQUIRE(k >= 0);
        for (int v = 0; v < 3; ++v)
          CHECK(t33.exps(k)[v] == t33.exps(i)[v] + t33.exps(j)[v]);
      }
    }

  CHECK(t33.first_of_degree(0) == 0);
  CHECK(t33.first_of_degree(1) == 1);
  CHECK(t33.first_of_degree(2) == 4);
  CHECK(t33.first_of_degree(3) == 10);
}

TEST_CASE("seed and product coefficients") {
  TruncPoly p = TruncPoly::variable(2, 3, 0, 1.5);
  TruncPoly q = TruncPoly::variable(2, 3, 1, 2.0);
  CHECK(p.value() == 1.5);
  CHECK(p.partial1(0) == 1.0);
  CHECK(p.partial1(1) == 0.0);

  TruncPoly r = p * q;
  CHECK(r.value() == 3.0);
  CHECK(r.partial1(0) == 2.0);
  CHECK(r.partial1(1) == 1.5);
  CHECK(r.partial2(0, 1) == 1.0);
  CHECK(r.partial2(0, 0) == 0.0);
  CHECK(r.coeff_of({1, 1}) == 1.0);
}

TEST_CASE("univariate series against closed-form derivatives") {
  const double a = 2.0;
  TruncPoly x = TruncPoly::variable(1, 3, 0, a);

  TruncPoly e = tp_exp(x);
  for (int k = 0; k <= 3; ++k)
    CHECK(e.partial({k}) == doctest::Approx(std::exp(a)).epsilon(1e-14));

  TruncPoly s = tp_sin(x);
  CHECK(s.value() == doctest::Approx(std::sin(a)));
  CHECK(s.partial({1}) == doctest::Approx(std::cos(a)));
  CHECK(s.partial({2}) == doctest::Approx(-std::sin(a)));
  CHECK(s.partial({3}) == doctest::Approx(-std::cos(a)));

  TruncPoly c = tp_cos(x);
  CHECK(c.partial({1}) == doctest::Approx(-std::sin(a)));
  CHECK(c.partial({2}) == doctest::Approx(-std::cos(a)));
  CHECK(c.partial({3}) == doctest::Approx(std::sin(a)));

  TruncPoly x4 = TruncPoly::variable(1, 3, 0, 4.0);
  TruncPoly sq = tp_sqrt(x4);
  CHECK(sq.value() == doctest::Approx(2.0));
  CHECK(sq.partial({1}) == doctest::Approx(0.25));
  CHECK(sq.partial({2}) == doctest::Approx(-1.0 / 32.0));
  CHECK(sq.partial({3}) == doctest::Approx(3.0 / 256.0));

  TruncPoly r = tp_recip(x);
  CHECK(r.value() == doctest::Approx(0.5));
  CHECK(r.partial({1}) == doctest::Approx(-0.25));
  CHECK(r.partial({2}) == doctest::Approx(0.25));
  CHECK(r.partial({3}) == doctest::Approx(-0.375));

  TruncPoly pm2 = tp_pow_int(x, -2);
  CHECK(pm2.value() == doctest::Approx(0.25));
  CHECK(pm2.partial({1}) == doctest::Approx(-0.25));
  CHECK(pm2.partial({2}) == doctest::Approx(0.375));

  TruncPoly ph = tp_pow_half(x4, 3);
  CHECK(ph.value() == doctest::Approx(8.0));
  CHECK(ph.partial({1}) == doctest::Approx(3.0));
  CHECK(ph.partial({2}) == doctest::Approx(0.375));
  CHECK(ph.partial({3}) == doctest::Approx(-0.046875));
}

TEST_CASE("restriction to a lower order is bit for bit") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    int nvars = 1 + static_cast<int>(rng.next_u64() % 4);
    TruncPoly p3(nvars, 3), q3(nvars, 3);
    TruncPoly p2(nvars, 2), q2(nvars, 2);
    for (int k = 0; k < p3.size(); ++k) {
      p3.coeff(k) = rng.uniform(-2.0, 2.0);
      q3.coeff(k) = rng.uniform(-2.0, 2.0);
      if (k < p2.size()) {
        p2.coeff(k) = p3.coeff(k);
        q2.coeff(k) = q3.coeff(k);
      }
    }
    TruncPoly r3 = p3 * q3;
    TruncPoly r2 = p2 * q2;
    for (int k = 0; k < r2.size(); ++k) CHECK(r3.coeff(k) == r2.coeff(k));

    // The same property must survive series composition.
    p3.coeff(0) = 1.0 + std::fabs(p3.coeff(0));
    p2.coeff(0) = p3.coeff(0);
    TruncPoly e3 = tp_exp(p3), e2 = tp_exp(p2);
    for (int k = 0; k < e2.size(); ++k) CHECK(e3.coeff(k) == e2.coeff(k));
    TruncPoly s3 = tp_sqrt(p3), s2 = tp_sqrt(p2);
    for (int k = 0; k < s2.size(); ++k) CHECK(s3.coeff(k) == s2.coeff(k));
  }
}

TEST_CASE("formal derivative shifts coefficients and zeroes the top degree") {
  TruncPoly x = TruncPoly::variable(1, 3, 0, 2.0);
  TruncPoly e = tp_exp(x);
  TruncPoly d = e.derivative(0);
  CHECK(d.value() == doctest::Approx(std::exp(2.0)));
  CHECK(d.partial({1}) == doctest::Approx(std::exp(2.0)));
  CHECK(d.partial({2}) == doctest::Approx(std::exp(2.0)));
  CHECK(d.partial({3}) == 0.0);
}

TEST_CASE("domain violations raise") {
  TruncPoly xneg = TruncPoly::variable(1, 2, 0, -1.0);
  CHECK_THROWS_AS(tp_sqrt(xneg), DomainError);
  CHECK_THROWS_AS(tp_pow_half(xneg, 3), DomainError);

  TruncPoly zerov = TruncPoly::variable(1, 2, 0, 0.0);
  CHECK_THROWS_AS(tp_recip(zerov), DomainError);
  CHECK_THROWS_AS(tp_pow_int(zerov, -1), DomainError);
  CHECK_THROWS_AS(tp_sqrt(zerov), DomainError);

  // No jet at a zero base value, even for the exact zero polynomial:
  // the truncation cannot distinguish the zero function from |.|-like input.
  TruncPoly z(1, 2, 0.0);
  CHECK_THROWS_AS(tp_sqrt(z), DomainError);
}

TEST_CASE("scalar operations") {
  TruncPoly x = TruncPoly::variable(2, 2, 0, 3.0);
  TruncPoly y = 2.0 * x - 1.0;
  CHECK(y.value() == 5.0);
  CHECK(y.partial1(0) == 2.0);
  TruncPoly w = 1.0 - x;
  CHECK(w.value() == -2.0);
  CHECK(w.partial1(0) == -1.0);
  CHECK((-x).value() == -3.0);
  CHECK(x.is_zero() == false);
  CHECK(TruncPoly(2, 2, 0.0).is_zero());
}
