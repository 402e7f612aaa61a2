#include "sgcalc/trunc_poly.hpp"
#include "sgcalc/errors.hpp"

#include <cmath>
#include <cstdlib>

namespace sgcalc {

TruncPoly::TruncPoly(int nvars, int order, double value)
  : table_(&MultiIndexTable::get(nvars, order)), c_(table_->size(), 0.0) {
  c_[0] = value;
}

TruncPoly TruncPoly::variable(int nvars, int order, int v, double value) {
  TruncPoly p(nvars, order, value);
  if (order >= 1) p.c_[p.table_->var_index(v)] = 1.0;
  return p;
}

double TruncPoly::coeff_of(const std::vector<int>& exps) const {
  int k = table_->find(exps);
  return k < 0 ? 0.0 : c_[k];
}

double TruncPoly::partial(const std::vector<int>& exps) const {
  int k = table_->find(exps);
  return k < 0 ? 0.0 : c_[k] * table_->factorial_product(k);
}

double TruncPoly::partial1(int v) const {
  return order() >= 1 ? c_[table_->var_index(v)] : 0.0;
}

double TruncPoly::partial2(int v, int w) const {
  if (order() < 2) return 0.0;
  int k = table_->raise_index(table_->var_index(v), w);
  if (k < 0) return 0.0;
  return c_[k] * table_->factorial_product(k);
}

TruncPoly& TruncPoly::operator+=(const TruncPoly& o) {
  for (int k = 0; k < size(); ++k) c_[k] += o.c_[k];
  return *this;
}

TruncPoly& TruncPoly::operator-=(const TruncPoly& o) {
  for (int k = 0; k < size(); ++k) c_[k] -= o.c_[k];
  return *this;
}

TruncPoly& TruncPoly::operator*=(double v) {
  for (double& x : c_) x *= v;
  return *this;
}

void TruncPoly::negate() {
  for (double& x : c_) x = -x;
}

bool TruncPoly::is_zero() const {
  for (double x : c_)
    if (x != 0.0) return false;
  return true;
}

TruncPoly operator*(const TruncPoly& a, const TruncPoly& b) {
  const MultiIndexTable& t = a.table();
  TruncPoly r(t.nvars(), t.order());
  const int n = t.size();
  // Fixed (i, j) walk: per-slot accumulation order is independent of the
  // truncation order, which keeps lower-order restrictions bit-identical.
  for (int i = 0; i < n; ++i) {
    double ai = a.c_[i];
    if (ai == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      int k = t.product_index(i, j);
      if (k < 0) continue;
      r.c_[k] += ai * b.c_[j];
    }
  }
  return r;
}

TruncPoly TruncPoly::compose_series(const double* cs, int ncs) const {
  TruncPoly w = *this;
  w.c_[0] = 0.0;
  TruncPoly r(nvars(), order(), ncs > 0 ? cs[ncs - 1] : 0.0);
  for (int k = ncs - 2; k >= 0; --k) {
    r = r * w;
    r.c_[0] += cs[k];
  }
  return r;
}

TruncPoly TruncPoly::derivative(int v) const {
  TruncPoly r(nvars(), order());
  const MultiIndexTable& t = *table_;
  for (int k = 0; k < t.size(); ++k) {
    if (t.degree(k) >= t.order()) continue;
    int up = t.raise_index(k, v);
    r.c_[k] = c_[up] * (t.exps(up)[v]);
  }
  return r;
}

TruncPoly operator/(const TruncPoly& a, const TruncPoly& b) {
  return a * tp_recip(b);
}

namespace {

int series_len(const TruncPoly& p) { return p.order() + 1; }

} // namespace

TruncPoly tp_sqrt(const TruncPoly& p) {
  // Strict at zero: even when every truncated coefficient vanishes the
  // underlying function may be |.|-like with no jet there.
  double u0 = p.value();
  if (u0 <= 0.0) throw DomainError("sqrt of a non-positive value");
  double cs[7];
  int n = series_len(p);
  // cs[k] = binom(1/2, k) u0^(1/2 - k)
  double binom = 1.0, power = std::sqrt(u0);
  for (int k = 0; k < n; ++k) {
    cs[k] = binom * power;
    binom *= (0.5 - k) / (k + 1);
    power /= u0;
  }
  return p.compose_series(cs, n);
}

TruncPoly tp_exp(const TruncPoly& p) {
  double cs[7];
  int n = series_len(p);
  double e = std::exp(p.value());
  double f = 1.0;
  for (int k = 0; k < n; ++k) {
    cs[k] = e / f;
    f *= (k + 1);
  }
  return p.compose_series(cs, n);
}

TruncPoly tp_sin(const TruncPoly& p) {
  double cs[7];
  int n = series_len(p);
  double u0 = p.value();
  double cyc[4] = {std::sin(u0), std::cos(u0), -std::sin(u0), -std::cos(u0)};
  double f = 1.0;
  for (int k = 0; k < n; ++k) {
    cs[k] = cyc[k % 4] / f;
    f *= (k + 1);
  }
  return p.compose_series(cs, n);
}

TruncPoly tp_cos(const TruncPoly& p) {
  double cs[7];
  int n = series_len(p);
  double u0 = p.value();
  double cyc[4] = {std::cos(u0), -std::sin(u0), -std::cos(u0), std::sin(u0)};
  double f = 1.0;
  for (int k = 0; k < n; ++k) {
    cs[k] = cyc[k % 4] / f;
    f *= (k + 1);
  }
  return p.compose_series(cs, n);
}

TruncPoly tp_recip(const TruncPoly& p) {
  double u0 = p.value();
  if (u0 == 0.0) throw DomainError("division by zero");
  double cs[7];
  int n = series_len(p);
  double power = 1.0 / u0;
  for (int k = 0; k < n; ++k) {
    cs[k] = power;
    power = -power / u0;
  }
  return p.compose_series(cs, n);
}

TruncPoly tp_pow_int(const TruncPoly& p, int n) {
  if (n < 0) return tp_recip(tp_pow_int(p, -n));
  TruncPoly r(p.nvars(), p.order(), 1.0);
  if (n == 0) return r;
  TruncPoly base = p;
  int e = n;
  // Binary exponentiation; each multiply truncates at the table order.
  while (true) {
    if (e & 1) r = r * base;
    e >>= 1;
    if (e == 0) break;
    base = base * base;
  }
  return r;
}

TruncPoly tp_pow_half(const TruncPoly& p, int num2) {
  double u0 = p.value();
  if (u0 <= 0.0) throw DomainError("fractional power of a non-positive value");
  double r = 0.5 * num2;
  double cs[7];
  int n = series_len(p);
  double binom = 1.0, power = std::pow(u0, r);
  for (int k = 0; k < n; ++k) {
    cs[k] = binom * power;
    binom *= (r - k) / (k + 1);
    power /= u0;
  }
  return p.compose_series(cs, n);
}

} // namespace sgcalc
