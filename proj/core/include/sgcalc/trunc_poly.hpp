#ifndef SGCALC_TRUNC_POLY_HPP
#define SGCALC_TRUNC_POLY_HPP

#include "sgcalc/multi_index.hpp"

#include <vector>

namespace sgcalc {

// Truncated multivariate Taylor polynomial: coefficients of the monomials
// enumerated by MultiIndexTable(nvars, order). Arithmetic truncates at the
// order; coefficient accumulation walks the entries in a fixed graded order,
// so restricting an order-k result to degree <= k-1 reproduces the order-k-1
// computation bit for bit.
class TruncPoly {
public:
  TruncPoly() : table_(nullptr) {}
  TruncPoly(int nvars, int order, double value = 0.0);

  // Seed for coordinate variable v with base-point coordinate `value`.
  static TruncPoly variable(int nvars, int order, int v, double value);

  bool valid() const { return table_ != nullptr; }
  int nvars() const { return table_->nvars(); }
  int order() const { return table_->order(); }
  double value() const { return c_[0]; }

  double coeff(int k) const { return c_[k]; }
  double& coeff(int k) { return c_[k]; }
  int size() const { return static_cast<int>(c_.size()); }
  const MultiIndexTable& table() const { return *table_; }

  // Taylor coefficient for an explicit exponent vector (0 when absent).
  double coeff_of(const std::vector<int>& exps) const;
  // Partial derivative (coefficient times factorials).
  double partial(const std::vector<int>& exps) const;
  // First-order partial in variable v.
  double partial1(int v) const;
  // Second-order partial in variables v, w.
  double partial2(int v, int w) const;

  TruncPoly& operator+=(const TruncPoly& o);
  TruncPoly& operator-=(const TruncPoly& o);
  TruncPoly& operator+=(double v) { c_[0] += v; return *this; }
  TruncPoly& operator-=(double v) { c_[0] -= v; return *this; }
  TruncPoly& operator*=(double v);

  friend TruncPoly operator+(TruncPoly a, const TruncPoly& b) { a += b; return a; }
  friend TruncPoly operator-(TruncPoly a, const TruncPoly& b) { a -= b; return a; }
  friend TruncPoly operator+(TruncPoly a, double b) { a += b; return a; }
  friend TruncPoly operator-(TruncPoly a, double b) { a -= b; return a; }
  friend TruncPoly operator+(double a, TruncPoly b) { b += a; return b; }
  friend TruncPoly operator-(double a, TruncPoly b) { b.negate(); b += a; return b; }
  friend TruncPoly operator*(TruncPoly a, double b) { a *= b; return a; }
  friend TruncPoly operator*(double a, TruncPoly b) { b *= a; return b; }
  friend TruncPoly operator*(const TruncPoly& a, const TruncPoly& b);
  friend TruncPoly operator/(const TruncPoly& a, const TruncPoly& b);
  TruncPoly operator-() const { TruncPoly r = *this; r.negate(); return r; }

  void negate();

  // Composition with a univariate series around the current value:
  // sum_k cs[k] (p - p(0))^k, truncated. cs has ncs entries.
  TruncPoly compose_series(const double* cs, int ncs) const;

  // Formal partial derivative in variable v. Coefficients of top degree in the
  // result are not determined by an order-limited jet and are set to zero;
  // callers needing exact order-k jets of a derivative must evaluate the
  // parent jet at order k+1.
  TruncPoly derivative(int v) const;

  // True when every coefficient is exactly zero.
  bool is_zero() const;

private:
  const MultiIndexTable* table_;
  std::vector<double> c_;
};

// Univariate analytic functions lifted to truncated polynomials. Domain
// violations throw sgcalc::DomainError with a short reason; the expression
// layer adds subtree context.
TruncPoly tp_sqrt(const TruncPoly& p);
TruncPoly tp_exp(const TruncPoly& p);
TruncPoly tp_sin(const TruncPoly& p);
TruncPoly tp_cos(const TruncPoly& p);
TruncPoly tp_recip(const TruncPoly& p);
// Integer power (valid at any base point); negative exponents require a
// non-zero base value.
TruncPoly tp_pow_int(const TruncPoly& p, int n);
// Power with exponent num2/2 (num2 odd); requires a positive base value.
TruncPoly tp_pow_half(const TruncPoly& p, int num2);

} // namespace sgcalc

#endif
