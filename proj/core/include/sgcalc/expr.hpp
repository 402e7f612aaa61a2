#ifndef SGCALC_EXPR_HPP
#define SGCALC_EXPR_HPP

#include "sgcalc/trunc_poly.hpp"

#include <memory>
#include <string>
#include <vector>

namespace sgcalc {

// Base and fiber dimensions of the (x, t) variable split.
struct Dims {
  int d = 1;
  int s = 1;
  int n() const { return d + s; }
  bool operator==(const Dims& o) const { return d == o.d && s == o.s; }
  bool operator!=(const Dims& o) const { return !(*this == o); }
};

// Exact derivative data at a point: a truncated Taylor polynomial in the
// d + s variables (x first, then t) together with the variable split.
struct Jet {
  Dims dims;
  TruncPoly poly;

  double value() const { return poly.value(); }
  double dx(int i) const { return poly.partial1(i); }
  double dt(int j) const { return poly.partial1(dims.d + j); }
  double dxx(int i, int j) const { return poly.partial2(i, j); }
  double dxt(int i, int j) const { return poly.partial2(i, dims.d + j); }
  double dtt(int i, int j) const { return poly.partial2(dims.d + i, dims.d + j); }
  // Mixed partial D_t^alpha D_x^beta; vectors sized s and d.
  double partial(const std::vector<int>& beta_x, const std::vector<int>& alpha_t) const;
};

enum class NodeKind {
  Const, VarX, VarT, Add, Sub, Mul, Div, Neg, Pow,
  Sqrt, Exp, Sin, Cos, Jb, Norm2, Dot
};

// Vector-valued builtin argument: the full x or t tuple, or a scalar subtree.
enum class TupleRef { None, X, T };

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  NodeKind kind;
  double cvalue = 0.0;                 // Const
  int var = 0;                          // VarX / VarT component (0-based)
  int pow_num2 = 2;                     // Pow exponent numerator over 2
  TupleRef tuple_a = TupleRef::None;    // Jb / Norm2 / Dot first argument
  TupleRef tuple_b = TupleRef::None;    // Dot second argument
  std::vector<ExprNodePtr> kids;
  int src_begin = -1, src_end = -1;     // span in the source text, when parsed
};

// Flattened evaluation program for the plain-value fast path.
class CompiledExpr {
public:
  struct Op {
    std::uint8_t code;
    std::int32_t arg;
    double c;
  };

  double eval(const double* x, const double* t, double* scratch) const;
  int scratch_size() const { return max_depth_; }

private:
  friend class Expression;
  std::vector<Op> ops_;
  int max_depth_ = 0;
};

// Immutable expression over variables x1..xd, t1..ts with the builtin
// functions sqrt, exp, sin, cos, jb, dot, norm2. jb(v) = sqrt(1 + |v|^2).
class Expression {
public:
  Expression() = default;

  // Parses the surface syntax; throws ParseError on malformed input,
  // unknown identifiers, component indices outside dims, or half-integer
  // exponents on bases not guaranteed positive.
  static Expression parse(const std::string& text, Dims dims);

  bool valid() const { return root_ != nullptr; }
  Dims dims() const { return dims_; }

  // Canonical surface form; parse(unparse()) reproduces the tree.
  std::string unparse() const;

  // Plain value; throws DomainError citing the offending subtree.
  double eval(const double* x, const double* t) const;
  double eval(const std::vector<double>& x, const std::vector<double>& t) const {
    return eval(x.data(), t.data());
  }

  // Exact derivatives to the requested order (0..3) via truncated
  // polynomial arithmetic; no finite differences are involved.
  Jet eval_jet(const double* x, const double* t, int order) const;
  Jet eval_jet(const std::vector<double>& x, const std::vector<double>& t, int order) const {
    return eval_jet(x.data(), t.data(), order);
  }
  TruncPoly eval_poly(const double* x, const double* t, int order) const;

  const CompiledExpr& compiled() const;

  const ExprNodePtr& root() const { return root_; }

  // Programmatic constructors (fixtures and derived symbols).
  static Expression constant(double v, Dims dims);
  static Expression var_x(int i, Dims dims);
  static Expression var_t(int j, Dims dims);

  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator/(const Expression& a, const Expression& b);
  Expression operator-() const;

private:
  Expression(ExprNodePtr root, Dims dims, std::string source)
    : root_(std::move(root)), dims_(dims), source_(std::move(source)) {}

  ExprNodePtr root_;
  Dims dims_;
  std::string source_;
  mutable std::shared_ptr<CompiledExpr> compiled_;

  friend Expression make_unary(NodeKind k, const Expression& a);
  friend Expression make_pow(const Expression& a, int num2);
};

Expression sqrt(const Expression& a);
Expression exp(const Expression& a);
Expression sin(const Expression& a);
Expression cos(const Expression& a);
Expression pow(const Expression& a, int n);

bool structurally_equal(const Expression& a, const Expression& b);

// A real-valued function of (x, t) exposing truncated jets: the common
// currency between parsed expressions and derived evaluators (principal
// components, glued principal parts, boundary limits).
class ScalarField {
public:
  virtual ~ScalarField() = default;
  virtual Dims dims() const = 0;
  virtual TruncPoly jet(const double* x, const double* t, int order) const = 0;
  virtual double value(const double* x, const double* t) const {
    return jet(x, t, 0).value();
  }
};

class ExpressionField final : public ScalarField {
public:
  explicit ExpressionField(Expression e) : expr_(std::move(e)) {}
  Dims dims() const override { return expr_.dims(); }
  TruncPoly jet(const double* x, const double* t, int order) const override {
    return expr_.eval_poly(x, t, order);
  }
  double value(const double* x, const double* t) const override {
    return expr_.eval(x, t);
  }
  const Expression& expr() const { return expr_; }

private:
  Expression expr_;
};

} // namespace sgcalc

#endif
