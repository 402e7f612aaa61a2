#include "sgcalc/expr.hpp"
#include "sgcalc/errors.hpp"
#include "expr_internal.hpp"

#include <cmath>
#include <mutex>

namespace sgcalc {

double Jet::partial(const std::vector<int>& beta_x, const std::vector<int>& alpha_t) const {
  if (static_cast<int>(beta_x.size()) != dims.d || static_cast<int>(alpha_t.size()) != dims.s)
    throw InvalidInput("partial index lengths must match dims");
  std::vector<int> e(dims.n());
  for (int i = 0; i < dims.d; ++i) e[i] = beta_x[i];
  for (int j = 0; j < dims.s; ++j) e[dims.d + j] = alpha_t[j];
  return poly.partial(e);
}

namespace {

[[noreturn]] void domain_fail(const ExprNode* n, const std::string& reason) {
  throw DomainError(reason + " in subexpression '" + detail::unparse_node(n) + "'");
}

int tuple_len(TupleRef r, Dims dims) { return r == TupleRef::X ? dims.d : dims.s; }

const double* tuple_data(TupleRef r, const double* x, const double* t) {
  return r == TupleRef::X ? x : t;
}

double eval_node(const ExprNode* n, const double* x, const double* t, Dims dims) {
  switch (n->kind) {
    case NodeKind::Const: return n->cvalue;
    case NodeKind::VarX: return x[n->var];
    case NodeKind::VarT: return t[n->var];
    case NodeKind::Add:
      return eval_node(n->kids[0].get(), x, t, dims) + eval_node(n->kids[1].get(), x, t, dims);
    case NodeKind::Sub:
      return eval_node(n->kids[0].get(), x, t, dims) - eval_node(n->kids[1].get(), x, t, dims);
    case NodeKind::Mul:
      return eval_node(n->kids[0].get(), x, t, dims) * eval_node(n->kids[1].get(), x, t, dims);
    case NodeKind::Div: {
      double a = eval_node(n->kids[0].get(), x, t, dims);
      double b = eval_node(n->kids[1].get(), x, t, dims);
      if (b == 0.0) domain_fail(n, "division by zero");
      return a / b;
    }
    case NodeKind::Neg: return -eval_node(n->kids[0].get(), x, t, dims);
    case NodeKind::Pow: {
      double v = eval_node(n->kids[0].get(), x, t, dims);
      if (n->pow_num2 % 2 == 0) {
        int e = n->pow_num2 / 2;
        if (e < 0 && v == 0.0) domain_fail(n, "division by zero");
        return std::pow(v, e);
      }
      if (v <= 0.0) domain_fail(n, "fractional power of a non-positive value");
      return std::pow(v, 0.5 * n->pow_num2);
    }
    case NodeKind::Sqrt: {
      double v = eval_node(n->kids[0].get(), x, t, dims);
      if (v < 0.0) domain_fail(n, "sqrt of a negative value");
      return std::sqrt(v);
    }
    case NodeKind::Exp: return std::exp(eval_node(n->kids[0].get(), x, t, dims));
    case NodeKind::Sin: return std::sin(eval_node(n->kids[0].get(), x, t, dims));
    case NodeKind::Cos: return std::cos(eval_node(n->kids[0].get(), x, t, dims));
    case NodeKind::Jb: {
      double sum = 1.0;
      if (n->tuple_a != TupleRef::None) {
        const double* v = tuple_data(n->tuple_a, x, t);
        int len = tuple_len(n->tuple_a, dims);
        for (int i = 0; i < len; ++i) sum += v[i] * v[i];
      } else {
        double v = eval_node(n->kids[0].get(), x, t, dims);
        sum += v * v;
      }
      return std::sqrt(sum);
    }
    case NodeKind::Norm2: {
      if (n->tuple_a != TupleRef::None) {
        const double* v = tuple_data(n->tuple_a, x, t);
        int len = tuple_len(n->tuple_a, dims);
        double sum = 0.0;
        for (int i = 0; i < len; ++i) sum += v[i] * v[i];
        return sum;
      }
      double v = eval_node(n->kids[0].get(), x, t, dims);
      return v * v;
    }
    case NodeKind::Dot: {
      const double* a = tuple_data(n->tuple_a, x, t);
      const double* b = tuple_data(n->tuple_b, x, t);
      int len = tuple_len(n->tuple_a, dims);
      double sum = 0.0;
      for (int i = 0; i < len; ++i) sum += a[i] * b[i];
      return sum;
    }
  }
  throw InvalidInput("corrupt expression node");
}

template <class F>
TruncPoly guarded(const ExprNode* n, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    domain_fail(n, e.what());
  }
}

TruncPoly poly_node(const ExprNode* n, const double* x, const double* t, Dims dims, int order) {
  const int nv = dims.n();
  switch (n->kind) {
    case NodeKind::Const: return TruncPoly(nv, order, n->cvalue);
    case NodeKind::VarX: return TruncPoly::variable(nv, order, n->var, x[n->var]);
    case NodeKind::VarT: return TruncPoly::variable(nv, order, dims.d + n->var, t[n->var]);
    case NodeKind::Add:
      return poly_node(n->kids[0].get(), x, t, dims, order) +
             poly_node(n->kids[1].get(), x, t, dims, order);
    case NodeKind::Sub:
      return poly_node(n->kids[0].get(), x, t, dims, order) -
             poly_node(n->kids[1].get(), x, t, dims, order);
    case NodeKind::Mul:
      return poly_node(n->kids[0].get(), x, t, dims, order) *
             poly_node(n->kids[1].get(), x, t, dims, order);
    case NodeKind::Div: {
      TruncPoly a = poly_node(n->kids[0].get(), x, t, dims, order);
      TruncPoly b = poly_node(n->kids[1].get(), x, t, dims, order);
      return guarded(n, [&] { return a / b; });
    }
    case NodeKind::Neg: return -poly_node(n->kids[0].get(), x, t, dims, order);
    case NodeKind::Pow: {
      TruncPoly p = poly_node(n->kids[0].get(), x, t, dims, order);
      if (n->pow_num2 % 2 == 0)
        return guarded(n, [&] { return tp_pow_int(p, n->pow_num2 / 2); });
      return guarded(n, [&] { return tp_pow_half(p, n->pow_num2); });
    }
    case NodeKind::Sqrt: {
      TruncPoly p = poly_node(n->kids[0].get(), x, t, dims, order);
      return guarded(n, [&] { return tp_sqrt(p); });
    }
    case NodeKind::Exp: return tp_exp(poly_node(n->kids[0].get(), x, t, dims, order));
    case NodeKind::Sin: return tp_sin(poly_node(n->kids[0].get(), x, t, dims, order));
    case NodeKind::Cos: return tp_cos(poly_node(n->kids[0].get(), x, t, dims, order));
    case NodeKind::Jb: {
      TruncPoly sum(nv, order, 1.0);
      if (n->tuple_a != TupleRef::None) {
        const double* v = tuple_data(n->tuple_a, x, t);
        int len = tuple_len(n->tuple_a, dims);
        int base = n->tuple_a == TupleRef::X ? 0 : dims.d;
        for (int i = 0; i < len; ++i) {
          TruncPoly c = TruncPoly::variable(nv, order, base + i, v[i]);
          sum += c * c;
        }
      } else {
        TruncPoly c = poly_node(n->kids[0].get(), x, t, dims, order);
        sum += c * c;
      }
      return tp_sqrt(sum);
    }
    case NodeKind::Norm2: {
      TruncPoly sum(nv, order, 0.0);
      if (n->tuple_a != TupleRef::None) {
        const double* v = tuple_data(n->tuple_a, x, t);
        int len = tuple_len(n->tuple_a, dims);
        int base = n->tuple_a == TupleRef::X ? 0 : dims.d;
        for (int i = 0; i < len; ++i) {
          TruncPoly c = TruncPoly::variable(nv, order, base + i, v[i]);
          sum += c * c;
        }
        return sum;
      }
      TruncPoly c = poly_node(n->kids[0].get(), x, t, dims, order);
      return c * c;
    }
    case NodeKind::Dot: {
      TruncPoly sum(nv, order, 0.0);
      int len = tuple_len(n->tuple_a, dims);
      int base_a = n->tuple_a == TupleRef::X ? 0 : dims.d;
      int base_b = n->tuple_b == TupleRef::X ? 0 : dims.d;
      const double* va = tuple_data(n->tuple_a, x, t);
      const double* vb = tuple_data(n->tuple_b, x, t);
      for (int i = 0; i < len; ++i) {
        TruncPoly a = TruncPoly::variable(nv, order, base_a + i, va[i]);
        TruncPoly b = TruncPoly::variable(nv, order, base_b + i, vb[i]);
        sum += a * b;
      }
      return sum;
    }
  }
  throw InvalidInput("corrupt expression node");
}

} // namespace

double Expression::eval(const double* x, const double* t) const {
  if (!root_) throw InvalidInput("evaluating an empty expression");
  return eval_node(root_.get(), x, t, dims_);
}

TruncPoly Expression::eval_poly(const double* x, const double* t, int order) const {
  if (!root_) throw InvalidInput("evaluating an empty expression");
  if (order < 0 || order > 6) throw InvalidInput("jet order must be between 0 and 6");
  return poly_node(root_.get(), x, t, dims_, order);
}

Jet Expression::eval_jet(const double* x, const double* t, int order) const {
  return Jet{dims_, eval_poly(x, t, order)};
}

// ---------------------------------------------------------------------------
// Compiled stack-machine path. Used by quadrature loops where only plain
// values are needed. Domain faults follow IEEE semantics (inf/nan) instead of
// raising, so integrands must be total on the sampled region.

namespace {

enum : std::uint8_t {
  OP_CONST, OP_LOAD_X, OP_LOAD_T, OP_ADD, OP_SUB, OP_MUL, OP_DIV,
  OP_NEG, OP_SQ, OP_SQRT, OP_EXP, OP_SIN, OP_COS, OP_POW_INT, OP_POW_HALF
};

struct Compiler {
  std::vector<CompiledExpr::Op>* ops;
  Dims dims;
  int depth = 0, max_depth = 0;

  void emit(std::uint8_t code, std::int32_t arg = 0, double c = 0.0) {
    ops->push_back(CompiledExpr::Op{code, arg, c});
  }
  void push() { if (++depth > max_depth) max_depth = depth; }
  void pop(int k) { depth -= k; }

  void tuple_sum_squares(TupleRef r, double init) {
    emit(OP_CONST, 0, init);
    push();
    std::uint8_t load = r == TupleRef::X ? OP_LOAD_X : OP_LOAD_T;
    int len = r == TupleRef::X ? dims.d : dims.s;
    for (int i = 0; i < len; ++i) {
      emit(load, i); push();
      emit(OP_SQ);
      emit(OP_ADD); pop(1);
    }
  }

  void walk(const ExprNode* n) {
    switch (n->kind) {
      case NodeKind::Const: emit(OP_CONST, 0, n->cvalue); push(); return;
      case NodeKind::VarX: emit(OP_LOAD_X, n->var); push(); return;
      case NodeKind::VarT: emit(OP_LOAD_T, n->var); push(); return;
      case NodeKind::Add: walk(n->kids[0].get()); walk(n->kids[1].get()); emit(OP_ADD); pop(1); return;
      case NodeKind::Sub: walk(n->kids[0].get()); walk(n->kids[1].get()); emit(OP_SUB); pop(1); return;
      case NodeKind::Mul: walk(n->kids[0].get()); walk(n->kids[1].get()); emit(OP_MUL); pop(1); return;
      case NodeKind::Div: walk(n->kids[0].get()); walk(n->kids[1].get()); emit(OP_DIV); pop(1); return;
      case NodeKind::Neg: walk(n->kids[0].get()); emit(OP_NEG); return;
      case NodeKind::Pow:
        walk(n->kids[0].get());
        if (n->pow_num2 % 2 == 0) emit(OP_POW_INT, n->pow_num2 / 2);
        else emit(OP_POW_HALF, n->pow_num2);
        return;
      case NodeKind::Sqrt: walk(n->kids[0].get()); emit(OP_SQRT); return;
      case NodeKind::Exp: walk(n->kids[0].get()); emit(OP_EXP); return;
      case NodeKind::Sin: walk(n->kids[0].get()); emit(OP_SIN); return;
      case NodeKind::Cos: walk(n->kids[0].get()); emit(OP_COS); return;
      case NodeKind::Jb:
        if (n->tuple_a != TupleRef::None) {
          tuple_sum_squares(n->tuple_a, 1.0);
        } else {
          walk(n->kids[0].get());
          emit(OP_SQ);
          emit(OP_CONST, 0, 1.0); push();
          emit(OP_ADD); pop(1);
        }
        emit(OP_SQRT);
        return;
      case NodeKind::Norm2:
        if (n->tuple_a != TupleRef::None) {
          tuple_sum_squares(n->tuple_a, 0.0);
        } else {
          walk(n->kids[0].get());
          emit(OP_SQ);
        }
        return;
      case NodeKind::Dot: {
        emit(OP_CONST, 0, 0.0); push();
        std::uint8_t la = n->tuple_a == TupleRef::X ? OP_LOAD_X : OP_LOAD_T;
        std::uint8_t lb = n->tuple_b == TupleRef::X ? OP_LOAD_X : OP_LOAD_T;
        int len = n->tuple_a == TupleRef::X ? dims.d : dims.s;
        for (int i = 0; i < len; ++i) {
          emit(la, i); push();
          emit(lb, i); push();
          emit(OP_MUL); pop(1);
          emit(OP_ADD); pop(1);
        }
        return;
      }
    }
  }
};

} // namespace

const CompiledExpr& Expression::compiled() const {
  // Lazy build behind a lock; callers that evaluate from several threads
  // should touch compiled() once up front.
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (!compiled_) {
    auto ce = std::make_shared<CompiledExpr>();
    Compiler c{&ce->ops_, dims_};
    if (!root_) throw InvalidInput("compiling an empty expression");
    c.walk(root_.get());
    ce->max_depth_ = c.max_depth;
    compiled_ = std::move(ce);
  }
  return *compiled_;
}

double CompiledExpr::eval(const double* x, const double* t, double* scratch) const {
  int sp = 0;
  for (const Op& op : ops_) {
    switch (op.code) {
      case OP_CONST: scratch[sp++] = op.c; break;
      case OP_LOAD_X: scratch[sp++] = x[op.arg]; break;
      case OP_LOAD_T: scratch[sp++] = t[op.arg]; break;
      case OP_ADD: --sp; scratch[sp - 1] += scratch[sp]; break;
      case OP_SUB: --sp; scratch[sp - 1] -= scratch[sp]; break;
      case OP_MUL: --sp; scratch[sp - 1] *= scratch[sp]; break;
      case OP_DIV: --sp; scratch[sp - 1] /= scratch[sp]; break;
      case OP_NEG: scratch[sp - 1] = -scratch[sp - 1]; break;
      case OP_SQ: scratch[sp - 1] *= scratch[sp - 1]; break;
      case OP_SQRT: scratch[sp - 1] = std::sqrt(scratch[sp - 1]); break;
      case OP_EXP: scratch[sp - 1] = std::exp(scratch[sp - 1]); break;
      case OP_SIN: scratch[sp - 1] = std::sin(scratch[sp - 1]); break;
      case OP_COS: scratch[sp - 1] = std::cos(scratch[sp - 1]); break;
      case OP_POW_INT: scratch[sp - 1] = std::pow(scratch[sp - 1], op.arg); break;
      case OP_POW_HALF: scratch[sp - 1] = std::pow(scratch[sp - 1], 0.5 * op.arg); break;
    }
  }
  return scratch[0];
}

} // namespace sgcalc
