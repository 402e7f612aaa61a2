#include "sgcalc/expr.hpp"
#include "sgcalc/errors.hpp"
#include "expr_internal.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace sgcalc {

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  double num = 0.0;
  std::string text;
  int begin = 0, end = 0;
};

class Lexer {
public:
  Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& cur() const { return cur_; }

  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    cur_.begin = static_cast<int>(pos_);
    if (pos_ >= src_.size()) {
      cur_.kind = Tok::End;
      cur_.end = cur_.begin;
      return;
    }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
      cur_.kind = Tok::Ident;
      cur_.text = src_.substr(start, pos_ - start);
      cur_.end = static_cast<int>(pos_);
      return;
    }
    ++pos_;
    cur_.end = static_cast<int>(pos_);
    switch (c) {
      case '+': cur_.kind = Tok::Plus; return;
      case '-': cur_.kind = Tok::Minus; return;
      case '*': cur_.kind = Tok::Star; return;
      case '/': cur_.kind = Tok::Slash; return;
      case '^': cur_.kind = Tok::Caret; return;
      case '(': cur_.kind = Tok::LParen; return;
      case ')': cur_.kind = Tok::RParen; return;
      case ',': cur_.kind = Tok::Comma; return;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", cur_.begin);
    }
  }

private:
  void lex_number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_;
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = mark;
      }
    }
    cur_.kind = Tok::Number;
    cur_.text = src_.substr(start, pos_ - start);
    cur_.num = std::strtod(cur_.text.c_str(), nullptr);
    cur_.end = static_cast<int>(pos_);
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  Token cur_;
};

// Positivity lattice used to gate half-integer exponents.
enum class Positivity { Unknown, NonNegative, Positive };

Positivity positivity(const ExprNode* n) {
  switch (n->kind) {
    case NodeKind::Const:
      if (n->cvalue > 0.0) return Positivity::Positive;
      if (n->cvalue == 0.0) return Positivity::NonNegative;
      return Positivity::Unknown;
    case NodeKind::Jb:
    case NodeKind::Exp:
      return Positivity::Positive;
    case NodeKind::Norm2:
      return Positivity::NonNegative;
    case NodeKind::Sqrt: {
      Positivity p = positivity(n->kids[0].get());
      return p == Positivity::Positive ? Positivity::Positive
           : p == Positivity::NonNegative ? Positivity::NonNegative
           : Positivity::Unknown;
    }
    case NodeKind::Add: {
      Positivity a = positivity(n->kids[0].get());
      Positivity b = positivity(n->kids[1].get());
      if (a == Positivity::Unknown || b == Positivity::Unknown) return Positivity::Unknown;
      if (a == Positivity::Positive || b == Positivity::Positive) return Positivity::Positive;
      return Positivity::NonNegative;
    }
    case NodeKind::Mul:
    case NodeKind::Div: {
      Positivity a = positivity(n->kids[0].get());
      Positivity b = positivity(n->kids[1].get());
      if (a == Positivity::Positive && b == Positivity::Positive) return Positivity::Positive;
      if (a == Positivity::Unknown || b == Positivity::Unknown) return Positivity::Unknown;
      return Positivity::NonNegative;
    }
    case NodeKind::Pow: {
      Positivity a = positivity(n->kids[0].get());
      bool even_int = (n->pow_num2 % 4 == 0);
      if (a == Positivity::Positive) return Positivity::Positive;
      if (even_int) return Positivity::NonNegative;
      return Positivity::Unknown;
    }
    default:
      return Positivity::Unknown;
  }
}

class Parser {
public:
  Parser(const std::string& src, Dims dims) : src_(src), lex_(src), dims_(dims) {}

  ExprNodePtr run() {
    ExprNodePtr e = expr();
    if (lex_.cur().kind != Tok::End)
      throw ParseError("unexpected trailing input", lex_.cur().begin);
    return e;
  }

private:
  std::shared_ptr<ExprNode> make(NodeKind k, int begin, int end) {
    auto n = std::make_shared<ExprNode>();
    n->kind = k;
    n->src_begin = begin;
    n->src_end = end;
    return n;
  }

  ExprNodePtr expr() {
    int begin = lex_.cur().begin;
    bool neg = false;
    if (lex_.cur().kind == Tok::Minus) {
      neg = true;
      lex_.advance();
    }
    ExprNodePtr left = term();
    if (neg) {
      auto n = make(NodeKind::Neg, begin, left->src_end);
      n->kids.push_back(left);
      left = n;
    }
    while (lex_.cur().kind == Tok::Plus || lex_.cur().kind == Tok::Minus) {
      NodeKind k = lex_.cur().kind == Tok::Plus ? NodeKind::Add : NodeKind::Sub;
      lex_.advance();
      ExprNodePtr right = term();
      auto n = make(k, left->src_begin, right->src_end);
      n->kids.push_back(left);
      n->kids.push_back(right);
      left = n;
    }
    return left;
  }

  ExprNodePtr term() {
    ExprNodePtr left = factor();
    while (lex_.cur().kind == Tok::Star || lex_.cur().kind == Tok::Slash) {
      NodeKind k = lex_.cur().kind == Tok::Star ? NodeKind::Mul : NodeKind::Div;
      lex_.advance();
      ExprNodePtr right = factor();
      auto n = make(k, left->src_begin, right->src_end);
      n->kids.push_back(left);
      n->kids.push_back(right);
      left = n;
    }
    return left;
  }

  ExprNodePtr factor() {
    ExprNodePtr base = atom();
    if (lex_.cur().kind != Tok::Caret) return base;
    lex_.advance();
    bool neg = false;
    if (lex_.cur().kind == Tok::Minus) {
      neg = true;
      lex_.advance();
    }
    if (lex_.cur().kind != Tok::Number)
      throw ParseError("exponent must be a number", lex_.cur().begin);
    double v = lex_.cur().num;
    int at = lex_.cur().begin;
    int end = lex_.cur().end;
    lex_.advance();
    if (neg) v = -v;
    double doubled = 2.0 * v;
    if (doubled != std::floor(doubled) || std::fabs(v) > 64)
      throw ParseError("exponent must be an integer or half-integer", at);
    int num2 = static_cast<int>(doubled);
    if (num2 % 2 != 0 && positivity(base.get()) != Positivity::Positive)
      throw ParseError("half-integer exponent requires a guaranteed-positive base", at);
    auto n = make(NodeKind::Pow, base->src_begin, end);
    n->pow_num2 = num2;
    n->kids.push_back(base);
    return n;
  }

  ExprNodePtr atom() {
    const Token& t = lex_.cur();
    if (t.kind == Tok::Number) {
      auto n = make(NodeKind::Const, t.begin, t.end);
      n->cvalue = t.num;
      lex_.advance();
      return n;
    }
    if (t.kind == Tok::LParen) {
      lex_.advance();
      ExprNodePtr inner = expr();
      expect(Tok::RParen, "expected ')'");
      return inner;
    }
    if (t.kind != Tok::Ident)
      throw ParseError("expected a number, variable, or function", t.begin);

    std::string name = t.text;
    int begin = t.begin;
    lex_.advance();

    if (name == "sqrt" || name == "exp" || name == "sin" || name == "cos")
      return func1(name, begin);
    if (name == "jb" || name == "norm2" || name == "dot")
      return funcv(name, begin);

    return variable(name, begin);
  }

  ExprNodePtr variable(const std::string& name, int begin) {
    if (name.empty() || (name[0] != 'x' && name[0] != 't'))
      throw ParseError("unknown identifier '" + name + "'", begin);
    std::string idxpart = name.substr(1);
    if (!idxpart.empty() && idxpart[0] == '_') idxpart = idxpart.substr(1);
    if (idxpart.empty())
      throw ParseError("bare '" + std::string(1, name[0]) +
                       "' denotes the full tuple and is only valid inside jb, norm2, or dot",
                       begin);
    for (char c : idxpart)
      if (!std::isdigit(static_cast<unsigned char>(c)))
        throw ParseError("unknown identifier '" + name + "'", begin);
    int idx = std::atoi(idxpart.c_str());
    bool is_x = name[0] == 'x';
    int limit = is_x ? dims_.d : dims_.s;
    if (idx < 1 || idx > limit)
      throw ParseError("component index out of range in '" + name + "' (dims d=" +
                       std::to_string(dims_.d) + ", s=" + std::to_string(dims_.s) + ")",
                       begin);
    auto n = make(is_x ? NodeKind::VarX : NodeKind::VarT, begin, begin + static_cast<int>(name.size()));
    n->var = idx - 1;
    return n;
  }

  ExprNodePtr func1(const std::string& name, int begin) {
    expect(Tok::LParen, "expected '(' after '" + name + "'");
    ExprNodePtr arg = expr();
    int end = lex_.cur().end;
    expect(Tok::RParen, "expected ')'");
    NodeKind k = name == "sqrt" ? NodeKind::Sqrt
               : name == "exp" ? NodeKind::Exp
               : name == "sin" ? NodeKind::Sin
               : NodeKind::Cos;
    auto n = make(k, begin, end);
    n->kids.push_back(arg);
    return n;
  }

  // jb / norm2: one argument, tuple or scalar. dot: two tuple arguments.
  ExprNodePtr funcv(const std::string& name, int begin) {
    expect(Tok::LParen, "expected '(' after '" + name + "'");
    if (name == "dot") {
      TupleRef a = tuple_arg(name);
      expect(Tok::Comma, "dot takes two tuple arguments");
      TupleRef b = tuple_arg(name);
      int end = lex_.cur().end;
      expect(Tok::RParen, "expected ')'");
      int la = a == TupleRef::X ? dims_.d : dims_.s;
      int lb = b == TupleRef::X ? dims_.d : dims_.s;
      if (la != lb)
        throw ParseError("dot arguments have different lengths (d=" + std::to_string(dims_.d) +
                         ", s=" + std::to_string(dims_.s) + ")", begin);
      auto n = make(NodeKind::Dot, begin, end);
      n->tuple_a = a;
      n->tuple_b = b;
      return n;
    }
    auto n = make(name == "jb" ? NodeKind::Jb : NodeKind::Norm2, begin, 0);
    if (lex_.cur().kind == Tok::Ident && (lex_.cur().text == "x" || lex_.cur().text == "t")) {
      n->tuple_a = lex_.cur().text == "x" ? TupleRef::X : TupleRef::T;
      lex_.advance();
    } else {
      n->kids.push_back(expr());
    }
    n->src_end = lex_.cur().end;
    expect(Tok::RParen, "expected ')'");
    return n;
  }

  TupleRef tuple_arg(const std::string& fname) {
    const Token& t = lex_.cur();
    if (t.kind == Tok::Ident && (t.text == "x" || t.text == "t")) {
      TupleRef r = t.text == "x" ? TupleRef::X : TupleRef::T;
      lex_.advance();
      return r;
    }
    throw ParseError(fname + " takes the tuple arguments 'x' or 't'", t.begin);
  }

  void expect(Tok k, const std::string& msg) {
    if (lex_.cur().kind != k) throw ParseError(msg, lex_.cur().begin);
    lex_.advance();
  }

  const std::string& src_;
  Lexer lex_;
  Dims dims_;
};

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Precedence levels for canonical printing: Add/Sub 1, Mul/Div 2, Pow 3,
// atoms 4. Neg prints at level 1 so it is parenthesized everywhere except
// at the head of a sum, where the grammar accepts a leading minus.
int precedence(const ExprNode* n) {
  switch (n->kind) {
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Neg: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Pow: return 3;
    default: return 4;
  }
}

void unparse_rec(const ExprNode* n, std::string& out);

void unparse_child(const ExprNode* child, int min_prec, std::string& out) {
  bool parens = precedence(child) < min_prec;
  if (parens) out += '(';
  unparse_rec(child, out);
  if (parens) out += ')';
}

const char* tuple_name(TupleRef r) { return r == TupleRef::X ? "x" : "t"; }

void unparse_rec(const ExprNode* n, std::string& out) {
  switch (n->kind) {
    case NodeKind::Const:
      out += format_double(n->cvalue);
      return;
    case NodeKind::VarX:
      out += 'x';
      out += std::to_string(n->var + 1);
      return;
    case NodeKind::VarT:
      out += 't';
      out += std::to_string(n->var + 1);
      return;
    case NodeKind::Add:
      unparse_child(n->kids[0].get(), 1, out);
      out += " + ";
      unparse_child(n->kids[1].get(), 2, out);
      return;
    case NodeKind::Sub:
      unparse_child(n->kids[0].get(), 1, out);
      out += " - ";
      unparse_child(n->kids[1].get(), 2, out);
      return;
    case NodeKind::Mul:
      unparse_child(n->kids[0].get(), 2, out);
      out += '*';
      unparse_child(n->kids[1].get(), 3, out);
      return;
    case NodeKind::Div:
      unparse_child(n->kids[0].get(), 2, out);
      out += '/';
      unparse_child(n->kids[1].get(), 4, out);
      return;
    case NodeKind::Neg: {
      out += '-';
      const ExprNode* c = n->kids[0].get();
      bool parens = precedence(c) < 2 || c->kind == NodeKind::Neg;
      if (parens) out += '(';
      unparse_rec(c, out);
      if (parens) out += ')';
      return;
    }
    case NodeKind::Pow: {
      unparse_child(n->kids[0].get(), 4, out);
      out += '^';
      if (n->pow_num2 % 2 == 0) out += std::to_string(n->pow_num2 / 2);
      else out += format_double(0.5 * n->pow_num2);
      return;
    }
    case NodeKind::Sqrt: out += "sqrt("; unparse_rec(n->kids[0].get(), out); out += ')'; return;
    case NodeKind::Exp:  out += "exp(";  unparse_rec(n->kids[0].get(), out); out += ')'; return;
    case NodeKind::Sin:  out += "sin(";  unparse_rec(n->kids[0].get(), out); out += ')'; return;
    case NodeKind::Cos:  out += "cos(";  unparse_rec(n->kids[0].get(), out); out += ')'; return;
    case NodeKind::Jb:
    case NodeKind::Norm2:
      out += n->kind == NodeKind::Jb ? "jb(" : "norm2(";
      if (n->tuple_a != TupleRef::None) out += tuple_name(n->tuple_a);
      else unparse_rec(n->kids[0].get(), out);
      out += ')';
      return;
    case NodeKind::Dot:
      out += "dot(";
      out += tuple_name(n->tuple_a);
      out += ',';
      out += tuple_name(n->tuple_b);
      out += ')';
      return;
  }
}

} // namespace

Expression Expression::parse(const std::string& text, Dims dims) {
  if (dims.d < 0 || dims.s < 0 || dims.n() < 1)
    throw InvalidInput("expression dims must satisfy d,s >= 0 and d+s >= 1");
  Parser p(text, dims);
  return Expression(p.run(), dims, text);
}

std::string Expression::unparse() const {
  std::string out;
  if (root_) unparse_rec(root_.get(), out);
  return out;
}

namespace detail {

std::string unparse_node(const ExprNode* n) {
  std::string out;
  unparse_rec(n, out);
  return out;
}

} // namespace detail

namespace {

std::shared_ptr<ExprNode> mk(NodeKind k) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  return n;
}

std::shared_ptr<ExprNode> mk2(NodeKind k, ExprNodePtr a, ExprNodePtr b) {
  auto n = mk(k);
  n->kids.push_back(std::move(a));
  n->kids.push_back(std::move(b));
  return n;
}

} // namespace

Expression Expression::constant(double v, Dims dims) {
  if (v < 0.0) {
    auto inner = mk(NodeKind::Const);
    inner->cvalue = -v;
    auto n = mk(NodeKind::Neg);
    n->kids.push_back(inner);
    return Expression(n, dims, {});
  }
  auto n = mk(NodeKind::Const);
  n->cvalue = v;
  return Expression(n, dims, {});
}

Expression Expression::var_x(int i, Dims dims) {
  if (i < 0 || i >= dims.d) throw InvalidInput("var_x index out of range");
  auto n = mk(NodeKind::VarX);
  n->var = i;
  return Expression(n, dims, {});
}

Expression Expression::var_t(int j, Dims dims) {
  if (j < 0 || j >= dims.s) throw InvalidInput("var_t index out of range");
  auto n = mk(NodeKind::VarT);
  n->var = j;
  return Expression(n, dims, {});
}

namespace {

void require_same_dims(const Expression& a, const Expression& b) {
  if (a.dims() != b.dims()) throw InvalidInput("expression dims mismatch");
}

} // namespace

Expression operator+(const Expression& a, const Expression& b) {
  require_same_dims(a, b);
  return Expression(mk2(NodeKind::Add, a.root(), b.root()), a.dims(), {});
}

Expression operator-(const Expression& a, const Expression& b) {
  require_same_dims(a, b);
  return Expression(mk2(NodeKind::Sub, a.root(), b.root()), a.dims(), {});
}

Expression operator*(const Expression& a, const Expression& b) {
  require_same_dims(a, b);
  return Expression(mk2(NodeKind::Mul, a.root(), b.root()), a.dims(), {});
}

Expression operator/(const Expression& a, const Expression& b) {
  require_same_dims(a, b);
  return Expression(mk2(NodeKind::Div, a.root(), b.root()), a.dims(), {});
}

Expression Expression::operator-() const {
  auto n = mk(NodeKind::Neg);
  n->kids.push_back(root_);
  return Expression(n, dims_, {});
}

Expression make_unary(NodeKind k, const Expression& a) {
  auto n = mk(k);
  n->kids.push_back(a.root());
  return Expression(n, a.dims(), {});
}

Expression make_pow(const Expression& a, int num2) {
  auto n = mk(NodeKind::Pow);
  n->pow_num2 = num2;
  n->kids.push_back(a.root());
  return Expression(n, a.dims(), {});
}

Expression sqrt(const Expression& a) { return make_unary(NodeKind::Sqrt, a); }
Expression exp(const Expression& a) { return make_unary(NodeKind::Exp, a); }
Expression sin(const Expression& a) { return make_unary(NodeKind::Sin, a); }
Expression cos(const Expression& a) { return make_unary(NodeKind::Cos, a); }
Expression pow(const Expression& a, int n) { return make_pow(a, 2 * n); }

namespace {

bool nodes_equal(const ExprNode* a, const ExprNode* b) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::Const:
      if (a->cvalue != b->cvalue) return false;
      break;
    case NodeKind::VarX:
    case NodeKind::VarT:
      if (a->var != b->var) return false;
      break;
    case NodeKind::Pow:
      if (a->pow_num2 != b->pow_num2) return false;
      break;
    case NodeKind::Jb:
    case NodeKind::Norm2:
    case NodeKind::Dot:
      if (a->tuple_a != b->tuple_a || a->tuple_b != b->tuple_b) return false;
      break;
    default:
      break;
  }
  if (a->kids.size() != b->kids.size()) return false;
  for (std::size_t i = 0; i < a->kids.size(); ++i)
    if (!nodes_equal(a->kids[i].get(), b->kids[i].get())) return false;
  return true;
}

} // namespace

bool structurally_equal(const Expression& a, const Expression& b) {
  if (!a.valid() || !b.valid()) return a.valid() == b.valid();
  if (a.dims() != b.dims()) return false;
  return nodes_equal(a.root().get(), b.root().get());
}

} // namespace sgcalc
