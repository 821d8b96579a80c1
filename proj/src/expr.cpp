#include "semimart/expr.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <sstream>

namespace semimart {
namespace detail {

enum class Op {
  Number,
  Var,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Lt,
  Le,
  Gt,
  Ge,
  Eq,
  Ne,
  Ternary,
  Sin,
  Cos,
  Exp,
  Log,
  Sqrt,
  Abs,
  Sign,
  Min,
  Max,
  Spikes,
};

struct Node {
  Op op;
  double number = 0.0;
  std::vector<std::shared_ptr<const Node>> kids;
};

using NodePtr = std::shared_ptr<const Node>;

namespace {

NodePtr make(Op op, std::vector<NodePtr> kids = {}) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->kids = std::move(kids);
  return n;
}

NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Number;
  n->number = v;
  return n;
}

struct FuncInfo {
  const char* name;
  Op op;
  int arity;
};

constexpr std::array<FuncInfo, 10> kFunctions = {{
    {"sin", Op::Sin, 1},
    {"cos", Op::Cos, 1},
    {"exp", Op::Exp, 1},
    {"log", Op::Log, 1},
    {"sqrt", Op::Sqrt, 1},
    {"abs", Op::Abs, 1},
    {"sign", Op::Sign, 1},
    {"min", Op::Min, 2},
    {"max", Op::Max, 2},
    {"spikes", Op::Spikes, 3},
}};

const FuncInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (name == f.name) return &f;
  return nullptr;
}

// ---------------------------------------------------------------- parsing

struct Parser {
  std::string_view text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' ||
                                 text[pos] == '\n' || text[pos] == '\r'))
      ++pos;
  }

  bool eof() {
    skip_ws();
    return pos >= text.size();
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  bool consume(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  bool consume(std::string_view s) {
    skip_ws();
    if (text.substr(pos, s.size()) == s) {
      pos += s.size();
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos); }

  NodePtr parse_ternary() {
    NodePtr cond = parse_compare();
    if (consume('?')) {
      NodePtr a = parse_ternary();
      if (!consume(':')) fail("expected ':' in conditional");
      NodePtr b = parse_ternary();
      return make(Op::Ternary, {cond, a, b});
    }
    return cond;
  }

  NodePtr parse_compare() {
    NodePtr lhs = parse_additive();
    skip_ws();
    Op op;
    if (consume("<=")) op = Op::Le;
    else if (consume(">=")) op = Op::Ge;
    else if (consume("==")) op = Op::Eq;
    else if (consume("!=")) op = Op::Ne;
    else if (peek() == '<') { ++pos; op = Op::Lt; }
    else if (peek() == '>') { ++pos; op = Op::Gt; }
    else return lhs;
    NodePtr rhs = parse_additive();
    return make(op, {lhs, rhs});
  }

  NodePtr parse_additive() {
    NodePtr lhs = parse_multiplicative();
    for (;;) {
      if (consume('+')) {
        lhs = make(Op::Add, {lhs, parse_multiplicative()});
      } else if (peek() == '-') {
        ++pos;
        lhs = make(Op::Sub, {lhs, parse_multiplicative()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_multiplicative() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (consume('*')) {
        lhs = make(Op::Mul, {lhs, parse_unary()});
      } else if (consume('/')) {
        lhs = make(Op::Div, {lhs, parse_unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    if (peek() == '-') {
      ++pos;
      return make(Op::Neg, {parse_unary()});
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (consume('^')) {
      skip_ws();
      if (peek() == '-')
        fail("negative exponent must be parenthesized, e.g. x^(-1)");
      NodePtr expo = parse_power();  // right associative
      return make(Op::Pow, {base, expo});
    }
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of input");
    char c = text[pos];
    if (c == '(') {
      ++pos;
      NodePtr inner = parse_ternary();
      if (!consume(')')) fail("expected ')'");
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_')
      return parse_identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr parse_number() {
    double value = 0.0;
    const char* begin = text.data() + pos;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc()) fail("malformed number");
    pos += static_cast<std::size_t>(ptr - begin);
    return make_number(value);
  }

  NodePtr parse_identifier() {
    std::size_t start = pos;
    while (pos < text.size() &&
           ((text[pos] >= 'a' && text[pos] <= 'z') ||
            (text[pos] >= 'A' && text[pos] <= 'Z') ||
            (text[pos] >= '0' && text[pos] <= '9') || text[pos] == '_'))
      ++pos;
    std::string_view name = text.substr(start, pos - start);
    if (name == "x") return make(Op::Var);
    if (name == "pi") return make_number(3.14159265358979323846);
    if (name == "e") return make_number(2.71828182845904523536);
    if (const FuncInfo* f = find_function(name)) {
      if (!consume('(')) fail(std::string(name) + " requires arguments");
      std::vector<NodePtr> args;
      args.push_back(parse_ternary());
      while (consume(',')) args.push_back(parse_ternary());
      if (!consume(')')) fail("expected ')'");
      if (static_cast<int>(args.size()) != f->arity) {
        pos = start;
        fail(std::string(name) + " expects " + std::to_string(f->arity) +
             " argument(s)");
      }
      return make(f->op, std::move(args));
    }
    pos = start;
    fail("unknown identifier '" + std::string(name) + "'");
  }
};

// ---------------------------------------------------------------- printing

std::string number_to_string(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

// Precedence levels for minimal parenthesization.
int precedence(Op op) {
  switch (op) {
    case Op::Ternary: return 1;
    case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge:
    case Op::Eq: case Op::Ne: return 2;
    case Op::Add: case Op::Sub: return 3;
    case Op::Mul: case Op::Div: return 4;
    case Op::Neg: return 5;
    case Op::Pow: return 6;
    default: return 7;  // atoms and calls
  }
}

void print(const Node& n, std::ostream& os);

void print_child(const Node& child, int parent_prec, bool needs_higher,
                 std::ostream& os) {
  int p = precedence(child.op);
  bool parens = needs_higher ? (p <= parent_prec) : (p < parent_prec);
  if (parens) os << '(';
  print(child, os);
  if (parens) os << ')';
}

const char* cmp_token(Op op) {
  switch (op) {
    case Op::Lt: return "<";
    case Op::Le: return "<=";
    case Op::Gt: return ">";
    case Op::Ge: return ">=";
    case Op::Eq: return "==";
    default: return "!=";
  }
}

void print(const Node& n, std::ostream& os) {
  switch (n.op) {
    case Op::Number: {
      if (n.number < 0) {
        os << '(' << number_to_string(n.number) << ')';
      } else {
        os << number_to_string(n.number);
      }
      return;
    }
    case Op::Var: os << 'x'; return;
    case Op::Neg:
      os << '-';
      print_child(*n.kids[0], precedence(Op::Neg), false, os);
      return;
    case Op::Add:
      print_child(*n.kids[0], 3, false, os);
      os << '+';
      print_child(*n.kids[1], 3, true, os);
      return;
    case Op::Sub:
      print_child(*n.kids[0], 3, false, os);
      os << '-';
      print_child(*n.kids[1], 3, true, os);
      return;
    case Op::Mul:
      print_child(*n.kids[0], 4, false, os);
      os << '*';
      print_child(*n.kids[1], 4, true, os);
      return;
    case Op::Div:
      print_child(*n.kids[0], 4, false, os);
      os << '/';
      print_child(*n.kids[1], 4, true, os);
      return;
    case Op::Pow:
      // exponent printed parenthesized so negatives stay well-formed
      print_child(*n.kids[0], 6, true, os);
      os << '^';
      os << '(';
      print(*n.kids[1], os);
      os << ')';
      return;
    case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge:
    case Op::Eq: case Op::Ne:
      print_child(*n.kids[0], 2, false, os);
      os << cmp_token(n.op);
      print_child(*n.kids[1], 2, true, os);
      return;
    case Op::Ternary:
      os << '(';
      print(*n.kids[0], os);
      os << '?';
      print(*n.kids[1], os);
      os << ':';
      print(*n.kids[2], os);
      os << ')';
      return;
    default: {
      const char* name = nullptr;
      for (const auto& f : kFunctions)
        if (f.op == n.op) name = f.name;
      os << name << '(';
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i) os << ',';
        print(*n.kids[i], os);
      }
      os << ')';
      return;
    }
  }
}

std::string to_string(const Node& n) {
  std::ostringstream os;
  print(n, os);
  return os.str();
}

// --------------------------------------------------------------- evaluation

[[noreturn]] void eval_fail(const char* msg, const Node& n) {
  throw EvalError(msg, to_string(n));
}

bool is_integer(double v) { return std::rint(v) == v && std::isfinite(v); }

double eval_node(const Node& n, double x) {
  switch (n.op) {
    case Op::Number: return n.number;
    case Op::Var: return x;
    case Op::Neg: return -eval_node(*n.kids[0], x);
    case Op::Add: return eval_node(*n.kids[0], x) + eval_node(*n.kids[1], x);
    case Op::Sub: return eval_node(*n.kids[0], x) - eval_node(*n.kids[1], x);
    case Op::Mul: return eval_node(*n.kids[0], x) * eval_node(*n.kids[1], x);
    case Op::Div: {
      double a = eval_node(*n.kids[0], x);
      double b = eval_node(*n.kids[1], x);
      if (b == 0.0) eval_fail("division by zero", n);
      return a / b;
    }
    case Op::Pow: {
      double a = eval_node(*n.kids[0], x);
      double b = eval_node(*n.kids[1], x);
      if (a < 0.0 && !is_integer(b))
        eval_fail("negative base with non-integer exponent", n);
      if (a == 0.0 && b < 0.0) eval_fail("zero raised to negative power", n);
      return std::pow(a, b);
    }
    case Op::Lt: return eval_node(*n.kids[0], x) < eval_node(*n.kids[1], x);
    case Op::Le: return eval_node(*n.kids[0], x) <= eval_node(*n.kids[1], x);
    case Op::Gt: return eval_node(*n.kids[0], x) > eval_node(*n.kids[1], x);
    case Op::Ge: return eval_node(*n.kids[0], x) >= eval_node(*n.kids[1], x);
    case Op::Eq: return eval_node(*n.kids[0], x) == eval_node(*n.kids[1], x);
    case Op::Ne: return eval_node(*n.kids[0], x) != eval_node(*n.kids[1], x);
    case Op::Ternary:
      return eval_node(*n.kids[0], x) != 0.0 ? eval_node(*n.kids[1], x)
                                             : eval_node(*n.kids[2], x);
    case Op::Sin: return std::sin(eval_node(*n.kids[0], x));
    case Op::Cos: return std::cos(eval_node(*n.kids[0], x));
    case Op::Exp: return std::exp(eval_node(*n.kids[0], x));
    case Op::Log: {
      double a = eval_node(*n.kids[0], x);
      if (a <= 0.0) eval_fail("log of non-positive value", n);
      return std::log(a);
    }
    case Op::Sqrt: {
      double a = eval_node(*n.kids[0], x);
      if (a < 0.0) eval_fail("sqrt of negative value", n);
      return std::sqrt(a);
    }
    case Op::Abs: return std::fabs(eval_node(*n.kids[0], x));
    case Op::Sign: {
      double a = eval_node(*n.kids[0], x);
      return (a > 0.0) - (a < 0.0);
    }
    case Op::Min:
      return std::min(eval_node(*n.kids[0], x), eval_node(*n.kids[1], x));
    case Op::Max:
      return std::max(eval_node(*n.kids[0], x), eval_node(*n.kids[1], x));
    case Op::Spikes: {
      double t = eval_node(*n.kids[0], x);
      double pin = eval_node(*n.kids[1], x);
      double pout = eval_node(*n.kids[2], x);
      if (t <= 0.0) eval_fail("spikes argument must be positive", n);
      return std::pow(t, in_spike_set(t) ? pin : pout);
    }
  }
  eval_fail("unhandled node", n);
}

bool structurally_equal(const Node& a, const Node& b) {
  if (a.op != b.op) return false;
  if (a.op == Op::Number)
    return a.number == b.number ||
           (std::isnan(a.number) && std::isnan(b.number));
  if (a.kids.size() != b.kids.size()) return false;
  for (std::size_t i = 0; i < a.kids.size(); ++i)
    if (!structurally_equal(*a.kids[i], *b.kids[i])) return false;
  return true;
}

bool depends_on_x(const Node& n) {
  if (n.op == Op::Var) return true;
  for (const auto& k : n.kids)
    if (depends_on_x(*k)) return true;
  return false;
}

// Breakpoints contributed by guards of the form (x CMP const) or
// (const CMP x) and by spikes(x, ...) terms.
bool collect_breakpoints(const Node& n, double lo, double hi, std::size_t cap,
                         std::vector<double>& out) {
  switch (n.op) {
    case Op::Lt: case Op::Le: case Op::Gt: case Op::Ge:
    case Op::Eq: case Op::Ne: {
      const Node& a = *n.kids[0];
      const Node& b = *n.kids[1];
      double threshold;
      if (a.op == Op::Var && b.op == Op::Number) threshold = b.number;
      else if (b.op == Op::Var && a.op == Op::Number) threshold = a.number;
      else break;
      if (threshold > lo && threshold < hi) {
        if (out.size() >= cap) return false;
        out.push_back(threshold);
      }
      return true;
    }
    case Op::Spikes:
      if (n.kids[0]->op == Op::Var)
        if (!spike_breakpoints(lo, hi, cap > out.size() ? cap - out.size() : 0,
                               out))
          return false;
      break;
    default:
      break;
  }
  for (const auto& k : n.kids)
    if (!collect_breakpoints(*k, lo, hi, cap, out)) return false;
  return true;
}

}  // namespace
}  // namespace detail

// ------------------------------------------------------------ spike helpers

bool in_spike_set(double t) {
  if (t <= 0.0 || t >= 0.5625) return false;  // b_2 = 1/2 + 1/16
  double inv = 1.0 / t;
  auto near = static_cast<long long>(std::llround(inv));
  for (long long n = near - 1; n <= near + 1; ++n) {
    if (n < 2) continue;
    double dn = static_cast<double>(n);
    double w = 1.0 / (dn * dn * dn * dn);
    double center = 1.0 / dn;
    if (t > center - w && t < center + w) return true;
  }
  return false;
}

bool spike_breakpoints(double lo, double hi, std::size_t cap,
                       std::vector<double>& out) {
  if (hi <= 0.0 || lo >= 0.5625) return true;
  double hi_eff = std::min(hi, 0.5625);
  double lo_eff = std::max(lo, 0.0);
  long long n_start = 2;
  if (hi_eff < 0.5) {
    n_start = std::max<long long>(2, static_cast<long long>(1.0 / hi_eff) - 1);
  }
  std::size_t produced = 0;
  for (long long n = n_start;; ++n) {
    double dn = static_cast<double>(n);
    double center = 1.0 / dn;
    double w = 1.0 / (dn * dn * dn * dn);
    double a = center - w, b = center + w;
    if (b <= lo_eff) break;          // all later spikes are lower still
    if (a >= hi_eff) continue;       // not yet inside the window
    if (a <= lo_eff && b >= hi_eff) break;  // window inside one spike
    for (double p : {a, b}) {
      if (p > lo_eff && p < hi_eff) {
        if (produced >= cap) return false;
        out.push_back(p);
        ++produced;
      }
    }
    if (a == b) break;  // width underflowed; deeper spikes are invisible
  }
  return true;
}

// ------------------------------------------------------------------- Expr

Expr::Expr(std::shared_ptr<const detail::Node> root) : root_(std::move(root)) {}

Expr Expr::parse(std::string_view text) {
  detail::Parser p{text};
  auto root = p.parse_ternary();
  if (!p.eof()) p.fail("unexpected trailing input");
  return Expr(std::move(root));
}

double Expr::eval(double x) const { return detail::eval_node(*root_, x); }

std::string Expr::str() const { return detail::to_string(*root_); }

std::optional<double> Expr::constant_value() const {
  if (!root_ || detail::depends_on_x(*root_)) return std::nullopt;
  return detail::eval_node(*root_, 0.0);
}

bool Expr::is_constant_zero() const {
  auto v = constant_value();
  return v && *v == 0.0;
}

bool Expr::breakpoints(double lo, double hi, std::size_t cap,
                       std::vector<double>& out) const {
  if (!root_) return true;
  bool ok = detail::collect_breakpoints(*root_, lo, hi, cap, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return ok;
}

bool Expr::same_structure(const Expr& other) const {
  if (!root_ || !other.root_) return root_ == other.root_;
  return detail::structurally_equal(*root_, *other.root_);
}

}  // namespace semimart
