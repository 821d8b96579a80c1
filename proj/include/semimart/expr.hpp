#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace semimart {

// Error at parse time; offset is the byte position in the input text.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " (at offset " + std::to_string(offset) + ")"),
        offset(offset) {}
  std::size_t offset;
};

// Error during evaluation: names the offending subexpression.
struct EvalError : std::runtime_error {
  EvalError(const std::string& msg, std::string subexpr)
      : std::runtime_error(msg + " in `" + subexpr + "`"),
        subexpression(std::move(subexpr)) {}
  std::string subexpression;
};

namespace detail {
struct Node;
}

// Immutable arithmetic expression in one variable `x`.
//
// Grammar (documented in docs/expression-grammar.ebnf): literals, x, pi, e,
// unary minus, + - * / ^ (right-assoc, binds above unary minus; a negative
// exponent must be parenthesized), comparisons, ternary `cond ? a : b`, and
// the functions sin cos exp log sqrt abs sign min max spikes.
//
// spikes(t, p_in, p_out) evaluates to t^p_in when t lies inside one of the
// intervals (1/n - 1/n^4, 1/n + 1/n^4), n >= 2, and t^p_out otherwise.
class Expr {
 public:
  Expr() = default;

  static Expr parse(std::string_view text);

  double eval(double x) const;

  // Canonical text form; parse(str()) reproduces the same tree.
  std::string str() const;

  // If the expression contains no `x`, returns its value.
  std::optional<double> constant_value() const;
  bool is_constant_zero() const;

  // Collects known discontinuity/kink locations of the expression inside
  // (lo, hi): spike interval endpoints and piecewise guards comparing x with
  // a constant. Returns false when more than `cap` points would be needed.
  bool breakpoints(double lo, double hi, std::size_t cap,
                   std::vector<double>& out) const;

  bool same_structure(const Expr& other) const;
  explicit operator bool() const { return root_ != nullptr; }

 private:
  explicit Expr(std::shared_ptr<const detail::Node> root);
  std::shared_ptr<const detail::Node> root_;
};

// Membership test for the spike set E = union of (1/n - 1/n^4, 1/n + 1/n^4),
// n >= 2. Exposed for breakpoint-aware integration and tests.
bool in_spike_set(double t);
// Spike intervals intersecting (lo, hi), ordered by descending location.
// Returns false if more than `cap` boundary points would be produced.
bool spike_breakpoints(double lo, double hi, std::size_t cap,
                       std::vector<double>& out);

}  // namespace semimart
