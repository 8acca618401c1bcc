#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stlu/errors.hpp"

namespace stlu {

// Sentinel for the right end of an unbounded time interval [lo, inf).
inline constexpr std::int64_t unbounded_step = std::numeric_limits<std::int64_t>::max();

// Time interval in integer step offsets. Unbounded intervals are truncated to
// the end of the available flowpipe at evaluation time.
struct StepInterval {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  bool is_unbounded() const { return hi == unbounded_step; }
  friend bool operator==(const StepInterval&, const StepInterval&) = default;
};

inline StepInterval steps(std::int64_t lo, std::int64_t hi) {
  if (lo < 0) throw value_error("interval lower bound must be >= 0");
  if (lo > hi) throw value_error("interval with lo > hi");
  return {lo, hi};
}

inline StepInterval steps_from(std::int64_t lo) { return steps(lo, unbounded_step); }

// Affine predicate f(x) = scale*x + offset > 0 over the confidence interval
// of `channel` at level `epsilon`.
struct AtomicPredicate {
  std::string channel;
  double scale = 1.0;
  double offset = 0.0;
  double epsilon = 0.95;

  double eval(double x) const { return scale * x + offset; }
};

enum class FormulaKind { atom, negation, conjunction, disjunction, always, eventually, until };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  FormulaKind kind{};
  AtomicPredicate pred;   // kind == atom
  StepInterval window;    // temporal kinds
  FormulaPtr left;        // unary operand / first operand
  FormulaPtr right;       // second operand of conjunction/disjunction/until
};

inline FormulaPtr atom(std::string channel, double scale, double offset, double epsilon) {
  if (scale == 0.0) throw value_error("atomic predicate must have a nonzero signal coefficient");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw value_error("atom confidence level must lie strictly in (0,1)");
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::atom;
  f->pred = {std::move(channel), scale, offset, epsilon};
  return f;
}

inline FormulaPtr negation(FormulaPtr operand) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::negation;
  f->left = std::move(operand);
  return f;
}

inline FormulaPtr conjunction(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::conjunction;
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}

inline FormulaPtr disjunction(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::disjunction;
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}

inline FormulaPtr always(StepInterval window, FormulaPtr operand) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::always;
  f->window = window;
  f->left = std::move(operand);
  return f;
}

inline FormulaPtr eventually(StepInterval window, FormulaPtr operand) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::eventually;
  f->window = window;
  f->left = std::move(operand);
  return f;
}

inline FormulaPtr until(StepInterval window, FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::until;
  f->window = window;
  f->left = std::move(a);
  f->right = std::move(b);
  return f;
}

namespace detail {

// Saturating add over non-negative step counts; sums that cannot be
// represented collapse to the unbounded sentinel.
inline std::int64_t sat_add(std::int64_t a, std::int64_t b) {
  if (a == unbounded_step || b == unbounded_step) return unbounded_step;
  if (a > unbounded_step - b) return unbounded_step;
  return a + b;
}

}  // namespace detail

// Number of steps beyond t needed to evaluate the formula at time t.
// Unbounded windows propagate as `unbounded_step`.
inline std::int64_t horizon(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::atom:
      return 0;
    case FormulaKind::negation:
      return horizon(*f.left);
    case FormulaKind::conjunction:
    case FormulaKind::disjunction:
      return std::max(horizon(*f.left), horizon(*f.right));
    case FormulaKind::always:
    case FormulaKind::eventually:
      return detail::sat_add(f.window.hi, horizon(*f.left));
    case FormulaKind::until:
      return detail::sat_add(f.window.hi, std::max(horizon(*f.left), horizon(*f.right)));
  }
  throw error("horizon: unreachable formula kind");
}

inline bool structurally_equal(const Formula& a, const Formula& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case FormulaKind::atom:
      return a.pred.channel == b.pred.channel && a.pred.scale == b.pred.scale &&
             a.pred.offset == b.pred.offset && a.pred.epsilon == b.pred.epsilon;
    case FormulaKind::negation:
      return structurally_equal(*a.left, *b.left);
    case FormulaKind::conjunction:
    case FormulaKind::disjunction:
      return structurally_equal(*a.left, *b.left) && structurally_equal(*a.right, *b.right);
    case FormulaKind::always:
    case FormulaKind::eventually:
      return a.window == b.window && structurally_equal(*a.left, *b.left);
    case FormulaKind::until:
      return a.window == b.window && structurally_equal(*a.left, *b.left) &&
             structurally_equal(*a.right, *b.right);
  }
  return false;
}

// All distinct (channel, epsilon) pairs referenced by atoms of the formula.
inline void collect_signal_refs(const Formula& f,
                                std::vector<std::pair<std::string, double>>& out) {
  if (f.kind == FormulaKind::atom) {
    std::pair<std::string, double> ref{f.pred.channel, f.pred.epsilon};
    if (std::find(out.begin(), out.end(), ref) == out.end()) out.push_back(std::move(ref));
    return;
  }
  if (f.left) collect_signal_refs(*f.left, out);
  if (f.right) collect_signal_refs(*f.right, out);
}

inline std::vector<std::pair<std::string, double>> collect_signal_refs(const Formula& f) {
  std::vector<std::pair<std::string, double>> out;
  collect_signal_refs(f, out);
  return out;
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string fmt_window(const StepInterval& w) {
  std::string s = "[" + std::to_string(w.lo) + ",";
  s += w.is_unbounded() ? "inf" : std::to_string(w.hi);
  s += "]";
  return s;
}

inline std::string fmt_atom(const AtomicPredicate& p) {
  const std::string sig = p.channel + "{" + fmt_double(p.epsilon) + "}";
  if (p.scale == 1.0) return sig + " > " + fmt_double(-p.offset);
  if (p.scale == -1.0) return sig + " < " + fmt_double(p.offset);
  return fmt_double(p.scale) + "*" + sig + " > " + fmt_double(-p.offset);
}

}  // namespace detail

// Concrete-syntax form that parse() reads back into a structurally equal tree.
inline std::string pretty_print(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::atom:
      return detail::fmt_atom(f.pred);
    case FormulaKind::negation:
      return "!(" + pretty_print(*f.left) + ")";
    case FormulaKind::conjunction:
      return "(" + pretty_print(*f.left) + " & " + pretty_print(*f.right) + ")";
    case FormulaKind::disjunction:
      return "(" + pretty_print(*f.left) + " | " + pretty_print(*f.right) + ")";
    case FormulaKind::always:
      return "G" + detail::fmt_window(f.window) + " (" + pretty_print(*f.left) + ")";
    case FormulaKind::eventually:
      return "F" + detail::fmt_window(f.window) + " (" + pretty_print(*f.left) + ")";
    case FormulaKind::until:
      return "(" + pretty_print(*f.left) + " U" + detail::fmt_window(f.window) + " " +
             pretty_print(*f.right) + ")";
  }
  throw error("pretty_print: unreachable formula kind");
}

}  // namespace stlu
