#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stlu/errors.hpp"
#include "stlu/formula.hpp"
#include "stlu/interval.hpp"
#include "stlu/signal.hpp"

namespace stlu {

// Paired boolean satisfaction flags. strong implies weak for any flowpipe.
struct Verdict {
  bool strong = false;
  bool weak = false;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

// Registry of flowpipes keyed by (channel, confidence level). Every atom of a
// monitored formula must resolve to exactly one registered flowpipe.
class SignalEnv {
 public:
  void add(Flowpipe fp) {
    validate(fp);
    const std::pair<std::string, double> key{fp.channel, fp.epsilon};
    if (pipes_.count(key))
      throw contract_error("flowpipe already registered for channel '" + fp.channel + "'");
    if (!pipes_.empty() && fp.step_duration_s != pipes_.begin()->second.step_duration_s)
      throw contract_error("all flowpipes in an environment must share step_duration");
    pipes_.emplace(key, std::move(fp));
  }

  const Flowpipe* find(const std::string& channel, double epsilon) const {
    const auto it = pipes_.find({channel, epsilon});
    return it == pipes_.end() ? nullptr : &it->second;
  }

  const Flowpipe& at(const std::string& channel, double epsilon) const {
    const Flowpipe* fp = find(channel, epsilon);
    if (!fp)
      throw env_error("no flowpipe registered for " + channel + "{" +
                      detail::fmt_double(epsilon) + "}");
    return *fp;
  }

  bool empty() const { return pipes_.empty(); }

  // Unbounded windows are truncated to the shortest registered flowpipe.
  std::int64_t length() const {
    if (pipes_.empty()) throw env_error("signal environment is empty");
    std::int64_t n = unbounded_step;
    for (const auto& [key, fp] : pipes_)
      n = std::min(n, static_cast<std::int64_t>(fp.size()));
    return n;
  }

  const std::map<std::pair<std::string, double>, Flowpipe>& pipes() const { return pipes_; }

 private:
  std::map<std::pair<std::string, double>, Flowpipe> pipes_;
};

namespace detail {

// Steps beyond t required to evaluate f at t once unbounded windows are
// truncated. Finite for every formula (an unbounded window only needs its
// lower end to exist).
inline std::int64_t effective_horizon(const Formula& f) {
  switch (f.kind) {
    case FormulaKind::atom:
      return 0;
    case FormulaKind::negation:
      return effective_horizon(*f.left);
    case FormulaKind::conjunction:
    case FormulaKind::disjunction:
      return std::max(effective_horizon(*f.left), effective_horizon(*f.right));
    case FormulaKind::always:
    case FormulaKind::eventually: {
      const std::int64_t reach = f.window.is_unbounded() ? f.window.lo : f.window.hi;
      return sat_add(reach, effective_horizon(*f.left));
    }
    case FormulaKind::until: {
      const std::int64_t reach = f.window.is_unbounded() ? f.window.lo : f.window.hi;
      return sat_add(reach, std::max(effective_horizon(*f.left), effective_horizon(*f.right)));
    }
  }
  throw error("effective_horizon: unreachable formula kind");
}

// Absolute inclusive index range [first, last] a temporal operator folds over
// when evaluated at time t against flowpipes of length `len`.
inline std::pair<std::int64_t, std::int64_t> fold_range(const Formula& f, std::int64_t t,
                                                        std::int64_t len) {
  std::int64_t child_h;
  if (f.kind == FormulaKind::until)
    child_h = std::max(effective_horizon(*f.left), effective_horizon(*f.right));
  else
    child_h = effective_horizon(*f.left);

  const std::int64_t first = sat_add(t, f.window.lo);
  std::int64_t last;
  if (f.window.is_unbounded()) {
    last = child_h >= len ? -1 : len - 1 - child_h;
  } else {
    last = sat_add(t, f.window.hi);
    if (sat_add(last, child_h) > len - 1)
      throw horizon_error("flowpipe too short: window reaches step " +
                          std::to_string(sat_add(last, child_h)) + " but only " +
                          std::to_string(len) + " steps are available");
  }
  if (first > last)
    throw horizon_error("flowpipe too short to evaluate a window starting at step " +
                        std::to_string(first));
  return {first, last};
}

struct NodeTimeKey {
  const Formula* node;
  std::int64_t t;
  friend bool operator==(const NodeTimeKey&, const NodeTimeKey&) = default;
};

struct NodeTimeHash {
  std::size_t operator()(const NodeTimeKey& k) const {
    const std::size_t h = std::hash<const void*>{}(k.node);
    return h ^ (static_cast<std::size_t>(k.t) * 0x9E3779B97F4A7C15ull);
  }
};

inline RobustInterval atom_interval(const AtomicPredicate& p, const Flowpipe& fp,
                                    std::int64_t t) {
  if (t < 0 || t >= static_cast<std::int64_t>(fp.size()))
    throw horizon_error("flowpipe too short: atom evaluated at step " + std::to_string(t) +
                        " of " + std::to_string(fp.size()));
  const FlowStep& s = fp.steps[static_cast<std::size_t>(t)];
  const double a = p.eval(s.lower);
  const double b = p.eval(s.upper);
  return a <= b ? RobustInterval{a, b} : RobustInterval{b, a};
}

// Quantitative semantics. Results are memoized per (node, time) for the
// lifetime of one top-level call; nested temporal operators revisit shared
// subtrees at the same instants.
class RobustnessEval {
 public:
  explicit RobustnessEval(const SignalEnv& env) : env_(env), len_(env.length()) {}

  RobustInterval eval(const Formula& f, std::int64_t t) {
    if (f.kind == FormulaKind::atom)
      return atom_interval(f.pred, env_.at(f.pred.channel, f.pred.epsilon), t);

    const NodeTimeKey key{&f, t};
    if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
    const RobustInterval r = compute(f, t);
    memo_.emplace(key, r);
    return r;
  }

 private:
  RobustInterval compute(const Formula& f, std::int64_t t) {
    switch (f.kind) {
      case FormulaKind::negation:
        return neg_star(eval(*f.left, t));
      case FormulaKind::conjunction:
        return min_star(eval(*f.left, t), eval(*f.right, t));
      case FormulaKind::disjunction:
        return max_star(eval(*f.left, t), eval(*f.right, t));
      case FormulaKind::always: {
        const auto [first, last] = fold_range(f, t, len_);
        RobustInterval acc = eval(*f.left, first);
        for (std::int64_t k = first + 1; k <= last; ++k)
          acc = min_star(acc, eval(*f.left, k));
        return acc;
      }
      case FormulaKind::eventually: {
        const auto [first, last] = fold_range(f, t, len_);
        RobustInterval acc = eval(*f.left, first);
        for (std::int64_t k = first + 1; k <= last; ++k)
          acc = max_star(acc, eval(*f.left, k));
        return acc;
      }
      case FormulaKind::until: {
        // Running prefix min of the left operand keeps this linear in the
        // window length; the nested-loop form rescans [t, t'] per iteration.
        const auto [first, last] = fold_range(f, t, len_);
        RobustInterval prefix = eval(*f.left, t);
        for (std::int64_t k = t + 1; k <= first; ++k)
          prefix = min_star(prefix, eval(*f.left, k));
        RobustInterval acc = bottom_interval;
        for (std::int64_t tp = first; tp <= last; ++tp) {
          if (tp > first) prefix = min_star(prefix, eval(*f.left, tp));
          acc = max_star(acc, min_star(prefix, eval(*f.right, tp)));
        }
        return acc;
      }
      default:
        throw error("robustness: unreachable formula kind");
    }
  }

  const SignalEnv& env_;
  std::int64_t len_;
  std::unordered_map<NodeTimeKey, RobustInterval, NodeTimeHash> memo_;
};

// Boolean strong/weak semantics, evaluated by its own recursion so it can
// serve as an independent check of the quantitative monitor.
class VerdictEval {
 public:
  explicit VerdictEval(const SignalEnv& env) : env_(env), len_(env.length()) {}

  Verdict eval(const Formula& f, std::int64_t t) {
    if (f.kind == FormulaKind::atom) {
      const Flowpipe& fp = env_.at(f.pred.channel, f.pred.epsilon);
      if (t < 0 || t >= static_cast<std::int64_t>(fp.size()))
        throw horizon_error("flowpipe too short: atom evaluated at step " +
                            std::to_string(t));
      const FlowStep& s = fp.steps[static_cast<std::size_t>(t)];
      const double a = f.pred.eval(s.lower);
      const double b = f.pred.eval(s.upper);
      return {std::min(a, b) > 0.0, std::max(a, b) > 0.0};
    }

    const NodeTimeKey key{&f, t};
    if (const auto it = memo_.find(key); it != memo_.end()) return it->second;
    const Verdict v = compute(f, t);
    memo_.emplace(key, v);
    return v;
  }

 private:
  Verdict compute(const Formula& f, std::int64_t t) {
    switch (f.kind) {
      case FormulaKind::negation: {
        const Verdict v = eval(*f.left, t);
        return {!v.weak, !v.strong};
      }
      case FormulaKind::conjunction: {
        const Verdict a = eval(*f.left, t);
        const Verdict b = eval(*f.right, t);
        return {a.strong && b.strong, a.weak && b.weak};
      }
      case FormulaKind::disjunction: {
        const Verdict a = eval(*f.left, t);
        const Verdict b = eval(*f.right, t);
        return {a.strong || b.strong, a.weak || b.weak};
      }
      case FormulaKind::always: {
        const auto [first, last] = fold_range(f, t, len_);
        Verdict acc{true, true};
        for (std::int64_t k = first; k <= last; ++k) {
          const Verdict v = eval(*f.left, k);
          acc = {acc.strong && v.strong, acc.weak && v.weak};
        }
        return acc;
      }
      case FormulaKind::eventually: {
        const auto [first, last] = fold_range(f, t, len_);
        Verdict acc{false, false};
        for (std::int64_t k = first; k <= last; ++k) {
          const Verdict v = eval(*f.left, k);
          acc = {acc.strong || v.strong, acc.weak || v.weak};
        }
        return acc;
      }
      case FormulaKind::until: {
        const auto [first, last] = fold_range(f, t, len_);
        Verdict prefix = eval(*f.left, t);
        for (std::int64_t k = t + 1; k <= first; ++k) {
          const Verdict v = eval(*f.left, k);
          prefix = {prefix.strong && v.strong, prefix.weak && v.weak};
        }
        Verdict acc{false, false};
        for (std::int64_t tp = first; tp <= last; ++tp) {
          if (tp > first) {
            const Verdict v = eval(*f.left, tp);
            prefix = {prefix.strong && v.strong, prefix.weak && v.weak};
          }
          const Verdict v2 = eval(*f.right, tp);
          acc = {acc.strong || (prefix.strong && v2.strong),
                 acc.weak || (prefix.weak && v2.weak)};
        }
        return acc;
      }
      default:
        throw error("verdict: unreachable formula kind");
    }
  }

  const SignalEnv& env_;
  std::int64_t len_;
  std::unordered_map<NodeTimeKey, Verdict, NodeTimeHash> memo_;
};

}  // namespace detail

inline RobustInterval robustness(const Formula& f, const SignalEnv& env, std::int64_t t = 0) {
  if (t < 0) throw contract_error("robustness: evaluation time must be >= 0");
  return detail::RobustnessEval(env).eval(f, t);
}

inline Verdict verdict(const Formula& f, const SignalEnv& env, std::int64_t t = 0) {
  if (t < 0) throw contract_error("verdict: evaluation time must be >= 0");
  return detail::VerdictEval(env).eval(f, t);
}

// Classic single-trace robustness, computed by evaluating the formula over a
// degenerate flowpipe. Both interval bounds coincide; the common value is
// returned.
inline double trace_robustness(const Formula& f, const Trace& trace, std::int64_t t = 0) {
  const Flowpipe degenerate = trace_as_flowpipe(trace);
  SignalEnv env;
  bool any = false;
  for (const auto& [channel, eps] : collect_signal_refs(f)) {
    if (channel != trace.channel) continue;
    Flowpipe fp = degenerate;
    fp.epsilon = eps;
    env.add(std::move(fp));
    any = true;
  }
  if (!any)
    throw env_error("formula references no atom on channel '" + trace.channel + "'");
  return robustness(f, env, t).lower;
}

}  // namespace stlu
