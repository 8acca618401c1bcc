#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stlu/errors.hpp"
#include "stlu/monitor.hpp"

namespace stlu {

struct LossConfig {
  double beta = 0.5;     // weight of the robustness term vs. the distance term
  double epsilon = 0.95; // confidence level the candidate flowpipes were built at
};

inline void validate(const LossConfig& cfg) {
  if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0))
    throw contract_error("loss beta must lie in [0,1]");
}

// One labeled prediction source: a flowpipe per validation target, aligned by
// index with the target traces supplied at selection time.
struct CandidateConfig {
  std::string label;
  std::vector<Flowpipe> flowpipes;
};

namespace detail {

inline SignalEnv env_for(const Flowpipe& fp, const Formula& phi) {
  SignalEnv env;
  env.add(fp);
  // Mixed-epsilon formulas fail with an environment error at lookup time.
  (void)phi;
  return env;
}

}  // namespace detail

// Robustness agreement term: the flowpipe's worst-case robustness when the
// target satisfies the formula, minus its best case when the target violates
// it. Both the target test and the flowpipe bounds are taken at t = 0.
inline double eta_r(const Flowpipe& fp, const Trace& target, const Formula& phi) {
  const SignalEnv env = detail::env_for(fp, phi);
  const RobustInterval rho = robustness(phi, env, 0);
  if (trace_robustness(phi, target, 0) > 0.0) return rho.lower;
  return -rho.upper;
}

// Pointwise one-sided distance of the target trace from the flowpipe band,
// summed over the target's steps. Zero iff the target lies inside the band.
inline double eta_d(const Flowpipe& fp, const Trace& target) {
  if (target.values.size() > fp.size())
    throw contract_error("eta_d: target trace longer than flowpipe");
  double sum = 0.0;
  for (std::size_t tau = 0; tau < target.values.size(); ++tau) {
    const FlowStep& s = fp.steps[tau];
    const double x = target.values[tau];
    if (x < s.lower)
      sum += s.lower - x;
    else if (x > s.upper)
      sum += x - s.upper;
  }
  return sum;
}

inline double loss_qt(const Flowpipe& fp, const Trace& target, const Formula& phi,
                      const LossConfig& cfg) {
  validate(cfg);
  return -cfg.beta * eta_r(fp, target, phi) + (1.0 - cfg.beta) * eta_d(fp, target);
}

struct CandidateScore {
  std::string label;
  double mean_loss = 0.0;
};

// Mean loss per candidate over the aligned targets, ranked ascending.
// Ties break lexicographically by label.
inline std::vector<CandidateScore> select_config(std::span<const CandidateConfig> candidates,
                                                 std::span<const Trace> targets,
                                                 const Formula& phi, const LossConfig& cfg) {
  validate(cfg);
  if (targets.empty()) throw contract_error("select_config: no targets");
  std::vector<CandidateScore> scores;
  scores.reserve(candidates.size());
  for (const CandidateConfig& cand : candidates) {
    if (cand.flowpipes.size() != targets.size())
      throw contract_error("select_config: candidate '" + cand.label + "' has " +
                           std::to_string(cand.flowpipes.size()) + " flowpipes for " +
                           std::to_string(targets.size()) + " targets");
    double sum = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i)
      sum += loss_qt(cand.flowpipes[i], targets[i], phi, cfg);
    scores.push_back({cand.label, sum / static_cast<double>(targets.size())});
  }
  std::sort(scores.begin(), scores.end(), [](const CandidateScore& a, const CandidateScore& b) {
    if (a.mean_loss != b.mean_loss) return a.mean_loss < b.mean_loss;
    return a.label < b.label;
  });
  return scores;
}

struct SatisfactionCounts {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  int tn = 0;  // tracked for reporting, excluded from F1
};

inline SatisfactionCounts satisfaction_counts(
    std::span<const std::pair<Trace, Flowpipe>> pairs, const Formula& phi) {
  if (pairs.empty()) throw contract_error("satisfaction_counts: empty pair list");
  SatisfactionCounts c;
  for (const auto& [target, fp] : pairs) {
    const bool target_sat = trace_robustness(phi, target, 0) > 0.0;
    const SignalEnv env = detail::env_for(fp, phi);
    const bool predicted_sat = robustness(phi, env, 0).lower > 0.0;
    if (target_sat && predicted_sat)
      ++c.tp;
    else if (!target_sat && predicted_sat)
      ++c.fp;
    else if (target_sat && !predicted_sat)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

// F1 score of requirement satisfaction: TP / (TP + (FP + FN)/2).
// Zero when no positives exist at all.
inline double f1_satisfaction(std::span<const std::pair<Trace, Flowpipe>> pairs,
                              const Formula& phi) {
  const SatisfactionCounts c = satisfaction_counts(pairs, phi);
  const double denom = c.tp + 0.5 * (c.fp + c.fn);
  if (denom == 0.0) return 0.0;
  return c.tp / denom;
}

}  // namespace stlu
