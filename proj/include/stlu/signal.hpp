#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "stlu/errors.hpp"
#include "stlu/normal.hpp"

namespace stlu {

// Monte Carlo prediction samples: N runs of the same signal over T steps.
struct SampleSet {
  std::vector<std::vector<double>> values;  // values[n][t], N rows, T columns
  double step_duration_s = 1.0;
  std::string channel;

  std::size_t runs() const { return values.size(); }
  std::size_t steps() const { return values.empty() ? 0 : values.front().size(); }
};

struct GaussianStep {
  double mean = 0.0;
  double std = 0.0;
};

// Ground-truth (or otherwise single-valued) signal.
struct Trace {
  std::vector<double> values;
  double step_duration_s = 1.0;
  std::string channel;
};

struct FlowStep {
  double lower = 0.0;
  double upper = 0.0;
};

// Uncertain signal: one confidence interval per step, at confidence level
// epsilon. Degenerate (zero-width) flowpipes carry epsilon = 1.0.
struct Flowpipe {
  std::vector<FlowStep> steps;
  double epsilon = 0.95;
  double step_duration_s = 1.0;
  std::string channel;

  std::size_t size() const { return steps.size(); }
};

inline void validate(const SampleSet& s) {
  if (s.runs() < 2) throw value_error("sample set needs at least 2 runs");
  if (s.steps() < 1) throw value_error("sample set needs at least 1 step");
  for (std::size_t n = 0; n < s.runs(); ++n) {
    if (s.values[n].size() != s.steps())
      throw shape_error("sample set is not rectangular (run " + std::to_string(n) + ")");
    for (double v : s.values[n])
      if (!std::isfinite(v)) throw value_error("sample set contains a non-finite value");
  }
}

inline void validate(const Trace& t) {
  for (double v : t.values)
    if (!std::isfinite(v)) throw value_error("trace contains a non-finite value");
}

inline void validate(const Flowpipe& f) {
  if (f.steps.empty()) throw value_error("flowpipe must have at least 1 step");
  if (!(f.epsilon > 0.0 && f.epsilon <= 1.0))
    throw value_error("flowpipe epsilon must lie in (0,1]");
  for (const auto& s : f.steps) {
    if (!std::isfinite(s.lower) || !std::isfinite(s.upper))
      throw value_error("flowpipe contains a non-finite bound");
    if (s.lower > s.upper) throw value_error("flowpipe step with lower > upper");
  }
}

// Per-step Gaussian fit: sample mean and sample standard deviation
// (N-1 denominator).
inline std::vector<GaussianStep> fit_gaussians(const SampleSet& samples) {
  const std::size_t n = samples.runs();
  const std::size_t t_len = samples.steps();
  if (n < 2) throw contract_error("fit_gaussians: need at least 2 Monte Carlo runs");

  std::vector<GaussianStep> out(t_len);
  for (std::size_t t = 0; t < t_len; ++t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += samples.values[i][t];
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = samples.values[i][t] - mean;
      ss += d * d;
    }
    out[t] = {mean, std::sqrt(ss / static_cast<double>(n - 1))};
  }
  return out;
}

// Two-sided symmetric confidence interval at level epsilon:
// [mean - z*std, mean + z*std] with z the (1+eps)/2 normal quantile.
inline Flowpipe to_flowpipe(const std::vector<GaussianStep>& gaussians, double epsilon,
                            std::string channel = "BG", double step_duration_s = 1.0) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw contract_error("to_flowpipe: epsilon must lie strictly in (0,1)");
  if (gaussians.empty()) throw contract_error("to_flowpipe: empty gaussian sequence");

  const double z = inverse_normal_cdf(0.5 * (1.0 + epsilon));
  Flowpipe fp;
  fp.epsilon = epsilon;
  fp.channel = std::move(channel);
  fp.step_duration_s = step_duration_s;
  fp.steps.reserve(gaussians.size());
  for (const auto& g : gaussians)
    fp.steps.push_back({g.mean - z * g.std, g.mean + z * g.std});
  return fp;
}

// Degenerate flowpipe with lower = upper = the trace value at every step.
// Lets the quantitative monitor score single traces.
inline Flowpipe trace_as_flowpipe(const Trace& trace) {
  if (trace.values.empty()) throw contract_error("trace_as_flowpipe: empty trace");
  Flowpipe fp;
  fp.epsilon = 1.0;
  fp.channel = trace.channel;
  fp.step_duration_s = trace.step_duration_s;
  fp.steps.reserve(trace.values.size());
  for (double v : trace.values) fp.steps.push_back({v, v});
  return fp;
}

}  // namespace stlu
