#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "stlu/rng.hpp"
#include "stlu/signal.hpp"
#include "stlu/sim/plant.hpp"

namespace stlu::sim {

struct PredictorConfig {
  int rollouts = 30;
  double param_jitter_std = 0.05;  // log-scale jitter on patient parameters
  double epsilon = 0.95;
  int horizon = 10;  // steps ahead (30 minutes at 3-minute steps)
};

inline void validate(const PredictorConfig& c) {
  if (c.rollouts < 2) throw contract_error("predictor needs at least 2 rollouts");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0))
    throw contract_error("predictor epsilon must lie strictly in (0,1)");
  if (c.horizon < 1) throw contract_error("predictor horizon must be >= 1");
  if (c.param_jitter_std < 0) throw contract_error("parameter jitter must be >= 0");
}

// Monte Carlo forecast: N plant rollouts under jittered patient parameters and
// independent process noise, fitted to per-step Gaussians and widened to the
// confidence band at `epsilon`. Rollout n draws only from substream n, so the
// result does not depend on rollout scheduling order.
inline Flowpipe predict_flowpipe(const PatientParams& params, const PlantState& state,
                                 std::span<const InsulinAction> planned,
                                 std::span<const double> meals, const PredictorConfig& cfg,
                                 const Rng& rng, const std::string& channel,
                                 double step_duration_s, double start_day_seconds = 0.0) {
  validate(cfg);
  const std::size_t h = static_cast<std::size_t>(cfg.horizon);
  if (planned.size() != h || meals.size() != h)
    throw contract_error("predict_flowpipe: planned actions and meals must cover the horizon");

  SampleSet samples;
  samples.channel = channel;
  samples.step_duration_s = step_duration_s;
  samples.values.assign(static_cast<std::size_t>(cfg.rollouts), std::vector<double>(h, 0.0));

  for (int n = 0; n < cfg.rollouts; ++n) {
    Rng stream = rng.substream(static_cast<std::uint64_t>(n));
    PatientParams jittered = params;
    jittered.insulin_sensitivity *= std::exp(cfg.param_jitter_std * stream.next_normal());
    jittered.carb_factor *= std::exp(cfg.param_jitter_std * stream.next_normal());
    jittered.endogenous_drift *= std::exp(cfg.param_jitter_std * stream.next_normal());

    PlantState s = state;
    for (std::size_t k = 0; k < h; ++k) {
      const double noise = params.process_noise_std * stream.next_normal();
      s = plant_step(s, jittered, planned[k], meals[k], noise,
                     start_day_seconds + static_cast<double>(k) * step_duration_s);
      samples.values[static_cast<std::size_t>(n)][k] = s.glucose;
    }
  }

  return to_flowpipe(fit_gaussians(samples), cfg.epsilon, channel, step_duration_s);
}

}  // namespace stlu::sim
