#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "stlu/control.hpp"
#include "stlu/errors.hpp"
#include "stlu/monitor.hpp"
#include "stlu/rng.hpp"
#include "stlu/sim/metrics.hpp"
#include "stlu/sim/plant.hpp"
#include "stlu/sim/predictor.hpp"

namespace stlu::sim {

struct MealEvent {
  std::int64_t step = 0;
  double grams = 0.0;
  double bolus = 0.0;  // insulin units covering this meal, supplied upstream
};

enum class ControllerMode { baseline, adaptive };

struct ControllerConfig {
  ControllerMode mode = ControllerMode::baseline;
  double default_basal = 0.025;     // units per step
  std::int64_t premeal_window = 10; // K, steps
  double hypo_bg = 70.0;
  double hyper_bg = 180.0;
  BasalBolusSettings basal_bolus{};
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  int days = 7;
  double step_duration_s = 180.0;
  double initial_glucose = 120.0;
  std::vector<MealEvent> meals;  // strictly increasing steps
  PatientParams patient{};
  PredictorConfig predictor{};
  ControllerConfig controller{};
};

inline std::int64_t total_steps(const ScenarioConfig& cfg) {
  return static_cast<std::int64_t>(cfg.days) *
         static_cast<std::int64_t>(std::llround(86400.0 / cfg.step_duration_s));
}

inline void validate(const ScenarioConfig& cfg) {
  if (cfg.days < 1) throw contract_error("scenario needs at least 1 day");
  if (cfg.step_duration_s <= 0) throw contract_error("step duration must be positive");
  if (cfg.initial_glucose <= 0) throw contract_error("initial glucose must be positive");
  if (cfg.controller.default_basal < 0 || cfg.controller.premeal_window < 0)
    throw contract_error("controller parameters must be non-negative");
  if (!(cfg.controller.hypo_bg < cfg.controller.hyper_bg))
    throw contract_error("hypo threshold must be below hyper threshold");
  validate(cfg.patient);
  validate(cfg.predictor);
  const std::int64_t t_total = total_steps(cfg);
  for (std::size_t i = 0; i < cfg.meals.size(); ++i) {
    const MealEvent& m = cfg.meals[i];
    if (m.step < 0 || m.step >= t_total) throw contract_error("meal step out of range");
    if (m.grams < 0 || m.bolus < 0) throw contract_error("meal grams/bolus must be >= 0");
    if (i > 0 && m.step <= cfg.meals[i - 1].step)
      throw contract_error("meal steps must be strictly increasing");
  }
}

struct EpisodeReport {
  std::string controller;
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  std::vector<AnnotatedHazard> hazards;  // after 30-minute merging
  int n_hypo = 0;
  int n_hyper = 0;
  double time_in_range = 0.0;
  double hypo_time = 0.0;
  double hyper_time = 0.0;
  double mean_pre_alert_minutes = 0.0;
  bool pre_alert_defined = false;
};

struct EpisodeLog {
  std::vector<double> glucose;  // initial value plus one sample per step
  std::vector<InsulinAction> actions;
  AlertLog alerts;
};

struct EpisodeResult {
  EpisodeReport report;
  EpisodeLog log;
};

inline EpisodeResult run_episode_logged(const ScenarioConfig& cfg) {
  validate(cfg);
  const std::int64_t t_total = total_steps(cfg);
  const std::size_t horizon = static_cast<std::size_t>(cfg.predictor.horizon);
  const double eps = cfg.predictor.epsilon;

  const Rng root(cfg.seed);
  Rng plant_noise = root.substream(0);
  const Rng predictor_root = root.substream(1);

  const FormulaPtr phi_low =
      always(steps_from(0), atom("BG", 1.0, -cfg.controller.hypo_bg, eps));
  const FormulaPtr phi_high =
      always(steps_from(0), atom("BG", -1.0, cfg.controller.hyper_bg, eps));

  EpisodeLog log;
  log.glucose.reserve(static_cast<std::size_t>(t_total) + 1);
  log.actions.reserve(static_cast<std::size_t>(t_total));

  PlantState state;
  state.glucose = cfg.initial_glucose;
  log.glucose.push_back(state.glucose);

  const std::vector<InsulinAction> planned(horizon,
                                           InsulinAction{cfg.controller.default_basal, 0.0});
  std::vector<double> horizon_meals(horizon, 0.0);

  std::size_t meal_idx = 0;
  bool bolus_flag = false;

  for (std::int64_t t = 0; t < t_total; ++t) {
    while (meal_idx < cfg.meals.size() && cfg.meals[meal_idx].step < t) {
      ++meal_idx;
      bolus_flag = false;
    }

    // Announced meals over the prediction horizon; offset 0 is this step.
    for (std::size_t k = 0; k < horizon; ++k) horizon_meals[k] = 0.0;
    for (std::size_t j = meal_idx; j < cfg.meals.size(); ++j) {
      const std::int64_t off = cfg.meals[j].step - t;
      if (off >= static_cast<std::int64_t>(horizon)) break;
      horizon_meals[static_cast<std::size_t>(off)] = cfg.meals[j].grams;
    }

    const double day_seconds = static_cast<double>(t) * cfg.step_duration_s;
    const Flowpipe fp =
        predict_flowpipe(cfg.patient, state, planned, horizon_meals, cfg.predictor,
                         predictor_root.substream(static_cast<std::uint64_t>(t)), "BG",
                         cfg.step_duration_s, day_seconds);
    SignalEnv env;
    env.add(fp);
    const RobustInterval rho_low = robustness(*phi_low, env, 0);
    const RobustInterval rho_high = robustness(*phi_high, env, 0);
    if (rho_low.lower <= 0.0) log.alerts.hypo_steps.push_back(t);
    if (rho_high.lower <= 0.0) log.alerts.hyper_steps.push_back(t);

    const bool has_meal = meal_idx < cfg.meals.size();
    const MealEvent* next_meal = has_meal ? &cfg.meals[meal_idx] : nullptr;

    InsulinAction action;
    if (cfg.controller.mode == ControllerMode::baseline) {
      action.basal = cfg.controller.default_basal;
      action.bolus = (next_meal && next_meal->step == t) ? next_meal->bolus : 0.0;
    } else {
      BasalBolusContext ctx;
      ctx.rho_low = rho_low;
      ctx.rho_high = rho_high;
      ctx.glucose = state.glucose;
      ctx.step = t;
      ctx.next_meal_step = next_meal ? next_meal->step : -1;
      ctx.premeal_window = cfg.controller.premeal_window;
      ctx.bolus_flag = bolus_flag;
      ctx.default_basal = cfg.controller.default_basal;
      ctx.meal_bolus = next_meal ? next_meal->bolus : 0.0;
      ctx.settings = cfg.controller.basal_bolus;
      const BasalBolusDecision decision = adapt_basal_bolus(ctx);
      action = decision.action;
      bolus_flag = decision.bolus_flag;
    }

    const double grams = (next_meal && next_meal->step == t) ? next_meal->grams : 0.0;
    const double noise = cfg.patient.process_noise_std * plant_noise.next_normal();
    state = plant_step(state, cfg.patient, action, grams, noise, day_seconds);

    log.glucose.push_back(state.glucose);
    log.actions.push_back(action);
  }

  const std::vector<HazardEvent> raw =
      scan_hazards(log.glucose, cfg.controller.hypo_bg, cfg.controller.hyper_bg);
  const std::vector<HazardEvent> merged = merge_hazards(raw, 30.0, cfg.step_duration_s);
  const std::vector<AnnotatedHazard> annotated =
      attach_alerts(merged, log.alerts, cfg.predictor.horizon);
  const TimeFractions fractions =
      time_fractions(log.glucose, cfg.controller.hypo_bg, cfg.controller.hyper_bg);
  const PreAlertSummary pre_alert = pre_alert_time(annotated, cfg.step_duration_s);

  EpisodeReport report;
  report.controller =
      cfg.controller.mode == ControllerMode::baseline ? "baseline" : "adaptive";
  report.seed = cfg.seed;
  report.steps = t_total;
  report.hazards = annotated;
  for (const AnnotatedHazard& h : annotated)
    (h.type == HazardType::hypo ? report.n_hypo : report.n_hyper)++;
  report.time_in_range = fractions.in_range;
  report.hypo_time = fractions.hypo;
  report.hyper_time = fractions.hyper;
  report.mean_pre_alert_minutes = pre_alert.mean_minutes;
  report.pre_alert_defined = pre_alert.defined;
  return {report, std::move(log)};
}

inline EpisodeReport run_episode(const ScenarioConfig& cfg) {
  return run_episode_logged(cfg).report;
}

}  // namespace stlu::sim
