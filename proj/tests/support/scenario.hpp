#pragma once

// Shared closed-loop scenario used by the simulation tests, the CLI tests and
// the acceptance suite.
//
// The virtual patient has a pronounced circadian swing in endogenous glucose
// production (nocturnal lows around 02:00, a daytime peak around 14:00). The
// baseline controller delivers a flat basal rate tuned for the daily average,
// so nights drift into hypoglycemia and afternoons toward hyperglycemia;
// meal boluses are mildly misdosed on top. Basal modulation driven by the
// predictive monitor is exactly the lever that corrects both failure modes.

#include <cstdint>

#include "stlu/rng.hpp"
#include "stlu/sim/episode.hpp"

namespace testsupport {

inline stlu::sim::ScenarioConfig demo_scenario(std::uint64_t seed, bool adaptive,
                                               int days = 7) {
  stlu::sim::ScenarioConfig cfg;
  cfg.seed = seed;
  cfg.days = days;
  cfg.step_duration_s = 180.0;
  cfg.initial_glucose = 110.0;
  cfg.controller.mode =
      adaptive ? stlu::sim::ControllerMode::adaptive : stlu::sim::ControllerMode::baseline;

  stlu::sim::PatientParams& p = cfg.patient;
  p.insulin_sensitivity = 40.0;
  p.carb_factor = 3.5;
  p.endogenous_drift = 0.02;
  p.process_noise_std = 1.5;
  p.insulin_decay = 0.05;
  p.carb_absorption = 0.06;
  p.circadian_amplitude = 60.0;

  // Flat basal tuned for the mid-day drift target: steady state sits at
  // basal_glucose - sensitivity*basal/drift = 110 mg/dL.
  cfg.controller.default_basal = 0.15;
  cfg.controller.premeal_window = 3;
  p.basal_glucose = 110.0 + p.insulin_sensitivity * cfg.controller.default_basal /
                                p.endogenous_drift;

  const double units_per_gram = p.carb_factor / p.insulin_sensitivity;

  // Meal plan derives from the seed only, so paired baseline/adaptive runs
  // see identical meals.
  stlu::Rng meal_rng = stlu::Rng(seed).substream(99);
  const std::int64_t steps_per_day = 480;
  struct MealSpec {
    std::int64_t step;
    double grams;
    double bolus_ratio;
  };
  const MealSpec plan[3] = {
      {140, 40.0, 1.00},  // 07:00
      {250, 70.0, 0.85},  // 12:30, under-bolused on top of the daytime drift
      {380, 55.0, 1.00},  // 19:00
  };
  for (int d = 0; d < days; ++d) {
    for (const MealSpec& m : plan) {
      const double grams = m.grams * meal_rng.uniform(0.85, 1.15);
      stlu::sim::MealEvent ev;
      ev.step = d * steps_per_day + m.step;
      ev.grams = grams;
      ev.bolus = grams * units_per_gram * m.bolus_ratio;
      cfg.meals.push_back(ev);
    }
  }
  return cfg;
}

}  // namespace testsupport
