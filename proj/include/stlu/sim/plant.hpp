#pragma once

#include <algorithm>
#include <cmath>

#include "stlu/control.hpp"
#include "stlu/errors.hpp"

namespace stlu::sim {

// Three-pool toy glucose plant: a glucose level plus first-order insulin and
// carbohydrate pools. It is deliberately NOT a physiological patient model;
// it only needs to produce meal rises, insulin drops and a stable fasting
// level so the closed loop has something to regulate.
struct PlantState {
  double glucose = 120.0;        // mg/dL
  double insulin_onboard = 0.0;  // units
  double carbs_onboard = 0.0;    // grams
};

struct PatientParams {
  double insulin_sensitivity = 40.0;  // mg/dL drop per acted insulin unit
  double carb_factor = 3.5;           // mg/dL rise per absorbed gram
  double endogenous_drift = 0.02;     // pull toward the drift target, fraction/step
  double process_noise_std = 2.0;     // mg/dL additive noise per step
  double insulin_decay = 0.015;       // insulin pool fraction acting per step
  double carb_absorption = 0.06;      // carb pool fraction absorbed per step
  double basal_glucose = 160.0;       // unregulated drift target, mg/dL
  double circadian_amplitude = 0.0;   // mg/dL swing of the drift target over a day
};

inline void validate(const PatientParams& p) {
  if (p.insulin_sensitivity <= 0 || p.carb_factor <= 0 || p.basal_glucose <= 0)
    throw contract_error("patient parameters must be positive");
  if (p.endogenous_drift < 0 || p.endogenous_drift > 1 || p.insulin_decay < 0 ||
      p.insulin_decay > 1 || p.carb_absorption < 0 || p.carb_absorption > 1)
    throw contract_error("patient pool fractions must lie in [0,1]");
  if (p.process_noise_std < 0) throw contract_error("process noise std must be >= 0");
  if (p.circadian_amplitude < 0) throw contract_error("circadian amplitude must be >= 0");
}

// Endogenous production target at a given time of day. The sinusoid bottoms
// out at 02:00 (nocturnal lows) and peaks at 14:00.
inline double drift_target(const PatientParams& p, double day_seconds) {
  if (p.circadian_amplitude == 0.0) return p.basal_glucose;
  const double frac = std::fmod(day_seconds, 86400.0) / 86400.0;
  constexpr double two_pi = 6.283185307179586;
  return p.basal_glucose + p.circadian_amplitude * std::sin(two_pi * frac - two_pi / 3.0);
}

// One deterministic step given the noise draw. Glucose is floored at 1 mg/dL.
inline PlantState plant_step(const PlantState& s, const PatientParams& p,
                             const InsulinAction& action, double meal_grams, double noise,
                             double day_seconds = 0.0) {
  const double absorbed = p.carb_absorption * s.carbs_onboard;
  const double acted = p.insulin_decay * s.insulin_onboard;

  PlantState next;
  next.carbs_onboard = std::max(s.carbs_onboard - absorbed + meal_grams, 0.0);
  next.insulin_onboard =
      std::max(s.insulin_onboard - acted + action.basal + action.bolus, 0.0);
  const double g = s.glucose + p.carb_factor * absorbed - p.insulin_sensitivity * acted +
                   p.endogenous_drift * (drift_target(p, day_seconds) - s.glucose) + noise;
  next.glucose = std::max(g, 1.0);
  return next;
}

}  // namespace stlu::sim
