#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "stlu/interval.hpp"
#include "stlu/signal.hpp"

namespace stlu {

struct InsulinAction {
  double basal = 0.0;  // units per step
  double bolus = 0.0;  // units

  friend bool operator==(const InsulinAction&, const InsulinAction&) = default;
};

// Thresholds and scale factors of the basal-bolus adapter. Defaults follow
// the glycemic guideline values the adapter was designed around.
struct BasalBolusSettings {
  double severe_low = -20.0;   // worst-case margin below which basal shuts off
  double severe_high = -70.0;  // worst-case margin below which basal goes to 150%
  double mild_low_scale = 0.8;
  double mild_high_scale = 1.2;
  double severe_high_scale = 1.5;
  double low_glucose_guard = 70.0;  // no pre-meal bolus at/below this BG
};

struct BasalBolusContext {
  RobustInterval rho_low;   // robustness of the hypoglycemia spec (BG > low)
  RobustInterval rho_high;  // robustness of the hyperglycemia spec (BG < high)
  double glucose = 0.0;     // current BG, mg/dL
  std::int64_t step = 0;
  std::int64_t next_meal_step = -1;  // negative: no upcoming meal
  std::int64_t premeal_window = 0;   // K
  bool bolus_flag = false;           // set once the upcoming meal's bolus went out
  double default_basal = 0.0;
  double meal_bolus = 0.0;
  BasalBolusSettings settings{};
};

struct BasalBolusDecision {
  InsulinAction action;
  bool bolus_flag = false;
};

// Basal dose scales with the worst-case robustness of the hypo/hyper specs
// (first matching branch), and the meal bolus may move earlier into the
// pre-meal window unless a low BG is measured or predicted.
inline BasalBolusDecision adapt_basal_bolus(const BasalBolusContext& ctx) {
  const BasalBolusSettings& s = ctx.settings;
  const double rl = ctx.rho_low.lower;
  const double rh = ctx.rho_high.lower;

  double basal = ctx.default_basal;
  if (rl < s.severe_low)
    basal = 0.0;
  else if (rl >= s.severe_low && rl <= 0.0)
    basal = ctx.default_basal * s.mild_low_scale;
  else if (rh >= s.severe_high && rh <= 0.0)
    basal = ctx.default_basal * s.mild_high_scale;
  else if (rh < s.severe_high)
    basal = ctx.default_basal * s.severe_high_scale;

  double bolus = 0.0;
  bool flag = ctx.bolus_flag;
  if (!flag && ctx.next_meal_step >= 0) {
    const std::int64_t tm = ctx.next_meal_step;
    if (tm - ctx.premeal_window <= ctx.step && ctx.step < tm) {
      if (rl <= 0.0 || ctx.glucose <= s.low_glucose_guard) {
        bolus = 0.0;
      } else {
        bolus = ctx.meal_bolus;
        flag = true;
      }
    } else if (ctx.step == tm) {
      bolus = ctx.meal_bolus;
      flag = true;
    }
  }
  return {{basal, bolus}, flag};
}

enum class ViolationKind { none, deceleration, acceleration, both };

// Scans a predicted acceleration flowpipe against the hard-brake /
// sharp-acceleration limits.
inline ViolationKind classify_violation(const Flowpipe& accel, double hard_decel = -6.0,
                                        double hard_accel = 6.0) {
  if (accel.steps.empty()) throw contract_error("classify_violation: empty flowpipe");
  bool dec = false;
  bool acc = false;
  for (const FlowStep& s : accel.steps) {
    if (s.lower < hard_decel) dec = true;
    if (s.upper > hard_accel) acc = true;
  }
  if (dec && acc) return ViolationKind::both;
  if (dec) return ViolationKind::deceleration;
  if (acc) return ViolationKind::acceleration;
  return ViolationKind::none;
}

struct DriveAction {
  double brake = 0.0;
  double throttle = 0.0;

  friend bool operator==(const DriveAction&, const DriveAction&) = default;
};

struct DriveSettings {
  double rho_threshold = -3.0;   // worst-case margin above which no adaptation happens
  double rho_correction = -3.0;  // correction added before taking the reciprocal
  double max_throttle = 0.6;
  double max_brake = 0.6;
  double min_speed = 5.0;  // m/s
  // Exposed for completeness; the adapter itself never applies them.
  double min_throttle = 0.4;
  double min_brake = 0.4;
};

struct DriveContext {
  RobustInterval rho;  // robustness of the acceleration-smoothness spec
  double current_speed = 0.0;
  double current_throttle = 0.0;
  double current_brake = 0.0;
  double mean_throttle = 0.0;  // trailing 5-step mean
  double mean_brake = 0.0;     // trailing 5-step mean
  ViolationKind violation = ViolationKind::none;
  DriveSettings settings{};
};

// Smooths throttle/brake based on the degree of predicted violation.
// delta's denominator is floored at 1e-3 so the scaling stays finite when
// rho.lower lands on -rho_correction.
inline DriveAction adapt_vehicle(const DriveContext& ctx) {
  const DriveSettings& s = ctx.settings;
  double brake = ctx.current_brake;
  double throttle = ctx.current_throttle;
  const double delta = 1.0 / std::max(std::abs(ctx.rho.lower + s.rho_correction), 1e-3);

  if (ctx.current_speed >= s.min_speed) {
    if (ctx.rho.lower > s.rho_threshold) {
      brake = std::min(ctx.current_brake, s.max_brake);
      throttle = std::min(ctx.current_throttle, s.max_throttle);
    } else if (ctx.violation == ViolationKind::deceleration) {
      brake = std::min((1.0 + delta) * ctx.mean_brake, s.max_brake);
      throttle = 0.0;
    } else if (ctx.violation == ViolationKind::acceleration) {
      throttle = std::min((1.0 + delta) * ctx.mean_throttle, s.max_throttle);
      brake = 0.0;
    } else if (ctx.violation == ViolationKind::both) {
      brake = std::min(std::max(1.0 - delta, 0.0) * ctx.mean_brake, s.max_brake);
      throttle = 0.0;
    }
  } else {
    throttle = std::min(std::max(1.0 - delta, 0.0) * ctx.mean_throttle, s.max_throttle);
    brake = 0.0;
  }

  brake = std::max(brake, 0.0);
  throttle = std::max(throttle, 0.0);
  return {brake, throttle};
}

}  // namespace stlu
