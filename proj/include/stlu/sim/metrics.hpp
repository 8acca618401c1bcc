#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stlu/errors.hpp"

namespace stlu::sim {

enum class HazardType { hypo, hyper };

struct HazardEvent {
  HazardType type{};
  std::int64_t onset_step = 0;
};

// Per-step predictive alerts, by hazard type. Step lists are ascending.
struct AlertLog {
  std::vector<std::int64_t> hypo_steps;
  std::vector<std::int64_t> hyper_steps;
};

struct AnnotatedHazard {
  HazardType type{};
  std::int64_t onset_step = 0;
  std::optional<std::int64_t> alert_step;  // earliest alert in the lookback window
};

struct TimeFractions {
  double in_range = 0.0;
  double hypo = 0.0;
  double hyper = 0.0;
};

// Hazard onset = first out-of-range sample after being in range (or at the
// very start); the hazard ends when the signal re-enters range.
inline std::vector<HazardEvent> scan_hazards(std::span<const double> glucose,
                                             double low = 70.0, double high = 180.0) {
  enum class Zone { in, hypo, hyper };
  const auto zone_of = [&](double g) {
    if (g < low) return Zone::hypo;
    if (g > high) return Zone::hyper;
    return Zone::in;
  };
  std::vector<HazardEvent> out;
  Zone prev = Zone::in;
  for (std::size_t i = 0; i < glucose.size(); ++i) {
    const Zone z = zone_of(glucose[i]);
    if (z != prev && z != Zone::in) {
      out.push_back({z == Zone::hypo ? HazardType::hypo : HazardType::hyper,
                     static_cast<std::int64_t>(i)});
    }
    prev = z;
  }
  return out;
}

inline TimeFractions time_fractions(std::span<const double> glucose, double low = 70.0,
                                    double high = 180.0) {
  if (glucose.empty()) throw contract_error("time_fractions: empty series");
  std::int64_t n_low = 0, n_high = 0;
  for (double g : glucose) {
    if (g < low)
      ++n_low;
    else if (g > high)
      ++n_high;
  }
  const double n = static_cast<double>(glucose.size());
  return {(glucose.size() - n_low - n_high) / n, n_low / n, n_high / n};
}

// Events of the same type whose onsets are at most `gap_minutes` apart count
// as one hazard; chains merge transitively. Different types never merge. The
// merged hazard keeps the first onset of its cluster.
inline std::vector<HazardEvent> merge_hazards(std::span<const HazardEvent> events,
                                              double gap_minutes, double step_duration_s) {
  for (std::size_t i = 1; i < events.size(); ++i)
    if (events[i].onset_step < events[i - 1].onset_step)
      throw contract_error("merge_hazards: events must be ordered by onset");

  std::vector<HazardEvent> merged;
  std::int64_t last_onset[2] = {0, 0};
  bool has_cluster[2] = {false, false};
  const double gap_s = gap_minutes * 60.0;

  for (const HazardEvent& e : events) {
    const int k = e.type == HazardType::hypo ? 0 : 1;
    const bool chains =
        has_cluster[k] &&
        static_cast<double>(e.onset_step - last_onset[k]) * step_duration_s <= gap_s;
    if (!chains) merged.push_back(e);
    last_onset[k] = e.onset_step;
    has_cluster[k] = true;
  }
  return merged;
}

// Earliest same-type alert within `lookback_steps` before each merged
// hazard's onset. Alerts at or after the onset do not count.
inline std::vector<AnnotatedHazard> attach_alerts(std::span<const HazardEvent> merged,
                                                  const AlertLog& alerts,
                                                  std::int64_t lookback_steps) {
  std::vector<AnnotatedHazard> out;
  out.reserve(merged.size());
  for (const HazardEvent& h : merged) {
    const auto& steps =
        h.type == HazardType::hypo ? alerts.hypo_steps : alerts.hyper_steps;
    std::optional<std::int64_t> found;
    for (const std::int64_t a : steps) {
      if (a >= h.onset_step) break;
      if (a >= h.onset_step - lookback_steps) {
        found = a;
        break;
      }
    }
    out.push_back({h.type, h.onset_step, found});
  }
  return out;
}

struct PreAlertSummary {
  double mean_minutes = 0.0;
  bool defined = false;  // false when there were no hazards to alert on
};

// Mean minutes between the earliest alert and the hazard onset, over all
// merged hazards; hazards without an alert contribute zero.
inline PreAlertSummary pre_alert_time(std::span<const AnnotatedHazard> hazards,
                                      double step_duration_s) {
  if (hazards.empty()) return {0.0, false};
  double total_minutes = 0.0;
  for (const AnnotatedHazard& h : hazards) {
    if (h.alert_step)
      total_minutes +=
          static_cast<double>(h.onset_step - *h.alert_step) * step_duration_s / 60.0;
  }
  return {total_minutes / static_cast<double>(hazards.size()), true};
}

}  // namespace stlu::sim
