#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "stlu/sim/episode.hpp"
#include "stlu/sim/metrics.hpp"
#include "stlu/sim/plant.hpp"
#include "stlu/sim/predictor.hpp"
#include "support/scenario.hpp"

using namespace stlu;
using namespace stlu::sim;
using Catch::Approx;

TEST_CASE("plant dynamics") {
  const PatientParams p;

  SECTION("glucose at the drift target with empty pools is a fixed point") {
    PlantState s;
    s.glucose = p.basal_glucose;
    const PlantState next = plant_step(s, p, {0.0, 0.0}, 0.0, 0.0);
    CHECK(next.glucose == s.glucose);
  }

  SECTION("a meal with no insulin raises glucose while carbs dominate drift") {
    PlantState s;
    s.glucose = p.basal_glucose;
    PlantState cur = plant_step(s, p, {0.0, 0.0}, 50.0, 0.0);
    int rising_steps = 0;
    for (int i = 0; i < 200; ++i) {
      const double carb_push = p.carb_factor * p.carb_absorption * cur.carbs_onboard;
      const double drift_pull = p.endogenous_drift * (cur.glucose - p.basal_glucose);
      const PlantState next = plant_step(cur, p, {0.0, 0.0}, 0.0, 0.0);
      if (carb_push > drift_pull) {
        CHECK(next.glucose > cur.glucose);
        ++rising_steps;
      }
      cur = next;
    }
    CHECK(rising_steps > 10);
  }

  SECTION("a bolus with no meals lowers glucose while insulin dominates drift") {
    PlantState s;
    s.glucose = p.basal_glucose;
    PlantState cur = plant_step(s, p, {0.0, 5.0}, 0.0, 0.0);
    int falling_steps = 0;
    for (int i = 0; i < 200; ++i) {
      const double insulin_pull =
          p.insulin_sensitivity * p.insulin_decay * cur.insulin_onboard;
      const double drift_push = p.endogenous_drift * (p.basal_glucose - cur.glucose);
      const PlantState next = plant_step(cur, p, {0.0, 0.0}, 0.0, 0.0);
      if (insulin_pull > drift_push) {
        CHECK(next.glucose < cur.glucose);
        ++falling_steps;
      }
      cur = next;
    }
    CHECK(falling_steps > 10);
  }

  SECTION("glucose is floored at 1") {
    PlantState s;
    s.glucose = 5.0;
    const PlantState next = plant_step(s, p, {0.0, 100.0}, 0.0, -500.0);
    CHECK(next.glucose == 1.0);
  }
}

TEST_CASE("predictor flowpipes") {
  const PatientParams params;
  PlantState state;
  state.glucose = 120.0;
  const std::vector<InsulinAction> planned(10, {0.025, 0.0});
  const std::vector<double> meals(10, 0.0);

  SECTION("no jitter and no noise collapse to the deterministic rollout") {
    PatientParams quiet = params;
    quiet.process_noise_std = 0.0;
    PredictorConfig cfg;
    cfg.param_jitter_std = 0.0;
    const Flowpipe fp =
        predict_flowpipe(quiet, state, planned, meals, cfg, Rng(1), "BG", 180.0);

    PlantState s = state;
    for (int k = 0; k < 10; ++k) {
      s = plant_step(s, quiet, planned[k], meals[k], 0.0);
      CHECK(fp.steps[k].lower == Approx(s.glucose).margin(1e-12));
      CHECK(fp.steps[k].upper == Approx(s.glucose).margin(1e-12));
    }
  }

  SECTION("same generator gives the same flowpipe") {
    PredictorConfig cfg;
    const Flowpipe a = predict_flowpipe(params, state, planned, meals, cfg, Rng(7), "BG", 180.0);
    const Flowpipe b = predict_flowpipe(params, state, planned, meals, cfg, Rng(7), "BG", 180.0);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.steps[i].lower == b.steps[i].lower);
      CHECK(a.steps[i].upper == b.steps[i].upper);
    }
  }

  SECTION("more parameter jitter widens the band on average") {
    PredictorConfig low, high;
    low.param_jitter_std = 0.01;
    high.param_jitter_std = 0.10;
    double low_width = 0.0, high_width = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
      const Rng rng = Rng(500 + rep);
      const Flowpipe a = predict_flowpipe(params, state, planned, meals, low, rng, "BG", 180.0);
      const Flowpipe b = predict_flowpipe(params, state, planned, meals, high, rng, "BG", 180.0);
      for (std::size_t i = 0; i < a.size(); ++i) {
        low_width += a.steps[i].upper - a.steps[i].lower;
        high_width += b.steps[i].upper - b.steps[i].lower;
      }
    }
    CHECK(high_width > low_width);
  }

  SECTION("preconditions") {
    PredictorConfig cfg;
    cfg.rollouts = 1;
    CHECK_THROWS_AS(predict_flowpipe(params, state, planned, meals, cfg, Rng(1), "BG", 180.0),
                    contract_error);
    cfg = {};
    const std::vector<double> short_meals(3, 0.0);
    CHECK_THROWS_AS(
        predict_flowpipe(params, state, planned, short_meals, cfg, Rng(1), "BG", 180.0),
        contract_error);
  }
}

TEST_CASE("hazard scanning") {
  const std::vector<double> series{100, 100, 60, 65, 100, 190, 185, 100, 60, 100};
  const auto events = scan_hazards(series);
  REQUIRE(events.size() == 3);
  CHECK(events[0].type == HazardType::hypo);
  CHECK(events[0].onset_step == 2);
  CHECK(events[1].type == HazardType::hyper);
  CHECK(events[1].onset_step == 5);
  CHECK(events[2].type == HazardType::hypo);
  CHECK(events[2].onset_step == 8);

  SECTION("starting out of range counts as an onset at step 0") {
    const auto e = scan_hazards(std::vector<double>{50.0, 60.0, 100.0});
    REQUIRE(e.size() == 1);
    CHECK(e[0].onset_step == 0);
  }
  SECTION("boundary values are in range") {
    CHECK(scan_hazards(std::vector<double>{70.0, 180.0}).empty());
  }
}

TEST_CASE("hazard merging") {
  const double step_s = 180.0;  // 3 minutes
  const auto hypo = [](std::int64_t step) { return HazardEvent{HazardType::hypo, step}; };
  const auto hyper = [](std::int64_t step) { return HazardEvent{HazardType::hyper, step}; };

  SECTION("two hypos 15 minutes apart merge") {
    const std::vector<HazardEvent> events{hypo(0), hypo(5)};
    CHECK(merge_hazards(events, 30.0, step_s).size() == 1);
  }
  SECTION("different types never merge") {
    const std::vector<HazardEvent> events{hypo(0), hyper(3)};
    CHECK(merge_hazards(events, 30.0, step_s).size() == 2);
  }
  SECTION("chains merge transitively: 0, 25, 50 minutes") {
    const std::vector<HazardEvent> events{hypo(0), hypo(8), hypo(16)};  // 24-min gaps
    const auto merged = merge_hazards(events, 30.0, step_s);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].onset_step == 0);

    const std::vector<HazardEvent> exact{hypo(0), hypo(10), hypo(20)};  // 30-min gaps
    CHECK(merge_hazards(exact, 30.0, step_s).size() == 1);
  }
  SECTION("gaps beyond the window do not merge") {
    const std::vector<HazardEvent> events{hypo(0), hypo(11)};  // 33 minutes
    CHECK(merge_hazards(events, 30.0, step_s).size() == 2);
  }
  SECTION("interleaved other-type events do not break a chain") {
    const std::vector<HazardEvent> events{hypo(0), hyper(4), hypo(8)};
    const auto merged = merge_hazards(events, 30.0, step_s);
    CHECK(merged.size() == 2);
  }
  SECTION("idempotent and never growing") {
    stlu::Rng rng(73);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<HazardEvent> events;
      std::int64_t step = 0;
      const int n = static_cast<int>(rng.next_u64() % 8);
      for (int i = 0; i < n; ++i) {
        step += static_cast<std::int64_t>(rng.next_u64() % 15);
        events.push_back(rng.next_double() < 0.5 ? hypo(step) : hyper(step));
      }
      const auto once = merge_hazards(events, 30.0, step_s);
      const auto twice = merge_hazards(once, 30.0, step_s);
      CHECK(once.size() <= events.size());
      REQUIRE(twice.size() == once.size());
      for (std::size_t i = 0; i < once.size(); ++i)
        CHECK(twice[i].onset_step == once[i].onset_step);
    }
  }
  SECTION("brute-force enumeration over small event sets") {
    // Expected count: per type, group onsets whose consecutive gaps are
    // within the window.
    stlu::Rng rng(79);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<HazardEvent> events;
      std::int64_t step = 0;
      const int n = static_cast<int>(rng.next_u64() % 6);
      for (int i = 0; i < n; ++i) {
        step += static_cast<std::int64_t>(rng.next_u64() % 14);
        events.push_back(rng.next_double() < 0.5 ? hypo(step) : hyper(step));
      }
      std::size_t expected = 0;
      for (const HazardType type : {HazardType::hypo, HazardType::hyper}) {
        std::vector<std::int64_t> onsets;
        for (const auto& e : events)
          if (e.type == type) onsets.push_back(e.onset_step);
        for (std::size_t i = 0; i < onsets.size(); ++i)
          if (i == 0 || (onsets[i] - onsets[i - 1]) * step_s > 30.0 * 60.0) ++expected;
      }
      CHECK(merge_hazards(events, 30.0, step_s).size() == expected);
    }
  }
  SECTION("unordered input is rejected") {
    const std::vector<HazardEvent> events{hypo(5), hypo(0)};
    CHECK_THROWS_AS(merge_hazards(events, 30.0, step_s), contract_error);
  }
}

TEST_CASE("pre-alert accounting") {
  const double step_s = 180.0;
  AlertLog alerts;
  alerts.hypo_steps = {90, 92};
  alerts.hyper_steps = {10};

  SECTION("alert 8 steps before onset gives 24 minutes") {
    const std::vector<HazardEvent> merged{{HazardType::hypo, 98}};
    const auto annotated = attach_alerts(merged, alerts, 10);
    REQUIRE(annotated.size() == 1);
    REQUIRE(annotated[0].alert_step.has_value());
    CHECK(*annotated[0].alert_step == 90);
    const auto summary = pre_alert_time(annotated, step_s);
    CHECK(summary.defined);
    CHECK(summary.mean_minutes == Approx(24.0));
  }
  SECTION("alerts outside the lookback window do not count") {
    const std::vector<HazardEvent> merged{{HazardType::hypo, 120}};
    const auto annotated = attach_alerts(merged, alerts, 10);
    CHECK_FALSE(annotated[0].alert_step.has_value());
    CHECK(pre_alert_time(annotated, step_s).mean_minutes == 0.0);
  }
  SECTION("alerts at or after onset do not count") {
    const std::vector<HazardEvent> merged{{HazardType::hypo, 90}};
    const auto annotated = attach_alerts(merged, alerts, 10);
    CHECK_FALSE(annotated[0].alert_step.has_value());
  }
  SECTION("no hazards at all is reported as not applicable") {
    const auto summary = pre_alert_time(std::vector<AnnotatedHazard>{}, step_s);
    CHECK_FALSE(summary.defined);
    CHECK(summary.mean_minutes == 0.0);
  }
  SECTION("unalerted hazards average in as zero") {
    const std::vector<HazardEvent> merged{{HazardType::hypo, 98}, {HazardType::hyper, 300}};
    const auto annotated = attach_alerts(merged, alerts, 10);
    const auto summary = pre_alert_time(annotated, step_s);
    CHECK(summary.defined);
    CHECK(summary.mean_minutes == Approx(12.0));  // (24 + 0) / 2
  }
}

TEST_CASE("time fractions partition the series") {
  const std::vector<double> series{100, 60, 190, 100, 100};
  const TimeFractions f = time_fractions(series);
  CHECK(f.in_range == Approx(0.6));
  CHECK(f.hypo == Approx(0.2));
  CHECK(f.hyper == Approx(0.2));
  CHECK(f.in_range + f.hypo + f.hyper == Approx(1.0).margin(1e-9));
}

TEST_CASE("episodes are deterministic in the seed") {
  const auto cfg = testsupport::demo_scenario(12, true, 1);
  const EpisodeResult a = run_episode_logged(cfg);
  const EpisodeResult b = run_episode_logged(cfg);
  REQUIRE(a.log.glucose.size() == b.log.glucose.size());
  for (std::size_t i = 0; i < a.log.glucose.size(); ++i)
    CHECK(a.log.glucose[i] == b.log.glucose[i]);
  CHECK(a.report.n_hypo == b.report.n_hypo);
  CHECK(a.report.n_hyper == b.report.n_hyper);
  CHECK(a.report.time_in_range == b.report.time_in_range);
  CHECK(a.report.mean_pre_alert_minutes == b.report.mean_pre_alert_minutes);

  SECTION("report invariants") {
    CHECK(a.report.time_in_range + a.report.hypo_time + a.report.hyper_time ==
          Approx(1.0).margin(1e-9));
    CHECK(a.report.steps == 480);
    CHECK(a.log.glucose.size() == 481);
    CHECK(static_cast<int>(a.report.hazards.size()) == a.report.n_hypo + a.report.n_hyper);
  }
}

TEST_CASE("with no meals and calm dynamics both arms act identically") {
  sim::ScenarioConfig base;
  base.seed = 5;
  base.days = 1;
  base.patient.process_noise_std = 0.5;
  base.predictor.param_jitter_std = 0.01;
  base.controller.mode = ControllerMode::baseline;
  sim::ScenarioConfig adaptive = base;
  adaptive.controller.mode = ControllerMode::adaptive;

  const EpisodeResult b = run_episode_logged(base);
  const EpisodeResult a = run_episode_logged(adaptive);

  // The predictive monitor never fires, so the adaptive branch reduces to the
  // default action.
  CHECK(a.log.alerts.hypo_steps.empty());
  CHECK(a.log.alerts.hyper_steps.empty());
  REQUIRE(a.log.actions.size() == b.log.actions.size());
  for (std::size_t i = 0; i < a.log.actions.size(); ++i) {
    CHECK(a.log.actions[i].basal == b.log.actions[i].basal);
    CHECK(a.log.actions[i].bolus == b.log.actions[i].bolus);
  }
}

TEST_CASE("the adaptive arm never boluses at or below the glucose guard") {
  for (const std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto cfg = testsupport::demo_scenario(seed, true, 2);
    const EpisodeResult r = run_episode_logged(cfg);
    for (std::size_t t = 0; t < r.log.actions.size(); ++t) {
      if (r.log.actions[t].bolus > 0.0) CHECK(r.log.glucose[t] > 70.0);
    }
  }
}

TEST_CASE("scenario validation") {
  auto cfg = testsupport::demo_scenario(1, false, 1);
  SECTION("meals out of range") {
    cfg.meals.push_back({100000, 10.0, 1.0});
    CHECK_THROWS_AS(validate(cfg), contract_error);
  }
  SECTION("meals must be strictly increasing") {
    cfg.meals.push_back(cfg.meals.back());
    CHECK_THROWS_AS(validate(cfg), contract_error);
  }
  SECTION("predictor epsilon domain") {
    cfg.predictor.epsilon = 1.0;
    CHECK_THROWS_AS(validate(cfg), contract_error);
  }
}
