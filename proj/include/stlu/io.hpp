#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stlu/errors.hpp"
#include "stlu/signal.hpp"
#include "stlu/sim/episode.hpp"

namespace stlu::io {

using nlohmann::json;

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const std::size_t comma = line.find(',', begin);
    std::string field = line.substr(begin, comma == std::string::npos ? comma : comma - begin);
    // trim surrounding whitespace
    const auto l = field.find_first_not_of(" \t\r");
    const auto r = field.find_last_not_of(" \t\r");
    out.push_back(l == std::string::npos ? std::string{} : field.substr(l, r - l + 1));
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  return out;
}

// row/col are 1-based and include the header row, matching editor coordinates.
inline double parse_cell(const std::string& field, std::size_t row, std::size_t col) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw io_error("malformed number at row " + std::to_string(row) + ", column " +
                   std::to_string(col));
  if (!std::isfinite(v))
    throw value_error("non-finite value at row " + std::to_string(row) + ", column " +
                      std::to_string(col));
  return v;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// Uniform spacing of the time column; 1.0 when only one row exists.
inline double infer_step_duration(const std::vector<double>& times) {
  if (times.size() < 2) return 1.0;
  const double dt = times[1] - times[0];
  if (dt <= 0) throw value_error("time column must be strictly increasing");
  for (std::size_t i = 2; i < times.size(); ++i) {
    const double d = times[i] - times[i - 1];
    if (std::abs(d - dt) > 1e-6 * std::max(1.0, std::abs(dt)))
      throw value_error("time column must be uniformly spaced (row " +
                        std::to_string(i + 2) + ")");
  }
  return dt;
}

}  // namespace detail

// Sample CSV: header `t,run_1,...,run_N`, one row per time step.
inline SampleSet load_samples_csv(const std::string& path, std::string channel = "BG") {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw io_error("empty sample file: " + path);
  const auto header = detail::split_csv_line(lines[0]);
  if (header.size() < 3 || header[0] != "t")
    throw io_error("sample CSV header must be 't,run_1,...,run_N' with at least 2 runs");
  const std::size_t n_runs = header.size() - 1;

  SampleSet set;
  set.channel = std::move(channel);
  set.values.assign(n_runs, std::vector<double>(lines.size() - 1, 0.0));
  std::vector<double> times(lines.size() - 1, 0.0);

  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = detail::split_csv_line(lines[r]);
    if (fields.size() != header.size())
      throw shape_error("row " + std::to_string(r + 1) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(header.size()));
    times[r - 1] = detail::parse_cell(fields[0], r + 1, 1);
    for (std::size_t c = 1; c < fields.size(); ++c)
      set.values[c - 1][r - 1] = detail::parse_cell(fields[c], r + 1, c + 1);
  }
  set.step_duration_s = detail::infer_step_duration(times);
  validate(set);
  return set;
}

// Trace CSV: header `t,value`, one row per time step.
inline Trace load_trace_csv(const std::string& path, std::string channel = "BG") {
  const auto lines = detail::read_lines(path);
  if (lines.empty()) throw io_error("empty trace file: " + path);
  const auto header = detail::split_csv_line(lines[0]);
  if (header.size() != 2 || header[0] != "t")
    throw io_error("trace CSV header must be 't,value'");

  Trace trace;
  trace.channel = std::move(channel);
  trace.values.resize(lines.size() - 1);
  std::vector<double> times(lines.size() - 1, 0.0);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = detail::split_csv_line(lines[r]);
    if (fields.size() != 2)
      throw shape_error("row " + std::to_string(r + 1) + " has " +
                        std::to_string(fields.size()) + " fields, expected 2");
    times[r - 1] = detail::parse_cell(fields[0], r + 1, 1);
    trace.values[r - 1] = detail::parse_cell(fields[1], r + 1, 2);
  }
  trace.step_duration_s = detail::infer_step_duration(times);
  validate(trace);
  return trace;
}

inline json flowpipe_to_json(const Flowpipe& fp) {
  json steps = json::array();
  for (const FlowStep& s : fp.steps) steps.push_back(json::array({s.lower, s.upper}));
  return json{{"schema_version", 1},
              {"channel", fp.channel},
              {"epsilon", fp.epsilon},
              {"step_duration_s", fp.step_duration_s},
              {"steps", std::move(steps)}};
}

inline Flowpipe flowpipe_from_json(const json& j) {
  if (!j.is_object()) throw io_error("flowpipe JSON must be an object");
  for (const char* key : {"channel", "epsilon", "step_duration_s", "steps"})
    if (!j.contains(key)) throw io_error(std::string("flowpipe JSON missing field '") + key + "'");
  if (j.contains("schema_version") && j["schema_version"] != 1)
    throw io_error("unsupported flowpipe schema_version");

  Flowpipe fp;
  if (!j["channel"].is_string()) throw io_error("flowpipe 'channel' must be a string");
  fp.channel = j["channel"].get<std::string>();
  if (!j["epsilon"].is_number()) throw io_error("flowpipe 'epsilon' must be a number");
  fp.epsilon = j["epsilon"].get<double>();
  if (!j["step_duration_s"].is_number())
    throw io_error("flowpipe 'step_duration_s' must be a number");
  fp.step_duration_s = j["step_duration_s"].get<double>();
  if (!j["steps"].is_array()) throw io_error("flowpipe 'steps' must be an array");
  for (const auto& s : j["steps"]) {
    if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number())
      throw io_error("flowpipe step must be a [lower, upper] pair");
    fp.steps.push_back({s[0].get<double>(), s[1].get<double>()});
  }
  validate(fp);
  return fp;
}

inline Flowpipe load_flowpipe_json(const std::string& path) {
  json j;
  try {
    j = json::parse(detail::read_file(path));
  } catch (const json::parse_error& e) {
    throw io_error("invalid JSON in " + path + ": " + e.what());
  }
  return flowpipe_from_json(j);
}

inline void save_flowpipe_json(const std::string& path, const Flowpipe& fp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write file: " + path);
  out << flowpipe_to_json(fp).dump(2) << "\n";
}

inline sim::ScenarioConfig scenario_from_json(const json& j) {
  if (!j.is_object()) throw io_error("scenario JSON must be an object");
  if (j.contains("schema_version") && j["schema_version"] != 1)
    throw io_error("unsupported scenario schema_version");

  sim::ScenarioConfig cfg;
  const auto num = [&](const json& o, const char* key, double fallback, bool required = false) {
    if (!o.contains(key)) {
      if (required) throw io_error(std::string("scenario JSON missing field '") + key + "'");
      return fallback;
    }
    if (!o[key].is_number()) throw io_error(std::string("scenario field '") + key + "' must be a number");
    return o[key].get<double>();
  };

  cfg.seed = j.contains("seed") ? j["seed"].get<std::uint64_t>() : 0;
  cfg.days = static_cast<int>(num(j, "days", cfg.days));
  cfg.step_duration_s = num(j, "step_duration_s", cfg.step_duration_s);
  cfg.initial_glucose = num(j, "initial_glucose", cfg.initial_glucose);

  if (j.contains("meals")) {
    if (!j["meals"].is_array()) throw io_error("scenario 'meals' must be an array");
    for (const auto& m : j["meals"]) {
      sim::MealEvent ev;
      ev.step = static_cast<std::int64_t>(num(m, "step", 0, true));
      ev.grams = num(m, "grams", 0, true);
      ev.bolus = num(m, "bolus", 0, true);
      cfg.meals.push_back(ev);
    }
  }

  if (j.contains("patient")) {
    const json& p = j["patient"];
    sim::PatientParams& pp = cfg.patient;
    pp.insulin_sensitivity = num(p, "insulin_sensitivity", pp.insulin_sensitivity);
    pp.carb_factor = num(p, "carb_factor", pp.carb_factor);
    pp.endogenous_drift = num(p, "endogenous_drift", pp.endogenous_drift);
    pp.process_noise_std = num(p, "process_noise_std", pp.process_noise_std);
    pp.insulin_decay = num(p, "insulin_decay", pp.insulin_decay);
    pp.carb_absorption = num(p, "carb_absorption", pp.carb_absorption);
    pp.basal_glucose = num(p, "basal_glucose", pp.basal_glucose);
    pp.circadian_amplitude = num(p, "circadian_amplitude", pp.circadian_amplitude);
  }

  if (j.contains("predictor")) {
    const json& p = j["predictor"];
    sim::PredictorConfig& pc = cfg.predictor;
    pc.rollouts = static_cast<int>(num(p, "rollouts", pc.rollouts));
    pc.param_jitter_std = num(p, "param_jitter_std", pc.param_jitter_std);
    pc.epsilon = num(p, "epsilon", pc.epsilon);
    pc.horizon = static_cast<int>(num(p, "horizon", pc.horizon));
  }

  if (j.contains("controller")) {
    const json& c = j["controller"];
    sim::ControllerConfig& cc = cfg.controller;
    if (c.contains("mode")) {
      const std::string mode = c["mode"].get<std::string>();
      if (mode == "baseline")
        cc.mode = sim::ControllerMode::baseline;
      else if (mode == "adaptive")
        cc.mode = sim::ControllerMode::adaptive;
      else
        throw io_error("controller mode must be 'baseline' or 'adaptive'");
    }
    cc.default_basal = num(c, "default_basal", cc.default_basal);
    cc.premeal_window = static_cast<std::int64_t>(num(c, "premeal_window_steps", cc.premeal_window));
    cc.hypo_bg = num(c, "hypo_bg", cc.hypo_bg);
    cc.hyper_bg = num(c, "hyper_bg", cc.hyper_bg);
    BasalBolusSettings& bb = cc.basal_bolus;
    bb.severe_low = num(c, "severe_low_threshold", bb.severe_low);
    bb.severe_high = num(c, "severe_high_threshold", bb.severe_high);
    bb.mild_low_scale = num(c, "mild_low_scale", bb.mild_low_scale);
    bb.mild_high_scale = num(c, "mild_high_scale", bb.mild_high_scale);
    bb.severe_high_scale = num(c, "severe_high_scale", bb.severe_high_scale);
    bb.low_glucose_guard = num(c, "low_glucose_guard", bb.low_glucose_guard);
  }
  return cfg;
}

inline json scenario_to_json(const sim::ScenarioConfig& cfg) {
  json meals = json::array();
  for (const sim::MealEvent& m : cfg.meals)
    meals.push_back({{"step", m.step}, {"grams", m.grams}, {"bolus", m.bolus}});
  return json{
      {"schema_version", 1},
      {"seed", cfg.seed},
      {"days", cfg.days},
      {"step_duration_s", cfg.step_duration_s},
      {"initial_glucose", cfg.initial_glucose},
      {"meals", std::move(meals)},
      {"patient",
       {{"insulin_sensitivity", cfg.patient.insulin_sensitivity},
        {"carb_factor", cfg.patient.carb_factor},
        {"endogenous_drift", cfg.patient.endogenous_drift},
        {"process_noise_std", cfg.patient.process_noise_std},
        {"insulin_decay", cfg.patient.insulin_decay},
        {"carb_absorption", cfg.patient.carb_absorption},
        {"basal_glucose", cfg.patient.basal_glucose},
        {"circadian_amplitude", cfg.patient.circadian_amplitude}}},
      {"predictor",
       {{"rollouts", cfg.predictor.rollouts},
        {"param_jitter_std", cfg.predictor.param_jitter_std},
        {"epsilon", cfg.predictor.epsilon},
        {"horizon", cfg.predictor.horizon}}},
      {"controller",
       {{"mode", cfg.controller.mode == sim::ControllerMode::baseline ? "baseline" : "adaptive"},
        {"default_basal", cfg.controller.default_basal},
        {"premeal_window_steps", cfg.controller.premeal_window},
        {"hypo_bg", cfg.controller.hypo_bg},
        {"hyper_bg", cfg.controller.hyper_bg},
        {"severe_low_threshold", cfg.controller.basal_bolus.severe_low},
        {"severe_high_threshold", cfg.controller.basal_bolus.severe_high},
        {"mild_low_scale", cfg.controller.basal_bolus.mild_low_scale},
        {"mild_high_scale", cfg.controller.basal_bolus.mild_high_scale},
        {"severe_high_scale", cfg.controller.basal_bolus.severe_high_scale},
        {"low_glucose_guard", cfg.controller.basal_bolus.low_glucose_guard}}}};
}

inline sim::ScenarioConfig load_scenario_json(const std::string& path) {
  json j;
  try {
    j = json::parse(detail::read_file(path));
  } catch (const json::parse_error& e) {
    throw io_error("invalid JSON in " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline json report_to_json(const sim::EpisodeReport& r) {
  json hazards = json::array();
  for (const sim::AnnotatedHazard& h : r.hazards) {
    json entry{{"type", h.type == sim::HazardType::hypo ? "hypo" : "hyper"},
               {"onset_step", h.onset_step}};
    if (h.alert_step)
      entry["alert_step"] = *h.alert_step;
    else
      entry["alert_step"] = nullptr;
    hazards.push_back(std::move(entry));
  }
  return json{{"schema_version", 1},
              {"controller", r.controller},
              {"seed", r.seed},
              {"steps", r.steps},
              {"hazards", std::move(hazards)},
              {"n_hypo", r.n_hypo},
              {"n_hyper", r.n_hyper},
              {"time_in_range", r.time_in_range},
              {"hypo_time", r.hypo_time},
              {"hyper_time", r.hyper_time},
              {"mean_pre_alert_minutes", r.mean_pre_alert_minutes},
              {"pre_alert_defined", r.pre_alert_defined}};
}

}  // namespace stlu::io
