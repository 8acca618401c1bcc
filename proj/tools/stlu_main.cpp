// Command-line front end: monitor / calibrate / simulate / bench subcommands
// with JSON/CSV outputs on stdout and diagnostics on stderr.
//
// Exit codes: 0 success, 2 input or contract error, 1 internal error.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stlu/calibration.hpp"
#include "stlu/io.hpp"
#include "stlu/monitor.hpp"
#include "stlu/parser.hpp"
#include "stlu/rng.hpp"
#include "stlu/sim/episode.hpp"

namespace {

using nlohmann::json;

struct SpecInput {
  std::string text;
  std::string file;

  std::string resolve() const {
    if (!text.empty() && !file.empty())
      throw stlu::contract_error("give either --spec or --spec-file, not both");
    if (!text.empty()) return text;
    if (!file.empty()) return stlu::io::detail::read_file(file);
    throw stlu::contract_error("a formula is required (--spec or --spec-file)");
  }
};

stlu::FormulaPtr parse_spec(const SpecInput& spec, const std::string& time_unit,
                            double step_duration_s) {
  stlu::ParseOptions opts;
  if (time_unit == "seconds")
    opts.steps_per_unit = 1.0 / step_duration_s;
  else if (time_unit == "minutes")
    opts.steps_per_unit = 60.0 / step_duration_s;
  return stlu::parse(spec.resolve(), opts);
}

struct MonitorArgs {
  SpecInput spec;
  std::vector<std::string> flowpipe_paths;
  std::string samples_path;
  std::string emit_flowpipe_path;
  std::string channel = "BG";
  std::string time_unit = "steps";
  double epsilon = 0.95;
  std::int64_t at = 0;
  bool boolean_only = false;
};

int run_monitor(const MonitorArgs& args) {
  stlu::SignalEnv env;
  for (const std::string& path : args.flowpipe_paths)
    env.add(stlu::io::load_flowpipe_json(path));
  if (!args.samples_path.empty()) {
    const stlu::SampleSet samples = stlu::io::load_samples_csv(args.samples_path, args.channel);
    stlu::Flowpipe fp = stlu::to_flowpipe(stlu::fit_gaussians(samples), args.epsilon,
                                          samples.channel, samples.step_duration_s);
    if (!args.emit_flowpipe_path.empty())
      stlu::io::save_flowpipe_json(args.emit_flowpipe_path, fp);
    env.add(std::move(fp));
  }
  if (env.empty())
    throw stlu::contract_error("monitor needs at least one --flowpipe or --samples input");

  const double step_s = env.pipes().begin()->second.step_duration_s;
  const stlu::FormulaPtr phi = parse_spec(args.spec, args.time_unit, step_s);

  for (const auto& [channel, eps] : stlu::collect_signal_refs(*phi))
    if (!env.find(channel, eps))
      std::cerr << "warning: no flowpipe registered for " << channel << "{"
                << stlu::detail::fmt_double(eps) << "}\n";

  json out{{"schema_version", 1}};
  const stlu::Verdict v = stlu::verdict(*phi, env, args.at);
  out["strong"] = v.strong;
  out["weak"] = v.weak;
  if (!args.boolean_only) {
    const stlu::RobustInterval rho = stlu::robustness(*phi, env, args.at);
    out["lower"] = rho.lower;
    out["upper"] = rho.upper;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct CalibrateArgs {
  SpecInput spec;
  std::string targets_dir;
  std::string candidates_path;
  std::string channel = "BG";
  std::string time_unit = "steps";
  double beta = 0.5;
};

int run_calibrate(const CalibrateArgs& args) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(args.targets_dir))
    throw stlu::io_error("targets directory not found: " + args.targets_dir);

  std::vector<std::string> target_files;
  for (const auto& entry : fs::directory_iterator(args.targets_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      target_files.push_back(entry.path().string());
  std::sort(target_files.begin(), target_files.end());
  if (target_files.empty())
    throw stlu::io_error("no .csv target traces in " + args.targets_dir);

  std::vector<stlu::Trace> targets;
  targets.reserve(target_files.size());
  for (const std::string& path : target_files)
    targets.push_back(stlu::io::load_trace_csv(path, args.channel));

  json manifest;
  try {
    manifest = json::parse(stlu::io::detail::read_file(args.candidates_path));
  } catch (const json::parse_error& e) {
    throw stlu::io_error("invalid JSON in " + args.candidates_path + ": " + e.what());
  }
  if (!manifest.is_object() || !manifest.contains("candidates") ||
      !manifest["candidates"].is_array())
    throw stlu::io_error("candidate manifest must be {\"candidates\": [...]}");

  const fs::path base = fs::path(args.candidates_path).parent_path();
  std::vector<stlu::CandidateConfig> candidates;
  for (const auto& c : manifest["candidates"]) {
    if (!c.contains("label") || !c.contains("flowpipes"))
      throw stlu::io_error("each candidate needs 'label' and 'flowpipes'");
    stlu::CandidateConfig cand;
    cand.label = c["label"].get<std::string>();
    for (const auto& existing : candidates)
      if (existing.label == cand.label)
        throw stlu::io_error("duplicate candidate label '" + cand.label + "'");
    for (const auto& p : c["flowpipes"]) {
      fs::path fp_path = p.get<std::string>();
      if (fp_path.is_relative()) fp_path = base / fp_path;
      cand.flowpipes.push_back(stlu::io::load_flowpipe_json(fp_path.string()));
    }
    candidates.push_back(std::move(cand));
  }

  const double step_s = targets.front().step_duration_s;
  const stlu::FormulaPtr phi = parse_spec(args.spec, args.time_unit, step_s);
  const stlu::LossConfig cfg{args.beta, candidates.empty() || candidates[0].flowpipes.empty()
                                            ? 0.95
                                            : candidates[0].flowpipes[0].epsilon};
  const auto ranking = stlu::select_config(candidates, targets, *phi, cfg);

  json out = json::array();
  for (const stlu::CandidateScore& score : ranking) {
    const auto cand_it =
        std::find_if(candidates.begin(), candidates.end(),
                     [&](const auto& c) { return c.label == score.label; });
    std::vector<std::pair<stlu::Trace, stlu::Flowpipe>> pairs;
    for (std::size_t i = 0; i < targets.size(); ++i)
      pairs.emplace_back(targets[i], cand_it->flowpipes[i]);
    out.push_back({{"label", score.label},
                   {"mean_loss", score.mean_loss},
                   {"f1", stlu::f1_satisfaction(pairs, *phi)}});
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct SimulateArgs {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

int run_simulate(const SimulateArgs& args) {
  stlu::sim::ScenarioConfig cfg = stlu::io::load_scenario_json(args.config_path);
  if (args.seed_given) cfg.seed = args.seed;
  const stlu::sim::EpisodeReport report = stlu::sim::run_episode(cfg);
  const std::string payload = stlu::io::report_to_json(report).dump(2) + "\n";
  if (!args.out_path.empty()) {
    std::ofstream out(args.out_path, std::ios::binary);
    if (!out) throw stlu::io_error("cannot write file: " + args.out_path);
    out << payload;
  }
  std::cout << payload;
  return 0;
}

struct BenchArgs {
  SpecInput spec;
  std::string lengths = "1000,10000,100000";
  std::uint64_t seed = 42;
};

stlu::Flowpipe synthetic_flowpipe(std::size_t length, double epsilon,
                                  const std::string& channel, stlu::Rng& rng) {
  stlu::Flowpipe fp;
  fp.epsilon = epsilon;
  fp.channel = channel;
  fp.step_duration_s = 180.0;
  fp.steps.reserve(length);
  double mid = 100.0;
  for (std::size_t i = 0; i < length; ++i) {
    mid += 5.0 * rng.next_normal();
    const double half = 1.0 + std::abs(10.0 * rng.next_normal());
    fp.steps.push_back({mid - half, mid + half});
  }
  return fp;
}

int run_bench(const BenchArgs& args) {
  std::string spec_text;
  try {
    spec_text = args.spec.resolve();
  } catch (const stlu::contract_error&) {
    spec_text = "G[0,inf](BG{0.95} > 70)";
  }
  const stlu::FormulaPtr phi = stlu::parse(spec_text);
  const auto refs = stlu::collect_signal_refs(*phi);

  std::vector<std::size_t> lengths;
  for (std::size_t begin = 0; begin < args.lengths.size();) {
    const std::size_t comma = args.lengths.find(',', begin);
    const std::string field = args.lengths.substr(
        begin, comma == std::string::npos ? comma : comma - begin);
    try {
      lengths.push_back(std::stoull(field));
    } catch (const std::exception&) {
      throw stlu::contract_error("--lengths must be a comma-separated list of integers");
    }
    if (comma == std::string::npos) break;
    begin = comma + 1;
  }
  if (lengths.empty()) throw stlu::contract_error("--lengths is empty");

  std::cout << "length,wall_ms\n";
  stlu::Rng rng(args.seed);
  for (const std::size_t len : lengths) {
    stlu::SignalEnv env;
    for (const auto& [channel, eps] : refs) env.add(synthetic_flowpipe(len, eps, channel, rng));

    double best_ms = std::numeric_limits<double>::max();
    volatile double sink = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      const stlu::RobustInterval rho = stlu::robustness(*phi, env, 0);
      const auto stop = std::chrono::steady_clock::now();
      sink = sink + rho.lower;
      best_ms = std::min(best_ms,
                         std::chrono::duration<double, std::milli>(stop - start).count());
    }
    (void)sink;
    std::cout << len << "," << best_ms << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"STL-U quantitative predictive monitoring toolkit"};
  app.require_subcommand(1);

  MonitorArgs margs;
  CLI::App* monitor = app.add_subcommand(
      "monitor", "Evaluate a formula over flowpipes; prints a JSON verdict");
  monitor->add_option("--spec", margs.spec.text, "Formula text");
  monitor->add_option("--spec-file", margs.spec.file, "File containing the formula");
  monitor->add_option("--flowpipe", margs.flowpipe_paths, "Flowpipe JSON file (repeatable)");
  monitor->add_option("--samples", margs.samples_path,
                      "Sample CSV (t,run_1,...,run_N); fitted to a flowpipe at --epsilon");
  monitor->add_option("--epsilon", margs.epsilon,
                      "Confidence level for --samples flowpipes (default 0.95)");
  monitor->add_option("--channel", margs.channel, "Channel name for --samples (default BG)");
  monitor->add_option("--emit-flowpipe", margs.emit_flowpipe_path,
                      "Write the flowpipe fitted from --samples to this path");
  monitor->add_option("--at", margs.at, "Evaluation step (default 0)");
  monitor->add_flag("--boolean", margs.boolean_only,
                    "Report only the strong/weak verdict, skip robustness");
  monitor->add_option("--spec-time-unit", margs.time_unit,
                      "Unit of interval bounds in the formula (default steps)")
      ->check(CLI::IsMember({"steps", "seconds", "minutes"}));

  CalibrateArgs cargs;
  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "Rank candidate prediction configs by mean quantitative loss");
  calibrate->add_option("--spec", cargs.spec.text, "Formula text");
  calibrate->add_option("--spec-file", cargs.spec.file, "File containing the formula");
  calibrate->add_option("--targets", cargs.targets_dir, "Directory of target trace CSVs")
      ->required();
  calibrate->add_option("--candidates", cargs.candidates_path, "Candidate manifest JSON")
      ->required();
  calibrate->add_option("--beta", cargs.beta, "Loss coefficient in [0,1] (default 0.5)");
  calibrate->add_option("--channel", cargs.channel, "Channel of the target traces");
  calibrate->add_option("--spec-time-unit", cargs.time_unit,
                        "Unit of interval bounds in the formula (default steps)")
      ->check(CLI::IsMember({"steps", "seconds", "minutes"}));

  SimulateArgs sargs;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Run one closed-loop episode; prints and writes a report JSON");
  simulate->add_option("--config", sargs.config_path, "Scenario JSON")->required();
  simulate->add_option("--out", sargs.out_path, "Report output path");
  CLI::Option* seed_opt = simulate->add_option("--seed", sargs.seed, "Override the scenario seed");

  BenchArgs bargs;
  CLI::App* bench = app.add_subcommand(
      "bench", "Time the monitor over synthetic flowpipes; prints CSV");
  bench->add_option("--spec", bargs.spec.text, "Formula text");
  bench->add_option("--spec-file", bargs.spec.file, "File containing the formula");
  bench->add_option("--lengths", bargs.lengths, "Comma-separated flowpipe lengths");
  bench->add_option("--seed", bargs.seed, "Seed for the synthetic flowpipes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  sargs.seed_given = seed_opt->count() > 0;

  try {
    if (monitor->parsed()) return run_monitor(margs);
    if (calibrate->parsed()) return run_calibrate(cargs);
    if (simulate->parsed()) return run_simulate(sargs);
    if (bench->parsed()) return run_bench(bargs);
    std::cerr << "error: no subcommand given\n";
    return 2;
  } catch (const stlu::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: invalid input JSON: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
