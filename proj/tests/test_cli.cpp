#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stlu/io.hpp"
#include "stlu/monitor.hpp"
#include "stlu/parser.hpp"
#include "support/scenario.hpp"
#include "support/tempdir.hpp"

using nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const testsupport::ScopedTempDir& dir, const std::string& args) {
  static int counter = 0;
  const std::string out_path = (dir.path() / ("out" + std::to_string(counter))).string();
  const std::string err_path = (dir.path() / ("err" + std::to_string(counter))).string();
  ++counter;
  const std::string cmd =
      std::string(STLU_CLI_PATH) + " " + args + " > " + out_path + " 2> " + err_path;
  const int rc = std::system(cmd.c_str());
  CliResult r;
  r.code = WEXITSTATUS(rc);
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

std::string worked_example_path(const testsupport::ScopedTempDir& dir) {
  stlu::Flowpipe fp;
  fp.channel = "BG";
  fp.epsilon = 0.95;
  fp.step_duration_s = 180.0;
  fp.steps = {{80.0, 95.0}, {75.0, 90.0}, {60.0, 80.0}, {40.0, 65.0}};
  const auto path = (dir.path() / "fp.json").string();
  stlu::io::save_flowpipe_json(path, fp);
  return path;
}

}  // namespace

TEST_CASE("monitor subcommand") {
  testsupport::ScopedTempDir dir;
  const std::string fp = worked_example_path(dir);

  SECTION("happy path emits a schema-versioned verdict") {
    const auto r =
        run_cli(dir, "monitor --spec 'G[0,3](BG{0.95} > 70)' --flowpipe " + fp);
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["schema_version"] == 1);
    CHECK(j["lower"] == -30.0);
    CHECK(j["upper"] == -5.0);
    CHECK(j["strong"] == false);
    CHECK(j["weak"] == false);
  }
  SECTION("--boolean restricts the output to the verdict") {
    const auto r = run_cli(
        dir, "monitor --spec 'G[0,1](BG{0.95} > 70)' --boolean --flowpipe " + fp);
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["strong"] == true);
    CHECK(j["weak"] == true);
    CHECK_FALSE(j.contains("lower"));
  }
  SECTION("--at shifts the evaluation time") {
    const auto r =
        run_cli(dir, "monitor --spec 'BG{0.95} > 70' --at 2 --flowpipe " + fp);
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["lower"] == -10.0);
    CHECK(j["upper"] == 10.0);
  }
  SECTION("interval bounds in minutes are converted via step_duration") {
    const auto steps_r =
        run_cli(dir, "monitor --spec 'G[0,3](BG{0.95} > 70)' --flowpipe " + fp);
    const auto minutes_r =
        run_cli(dir, "monitor --spec 'G[0,9](BG{0.95} > 70)' --spec-time-unit minutes "
                     "--flowpipe " + fp);
    REQUIRE(steps_r.code == 0);
    REQUIRE(minutes_r.code == 0);
    CHECK(json::parse(steps_r.out) == json::parse(minutes_r.out));
  }
  SECTION("missing flowpipe file exits 2") {
    const auto r = run_cli(dir, "monitor --spec 'BG{0.95} > 70' --flowpipe missing.json");
    CHECK(r.code == 2);
    CHECK(r.err.find("error:") != std::string::npos);
  }
  SECTION("--at past the end of the flowpipe exits 2") {
    const auto r = run_cli(dir, "monitor --spec 'BG{0.95} > 70' --at 9 --flowpipe " + fp);
    CHECK(r.code == 2);
  }
  SECTION("malformed formula exits 2") {
    const auto r = run_cli(dir, "monitor --spec 'G[0,3](BG{0.95} >' --flowpipe " + fp);
    CHECK(r.code == 2);
  }
  SECTION("unknown flag exits 2") {
    const auto r = run_cli(dir, "monitor --nonsense 1 --flowpipe " + fp);
    CHECK(r.code == 2);
  }
  SECTION("unregistered (channel, epsilon) pairs warn and then fail") {
    const auto r = run_cli(dir, "monitor --spec 'BG{0.9} > 70' --flowpipe " + fp);
    CHECK(r.code == 2);
    CHECK(r.err.find("warning: no flowpipe registered for BG{0.9}") != std::string::npos);
  }
  SECTION("--spec-file reads the formula from disk") {
    const std::string spec_path = dir.write("phi.txt", "G[0,3](BG{0.95} > 70)\n");
    const auto from_file = run_cli(dir, "monitor --spec-file " + spec_path + " --flowpipe " + fp);
    const auto inline_spec =
        run_cli(dir, "monitor --spec 'G[0,3](BG{0.95} > 70)' --flowpipe " + fp);
    REQUIRE(from_file.code == 0);
    CHECK(json::parse(from_file.out) == json::parse(inline_spec.out));

    const auto both = run_cli(dir, "monitor --spec 'BG{0.95} > 70' --spec-file " + spec_path +
                                       " --flowpipe " + fp);
    CHECK(both.code == 2);
    const auto neither = run_cli(dir, "monitor --flowpipe " + fp);
    CHECK(neither.code == 2);
  }
  SECTION("flowpipes can be fitted from samples and emitted") {
    const std::string csv = dir.write("samples.csv",
                                      "t,run_1,run_2,run_3\n"
                                      "0,100,102,104\n"
                                      "180,105,108,111\n");
    const std::string emitted = (dir.path() / "fitted.json").string();
    const auto r = run_cli(dir, "monitor --spec 'G[0,1](BG{0.95} > 70)' --samples " + csv +
                                    " --epsilon 0.95 --emit-flowpipe " + emitted);
    REQUIRE(r.code == 0);
    const stlu::Flowpipe fitted = stlu::io::load_flowpipe_json(emitted);
    CHECK(fitted.epsilon == 0.95);
    CHECK(fitted.size() == 2);
    const auto samples = stlu::io::load_samples_csv(csv);
    const auto expected = stlu::to_flowpipe(stlu::fit_gaussians(samples), 0.95, "BG", 180.0);
    CHECK(fitted.steps[0].lower == expected.steps[0].lower);
    CHECK(fitted.steps[1].upper == expected.steps[1].upper);
  }
}

TEST_CASE("calibrate subcommand") {
  testsupport::ScopedTempDir dir;
  std::filesystem::create_directories(dir.path() / "targets");
  dir.write("targets/a.csv", "t,value\n0,75\n180,75\n360,75\n540,75\n");
  dir.write("targets/b.csv", "t,value\n0,85\n180,85\n360,85\n540,85\n");

  const auto write_band = [&](const std::string& name, double lo, double hi) {
    stlu::Flowpipe fp;
    fp.channel = "BG";
    fp.epsilon = 0.95;
    fp.step_duration_s = 180.0;
    fp.steps = {{lo, hi}, {lo, hi}, {lo, hi}, {lo, hi}};
    stlu::io::save_flowpipe_json((dir.path() / name).string(), fp);
  };
  write_band("tight_a.json", 73.0, 77.0);
  write_band("tight_b.json", 83.0, 87.0);
  write_band("wide_a.json", 40.0, 110.0);
  write_band("wide_b.json", 40.0, 110.0);

  dir.write("candidates.json", R"({
    "candidates": [
      {"label": "wide", "flowpipes": ["wide_a.json", "wide_b.json"]},
      {"label": "tight", "flowpipes": ["tight_a.json", "tight_b.json"]}
    ]})");

  const auto r = run_cli(dir, "calibrate --spec 'G[0,3](BG{0.95} > 70)' --targets " +
                                  (dir.path() / "targets").string() + " --candidates " +
                                  (dir.path() / "candidates.json").string() + " --beta 0.5");
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  REQUIRE(j.is_array());
  REQUIRE(j.size() == 2);
  CHECK(j[0]["label"] == "tight");
  CHECK(j[1]["label"] == "wide");
  CHECK(j[0]["mean_loss"].get<double>() < j[1]["mean_loss"].get<double>());
  CHECK(j[0]["f1"].get<double>() == 1.0);
  CHECK(j[1]["f1"].get<double>() == 0.0);  // wide bands cross the threshold: lower <= 0

  SECTION("missing manifest exits 2") {
    const auto bad = run_cli(dir, "calibrate --spec 'BG{0.95} > 70' --targets " +
                                      (dir.path() / "targets").string() +
                                      " --candidates nope.json");
    CHECK(bad.code == 2);
  }
}

TEST_CASE("simulate subcommand") {
  testsupport::ScopedTempDir dir;
  const auto cfg = testsupport::demo_scenario(7, true, 1);
  const auto cfg_path = (dir.path() / "scenario.json").string();
  {
    std::ofstream out(cfg_path);
    out << stlu::io::scenario_to_json(cfg).dump(2) << "\n";
  }

  const std::string out1 = (dir.path() / "r1.json").string();
  const std::string out2 = (dir.path() / "r2.json").string();
  const auto r1 = run_cli(dir, "simulate --config " + cfg_path + " --out " + out1);
  const auto r2 = run_cli(dir, "simulate --config " + cfg_path + " --out " + out2);
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);

  SECTION("byte-identical reports for a fixed seed") {
    CHECK(slurp(out1) == slurp(out2));
    CHECK(r1.out == slurp(out1));
  }
  SECTION("report schema") {
    const json j = json::parse(r1.out);
    CHECK(j["schema_version"] == 1);
    CHECK(j["controller"] == "adaptive");
    CHECK(j["seed"] == 7);
    CHECK(j["steps"] == 480);
    CHECK(j.contains("hazards"));
    const double sum = j["time_in_range"].get<double>() + j["hypo_time"].get<double>() +
                       j["hyper_time"].get<double>();
    CHECK(sum == Catch::Approx(1.0).margin(1e-9));
  }
  SECTION("--seed overrides the scenario seed") {
    const auto r = run_cli(dir, "simulate --config " + cfg_path + " --seed 99");
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["seed"] == 99);
  }
  SECTION("missing config exits 2") {
    CHECK(run_cli(dir, "simulate --config nope.json").code == 2);
  }
}

TEST_CASE("bench subcommand") {
  testsupport::ScopedTempDir dir;
  const auto r = run_cli(dir, "bench --lengths 256,512 --spec 'G[0,inf](BG{0.95} > 70)'");
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "length,wall_ms");
  REQUIRE(std::getline(lines, line));
  CHECK(line.rfind("256,", 0) == 0);
  REQUIRE(std::getline(lines, line));
  CHECK(line.rfind("512,", 0) == 0);

  SECTION("bad lengths exit 2") {
    CHECK(run_cli(dir, "bench --lengths abc").code == 2);
  }
}

TEST_CASE("top-level dispatch") {
  testsupport::ScopedTempDir dir;
  CHECK(run_cli(dir, "").code == 2);
  CHECK(run_cli(dir, "--help").code == 0);
  CHECK(run_cli(dir, "monitor --help").code == 0);
}

TEST_CASE("checked-in example data stays consistent") {
  testsupport::ScopedTempDir dir;
  const std::string data = STLU_TESTDATA_DIR;

  SECTION("worked-example flowpipe golden") {
    const auto r = run_cli(dir, "monitor --spec 'G[0,3](BG{0.95}>70)' --flowpipe " + data +
                                    "/flowpipe_example.json");
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["lower"] == -30.0);
    CHECK(j["upper"] == -5.0);
  }
  SECTION("sample fitting") {
    const auto r = run_cli(dir, "monitor --spec 'G[0,9](BG{0.95} > 70)' --samples " + data +
                                    "/samples_example.csv --epsilon 0.95");
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["strong"] == true);
  }
  SECTION("calibration bundle ranks the narrow candidate first") {
    const auto r = run_cli(dir, "calibrate --spec 'G[0,7](70 < BG{0.95} < 180)' --targets " +
                                    data + "/calibration/targets --candidates " + data +
                                    "/calibration/candidates.json --beta 0.5");
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    REQUIRE(j.size() == 2);
    CHECK(j[0]["label"] == "bernoulli-dropconnect/0.8");
  }
  SECTION("scenario files simulate successfully") {
    const auto r =
        run_cli(dir, "simulate --config " + data + "/scenario_adaptive.json");
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["controller"] == "adaptive");
  }
}
