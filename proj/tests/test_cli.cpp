// End-to-end checks against the installed binary; every case shells out to
// the real executable the way a user would.
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <random>
#include <string>

#include "doctest.h"
#include "duq/error.hpp"
#include "duq/io.hpp"
#include "duq/pipeline.hpp"
#include "support/fixtures.hpp"
#include "support/tempdir.hpp"

using namespace duq;
using io::Json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string read_or_empty(const std::string& path) {
  try {
    return io::read_text_file(path);
  } catch (const Error&) {
    return "";
  }
}

CliResult run_cli(const testutil::TempDir& dir, const std::string& args) {
  static int invocation = 0;
  const std::string tag = std::to_string(invocation++);
  const std::string out_path = dir.file("stdout_" + tag);
  const std::string err_path = dir.file("stderr_" + tag);
  const std::string command = std::string(DUQ_CLI_PATH) + " " + args + " >" +
                              out_path + " 2>" + err_path;
  const int raw = std::system(command.c_str());
  CliResult result;
  result.exit_code = (raw >= 0 && WIFEXITED(raw)) ? WEXITSTATUS(raw) : -1;
  result.out = read_or_empty(out_path);
  result.err = read_or_empty(err_path);
  return result;
}

std::string data_file(const std::string& name) {
  return std::string(DUQ_DATA_DIR) + "/" + name;
}

// Single-bus system whose optimal cost is exactly linear in the wind level,
// so a fitted surrogate reproduces it to solver precision.
std::string write_linear_system(const testutil::TempDir& dir) {
  io::SystemBundle bundle;
  bundle.electric = fixtures::single_bus(true);
  const auto path = dir.file("linear.json");
  io::save_system(bundle, path);
  return path;
}

std::string write_wind_csv(const testutil::TempDir& dir, long rows,
                           std::uint64_t seed) {
  io::ScenarioMatrix m;
  m.labels = {"w1_t1"};
  m.values.resize(rows, 1);
  std::mt19937_64 rng(seed);
  for (long i = 0; i < rows; ++i) {
    m.values(i, 0) = static_cast<double>(rng() % 6000) / 100.0;  // [0, 60)
  }
  const auto path = dir.file("wind.csv");
  io::save_scenarios(m, path, {});
  return path;
}

}  // namespace

TEST_CASE("cli: ptdf prints a provenance-stamped document") {
  testutil::TempDir dir;
  const auto r =
      run_cli(dir, "ptdf --system " + data_file("five_bus.json"));
  REQUIRE(r.exit_code == 0);
  const Json j = Json::parse(r.out);
  CHECK(j["provenance"]["tool"] == "duq");
  CHECK(j["provenance"]["command"] == "ptdf");
  CHECK(j["slack_bus"] == 1);
  CHECK(j["factors"].size() == 6);
  CHECK(j["factors"][0].size() == 5);
}

TEST_CASE("cli: solve writes dispatch and optionally the lp") {
  testutil::TempDir dir;
  const auto r = run_cli(
      dir, "solve --system " + data_file("five_bus.json") + " --scenarios " +
               data_file("five_bus_scenarios.csv") + " --row 1 --out " +
               dir.file("d.json") + " --dump-lp " + dir.file("lp.json"));
  REQUIRE(r.exit_code == 0);

  const Json d = Json::parse(io::read_text_file(dir.file("d.json")));
  CHECK(d["status"] == "optimal");
  CHECK(d["cost"].get<double>() > 0.0);
  CHECK(d["outputs"].size() == 3);
  CHECK(d["outputs"][0].size() == 4);
  CHECK(d["flows"].size() == 6);

  const Json lp = Json::parse(io::read_text_file(dir.file("lp.json")));
  CHECK(lp["num_cols"].get<int>() > 0);
  CHECK(lp["entries"].size() > 0);
  CHECK(lp["rows"].size() == lp["num_rows"].get<std::size_t>());
}

TEST_CASE("cli: solve on the gas system reports the converged pipe state") {
  testutil::TempDir dir;
  io::ScenarioMatrix m;
  m.labels = {"w1_t1"};
  m.values = Eigen::MatrixXd::Zero(1, 1);
  io::save_scenarios(m, dir.file("w.csv"), {});

  const auto r = run_cli(dir, "solve --system " + data_file("gas_toy.json") +
                                  " --scenarios " + dir.file("w.csv") +
                                  " --out " + dir.file("d.json"));
  REQUIRE(r.exit_code == 0);
  const Json d = Json::parse(io::read_text_file(dir.file("d.json")));
  CHECK(d["status"] == "optimal");
  CHECK(d["cost"].get<double>() == doctest::Approx(1008.0).epsilon(1e-6));
  CHECK(d["pressures"][0][0].get<double>() == doctest::Approx(5.0));
  CHECK(d["pressures"][1][0].get<double>() == doctest::Approx(3.0));
  CHECK(d["weymouth_residual"].get<double>() < 1e-6);
}

TEST_CASE("cli: mc reruns with the same seed are bit identical") {
  testutil::TempDir dir;
  const std::string base = "mc --seed 7 --system " +
                           data_file("five_bus.json") + " --scenarios " +
                           data_file("five_bus_scenarios.csv");
  const auto r1 = run_cli(dir, base + " --out " + dir.file("a.json") +
                                   " --costs " + dir.file("a.csv"));
  const auto r2 = run_cli(dir, base + " --out " + dir.file("b.json") +
                                   " --costs " + dir.file("b.csv"));
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  CHECK(io::read_text_file(dir.file("a.json")) ==
        io::read_text_file(dir.file("b.json")));
  CHECK(io::read_text_file(dir.file("a.csv")) ==
        io::read_text_file(dir.file("b.csv")));

  const auto report = io::load_report(dir.file("a.json"));
  CHECK(report.n == 16);
  CHECK(report.wall_seconds == 0.0);
  for (long g = 1; g < report.cdf.values.size(); ++g) {
    CHECK(report.cdf.values(g) >= report.cdf.values(g - 1));
  }
}

TEST_CASE("cli: fit then predict reproduces a linear cost exactly") {
  testutil::TempDir dir;
  const auto system = write_linear_system(dir);
  const auto wind = write_wind_csv(dir, 60, 321);

  const auto mc = run_cli(dir, "mc --system " + system + " --scenarios " +
                                   wind + " --out " + dir.file("mc.json") +
                                   " --costs " + dir.file("true.csv"));
  REQUIRE(mc.exit_code == 0);

  const auto fit = run_cli(
      dir, "fit --seed 11 --system " + system + " --scenarios " + wind +
               " --train 20 --out " + dir.file("model.json"));
  REQUIRE(fit.exit_code == 0);

  const auto predict = run_cli(
      dir, "predict --model " + dir.file("model.json") + " --scenarios " +
               wind + " --out " + dir.file("pred.csv"));
  REQUIRE(predict.exit_code == 0);

  const Eigen::VectorXd truth = io::load_costs(dir.file("true.csv"));
  const Eigen::VectorXd pred = io::load_costs(dir.file("pred.csv"));
  REQUIRE(truth.size() == pred.size());
  const double scale = truth.cwiseAbs().maxCoeff();
  CHECK((truth - pred).cwiseAbs().maxCoeff() <= 1e-6 * scale);

  const auto model = io::load_model(dir.file("model.json"));
  CHECK(model.provenance.seed == 11);
  CHECK(model.provenance.input_labels == std::vector<std::string>{"w1_t1"});
}

TEST_CASE("cli: stats and compare close the loop") {
  testutil::TempDir dir;
  const auto system = write_linear_system(dir);
  const auto wind = write_wind_csv(dir, 40, 99);

  REQUIRE(run_cli(dir, "mc --system " + system + " --scenarios " + wind +
                           " --out " + dir.file("mc.json") + " --costs " +
                           dir.file("costs.csv"))
              .exit_code == 0);
  REQUIRE(run_cli(dir, "stats --costs " + dir.file("costs.csv") + " --out " +
                           dir.file("stats.json") + " --pdf-csv " +
                           dir.file("pdf.csv") + " --cdf-csv " +
                           dir.file("cdf.csv"))
              .exit_code == 0);

  // Same samples in, so the two reports agree exactly.
  const auto cmp = run_cli(dir, "compare --baseline " + dir.file("mc.json") +
                                    " --candidate " + dir.file("stats.json"));
  REQUIRE(cmp.exit_code == 0);
  const Json j = Json::parse(cmp.out);
  CHECK(j["mean_pct"].get<double>() == 0.0);
  CHECK(j["std_pct"].get<double>() == 0.0);
  CHECK(j["cdf_gap"].get<double>() == 0.0);

  const std::string pdf = io::read_text_file(dir.file("pdf.csv"));
  CHECK(pdf.find("grid,density") != std::string::npos);
  const std::string cdf = io::read_text_file(dir.file("cdf.csv"));
  CHECK(cdf.find("grid,prob") != std::string::npos);
}

TEST_CASE("cli: config file sets fit parameters, flags win") {
  testutil::TempDir dir;
  const auto system = write_linear_system(dir);
  const auto wind = write_wind_csv(dir, 30, 5);
  io::write_text_file(dir.file("cfg.json"),
                      "{\"max_degree\": 1, \"q\": 1.0}\n");

  const auto fit = run_cli(
      dir, "fit --config " + dir.file("cfg.json") + " --system " + system +
               " --scenarios " + wind + " --train 15 --out " +
               dir.file("m.json"));
  REQUIRE(fit.exit_code == 0);
  const Json m = Json::parse(io::read_text_file(dir.file("m.json")));
  CHECK(m["provenance"]["config"]["max_degree"] == 1);
  CHECK(m["provenance"]["config"]["q"] == 1.0);

  const auto fit2 = run_cli(
      dir, "fit --config " + dir.file("cfg.json") + " --max-degree 2 " +
               "--system " + system + " --scenarios " + wind +
               " --train 15 --out " + dir.file("m2.json"));
  REQUIRE(fit2.exit_code == 0);
  const Json m2 = Json::parse(io::read_text_file(dir.file("m2.json")));
  CHECK(m2["provenance"]["config"]["max_degree"] == 2);
  CHECK(m2["provenance"]["config"]["q"] == 1.0);
}

TEST_CASE("cli: failures exit nonzero with one-line errors") {
  testutil::TempDir dir;

  SUBCASE("missing file") {
    const auto r = run_cli(dir, "ptdf --system " + dir.file("nope.json"));
    CHECK(r.exit_code == 1);
    CHECK(r.err.rfind("error: ", 0) == 0);
    CHECK(r.err.find("IoError") != std::string::npos);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  }
  SUBCASE("unknown flag") {
    const auto r = run_cli(dir, "ptdf --sytem x.json");
    CHECK(r.exit_code == 2);
    CHECK(r.err.rfind("error: ParseError", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
  }
  SUBCASE("scenario row out of range") {
    const auto r = run_cli(
        dir, "solve --system " + data_file("five_bus.json") +
                 " --scenarios " + data_file("five_bus_scenarios.csv") +
                 " --row 99");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("SchemaError") != std::string::npos);
    CHECK(r.err.find("99") != std::string::npos);
  }
  SUBCASE("corrupt scenario data names the cell") {
    io::write_text_file(dir.file("bad.csv"),
                        "w1_t1,w1_t2,w1_t3,w1_t4,w2_t1,w2_t2,w2_t3,w2_t4\n"
                        "1,2,3,4,5,-6,7,8\n");
    const auto r = run_cli(dir, "mc --system " + data_file("five_bus.json") +
                                    " --scenarios " + dir.file("bad.csv") +
                                    " --out " + dir.file("r.json"));
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("InvariantViolation") != std::string::npos);
    CHECK(r.err.find("w2_t2") != std::string::npos);
  }
}
