// Command-line front end: dispatch solves, Monte Carlo reports, surrogate
// fitting and evaluation, all driven by JSON/CSV artifacts.
#include <chrono>
#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "duq/error.hpp"
#include "duq/gas.hpp"
#include "duq/grid.hpp"
#include "duq/io.hpp"
#include "duq/pipeline.hpp"

namespace {

using duq::io::Json;

struct GlobalOpts {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string config_path;
};

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string one_line(std::string text) {
  for (auto& c : text) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return text;
}

void emit(const Json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    duq::io::write_text_file(out_path, j.dump(2) + "\n");
  }
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (long r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

duq::io::RunProvenance make_provenance(const std::string& command,
                                       const GlobalOpts& global, Json config) {
  duq::io::RunProvenance run;
  run.command = command;
  run.seed = global.seed;
  run.threads = global.threads;
  run.config = std::move(config);
  return run;
}

// Costs for a set of scenario rows, trying the gas-coupled solver when the
// system has a gas block. Failed rows come back as error strings.
std::vector<duq::grid::CostSample> evaluate_scenarios(
    const duq::io::SystemBundle& bundle, const duq::grid::PtdfMatrix& ptdf,
    const Eigen::MatrixXd& rows, int threads) {
  if (bundle.gas.empty()) {
    return duq::grid::batch_solve(bundle.electric, ptdf, rows, threads);
  }
  return duq::gas::batch_solve(bundle.electric, bundle.gas, ptdf, rows,
                               threads);
}

Json finite_or_null(double v) {
  if (std::isfinite(v)) return Json(v);
  return Json();
}

Json lp_to_json(const duq::lp::LpProblem& lp) {
  Json j = Json::object();
  j["num_rows"] = lp.num_rows;
  j["num_cols"] = lp.num_cols;
  j["objective"] = lp.objective;
  Json entries = Json::array();
  for (const auto& e : lp.entries) {
    entries.push_back(Json::array({e.row, e.col, e.value}));
  }
  j["entries"] = entries;
  Json rows = Json::array();
  for (int r = 0; r < lp.num_rows; ++r) {
    Json e = Json::object();
    switch (lp.relations[r]) {
      case duq::lp::Relation::LessEqual: e["relation"] = "<="; break;
      case duq::lp::Relation::Equal: e["relation"] = "="; break;
      case duq::lp::Relation::GreaterEqual: e["relation"] = ">="; break;
    }
    e["rhs"] = lp.rhs[r];
    rows.push_back(e);
  }
  j["rows"] = rows;
  Json lower = Json::array();
  Json upper = Json::array();
  for (int c = 0; c < lp.num_cols; ++c) {
    lower.push_back(finite_or_null(lp.lower[c]));
    upper.push_back(finite_or_null(lp.upper[c]));
  }
  j["lower"] = lower;
  j["upper"] = upper;
  return j;
}

int cmd_ptdf(const GlobalOpts& global, const std::string& system_path,
             const std::string& out_path) {
  const auto bundle = duq::io::load_system(system_path);
  const auto ptdf = duq::grid::compute_ptdf(bundle.electric);

  Json j = Json::object();
  j["provenance"] =
      provenance_json(make_provenance("ptdf", global, {{"system", system_path}}));
  j["slack_bus"] = bundle.electric.slack_bus;
  j["bus_ids"] = ptdf.bus_ids;
  j["line_ids"] = ptdf.line_ids;
  j["factors"] = matrix_json(ptdf.factors);
  emit(j, out_path);
  return 0;
}

int cmd_solve(const GlobalOpts& global, const std::string& system_path,
              const std::string& scenarios_path, long row,
              const std::string& out_path, const std::string& dump_lp_path) {
  const auto bundle = duq::io::load_system(system_path);
  const auto scenarios =
      duq::io::load_scenarios(scenarios_path, bundle.electric);
  duq::require(row >= 0 && row < scenarios.values.rows(),
               duq::ErrorKind::SchemaError,
               "row " + std::to_string(row) + " is out of range; the file has " +
                   std::to_string(scenarios.values.rows()) + " scenarios");
  const Eigen::VectorXd wind = scenarios.values.row(row).transpose();
  const auto ptdf = duq::grid::compute_ptdf(bundle.electric);

  if (!dump_lp_path.empty()) {
    const auto lp = duq::grid::build_sed_lp(bundle.electric, ptdf, wind);
    duq::io::write_text_file(dump_lp_path, lp_to_json(lp).dump(2) + "\n");
  }

  Json j = Json::object();
  j["provenance"] = provenance_json(make_provenance(
      "solve", global,
      {{"system", system_path}, {"scenarios", scenarios_path}, {"row", row}}));

  if (bundle.gas.empty()) {
    const auto sol = duq::grid::solve_sed(bundle.electric, ptdf, wind);
    j["status"] = duq::lp::to_string(sol.status);
    j["cost"] = sol.cost;
    j["outputs"] = matrix_json(sol.outputs);
    j["flows"] = matrix_json(sol.flows);
    j["iterations"] = sol.iterations;
  } else {
    const auto sol =
        duq::gas::solve_ied(bundle.electric, bundle.gas, ptdf, wind);
    j["status"] = duq::lp::to_string(sol.status);
    j["cost"] = sol.cost;
    j["outputs"] = matrix_json(sol.outputs);
    j["flows"] = matrix_json(sol.line_flows);
    j["well_output"] = matrix_json(sol.well_output);
    j["pressures"] = matrix_json(sol.pressures);
    j["pipe_flows"] = matrix_json(sol.pipe_flows);
    j["compressor_flows"] = matrix_json(sol.compressor_flows);
    j["slp_iterations"] = sol.slp_iterations;
    j["weymouth_residual"] = sol.weymouth_residual;
  }
  emit(j, out_path);
  return 0;
}

int cmd_mc(const GlobalOpts& global, const std::string& system_path,
           const std::string& scenarios_path, const std::string& out_path,
           const std::string& costs_path, bool embed_timing) {
  const auto bundle = duq::io::load_system(system_path);
  const auto scenarios =
      duq::io::load_scenarios(scenarios_path, bundle.electric);
  const auto ptdf = duq::grid::compute_ptdf(bundle.electric);

  const double t0 = now_seconds();
  const auto samples =
      evaluate_scenarios(bundle, ptdf, scenarios.values, global.threads);
  const double wall = now_seconds() - t0;

  std::vector<double> good;
  std::vector<std::string> failures;
  good.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].status == duq::lp::LpStatus::Optimal &&
        samples[i].error.empty()) {
      good.push_back(samples[i].cost);
    } else {
      failures.push_back(
          "scenario " + std::to_string(i) + ": " +
          (samples[i].error.empty() ? duq::lp::to_string(samples[i].status)
                                    : samples[i].error));
    }
  }
  duq::require(good.size() >= 2, duq::ErrorKind::InsufficientData,
               "only " + std::to_string(good.size()) +
                   " scenarios solved; cannot build a report");

  const Eigen::VectorXd costs = Eigen::Map<const Eigen::VectorXd>(
      good.data(), static_cast<long>(good.size()));
  auto report = duq::pipeline::make_report(costs, embed_timing ? wall : 0.0);
  if (!failures.empty()) {
    report.warnings.push_back(std::to_string(failures.size()) +
                              " scenarios failed to solve and were dropped");
    for (std::size_t i = 0; i < failures.size() && i < 10; ++i) {
      report.warnings.push_back(failures[i]);
    }
  }

  const auto run = make_provenance(
      "mc", global,
      {{"system", system_path}, {"scenarios", scenarios_path}});
  duq::io::save_report(report, run, out_path);
  if (!costs_path.empty()) duq::io::save_costs(costs, run, costs_path);

  std::cerr << "mc: " << good.size() << " scenarios in " << wall << " s\n";
  return 0;
}

int cmd_fit(const GlobalOpts& global, const std::string& system_path,
            const std::string& scenarios_path, long train,
            const std::string& out_path,
            const duq::pipeline::FitConfig& config) {
  const auto bundle = duq::io::load_system(system_path);
  const auto scenarios =
      duq::io::load_scenarios(scenarios_path, bundle.electric);
  const auto ptdf = duq::grid::compute_ptdf(bundle.electric);

  const auto split = duq::pipeline::sample_training_design(
      scenarios.values, train, global.seed);

  const double t0 = now_seconds();
  const auto samples =
      evaluate_scenarios(bundle, ptdf, split.train, global.threads);
  Eigen::VectorXd y(split.train.rows());
  for (long i = 0; i < y.size(); ++i) {
    const auto& s = samples[i];
    duq::require(s.status == duq::lp::LpStatus::Optimal && s.error.empty(),
                 duq::ErrorKind::InvariantViolation,
                 "training scenario (row " +
                     std::to_string(split.train_indices[i]) +
                     ") did not solve: " +
                     (s.error.empty() ? duq::lp::to_string(s.status)
                                      : s.error));
    y(i) = s.cost;
  }

  auto fit_config = config;
  fit_config.adaptive.threads = global.threads;
  auto model =
      duq::pipeline::fit_surrogate(split.train, y, fit_config, global.seed);
  model.provenance.input_labels = scenarios.labels;
  duq::io::save_model(model, out_path);

  const auto closed_form = duq::pipeline::analytic_moments(model);
  std::cerr << "fit: " << train << " training solves in "
            << now_seconds() - t0 << " s; degree " << model.expansion.degree
            << ", " << model.expansion.coeffs.size() << " terms, loo "
            << model.expansion.loo << "; closed-form mean "
            << closed_form.mean << ", std "
            << std::sqrt(closed_form.variance) << "\n";
  return 0;
}

int cmd_predict(const GlobalOpts& global, const std::string& model_path,
                const std::string& scenarios_path,
                const std::string& out_path) {
  const auto model = duq::io::load_model(model_path);
  duq::require(!model.provenance.input_labels.empty(),
               duq::ErrorKind::SchemaError,
               model_path + " carries no input labels; refit with this tool");
  const auto scenarios =
      duq::io::load_scenarios(scenarios_path, model.provenance.input_labels);

  const double t0 = now_seconds();
  const Eigen::VectorXd y =
      duq::pipeline::predict(model, scenarios.values, global.threads);
  std::cerr << "predict: " << y.size() << " scenarios in "
            << now_seconds() - t0 << " s\n";

  const auto run = make_provenance(
      "predict", global,
      {{"model", model_path}, {"scenarios", scenarios_path}});
  duq::io::save_costs(y, run, out_path);
  return 0;
}

int cmd_stats(const GlobalOpts& global, const std::string& costs_path,
              const std::string& out_path, const std::string& pdf_path,
              const std::string& cdf_path) {
  const Eigen::VectorXd costs = duq::io::load_costs(costs_path);
  const auto report = duq::pipeline::make_report(costs);
  const auto run =
      make_provenance("stats", global, {{"costs", costs_path}});
  duq::io::save_report(report, run, out_path);
  if (!pdf_path.empty()) {
    duq::io::save_curve(report.pdf, "density", run, pdf_path);
  }
  if (!cdf_path.empty()) {
    duq::io::save_curve(report.cdf, "prob", run, cdf_path);
  }
  return 0;
}

int cmd_compare(const GlobalOpts& global, const std::string& baseline_path,
                const std::string& candidate_path,
                const std::string& out_path) {
  const auto baseline = duq::io::load_report(baseline_path);
  const auto candidate = duq::io::load_report(candidate_path);
  const auto metrics = duq::pipeline::compare_reports(baseline, candidate);

  Json j = Json::object();
  j["provenance"] = provenance_json(make_provenance(
      "compare", global,
      {{"baseline", baseline_path}, {"candidate", candidate_path}}));
  j["mean_pct"] = metrics.mean_pct;
  j["std_pct"] = metrics.std_pct;
  j["cdf_gap"] = metrics.cdf_gap;
  emit(j, out_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dispatch-under-uncertainty toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts global;
  app.add_option("--seed", global.seed, "Seed for subsampling decisions");
  app.add_option("--threads", global.threads,
                 "Worker threads for scenario batches (0 = all cores)");
  app.add_option("--config", global.config_path,
                 "JSON file with fit parameters");

  std::string system_path, scenarios_path, model_path, costs_path;
  std::string baseline_path, candidate_path;
  std::string out_path, dump_lp_path, pdf_path, cdf_path;
  long row = 0;
  long train = 0;
  bool embed_timing = false;

  auto* ptdf_cmd = app.add_subcommand("ptdf", "Write shift factors for a system");
  ptdf_cmd->add_option("--system", system_path, "System JSON")->required();
  ptdf_cmd->add_option("--out", out_path, "Output JSON (stdout when omitted)");

  auto* solve_cmd =
      app.add_subcommand("solve", "Dispatch one scenario and write the result");
  solve_cmd->add_option("--system", system_path, "System JSON")->required();
  solve_cmd->add_option("--scenarios", scenarios_path, "Scenario CSV")
      ->required();
  solve_cmd->add_option("--row", row, "Scenario row to solve (default 0)");
  solve_cmd->add_option("--out", out_path, "Output JSON (stdout when omitted)");
  solve_cmd->add_option("--dump-lp", dump_lp_path,
                        "Also write the electric dispatch LP as JSON");

  auto* mc_cmd = app.add_subcommand(
      "mc", "Solve every scenario and write a statistical report");
  mc_cmd->add_option("--system", system_path, "System JSON")->required();
  mc_cmd->add_option("--scenarios", scenarios_path, "Scenario CSV")->required();
  mc_cmd->add_option("--out", out_path, "Report JSON")->required();
  mc_cmd->add_option("--costs", costs_path, "Also write per-scenario costs CSV");
  mc_cmd->add_flag("--timing", embed_timing,
                   "Embed wall time in the report (breaks bit-identical reruns)");

  auto* fit_cmd =
      app.add_subcommand("fit", "Train a surrogate on a scenario subsample");
  fit_cmd->add_option("--system", system_path, "System JSON")->required();
  fit_cmd->add_option("--scenarios", scenarios_path, "Scenario CSV")->required();
  fit_cmd->add_option("--train", train, "Training sample size")->required();
  fit_cmd->add_option("--out", out_path, "Model JSON")->required();
  duq::pipeline::FitConfig fit_config;
  fit_cmd->add_option("--min-degree", fit_config.adaptive.min_degree,
                      "Lowest polynomial degree to try");
  fit_cmd->add_option("--max-degree", fit_config.adaptive.max_degree,
                      "Highest polynomial degree to try");
  fit_cmd->add_option("--q", fit_config.adaptive.q,
                      "Hyperbolic truncation exponent in (0, 1]");
  fit_cmd->add_option("--max-interaction", fit_config.adaptive.max_interaction,
                      "Maximum number of interacting inputs per term");
  fit_cmd->add_option("--loo-target", fit_config.adaptive.loo_target,
                      "Stop once the leave-one-out error drops below this");
  fit_cmd->add_option("--max-terms", fit_config.adaptive.max_terms,
                      "Cap on selected terms (0 = automatic)");
  fit_cmd->add_option("--variance-keep", fit_config.variance_keep,
                      "Fraction of input variance the whitener keeps");

  auto* predict_cmd = app.add_subcommand(
      "predict", "Evaluate a saved surrogate over scenarios");
  predict_cmd->add_option("--model", model_path, "Model JSON")->required();
  predict_cmd->add_option("--scenarios", scenarios_path, "Scenario CSV")
      ->required();
  predict_cmd->add_option("--out", out_path, "Costs CSV")->required();

  auto* stats_cmd =
      app.add_subcommand("stats", "Summarize a costs CSV into a report");
  stats_cmd->add_option("--costs", costs_path, "Costs CSV")->required();
  stats_cmd->add_option("--out", out_path, "Report JSON")->required();
  stats_cmd->add_option("--pdf-csv", pdf_path, "Also write the density curve");
  stats_cmd->add_option("--cdf-csv", cdf_path, "Also write the CDF curve");

  auto* compare_cmd =
      app.add_subcommand("compare", "Relative errors between two reports");
  compare_cmd->add_option("--baseline", baseline_path, "Baseline report JSON")
      ->required();
  compare_cmd->add_option("--candidate", candidate_path, "Candidate report JSON")
      ->required();
  compare_cmd->add_option("--out", out_path,
                          "Metrics JSON (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: ParseError: " << one_line(e.what()) << "\n";
    return 2;
  }

  try {
    if (!global.config_path.empty()) {
      const auto base = duq::io::fit_config_from_json(
          duq::io::parse_json_text(
              duq::io::read_text_file(global.config_path),
              global.config_path),
          global.config_path);
      // The config file sets anything not given explicitly on the line.
      auto& a = fit_config.adaptive;
      const auto& b = base.adaptive;
      if (!fit_cmd->count("--min-degree")) a.min_degree = b.min_degree;
      if (!fit_cmd->count("--max-degree")) a.max_degree = b.max_degree;
      if (!fit_cmd->count("--q")) a.q = b.q;
      if (!fit_cmd->count("--max-interaction"))
        a.max_interaction = b.max_interaction;
      if (!fit_cmd->count("--loo-target")) a.loo_target = b.loo_target;
      if (!fit_cmd->count("--max-terms")) a.max_terms = b.max_terms;
      if (!fit_cmd->count("--variance-keep"))
        fit_config.variance_keep = base.variance_keep;
      a.improvement_tol = b.improvement_tol;
      a.patience = b.patience;
      a.candidate_cap = b.candidate_cap;
    }
    if (ptdf_cmd->parsed()) return cmd_ptdf(global, system_path, out_path);
    if (solve_cmd->parsed()) {
      return cmd_solve(global, system_path, scenarios_path, row, out_path,
                       dump_lp_path);
    }
    if (mc_cmd->parsed()) {
      return cmd_mc(global, system_path, scenarios_path, out_path, costs_path,
                    embed_timing);
    }
    if (fit_cmd->parsed()) {
      return cmd_fit(global, system_path, scenarios_path, train, out_path,
                     fit_config);
    }
    if (predict_cmd->parsed()) {
      return cmd_predict(global, model_path, scenarios_path, out_path);
    }
    if (stats_cmd->parsed()) {
      return cmd_stats(global, costs_path, out_path, pdf_path, cdf_path);
    }
    if (compare_cmd->parsed()) {
      return cmd_compare(global, baseline_path, candidate_path, out_path);
    }
  } catch (const duq::Error& e) {
    std::cerr << "error: " << one_line(e.what()) << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
