#ifndef DUQ_IO_HPP
#define DUQ_IO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "duq/gas.hpp"
#include "duq/grid.hpp"
#include "duq/pipeline.hpp"

#include "json.hpp"

namespace duq::io {

inline constexpr const char* kToolVersion = "0.1.0";

using Json = nlohmann::ordered_json;

// Stamp written into every artifact the tool produces.
struct RunProvenance {
  std::string command;
  std::uint64_t seed = 0;
  int threads = 0;
  Json config = Json::object();  // effective parameters, free form
};

Json provenance_json(const RunProvenance& run);

// JSON text -> document; syntax failures become ParseError with the line.
Json parse_json_text(const std::string& text, const std::string& source);

struct SystemBundle {
  grid::PowerSystem electric;
  gas::GasSystem gas;  // empty() when the file had no gas block
};

// Parse errors carry the line number; schema errors carry the field path;
// invariant violations come from the model types' own validation.
SystemBundle parse_system(const std::string& text,
                          const std::string& source = "<string>");
SystemBundle load_system(const std::string& path);
Json system_to_json(const SystemBundle& bundle);
void save_system(const SystemBundle& bundle, const std::string& path);

struct ScenarioMatrix {
  Eigen::MatrixXd values;           // rows = scenarios, farm-block-major cols
  std::vector<std::string> labels;  // canonical: w{farm}_t{hour}
};

// The canonical column order the dispatch code expects: farm blocks by
// `column`, hours 1..T inside each block.
std::vector<std::string> scenario_labels(const grid::PowerSystem& system);

// CSV with a header of w{farm}_t{hour} labels in any order; columns are
// mapped back to canonical positions. `#` lines are skipped. Values must be
// finite and nonnegative; violations name the line and column label.
ScenarioMatrix parse_scenarios(const std::string& text,
                               const std::vector<std::string>& expected_labels,
                               const std::string& source = "<string>");
ScenarioMatrix load_scenarios(const std::string& path,
                              const grid::PowerSystem& system);
ScenarioMatrix load_scenarios(const std::string& path,
                              const std::vector<std::string>& expected_labels);
void save_scenarios(const ScenarioMatrix& scenarios, const std::string& path,
                    const RunProvenance& run);

// Flat key set shared by `--config` files and the provenance echo.
Json fit_config_to_json(const pipeline::FitConfig& config);
pipeline::FitConfig fit_config_from_json(const Json& j,
                                         const std::string& path);

Json model_to_json(const pipeline::SurrogateModel& model);
pipeline::SurrogateModel model_from_json(const Json& j,
                                         const std::string& source);
void save_model(const pipeline::SurrogateModel& model, const std::string& path);
pipeline::SurrogateModel load_model(const std::string& path);

// wall_seconds is written as given; pass 0.0 (the default upstream) to keep
// rerun artifacts bit-identical.
Json report_to_json(const pipeline::UqReport& report, const RunProvenance& run);
pipeline::UqReport report_from_json(const Json& j, const std::string& source);
void save_report(const pipeline::UqReport& report, const RunProvenance& run,
                 const std::string& path);
pipeline::UqReport load_report(const std::string& path);

// One `cost` column; `#` provenance comment on top.
void save_costs(const Eigen::VectorXd& costs, const RunProvenance& run,
                const std::string& path);
Eigen::VectorXd load_costs(const std::string& path);

// Two columns, `grid` plus the given value header.
void save_curve(const pipeline::Curve& curve, const char* value_header,
                const RunProvenance& run, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace duq::io

#endif
