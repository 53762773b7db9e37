#include "duq/io.hpp"

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <unordered_map>

#include "duq/error.hpp"

namespace duq::io {

namespace {

long line_of_offset(const std::string& text, std::size_t byte) {
  long line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::ParseError,
         source + ":" + std::to_string(line_of_offset(text, e.byte)) + ": " +
             e.what());
  }
}

std::string quote_label(const std::string& s) { return "'" + s + "'"; }

void check_object(const Json& v, const std::string& path) {
  require(v.is_object(), ErrorKind::SchemaError,
          path + " must be an object");
}

void check_array(const Json& v, const std::string& path) {
  require(v.is_array(), ErrorKind::SchemaError, path + " must be an array");
}

// Strict key set: typos surface as errors instead of silently applied
// defaults.
void check_keys(const Json& obj, std::initializer_list<const char*> allowed,
                const std::string& path) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    require(known, ErrorKind::SchemaError,
            path + " has an unknown field " + quote_label(item.key()));
  }
}

const Json& field(const Json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  require(it != obj.end(), ErrorKind::SchemaError,
          path + " is missing the field " + quote_label(key));
  return *it;
}

double as_number(const Json& v, const std::string& path) {
  require(v.is_number(), ErrorKind::SchemaError, path + " must be a number");
  return v.get<double>();
}

int as_int(const Json& v, const std::string& path) {
  require(v.is_number_integer(), ErrorKind::SchemaError,
          path + " must be an integer");
  return v.get<int>();
}

double num(const Json& obj, const char* key, const std::string& path) {
  return as_number(field(obj, key, path), path + "." + key);
}

double num_or(const Json& obj, const char* key, double fallback,
              const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return as_number(*it, path + "." + key);
}

int integer(const Json& obj, const char* key, const std::string& path) {
  return as_int(field(obj, key, path), path + "." + key);
}

int integer_or(const Json& obj, const char* key, int fallback,
               const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  return as_int(*it, path + "." + key);
}

std::vector<double> number_array(const Json& v, const std::string& path) {
  check_array(v, path);
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Json vec_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (long i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd json_vec(const Json& v, const std::string& path) {
  const auto values = number_array(v, path);
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<long>(values.size()));
}

Json mat_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (long r = 0; r < m.rows(); ++r) {
    rows.push_back(vec_json(m.row(r).transpose()));
  }
  return rows;
}

Eigen::MatrixXd json_mat(const Json& v, const std::string& path) {
  check_array(v, path);
  const long rows = static_cast<long>(v.size());
  Eigen::MatrixXd m;
  for (long r = 0; r < rows; ++r) {
    const Eigen::VectorXd row =
        json_vec(v[r], path + "[" + std::to_string(r) + "]");
    if (r == 0) {
      m.resize(rows, row.size());
    } else {
      require(row.size() == m.cols(), ErrorKind::SchemaError,
              path + " rows have inconsistent lengths");
    }
    m.row(r) = row.transpose();
  }
  return m;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_double(const std::string& cell, const std::string& where) {
  const std::string t = trim(cell);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(t.data(), t.data() + t.size(), value);
  require(ec == std::errc() && ptr == t.data() + t.size(),
          ErrorKind::ParseError, where + ": not a number: " + quote_label(cell));
  return value;
}

grid::Line parse_line(const Json& j, const std::string& path) {
  check_object(j, path);
  check_keys(j, {"id", "from", "to", "reactance", "limit", "limit_low",
                 "limit_high"},
             path);
  grid::Line line;
  line.id = integer(j, "id", path);
  line.from_bus = integer(j, "from", path);
  line.to_bus = integer(j, "to", path);
  line.reactance = num(j, "reactance", path);
  if (j.contains("limit")) {
    require(!j.contains("limit_low") && !j.contains("limit_high"),
            ErrorKind::SchemaError,
            path + " mixes 'limit' with 'limit_low'/'limit_high'");
    const double cap = num(j, "limit", path);
    line.limit_low = -cap;
    line.limit_high = cap;
  } else {
    line.limit_low = num(j, "limit_low", path);
    line.limit_high = num(j, "limit_high", path);
  }
  return line;
}

grid::Generator parse_generator(const Json& j, const std::string& path) {
  check_object(j, path);
  check_keys(j,
             {"id", "bus", "cost", "p_min", "p_max", "ramp_up", "ramp_down",
              "ramp_startup", "ramp_shutdown", "on_initial", "p_initial"},
             path);
  grid::Generator g;
  g.id = integer(j, "id", path);
  g.bus = integer(j, "bus", path);
  const Json& cost = field(j, "cost", path);
  check_array(cost, path + ".cost");
  for (std::size_t k = 0; k < cost.size(); ++k) {
    const std::string cpath = path + ".cost[" + std::to_string(k) + "]";
    require(cost[k].is_array() && cost[k].size() == 2, ErrorKind::SchemaError,
            cpath + " must be a [marginal_cost, length] pair");
    g.cost.push_back({as_number(cost[k][0], cpath + "[0]"),
                      as_number(cost[k][1], cpath + "[1]")});
  }
  g.p_min = num_or(j, "p_min", 0.0, path);
  g.p_max = num(j, "p_max", path);
  g.ramp_up = num(j, "ramp_up", path);
  g.ramp_down = num(j, "ramp_down", path);
  g.ramp_startup = num(j, "ramp_startup", path);
  g.ramp_shutdown = num(j, "ramp_shutdown", path);
  g.on_initial = integer_or(j, "on_initial", 0, path);
  g.p_initial = num_or(j, "p_initial", -1.0, path);
  return g;
}

void parse_uc_schedule(const Json& j, std::vector<grid::Generator>& gens,
                       const std::string& path) {
  check_object(j, path);
  for (const auto& item : j.items()) {
    bool known = false;
    for (const auto& g : gens) {
      if (std::to_string(g.id) == item.key()) {
        known = true;
        break;
      }
    }
    require(known, ErrorKind::SchemaError,
            path + " names a generator " + quote_label(item.key()) +
                " that does not exist");
  }
  for (auto& g : gens) {
    const std::string key = std::to_string(g.id);
    const std::string gpath = path + "." + key;
    const auto it = j.find(key);
    require(it != j.end(), ErrorKind::SchemaError,
            path + " has no entry for generator " + key);
    check_array(*it, gpath);
    for (std::size_t t = 0; t < it->size(); ++t) {
      g.on.push_back(
          as_int((*it)[t], gpath + "[" + std::to_string(t) + "]"));
    }
  }
}

gas::GasSystem parse_gas(const Json& j, const std::string& path) {
  check_object(j, path);
  check_keys(j,
             {"nodes", "wells", "pipelines", "compressors", "gas_loads",
              "gen_coupling"},
             path);
  gas::GasSystem g;

  const Json& nodes = field(j, "nodes", path);
  check_array(nodes, path + ".nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string p = path + ".nodes[" + std::to_string(i) + "]";
    check_object(nodes[i], p);
    check_keys(nodes[i], {"id", "pressure_min", "pressure_max"}, p);
    g.nodes.push_back({integer(nodes[i], "id", p),
                       num(nodes[i], "pressure_min", p),
                       num(nodes[i], "pressure_max", p)});
  }
  if (j.contains("wells")) {
    const Json& wells = j["wells"];
    check_array(wells, path + ".wells");
    for (std::size_t i = 0; i < wells.size(); ++i) {
      const std::string p = path + ".wells[" + std::to_string(i) + "]";
      check_object(wells[i], p);
      check_keys(wells[i], {"id", "node", "cost", "g_min", "g_max"}, p);
      g.wells.push_back({integer(wells[i], "id", p),
                         integer(wells[i], "node", p),
                         num(wells[i], "cost", p),
                         num_or(wells[i], "g_min", 0.0, p),
                         num(wells[i], "g_max", p)});
    }
  }
  if (j.contains("pipelines")) {
    const Json& pipes = j["pipelines"];
    check_array(pipes, path + ".pipelines");
    for (std::size_t i = 0; i < pipes.size(); ++i) {
      const std::string p = path + ".pipelines[" + std::to_string(i) + "]";
      check_object(pipes[i], p);
      check_keys(pipes[i], {"id", "from", "to", "weymouth", "capacity"}, p);
      g.pipelines.push_back({integer(pipes[i], "id", p),
                             integer(pipes[i], "from", p),
                             integer(pipes[i], "to", p),
                             num(pipes[i], "weymouth", p),
                             num(pipes[i], "capacity", p)});
    }
  }
  if (j.contains("compressors")) {
    const Json& comps = j["compressors"];
    check_array(comps, path + ".compressors");
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string p = path + ".compressors[" + std::to_string(i) + "]";
      check_object(comps[i], p);
      check_keys(comps[i], {"id", "from", "to", "ratio", "capacity"}, p);
      g.compressors.push_back({integer(comps[i], "id", p),
                               integer(comps[i], "from", p),
                               integer(comps[i], "to", p),
                               num(comps[i], "ratio", p),
                               num(comps[i], "capacity", p)});
    }
  }
  if (j.contains("gas_loads")) {
    const Json& loads = j["gas_loads"];
    check_array(loads, path + ".gas_loads");
    for (std::size_t i = 0; i < loads.size(); ++i) {
      const std::string p = path + ".gas_loads[" + std::to_string(i) + "]";
      check_object(loads[i], p);
      check_keys(loads[i], {"id", "node", "demand"}, p);
      g.loads.push_back({integer(loads[i], "id", p),
                         integer(loads[i], "node", p),
                         number_array(field(loads[i], "demand", p),
                                      p + ".demand")});
    }
  }
  if (j.contains("gen_coupling")) {
    const Json& coup = j["gen_coupling"];
    check_array(coup, path + ".gen_coupling");
    for (std::size_t i = 0; i < coup.size(); ++i) {
      const std::string p = path + ".gen_coupling[" + std::to_string(i) + "]";
      check_object(coup[i], p);
      check_keys(coup[i], {"generator", "node", "theta"}, p);
      g.couplings.push_back({integer(coup[i], "generator", p),
                             integer(coup[i], "node", p),
                             num(coup[i], "theta", p)});
    }
  }
  return g;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::IoError, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  require(!in.bad(), ErrorKind::IoError, "cannot read " + path);
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::IoError, "cannot open " + path +
                                              " for writing");
  out << text;
  out.flush();
  require(out.good(), ErrorKind::IoError, "cannot write " + path);
}

Json parse_json_text(const std::string& text, const std::string& source) {
  return parse_json(text, source);
}

Json provenance_json(const RunProvenance& run) {
  Json j = Json::object();
  j["tool"] = "duq";
  j["version"] = kToolVersion;
  j["command"] = run.command;
  j["seed"] = run.seed;
  j["threads"] = run.threads;
  j["config"] = run.config;
  return j;
}

SystemBundle parse_system(const std::string& text, const std::string& source) {
  const Json j = parse_json(text, source);
  check_object(j, source);
  check_keys(j,
             {"name", "slack_bus", "buses", "lines", "generators",
              "uc_schedule", "loads", "wind_farms", "gas"},
             source);

  SystemBundle bundle;
  auto& s = bundle.electric;

  const Json& buses = field(j, "buses", source);
  check_array(buses, "buses");
  for (std::size_t i = 0; i < buses.size(); ++i) {
    s.buses.push_back(as_int(buses[i], "buses[" + std::to_string(i) + "]"));
  }
  s.slack_bus = integer(j, "slack_bus", source);

  if (j.contains("lines")) {
    const Json& lines = j["lines"];
    check_array(lines, "lines");
    for (std::size_t i = 0; i < lines.size(); ++i) {
      s.lines.push_back(
          parse_line(lines[i], "lines[" + std::to_string(i) + "]"));
    }
  }

  const Json& gens = field(j, "generators", source);
  check_array(gens, "generators");
  for (std::size_t i = 0; i < gens.size(); ++i) {
    s.generators.push_back(
        parse_generator(gens[i], "generators[" + std::to_string(i) + "]"));
  }
  parse_uc_schedule(field(j, "uc_schedule", source), s.generators,
                    "uc_schedule");

  const Json& loads = field(j, "loads", source);
  check_array(loads, "loads");
  for (std::size_t i = 0; i < loads.size(); ++i) {
    const std::string p = "loads[" + std::to_string(i) + "]";
    check_object(loads[i], p);
    check_keys(loads[i], {"id", "bus", "demand"}, p);
    s.loads.push_back({integer(loads[i], "id", p),
                       integer(loads[i], "bus", p),
                       number_array(field(loads[i], "demand", p),
                                    p + ".demand")});
  }

  if (j.contains("wind_farms")) {
    const Json& farms = j["wind_farms"];
    check_array(farms, "wind_farms");
    for (std::size_t i = 0; i < farms.size(); ++i) {
      const std::string p = "wind_farms[" + std::to_string(i) + "]";
      check_object(farms[i], p);
      check_keys(farms[i], {"id", "bus", "column"}, p);
      s.wind_farms.push_back({integer(farms[i], "id", p),
                              integer(farms[i], "bus", p),
                              integer(farms[i], "column", p)});
    }
  }

  s.validate();

  if (j.contains("gas")) {
    bundle.gas = parse_gas(j["gas"], "gas");
    bundle.gas.validate(s);
  }
  return bundle;
}

SystemBundle load_system(const std::string& path) {
  return parse_system(read_text_file(path), path);
}

Json system_to_json(const SystemBundle& bundle) {
  const auto& s = bundle.electric;
  Json j = Json::object();
  j["slack_bus"] = s.slack_bus;
  j["buses"] = s.buses;

  Json lines = Json::array();
  for (const auto& l : s.lines) {
    Json e = Json::object();
    e["id"] = l.id;
    e["from"] = l.from_bus;
    e["to"] = l.to_bus;
    e["reactance"] = l.reactance;
    e["limit_low"] = l.limit_low;
    e["limit_high"] = l.limit_high;
    lines.push_back(e);
  }
  j["lines"] = lines;

  Json gens = Json::array();
  Json schedule = Json::object();
  for (const auto& g : s.generators) {
    Json e = Json::object();
    e["id"] = g.id;
    e["bus"] = g.bus;
    Json cost = Json::array();
    for (const auto& seg : g.cost) {
      cost.push_back(Json::array({seg.marginal_cost, seg.length}));
    }
    e["cost"] = cost;
    e["p_min"] = g.p_min;
    e["p_max"] = g.p_max;
    e["ramp_up"] = g.ramp_up;
    e["ramp_down"] = g.ramp_down;
    e["ramp_startup"] = g.ramp_startup;
    e["ramp_shutdown"] = g.ramp_shutdown;
    e["on_initial"] = g.on_initial;
    if (g.p_initial >= 0.0) e["p_initial"] = g.p_initial;
    gens.push_back(e);
    schedule[std::to_string(g.id)] = g.on;
  }
  j["generators"] = gens;
  j["uc_schedule"] = schedule;

  Json loads = Json::array();
  for (const auto& d : s.loads) {
    Json e = Json::object();
    e["id"] = d.id;
    e["bus"] = d.bus;
    e["demand"] = d.demand;
    loads.push_back(e);
  }
  j["loads"] = loads;

  Json farms = Json::array();
  for (const auto& w : s.wind_farms) {
    Json e = Json::object();
    e["id"] = w.id;
    e["bus"] = w.bus;
    e["column"] = w.column;
    farms.push_back(e);
  }
  j["wind_farms"] = farms;

  if (!bundle.gas.empty()) {
    const auto& g = bundle.gas;
    Json jg = Json::object();
    Json nodes = Json::array();
    for (const auto& n : g.nodes) {
      Json e = Json::object();
      e["id"] = n.id;
      e["pressure_min"] = n.pressure_min;
      e["pressure_max"] = n.pressure_max;
      nodes.push_back(e);
    }
    jg["nodes"] = nodes;
    Json wells = Json::array();
    for (const auto& w : g.wells) {
      Json e = Json::object();
      e["id"] = w.id;
      e["node"] = w.node;
      e["cost"] = w.cost;
      e["g_min"] = w.g_min;
      e["g_max"] = w.g_max;
      wells.push_back(e);
    }
    jg["wells"] = wells;
    Json pipes = Json::array();
    for (const auto& p : g.pipelines) {
      Json e = Json::object();
      e["id"] = p.id;
      e["from"] = p.from_node;
      e["to"] = p.to_node;
      e["weymouth"] = p.weymouth;
      e["capacity"] = p.capacity;
      pipes.push_back(e);
    }
    jg["pipelines"] = pipes;
    Json comps = Json::array();
    for (const auto& c : g.compressors) {
      Json e = Json::object();
      e["id"] = c.id;
      e["from"] = c.from_node;
      e["to"] = c.to_node;
      e["ratio"] = c.ratio;
      e["capacity"] = c.capacity;
      comps.push_back(e);
    }
    jg["compressors"] = comps;
    Json gloads = Json::array();
    for (const auto& d : g.loads) {
      Json e = Json::object();
      e["id"] = d.id;
      e["node"] = d.node;
      e["demand"] = d.demand;
      gloads.push_back(e);
    }
    jg["gas_loads"] = gloads;
    Json coup = Json::array();
    for (const auto& c : g.couplings) {
      Json e = Json::object();
      e["generator"] = c.generator;
      e["node"] = c.node;
      e["theta"] = c.theta;
      coup.push_back(e);
    }
    jg["gen_coupling"] = coup;
    j["gas"] = jg;
  }
  return j;
}

void save_system(const SystemBundle& bundle, const std::string& path) {
  write_text_file(path, system_to_json(bundle).dump(2) + "\n");
}

std::vector<std::string> scenario_labels(const grid::PowerSystem& system) {
  const int T = system.periods();
  std::vector<std::string> labels(system.wind_farms.size() * T);
  for (const auto& farm : system.wind_farms) {
    for (int t = 0; t < T; ++t) {
      labels[farm.column * T + t] =
          "w" + std::to_string(farm.id) + "_t" + std::to_string(t + 1);
    }
  }
  return labels;
}

ScenarioMatrix parse_scenarios(const std::string& text,
                               const std::vector<std::string>& expected_labels,
                               const std::string& source) {
  require(!expected_labels.empty(), ErrorKind::MalformedProblem,
          "the system has no wind farms, so there is nothing to load");

  std::unordered_map<std::string, long> canonical;
  for (std::size_t i = 0; i < expected_labels.size(); ++i) {
    canonical[expected_labels[i]] = static_cast<long>(i);
  }

  std::vector<long> header_map;  // csv column -> canonical column
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<long> row_lines;

  std::stringstream stream(text);
  std::string raw;
  long line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    const std::string where = source + ":" + std::to_string(line_no);

    if (header.empty()) {
      header = cells;
      std::set<std::string> seen;
      for (const auto& label : header) {
        const auto it = canonical.find(label);
        require(it != canonical.end(), ErrorKind::SchemaError,
                where + ": unknown column " + quote_label(label) +
                    "; expected w{farm}_t{hour} labels");
        require(seen.insert(label).second, ErrorKind::SchemaError,
                where + ": duplicate column " + quote_label(label));
        header_map.push_back(it->second);
      }
      for (const auto& label : expected_labels) {
        require(seen.count(label) == 1, ErrorKind::SchemaError,
                where + ": missing column " + quote_label(label));
      }
      continue;
    }

    require(cells.size() == header.size(), ErrorKind::ParseError,
            where + ": expected " + std::to_string(header.size()) +
                " fields but found " + std::to_string(cells.size()));
    std::vector<double> row(header.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string cell_where =
          where + ", column " + quote_label(header[c]);
      const double value = parse_double(cells[c], cell_where);
      require(std::isfinite(value), ErrorKind::InvariantViolation,
              cell_where + ": wind power must be finite");
      require(value >= 0.0, ErrorKind::InvariantViolation,
              cell_where + ": negative wind power " + cells[c]);
      row[header_map[c]] = value;
    }
    rows.push_back(std::move(row));
    row_lines.push_back(line_no);
  }

  require(!header.empty(), ErrorKind::SchemaError,
          source + ": no header row found");
  require(!rows.empty(), ErrorKind::InvariantViolation,
          source + ": no scenario rows after the header");

  ScenarioMatrix out;
  out.labels = expected_labels;
  out.values.resize(static_cast<long>(rows.size()),
                    static_cast<long>(expected_labels.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      out.values(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
    }
  }
  return out;
}

ScenarioMatrix load_scenarios(const std::string& path,
                              const grid::PowerSystem& system) {
  return parse_scenarios(read_text_file(path), scenario_labels(system), path);
}

ScenarioMatrix load_scenarios(const std::string& path,
                              const std::vector<std::string>& expected_labels) {
  return parse_scenarios(read_text_file(path), expected_labels, path);
}

void save_scenarios(const ScenarioMatrix& scenarios, const std::string& path,
                    const RunProvenance& run) {
  std::stringstream out;
  out << "# provenance: " << provenance_json(run).dump() << "\n";
  for (std::size_t c = 0; c < scenarios.labels.size(); ++c) {
    out << (c ? "," : "") << scenarios.labels[c];
  }
  out << "\n";
  out.precision(17);
  for (long r = 0; r < scenarios.values.rows(); ++r) {
    for (long c = 0; c < scenarios.values.cols(); ++c) {
      out << (c ? "," : "") << scenarios.values(r, c);
    }
    out << "\n";
  }
  write_text_file(path, out.str());
}

Json fit_config_to_json(const pipeline::FitConfig& config) {
  Json j = Json::object();
  j["min_degree"] = config.adaptive.min_degree;
  j["max_degree"] = config.adaptive.max_degree;
  j["q"] = config.adaptive.q;
  j["max_interaction"] = config.adaptive.max_interaction;
  j["loo_target"] = config.adaptive.loo_target;
  j["max_terms"] = config.adaptive.max_terms;
  j["improvement_tol"] = config.adaptive.improvement_tol;
  j["patience"] = config.adaptive.patience;
  j["candidate_cap"] = config.adaptive.candidate_cap;
  j["variance_keep"] = config.variance_keep;
  return j;
}

pipeline::FitConfig fit_config_from_json(const Json& j,
                                         const std::string& path) {
  check_object(j, path);
  check_keys(j,
             {"min_degree", "max_degree", "q", "max_interaction",
              "loo_target", "max_terms", "improvement_tol", "patience",
              "candidate_cap", "variance_keep"},
             path);
  pipeline::FitConfig config;
  config.adaptive.min_degree =
      integer_or(j, "min_degree", config.adaptive.min_degree, path);
  config.adaptive.max_degree =
      integer_or(j, "max_degree", config.adaptive.max_degree, path);
  config.adaptive.q = num_or(j, "q", config.adaptive.q, path);
  config.adaptive.max_interaction =
      integer_or(j, "max_interaction", config.adaptive.max_interaction, path);
  config.adaptive.loo_target =
      num_or(j, "loo_target", config.adaptive.loo_target, path);
  config.adaptive.max_terms =
      integer_or(j, "max_terms", config.adaptive.max_terms, path);
  config.adaptive.improvement_tol =
      num_or(j, "improvement_tol", config.adaptive.improvement_tol, path);
  config.adaptive.patience =
      integer_or(j, "patience", config.adaptive.patience, path);
  if (j.contains("candidate_cap")) {
    config.adaptive.candidate_cap = j["candidate_cap"].get<long>();
  }
  config.variance_keep = num_or(j, "variance_keep", config.variance_keep, path);
  return config;
}

Json model_to_json(const pipeline::SurrogateModel& model) {
  model.validate();
  Json j = Json::object();
  j["format"] = "duq-model";
  j["format_version"] = 1;

  Json prov = Json::object();
  prov["tool"] = "duq";
  prov["version"] = kToolVersion;
  prov["seed"] = model.provenance.seed;
  prov["training_size"] = model.provenance.training_size;
  prov["config"] = fit_config_to_json(model.provenance.config);
  prov["input_labels"] = model.provenance.input_labels;
  j["provenance"] = prov;

  Json w = Json::object();
  w["mean"] = vec_json(model.whitener.mean);
  w["eigenvectors"] = mat_json(model.whitener.eigenvectors);
  w["eigenvalues"] = vec_json(model.whitener.eigenvalues);
  w["retained"] = model.whitener.retained;
  w["variance_fraction"] = model.whitener.variance_fraction;
  j["whitener"] = w;

  Json bases = Json::array();
  for (const auto& basis : model.bases) {
    Json b = Json::object();
    b["coeffs"] = basis.coeffs;
    b["moments"] = basis.moments;
    b["condition"] = basis.condition;
    bases.push_back(b);
  }
  j["bases"] = bases;

  Json e = Json::object();
  e["degree"] = model.expansion.degree;
  e["active"] = model.expansion.active;
  e["active_indices"] = model.expansion.active_indices;
  e["coeffs"] = vec_json(model.expansion.coeffs);
  e["loo"] = model.expansion.loo;
  e["rel_error"] = model.expansion.rel_error;
  e["loo_history"] = model.expansion.loo_history;
  e["residual_norms"] = model.expansion.residual_norms;
  e["notes"] = model.expansion.notes;
  j["expansion"] = e;

  j["norms"] = vec_json(model.norms);
  return j;
}

pipeline::SurrogateModel model_from_json(const Json& j,
                                         const std::string& source) {
  check_object(j, source);
  check_keys(j,
             {"format", "format_version", "provenance", "whitener", "bases",
              "expansion", "norms"},
             source);
  require(field(j, "format", source) == "duq-model", ErrorKind::SchemaError,
          source + " is not a duq-model file");
  require(integer(j, "format_version", source) == 1, ErrorKind::SchemaError,
          source + " uses an unsupported model format version");

  pipeline::SurrogateModel model;

  const Json& prov = field(j, "provenance", source);
  check_object(prov, "provenance");
  model.provenance.seed = field(prov, "seed", "provenance").get<std::uint64_t>();
  model.provenance.training_size = integer(prov, "training_size", "provenance");
  model.provenance.config =
      fit_config_from_json(field(prov, "config", "provenance"),
                           "provenance.config");
  if (prov.contains("input_labels")) {
    model.provenance.input_labels =
        prov["input_labels"].get<std::vector<std::string>>();
  }

  const Json& w = field(j, "whitener", source);
  check_object(w, "whitener");
  model.whitener.mean = json_vec(field(w, "mean", "whitener"), "whitener.mean");
  model.whitener.eigenvectors =
      json_mat(field(w, "eigenvectors", "whitener"), "whitener.eigenvectors");
  model.whitener.eigenvalues = json_vec(field(w, "eigenvalues", "whitener"),
                                        "whitener.eigenvalues");
  model.whitener.retained = integer(w, "retained", "whitener");
  model.whitener.variance_fraction = num(w, "variance_fraction", "whitener");

  const Json& bases = field(j, "bases", source);
  check_array(bases, "bases");
  for (std::size_t i = 0; i < bases.size(); ++i) {
    const std::string p = "bases[" + std::to_string(i) + "]";
    check_object(bases[i], p);
    orthopoly::UnivariateBasis basis;
    for (const auto& row : field(bases[i], "coeffs", p)) {
      basis.coeffs.push_back(number_array(row, p + ".coeffs"));
    }
    basis.moments = number_array(field(bases[i], "moments", p), p + ".moments");
    basis.condition =
        number_array(field(bases[i], "condition", p), p + ".condition");
    model.bases.push_back(std::move(basis));
  }

  const Json& e = field(j, "expansion", source);
  check_object(e, "expansion");
  model.expansion.degree = integer(e, "degree", "expansion");
  model.expansion.active = field(e, "active", "expansion").get<std::vector<int>>();
  for (const auto& alpha : field(e, "active_indices", "expansion")) {
    model.expansion.active_indices.push_back(alpha.get<std::vector<int>>());
  }
  model.expansion.coeffs =
      json_vec(field(e, "coeffs", "expansion"), "expansion.coeffs");
  model.expansion.loo = num(e, "loo", "expansion");
  model.expansion.rel_error = num(e, "rel_error", "expansion");
  model.expansion.loo_history =
      number_array(field(e, "loo_history", "expansion"), "expansion.loo_history");
  model.expansion.residual_norms =
      number_array(field(e, "residual_norms", "expansion"),
                   "expansion.residual_norms");
  model.expansion.notes =
      field(e, "notes", "expansion").get<std::vector<std::string>>();

  model.norms = json_vec(field(j, "norms", source), "norms");
  model.validate();
  return model;
}

void save_model(const pipeline::SurrogateModel& model,
                const std::string& path) {
  write_text_file(path, model_to_json(model).dump(2) + "\n");
}

pipeline::SurrogateModel load_model(const std::string& path) {
  return model_from_json(parse_json(read_text_file(path), path), path);
}

Json report_to_json(const pipeline::UqReport& report,
                    const RunProvenance& run) {
  Json j = Json::object();
  j["format"] = "duq-report";
  j["provenance"] = provenance_json(run);
  j["mean"] = report.mean;
  j["std"] = report.stddev;
  j["n"] = report.n;
  j["wall_seconds"] = report.wall_seconds;
  j["warnings"] = report.warnings;
  Json pdf = Json::object();
  pdf["grid"] = vec_json(report.pdf.grid);
  pdf["density"] = vec_json(report.pdf.values);
  j["pdf"] = pdf;
  Json cdf = Json::object();
  cdf["grid"] = vec_json(report.cdf.grid);
  cdf["prob"] = vec_json(report.cdf.values);
  j["cdf"] = cdf;
  return j;
}

pipeline::UqReport report_from_json(const Json& j, const std::string& source) {
  check_object(j, source);
  require(field(j, "format", source) == "duq-report", ErrorKind::SchemaError,
          source + " is not a duq-report file");
  pipeline::UqReport report;
  report.mean = num(j, "mean", source);
  report.stddev = num(j, "std", source);
  report.n = integer(j, "n", source);
  report.wall_seconds = num(j, "wall_seconds", source);
  if (j.contains("warnings")) {
    report.warnings = j["warnings"].get<std::vector<std::string>>();
  }
  const Json& pdf = field(j, "pdf", source);
  report.pdf.grid = json_vec(field(pdf, "grid", "pdf"), "pdf.grid");
  report.pdf.values = json_vec(field(pdf, "density", "pdf"), "pdf.density");
  const Json& cdf = field(j, "cdf", source);
  report.cdf.grid = json_vec(field(cdf, "grid", "cdf"), "cdf.grid");
  report.cdf.values = json_vec(field(cdf, "prob", "cdf"), "cdf.prob");
  require(report.pdf.grid.size() == report.pdf.values.size(),
          ErrorKind::SchemaError, source + ": pdf grid/density size mismatch");
  require(report.cdf.grid.size() == report.cdf.values.size(),
          ErrorKind::SchemaError, source + ": cdf grid/prob size mismatch");
  return report;
}

void save_report(const pipeline::UqReport& report, const RunProvenance& run,
                 const std::string& path) {
  write_text_file(path, report_to_json(report, run).dump(2) + "\n");
}

pipeline::UqReport load_report(const std::string& path) {
  return report_from_json(parse_json(read_text_file(path), path), path);
}

void save_costs(const Eigen::VectorXd& costs, const RunProvenance& run,
                const std::string& path) {
  std::stringstream out;
  out << "# provenance: " << provenance_json(run).dump() << "\n";
  out << "cost\n";
  out.precision(17);
  for (long i = 0; i < costs.size(); ++i) out << costs(i) << "\n";
  write_text_file(path, out.str());
}

Eigen::VectorXd load_costs(const std::string& path) {
  const std::string text = read_text_file(path);
  std::stringstream stream(text);
  std::string raw;
  long line_no = 0;
  bool header_seen = false;
  std::vector<double> values;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const std::string where = path + ":" + std::to_string(line_no);
    if (!header_seen) {
      require(line == "cost", ErrorKind::SchemaError,
              where + ": expected the header 'cost', found " + quote_label(line));
      header_seen = true;
      continue;
    }
    const double v = parse_double(line, where);
    require(std::isfinite(v), ErrorKind::InvariantViolation,
            where + ": cost must be finite");
    values.push_back(v);
  }
  require(header_seen, ErrorKind::SchemaError, path + ": no header row found");
  require(!values.empty(), ErrorKind::InsufficientData,
          path + ": no cost rows after the header");
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<long>(values.size()));
}

void save_curve(const pipeline::Curve& curve, const char* value_header,
                const RunProvenance& run, const std::string& path) {
  std::stringstream out;
  out << "# provenance: " << provenance_json(run).dump() << "\n";
  out << "grid," << value_header << "\n";
  out.precision(17);
  for (long i = 0; i < curve.grid.size(); ++i) {
    out << curve.grid(i) << "," << curve.values(i) << "\n";
  }
  write_text_file(path, out.str());
}

}  // namespace duq::io
