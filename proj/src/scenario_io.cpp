#include "edgesim/scenario_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "edgesim/numeric.hpp"

namespace edgesim {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

double parse_double(const std::string& s, const std::string& path, int line,
                    const std::string& column) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(path, line, "column '" + column + "': not a number: '" + s + "'");
  }
}

std::int64_t parse_int(const std::string& s, const std::string& path, int line,
                       const std::string& column) {
  try {
    size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(path, line, "column '" + column + "': not an integer: '" + s + "'");
  }
}

bool parse_bool(const std::string& s, const std::string& path, int line, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(path, line, "key '" + key + "': expected a boolean, got '" + s + "'");
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

ConfigError::ConfigError(const std::string& path, int line, const std::string& message)
    : std::runtime_error(path + ":" + std::to_string(line) + ": " + message), line_(line) {}

std::vector<ModelConfig> load_calibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");

  static const std::vector<std::string> kColumns = {
      "resolution", "map50",    "map5095",    "ops_m", "params_k", "p_soc_mw",
      "p_mem_mw",   "p_cam_mw", "p_total_mw", "fps",   "energy_mj"};

  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ConfigError(path, 1, "empty file, expected header");
  ++lineno;
  const auto header = split_csv(trim(line));
  if (header != kColumns) {
    throw ConfigError(path, lineno, "bad header, expected: " +
                                        [&] {
                                          std::string h;
                                          for (const auto& c : kColumns) {
                                            if (!h.empty()) h += ',';
                                            h += c;
                                          }
                                          return h;
                                        }());
  }

  std::vector<ModelConfig> rows;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto f = split_csv(t);
    if (f.size() != kColumns.size()) {
      throw ConfigError(path, lineno, "expected " + std::to_string(kColumns.size()) +
                                          " columns, got " + std::to_string(f.size()));
    }
    ModelConfig mc;
    mc.input_resolution = static_cast<int>(parse_int(f[0], path, lineno, "resolution"));
    mc.map50 = parse_double(f[1], path, lineno, "map50");
    mc.map5095 = parse_double(f[2], path, lineno, "map5095");
    mc.ops_m = parse_double(f[3], path, lineno, "ops_m");
    mc.params_k = parse_double(f[4], path, lineno, "params_k");
    mc.p_soc_mw = parse_double(f[5], path, lineno, "p_soc_mw");
    mc.p_mem_mw = parse_double(f[6], path, lineno, "p_mem_mw");
    mc.p_cam_mw = parse_double(f[7], path, lineno, "p_cam_mw");
    mc.p_total_mw = parse_double(f[8], path, lineno, "p_total_mw");
    mc.fps = parse_double(f[9], path, lineno, "fps");
    mc.energy_mj = parse_double(f[10], path, lineno, "energy_mj");
    try {
      mc.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path, lineno,
                        "row for resolution " + f[0] + " rejected: " + e.what());
    }
    rows.push_back(mc);
  }
  if (rows.empty()) throw ConfigError(path, lineno, "no data rows");
  return rows;
}

ModelConfig config_for_resolution(const std::vector<ModelConfig>& table, int resolution) {
  for (const auto& mc : table) {
    if (mc.input_resolution == resolution) return mc;
  }
  throw std::invalid_argument("no calibration row for resolution " + std::to_string(resolution));
}

SensorSuite load_sensor_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ConfigError(path, 1, "empty file, expected header");
  ++lineno;
  if (split_csv(trim(line)) !=
      std::vector<std::string>{"name", "readout_energy_mj", "readout_duration_s", "peak_power_mw"}) {
    throw ConfigError(path, lineno,
                      "bad header, expected: name,readout_energy_mj,readout_duration_s,peak_power_mw");
  }
  SensorSuite suite;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto f = split_csv(t);
    if (f.size() != 4) throw ConfigError(path, lineno, "expected 4 columns");
    SensorSpec s;
    s.name = f[0];
    s.readout_energy_mj = parse_double(f[1], path, lineno, "readout_energy_mj");
    s.readout_duration_s = parse_double(f[2], path, lineno, "readout_duration_s");
    s.peak_power_mw = parse_double(f[3], path, lineno, "peak_power_mw");
    suite.sensors.push_back(s);
  }
  try {
    suite.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, lineno, e.what());
  }
  return suite;
}

OccupancyTrace load_occupancy_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) throw ConfigError(path, 1, "empty file, expected header");
  ++lineno;
  if (split_csv(trim(line)) != std::vector<std::string>{"t_s", "count"}) {
    throw ConfigError(path, lineno, "bad header, expected: t_s,count");
  }
  OccupancyTrace trace;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto f = split_csv(t);
    if (f.size() != 2) throw ConfigError(path, lineno, "expected 2 columns");
    OccupancyTrace::Sample s;
    s.t_s = parse_double(f[0], path, lineno, "t_s");
    s.count = static_cast<int>(parse_int(f[1], path, lineno, "count"));
    trace.timeline.push_back(s);
  }
  try {
    trace.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, lineno, e.what());
  }
  return trace;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "cannot open file");
  const std::filesystem::path base = std::filesystem::path(path).parent_path();

  Scenario sc;
  std::string suite_path;
  bool need_model = true;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // A trailing "# assumption" marker flags the key as calibrated, not measured.
    bool assumption = false;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      if (trim(line.substr(hash + 1)) == "assumption") assumption = true;
      line = line.substr(0, hash);
    }
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path, lineno, "expected 'key = value', got '" + t + "'");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(path, lineno, "expected 'key = value', got '" + t + "'");
    }
    if (assumption) sc.assumptions.push_back(key);

    auto num = [&] { return parse_double(value, path, lineno, key); };
    auto integer = [&] { return parse_int(value, path, lineno, key); };

    Workload& w = sc.workload;
    if (key == "workload.mode") {
      try {
        w.mode = workload_mode_from_string(value);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(path, lineno, e.what());
      }
    } else if (key == "workload.camera_interval_s") {
      w.camera_interval_s = num();
    } else if (key == "workload.sensor_interval_s") {
      w.sensor_interval_s = num();
    } else if (key == "workload.payload_bytes") {
      w.payload_bytes_per_event = integer();
    } else if (key == "workload.streaming_payload_bytes") {
      w.streaming_payload_bytes = integer();
    } else if (key == "workload.include_sensor_payload") {
      w.include_sensor_payload = parse_bool(value, path, lineno, key);
    } else if (key == "workload.sensor_payload_bytes") {
      w.sensor_payload_bytes = integer();
    } else if (key == "model.calibration") {
      sc.calibration_path = (base / value).string();
    } else if (key == "model.resolution") {
      sc.resolution = static_cast<int>(integer());
    } else if (key == "radio.tx_power_mw") {
      w.radio.tx_power_mw = num();
    } else if (key == "radio.throughput_bps") {
      w.radio.throughput_bps = num();
    } else if (key == "radio.overhead_bytes") {
      w.radio.per_event_overhead_bytes = integer();
    } else if (key == "sleep.power_mw") {
      w.sleep_power_mw = num();
    } else if (key == "battery.capacity_mah") {
      sc.battery.capacity_mah = num();
    } else if (key == "battery.voltage_v") {
      sc.battery.nominal_voltage_v = num();
    } else if (key == "sensors.readout_energy_mj") {
      w.sensor_readout_energy_mj = num();
    } else if (key == "sensors.readout_duration_s") {
      w.sensor_readout_duration_s = num();
    } else if (key == "sensors.suite") {
      suite_path = (base / value).string();
    } else if (key == "streaming.capture_power_mw") {
      w.capture.power_mw = num();
    } else if (key == "streaming.capture_duration_s") {
      w.capture.duration_s = num();
    } else if (key == "policy.trigger") {
      if (value == "fixed") {
        sc.policy.trigger = SamplingPolicy::Trigger::fixed;
      } else if (value == "occupancy-driven") {
        sc.policy.trigger = SamplingPolicy::Trigger::occupancy_driven;
      } else {
        throw ConfigError(path, lineno, "policy.trigger must be 'fixed' or 'occupancy-driven'");
      }
    } else if (key == "policy.occupied_interval_s") {
      sc.policy.occupied_sensor_interval_s = num();
    } else if (key == "policy.vacant_interval_s") {
      sc.policy.vacant_sensor_interval_s = num();
    } else if (key == "detect.conf_threshold") {
      sc.conf_threshold = num();
    } else if (key == "detect.iou_threshold") {
      sc.iou_threshold = num();
    } else {
      throw ConfigError(path, lineno, "unknown key '" + key + "'");
    }
  }

  need_model = sc.workload.mode == WorkloadMode::edge_inference ||
               sc.workload.mode == WorkloadMode::end_to_end;
  if (need_model) {
    if (sc.calibration_path.empty()) {
      throw ConfigError(path, lineno, "workload mode '" + to_string(sc.workload.mode) +
                                          "' needs model.calibration");
    }
    sc.workload.model_config =
        config_for_resolution(load_calibration(sc.calibration_path), sc.resolution);
  }
  if (!suite_path.empty()) sc.workload.suite = load_sensor_suite(suite_path);

  try {
    sc.workload.validate();
    sc.policy.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, lineno, e.what());
  }
  return sc;
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  out << "t_start_us,t_end_us,component,phase,power_mw\n";
  for (const auto& e : trace.events) {
    out << e.t_start_us << ',' << e.t_end_us << ',' << e.component << ',' << e.phase << ','
        << fmt("%.6f", e.power_mw) << '\n';
  }
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "text") return ReportFormat::text;
  throw std::invalid_argument("unknown report format: " + s);
}

namespace {

constexpr const char* kReportHeader =
    "resolution,map50,map5095,energy_per_frame_mj,per_sample_mj,efficiency_pp_per_mj,"
    "avg_power_mw,lifetime_h,best_efficiency";

std::string row_csv(const ReportRow& r) {
  std::string s = std::to_string(r.resolution);
  s += ',' + fmt("%.1f", r.map50);
  s += ',' + fmt("%.1f", r.map5095);
  s += ',' + fmt("%.3f", r.energy_per_frame_mj);
  s += ',' + fmt("%.3f", r.per_sample_mj);
  s += ',' + fmt("%.2f", r.efficiency_pp_per_mj);
  s += ',' + fmt("%.3f", r.avg_power_mw);
  s += ',' + fmt("%.1f", r.lifetime_h);
  s += ',';
  s += r.best_efficiency ? '1' : '0';
  return s;
}

}  // namespace

std::string emit_report(const Report& report, ReportFormat format) {
  require(!report.rows.empty(), "emit_report: empty report");
  std::string out;
  if (format == ReportFormat::csv) {
    for (const auto& [k, v] : report.metadata) out += "# " + k + " = " + v + "\n";
    out += kReportHeader;
    out += '\n';
    for (const auto& r : report.rows) {
      out += row_csv(r);
      out += '\n';
    }
    return out;
  }

  for (const auto& [k, v] : report.metadata) out += k + ": " + v + "\n";
  if (!report.metadata.empty()) out += '\n';
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%10s %7s %9s %9s %10s %12s %10s %11s %6s\n", "resolution",
                "mAP50", "mAP50-95", "mJ/frame", "mJ/sample", "pp_per_mJ", "avg_mW", "life_h",
                "best");
  out += buf;
  for (const auto& r : report.rows) {
    char res[24];
    std::snprintf(res, sizeof(res), "%dx%d", r.resolution, r.resolution);
    std::snprintf(buf, sizeof(buf), "%10s %7.1f %9.1f %9.3f %10.3f %12.2f %10.3f %11.1f %6s\n",
                  res, r.map50, r.map5095, r.energy_per_frame_mj, r.per_sample_mj,
                  r.efficiency_pp_per_mj, r.avg_power_mw, r.lifetime_h,
                  r.best_efficiency ? "*" : "");
    out += buf;
  }
  return out;
}

Report parse_report_csv(const std::string& csv) {
  Report report;
  std::istringstream in(csv);
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const std::string body = trim(t.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) {
        report.metadata.emplace_back(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
      }
      continue;
    }
    if (!header_seen) {
      if (t != kReportHeader) throw ConfigError("<report>", lineno, "bad report header");
      header_seen = true;
      continue;
    }
    const auto f = split_csv(t);
    if (f.size() != 9) throw ConfigError("<report>", lineno, "expected 9 columns");
    ReportRow r;
    r.resolution = static_cast<int>(parse_int(f[0], "<report>", lineno, "resolution"));
    r.map50 = parse_double(f[1], "<report>", lineno, "map50");
    r.map5095 = parse_double(f[2], "<report>", lineno, "map5095");
    r.energy_per_frame_mj = parse_double(f[3], "<report>", lineno, "energy_per_frame_mj");
    r.per_sample_mj = parse_double(f[4], "<report>", lineno, "per_sample_mj");
    r.efficiency_pp_per_mj = parse_double(f[5], "<report>", lineno, "efficiency_pp_per_mj");
    r.avg_power_mw = parse_double(f[6], "<report>", lineno, "avg_power_mw");
    r.lifetime_h = parse_double(f[7], "<report>", lineno, "lifetime_h");
    r.best_efficiency = parse_int(f[8], "<report>", lineno, "best_efficiency") != 0;
    report.rows.push_back(r);
  }
  if (!header_seen) throw ConfigError("<report>", lineno, "missing report header");
  return report;
}

}  // namespace edgesim
