#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "edgesim/sim.hpp"

namespace edgesim {

/// Load/validation failure with the offending file and line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_ = 0;
};

/// A fully resolved simulation scenario: workload + battery + policy +
/// pipeline thresholds. Keys marked `# assumption` in the file are
/// collected so reports can carry the flags forward.
struct Scenario {
  Workload workload;
  Battery battery{600.0, 3.7};
  SamplingPolicy policy;
  double conf_threshold = 0.4;
  double iou_threshold = 0.5;
  std::string calibration_path;  // resolved relative to the scenario file
  int resolution = 192;
  std::vector<std::string> assumptions;
};

/// Parse a `key = value` scenario file. When the workload needs a model
/// configuration, the referenced calibration table is loaded and the
/// requested resolution row is installed in the workload.
Scenario load_scenario(const std::string& path);

/// Calibration table CSV with header
/// resolution,map50,map5095,ops_m,params_k,p_soc_mw,p_mem_mw,p_cam_mw,p_total_mw,fps,energy_mj.
/// Every row is validated against the ModelConfig invariants; failures
/// name the row and column.
std::vector<ModelConfig> load_calibration(const std::string& path);

ModelConfig config_for_resolution(const std::vector<ModelConfig>& table, int resolution);

/// Sensor suite CSV: name,readout_energy_mj,readout_duration_s,peak_power_mw.
SensorSuite load_sensor_suite(const std::string& path);

/// Occupancy trace CSV: t_s,count.
OccupancyTrace load_occupancy_trace(const std::string& path);

/// Trace CSV: t_start_us,t_end_us,component,phase,power_mw.
void write_trace_csv(std::ostream& out, const SimTrace& trace);

struct Report {
  std::vector<ReportRow> rows;
  std::vector<std::pair<std::string, std::string>> metadata;  // ordered key/value
};

enum class ReportFormat { csv, text };
ReportFormat report_format_from_string(const std::string& s);

/// Deterministic rendering: fixed decimal places (mAP 1, energies 3,
/// efficiency 2, power 3, lifetime hours 1), metadata as leading
/// `# key = value` comment lines (CSV) or a preamble (text). CSV output
/// round-trips through parse_report_csv byte for byte.
std::string emit_report(const Report& report, ReportFormat format);

Report parse_report_csv(const std::string& csv);

}  // namespace edgesim
