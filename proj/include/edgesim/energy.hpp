#pragma once

#include <string>
#include <vector>

namespace edgesim {

// Component identifiers used in power profiles, ledgers and trace CSVs.
// Sensors are addressed as "sensor:<name>".
namespace component {
inline constexpr const char* compute_soc = "compute-soc";
inline constexpr const char* external_memory = "external-memory";
inline constexpr const char* camera = "camera";
inline constexpr const char* radio = "radio";
inline constexpr const char* sleep_floor = "sleep-floor";
std::string sensor(const std::string& name);
}  // namespace component

enum class PowerState { active, idle, off };

/// Calibrated power draw of one component in one state. The whole
/// simulator is parameterized by these measured values; nothing tries
/// to derive power from first principles.
struct PowerProfile {
  std::string component_id;
  PowerState state = PowerState::active;
  double power_mw = 0.0;

  void validate() const;  // power >= 0, off implies 0
};

/// One row of the default calibration table: a trained detector
/// configuration with its measured power split and frame rate.
struct ModelConfig {
  int input_resolution = 0;  // pixels per side, square input
  double map50 = 0.0;        // percent
  double map5095 = 0.0;      // percent
  double ops_m = 0.0;        // millions of MACs per inference
  double params_k = 0.0;     // thousands of parameters
  double p_soc_mw = 0.0;
  double p_mem_mw = 0.0;
  double p_cam_mw = 0.0;
  double p_total_mw = 0.0;
  double fps = 0.0;
  double energy_mj = 0.0;  // measured energy/frame column, authoritative

  void validate() const;
};

struct Battery {
  double capacity_mah = 0.0;
  double nominal_voltage_v = 0.0;
};

/// Per-component energy bookkeeping over a simulated interval.
/// total_mj is maintained incrementally and must stay equal to the sum
/// of the entries (checked by conserved()).
struct EnergyLedger {
  struct Entry {
    std::string component_id;
    std::string phase_label;
    double energy_mj = 0.0;
  };

  std::vector<Entry> entries;
  double total_mj = 0.0;
  double duration_s = 0.0;

  void add(const std::string& component_id, const std::string& phase, double energy_mj);
  double component_total_mj(const std::string& component_id) const;
  double average_power_mw() const;  // total_mj / duration_s
  bool conserved(double rel_tol = 1e-9) const;
};

struct SensorSpec {
  std::string name;
  double readout_energy_mj = 0.0;
  double readout_duration_s = 0.0;
  double peak_power_mw = 0.0;
};

struct SensorSuite {
  std::vector<SensorSpec> sensors;

  double total_readout_energy_mj() const;
  double total_readout_duration_s() const;
  void validate() const;  // heated sensors <= 160 mW, others <= 30 mW
};

bool is_heated_sensor(const std::string& name);  // scd41 / bme680 / sgp41

// -- Energy arithmetic ------------------------------------------------

/// power [mW] x time [s] = energy [mJ].
double phase_energy(double power_mw, double duration_s);

/// Total active power divided by frame rate: the cost of one
/// capture+inference cycle in mJ.
double energy_per_frame(const ModelConfig& config);

/// Detection accuracy bought per millijoule: mAP50 / energy-per-frame.
double efficiency_pp_per_mj(const ModelConfig& config);

double battery_capacity_joules(const Battery& battery);

/// How long `battery` sustains a constant average draw, in hours.
double lifetime_hours(double avg_power_mw, const Battery& battery);

inline double hours_to_days(double h) { return h / 24.0; }

}  // namespace edgesim
