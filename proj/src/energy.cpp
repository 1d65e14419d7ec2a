#include "edgesim/energy.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

#include "edgesim/numeric.hpp"

namespace edgesim {

namespace component {
std::string sensor(const std::string& name) { return "sensor:" + name; }
}  // namespace component

void PowerProfile::validate() const {
  require(power_mw >= 0.0, "PowerProfile: power_mw must be nonnegative");
  if (state == PowerState::off) {
    require(power_mw == 0.0, "PowerProfile: power in state off must be 0");
  }
}

void ModelConfig::validate() const {
  require(input_resolution > 0, "ModelConfig: input_resolution must be positive");
  require(fps > 0.0, "ModelConfig: fps must be positive");
  require(map50 >= 0.0 && map50 <= 100.0, "ModelConfig: map50 out of [0,100]");
  require(map5095 >= 0.0 && map5095 <= 100.0, "ModelConfig: map5095 out of [0,100]");
  require(p_soc_mw >= 0.0 && p_mem_mw >= 0.0 && p_cam_mw >= 0.0,
          "ModelConfig: negative component power");
  const double sum = p_soc_mw + p_mem_mw + p_cam_mw;
  if (std::abs(sum - p_total_mw) > 0.1 + 1e-9) {
    throw std::invalid_argument("ModelConfig: p_total_mw differs from component sum by more than 0.1 mW");
  }
  if (energy_mj > 0.0) {
    // Measured energy column and p_total/fps are independently rounded;
    // they agree within 1.5% on valid calibration data.
    const double ratio_dev = std::abs(p_total_mw / fps - energy_mj) / energy_mj;
    if (ratio_dev > 0.015) {
      throw std::invalid_argument("ModelConfig: p_total/fps is inconsistent with the energy column (>1.5%)");
    }
  }
}

void EnergyLedger::add(const std::string& component_id, const std::string& phase, double energy_mj) {
  require(energy_mj >= 0.0, "EnergyLedger: energies must be nonnegative");
  entries.push_back({component_id, phase, energy_mj});
  total_mj += energy_mj;
}

double EnergyLedger::component_total_mj(const std::string& component_id) const {
  double sum = 0.0;
  for (const auto& e : entries) {
    if (e.component_id == component_id) sum += e.energy_mj;
  }
  return sum;
}

double EnergyLedger::average_power_mw() const {
  require(duration_s > 0.0, "EnergyLedger: duration_s must be positive");
  return total_mj / duration_s;
}

bool EnergyLedger::conserved(double rel_tol) const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.energy_mj;
  const double scale = std::max(std::abs(sum), std::abs(total_mj));
  if (scale == 0.0) return true;
  return std::abs(sum - total_mj) <= rel_tol * scale;
}

double SensorSuite::total_readout_energy_mj() const {
  double sum = 0.0;
  for (const auto& s : sensors) sum += s.readout_energy_mj;
  return sum;
}

double SensorSuite::total_readout_duration_s() const {
  double sum = 0.0;
  for (const auto& s : sensors) sum += s.readout_duration_s;
  return sum;
}

bool is_heated_sensor(const std::string& name) {
  return name == "scd41" || name == "bme680" || name == "sgp41";
}

void SensorSuite::validate() const {
  for (const auto& s : sensors) {
    require(s.readout_energy_mj >= 0.0 && s.readout_duration_s > 0.0,
            "SensorSuite: invalid readout energy/duration");
    const double limit = is_heated_sensor(s.name) ? 160.0 : 30.0;
    if (s.peak_power_mw > limit) {
      throw std::invalid_argument("SensorSuite: sensor '" + s.name + "' exceeds its peak power limit");
    }
    require(s.readout_energy_mj / s.readout_duration_s <= s.peak_power_mw + 1e-9,
            "SensorSuite: average readout power exceeds declared peak");
  }
}

double phase_energy(double power_mw, double duration_s) {
  require(power_mw >= 0.0, "phase_energy: power_mw must be nonnegative");
  require(duration_s >= 0.0, "phase_energy: duration_s must be nonnegative");
  return power_mw * duration_s;  // mW * s = mJ
}

double energy_per_frame(const ModelConfig& config) {
  require(config.fps > 0.0, "energy_per_frame: fps must be positive");
  return config.p_total_mw / config.fps;
}

double efficiency_pp_per_mj(const ModelConfig& config) {
  const double e = energy_per_frame(config);
  require(e > 0.0, "efficiency_pp_per_mj: energy per frame must be positive");
  return config.map50 / e;
}

double battery_capacity_joules(const Battery& battery) {
  require(battery.capacity_mah > 0.0, "Battery: capacity_mah must be positive");
  require(battery.nominal_voltage_v > 0.0, "Battery: nominal_voltage_v must be positive");
  return battery.capacity_mah * 3.6 * battery.nominal_voltage_v;
}

double lifetime_hours(double avg_power_mw, const Battery& battery) {
  require(avg_power_mw > 0.0, "lifetime_hours: avg_power_mw must be positive");
  return battery_capacity_joules(battery) / (avg_power_mw / 1000.0) / 3600.0;
}

}  // namespace edgesim
