#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgesim/energy.hpp"

namespace edgesim {

/// Application-layer radio abstraction: a transmit event costs
/// tx_power_mw for (payload + overhead) * 8 / throughput seconds.
struct RadioModel {
  double tx_power_mw = 10.0;
  double throughput_bps = 1.36e6;
  std::int64_t per_event_overhead_bytes = 0;

  double tx_time_s(std::int64_t payload_bytes) const;
  double tx_energy_mj(std::int64_t payload_bytes) const;
  void validate() const;
};

enum class WorkloadMode {
  edge_inference,  // capture + on-device inference, transmit the count
  raw_streaming,   // capture + transmit the raw frame, no inference
  end_to_end,      // edge inference plus periodic sensor readout
  idle,            // nothing scheduled; sleep floor only (degenerate, for tests)
};

WorkloadMode workload_mode_from_string(const std::string& s);
std::string to_string(WorkloadMode m);

/// Capture cost of the streaming baseline (calibrated, not measured).
struct CaptureProfile {
  double power_mw = 55.0;
  double duration_s = 1.0 / 30.0;
};

struct Workload {
  WorkloadMode mode = WorkloadMode::edge_inference;
  ModelConfig model_config;  // edge / end-to-end
  RadioModel radio;
  double sleep_power_mw = 1.0;
  double camera_interval_s = 2.0;
  double sensor_interval_s = 60.0;
  std::int64_t payload_bytes_per_event = 16;     // occupancy count message
  std::int64_t streaming_payload_bytes = 76800;  // raw 320x240 grayscale
  CaptureProfile capture;
  double sensor_readout_energy_mj = 490.0;  // aggregate readout event
  double sensor_readout_duration_s = 5.0;
  bool include_sensor_payload = false;  // also radio the sensor values
  std::int64_t sensor_payload_bytes = 64;
  std::optional<SensorSuite> suite;  // per-sensor split when present

  void validate() const;
};

struct SamplingPolicy {
  enum class Trigger { fixed, occupancy_driven };
  Trigger trigger = Trigger::fixed;
  double occupied_sensor_interval_s = 60.0;
  double vacant_sensor_interval_s = 60.0;

  void validate() const;  // vacant >= occupied
};

/// Step function of occupant count over time; vacant before the first
/// sample.
struct OccupancyTrace {
  struct Sample {
    double t_s = 0.0;
    int count = 0;
  };
  std::vector<Sample> timeline;

  int count_at(double t_s) const;
  void validate() const;  // strictly increasing timestamps, counts >= 0
};

struct SimEvent {
  std::int64_t t_start_us = 0;
  std::int64_t t_end_us = 0;
  std::string component;
  std::string phase;
  double power_mw = 0.0;
};

/// Event-ordered activity record plus its energy summary. Events never
/// overlap per component; the ledger equals the integral of the trace.
struct SimTrace {
  std::vector<SimEvent> events;
  EnergyLedger summary;
};

struct SimResult {
  SimTrace trace;
  double total_energy_mj = 0.0;
  double avg_power_mw = 0.0;
  double cycle_s = 0.0;          // reporting period (sensor cycle, else camera period)
  double cycle_energy_mj = 0.0;  // total / number of cycles
  double lifetime_hours = 0.0;
};

// -- Closed-form per-sample costs -------------------------------------

/// Edge-inference sample: one frame at the calibrated total power, an
/// occupancy-count transmission, sleep floor for the rest of the period.
double per_sample_energy_edge(const ModelConfig& config, const RadioModel& radio,
                              double sleep_power_mw, double period_s,
                              std::int64_t payload_bytes = 16);

/// Raw-streaming sample: capture, transmit the whole frame, sleep.
double per_sample_energy_streaming(const RadioModel& radio, const CaptureProfile& capture,
                                   double sleep_power_mw, double period_s,
                                   std::int64_t payload_bytes);

/// 100 * (streaming - edge) / streaming.
double savings_percent(double edge_mj, double streaming_mj);

// -- Discrete-event simulation ----------------------------------------

/// Deterministic integer-microsecond simulation of `workload` over
/// `duration_s`. Component tracks run in parallel (distinct SoCs);
/// the sleep floor covers exactly the globally idle time. The
/// occupancy trace matters only for occupancy-driven sensor sampling.
SimResult simulate(const Workload& workload, const SamplingPolicy& policy,
                   const OccupancyTrace& trace, double duration_s, const Battery& battery);

/// The per-component active-state power profiles a workload implies,
/// plus the sleep floor (which must be strictly positive here: a node
/// without a sleep floor cannot be duty-cycled meaningfully).
std::vector<PowerProfile> workload_power_profiles(const Workload& workload);

struct ReportRow {
  int resolution = 0;
  double map50 = 0.0;
  double map5095 = 0.0;
  double energy_per_frame_mj = 0.0;
  double per_sample_mj = 0.0;
  double efficiency_pp_per_mj = 0.0;
  double avg_power_mw = 0.0;
  double lifetime_h = 0.0;
  bool best_efficiency = false;
};

/// One row per calibration entry under the given workload template;
/// the efficiency argmax is flagged best_efficiency.
std::vector<ReportRow> lifetime_table(const std::vector<ModelConfig>& configs,
                                      const Workload& workload_template, const Battery& battery);

}  // namespace edgesim
