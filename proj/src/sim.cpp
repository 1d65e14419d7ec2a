#include "edgesim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "edgesim/numeric.hpp"

namespace edgesim {

double RadioModel::tx_time_s(std::int64_t payload_bytes) const {
  require(payload_bytes >= 0, "RadioModel: payload must be nonnegative");
  return static_cast<double>(payload_bytes + per_event_overhead_bytes) * 8.0 / throughput_bps;
}

double RadioModel::tx_energy_mj(std::int64_t payload_bytes) const {
  return tx_power_mw * tx_time_s(payload_bytes);
}

void RadioModel::validate() const {
  require(tx_power_mw > 0.0 && throughput_bps > 0.0, "RadioModel: fields must be positive");
  require(per_event_overhead_bytes >= 0, "RadioModel: overhead must be nonnegative");
}

WorkloadMode workload_mode_from_string(const std::string& s) {
  if (s == "edge-inference") return WorkloadMode::edge_inference;
  if (s == "raw-streaming") return WorkloadMode::raw_streaming;
  if (s == "end-to-end") return WorkloadMode::end_to_end;
  if (s == "idle") return WorkloadMode::idle;
  throw std::invalid_argument("unknown workload mode: " + s);
}

std::string to_string(WorkloadMode m) {
  switch (m) {
    case WorkloadMode::edge_inference: return "edge-inference";
    case WorkloadMode::raw_streaming: return "raw-streaming";
    case WorkloadMode::end_to_end: return "end-to-end";
    case WorkloadMode::idle: return "idle";
  }
  return "?";
}

void Workload::validate() const {
  require(camera_interval_s > 0.0 && sensor_interval_s > 0.0,
          "Workload: intervals must be positive");
  require(payload_bytes_per_event >= 0 && streaming_payload_bytes >= 0,
          "Workload: payloads must be nonnegative");
  require(sensor_readout_energy_mj >= 0.0 && sensor_readout_duration_s > 0.0,
          "Workload: sensor readout energy/duration invalid");
  require(sleep_power_mw >= 0.0, "Workload: sleep power must be nonnegative");
  radio.validate();
  if (mode == WorkloadMode::edge_inference || mode == WorkloadMode::end_to_end) {
    model_config.validate();
  }
  if (suite) suite->validate();
}

void SamplingPolicy::validate() const {
  require(occupied_sensor_interval_s > 0.0, "SamplingPolicy: occupied interval must be positive");
  require(vacant_sensor_interval_s >= occupied_sensor_interval_s,
          "SamplingPolicy: vacant interval must be >= occupied interval");
}

int OccupancyTrace::count_at(double t_s) const {
  int count = 0;  // vacant before the first sample
  for (const auto& s : timeline) {
    if (s.t_s > t_s) break;
    count = s.count;
  }
  return count;
}

void OccupancyTrace::validate() const {
  for (size_t i = 0; i < timeline.size(); ++i) {
    require(timeline[i].count >= 0, "OccupancyTrace: counts must be nonnegative");
    if (i > 0) {
      require(timeline[i].t_s > timeline[i - 1].t_s,
              "OccupancyTrace: timestamps must be strictly increasing");
    }
  }
}

double per_sample_energy_edge(const ModelConfig& config, const RadioModel& radio,
                              double sleep_power_mw, double period_s, std::int64_t payload_bytes) {
  config.validate();
  radio.validate();
  require(sleep_power_mw >= 0.0, "per_sample_energy_edge: sleep power must be nonnegative");
  const double frame_s = 1.0 / config.fps;
  require(period_s >= frame_s, "per_sample_energy_edge: period shorter than frame time");
  const double tx_s = radio.tx_time_s(payload_bytes);
  require(frame_s + tx_s <= period_s, "per_sample_energy_edge: active phases exceed the period");
  return energy_per_frame(config) + radio.tx_energy_mj(payload_bytes) +
         sleep_power_mw * (period_s - frame_s - tx_s);
}

double per_sample_energy_streaming(const RadioModel& radio, const CaptureProfile& capture,
                                   double sleep_power_mw, double period_s,
                                   std::int64_t payload_bytes) {
  radio.validate();
  require(capture.power_mw >= 0.0 && capture.duration_s >= 0.0,
          "per_sample_energy_streaming: invalid capture profile");
  require(sleep_power_mw >= 0.0, "per_sample_energy_streaming: sleep power must be nonnegative");
  const double tx_s = radio.tx_time_s(payload_bytes);
  require(capture.duration_s + tx_s <= period_s,
          "per_sample_energy_streaming: transmit + capture exceed the period");
  return capture.power_mw * capture.duration_s + radio.tx_energy_mj(payload_bytes) +
         sleep_power_mw * (period_s - capture.duration_s - tx_s);
}

double savings_percent(double edge_mj, double streaming_mj) {
  require(streaming_mj > 0.0, "savings_percent: baseline must be positive");
  return 100.0 * (streaming_mj - edge_mj) / streaming_mj;
}

namespace {

std::int64_t to_us(double seconds) { return round_half_even(seconds * 1e6); }

double us_to_s(std::int64_t us) { return static_cast<double>(us) / 1e6; }

class TraceBuilder {
 public:
  explicit TraceBuilder(std::int64_t horizon_us) : horizon_us_(horizon_us) {}

  // Adds one event, clipped at the horizon. Empty events are dropped.
  void add(std::int64_t t_start_us, std::int64_t t_end_us, const std::string& component,
           const std::string& phase, double power_mw) {
    t_end_us = std::min(t_end_us, horizon_us_);
    if (t_start_us >= t_end_us) return;
    events_.push_back({t_start_us, t_end_us, component, phase, power_mw});
  }

  // Serializes same-component collisions: a later-scheduled event on a
  // busy component starts when the component frees up (duration kept,
  // horizon clipped). Only the radio can actually collide, when sensor
  // payloads share it with the per-sample transmissions.
  void resolve_overlaps() {
    std::stable_sort(events_.begin(), events_.end(), [](const SimEvent& a, const SimEvent& b) {
      return a.t_start_us < b.t_start_us;
    });
    std::map<std::string, std::int64_t> busy_until;
    std::vector<SimEvent> resolved;
    resolved.reserve(events_.size());
    for (SimEvent e : events_) {
      std::int64_t& cursor = busy_until[e.component];
      if (e.t_start_us < cursor) {
        const std::int64_t shift = cursor - e.t_start_us;
        e.t_start_us += shift;
        e.t_end_us += shift;
      }
      e.t_end_us = std::min(e.t_end_us, horizon_us_);
      if (e.t_start_us >= e.t_end_us) continue;
      cursor = e.t_end_us;
      resolved.push_back(std::move(e));
    }
    events_ = std::move(resolved);
  }

  // Fills all globally idle time with sleep-floor events.
  void fill_sleep(double sleep_power_mw) {
    std::vector<std::pair<std::int64_t, std::int64_t>> busy;
    busy.reserve(events_.size());
    for (const auto& e : events_) busy.emplace_back(e.t_start_us, e.t_end_us);
    std::sort(busy.begin(), busy.end());
    std::int64_t cursor = 0;
    for (const auto& [s, e] : busy) {
      if (s > cursor) {
        events_.push_back({cursor, s, component::sleep_floor, "sleep", sleep_power_mw});
      }
      cursor = std::max(cursor, e);
    }
    if (cursor < horizon_us_) {
      events_.push_back({cursor, horizon_us_, component::sleep_floor, "sleep", sleep_power_mw});
    }
  }

  SimTrace finish(double duration_s) {
    std::sort(events_.begin(), events_.end(), [](const SimEvent& a, const SimEvent& b) {
      if (a.t_start_us != b.t_start_us) return a.t_start_us < b.t_start_us;
      if (a.component != b.component) return a.component < b.component;
      return a.t_end_us < b.t_end_us;
    });
    SimTrace trace;
    trace.summary.duration_s = duration_s;
    for (auto& e : events_) {
      trace.summary.add(e.component, e.phase, e.power_mw * us_to_s(e.t_end_us - e.t_start_us));
    }
    trace.events = std::move(events_);
    return trace;
  }

 private:
  std::int64_t horizon_us_;
  std::vector<SimEvent> events_;
};

// One capture+inference sample at the calibrated component powers,
// followed by the occupancy transmission. Returns the end time.
std::int64_t add_inference_sample(TraceBuilder& tb, std::int64_t t_us, const Workload& w) {
  const ModelConfig& mc = w.model_config;
  const std::int64_t frame_us = to_us(1.0 / mc.fps);
  tb.add(t_us, t_us + frame_us, component::compute_soc, "inference", mc.p_soc_mw);
  tb.add(t_us, t_us + frame_us, component::external_memory, "inference", mc.p_mem_mw);
  tb.add(t_us, t_us + frame_us, component::camera, "capture", mc.p_cam_mw);
  const std::int64_t tx_us = to_us(w.radio.tx_time_s(w.payload_bytes_per_event));
  tb.add(t_us + frame_us, t_us + frame_us + tx_us, component::radio, "tx", w.radio.tx_power_mw);
  return t_us + frame_us + tx_us;
}

std::int64_t add_streaming_sample(TraceBuilder& tb, std::int64_t t_us, const Workload& w) {
  const std::int64_t cap_us = to_us(w.capture.duration_s);
  tb.add(t_us, t_us + cap_us, component::camera, "capture", w.capture.power_mw);
  const std::int64_t tx_us = to_us(w.radio.tx_time_s(w.streaming_payload_bytes));
  tb.add(t_us + cap_us, t_us + cap_us + tx_us, component::radio, "tx", w.radio.tx_power_mw);
  return t_us + cap_us + tx_us;
}

// Sensor readout: aggregate event, or the per-sensor sequence when a
// suite is configured. Returns the end time.
std::int64_t add_sensor_readout(TraceBuilder& tb, std::int64_t t_us, const Workload& w) {
  std::int64_t end_us = t_us;
  if (w.suite) {
    for (const auto& s : w.suite->sensors) {
      const std::int64_t dur_us = to_us(s.readout_duration_s);
      tb.add(end_us, end_us + dur_us, component::sensor(s.name), "readout",
             s.readout_energy_mj / s.readout_duration_s);
      end_us += dur_us;
    }
  } else {
    const std::int64_t dur_us = to_us(w.sensor_readout_duration_s);
    tb.add(t_us, t_us + dur_us, component::sensor("suite"), "readout",
           w.sensor_readout_energy_mj / w.sensor_readout_duration_s);
    end_us = t_us + dur_us;
  }
  if (w.include_sensor_payload) {
    const std::int64_t tx_us = to_us(w.radio.tx_time_s(w.sensor_payload_bytes));
    tb.add(end_us, end_us + tx_us, component::radio, "tx-sensor", w.radio.tx_power_mw);
    end_us += tx_us;
  }
  return end_us;
}

}  // namespace

SimResult simulate(const Workload& workload, const SamplingPolicy& policy,
                   const OccupancyTrace& trace, double duration_s, const Battery& battery) {
  workload.validate();
  policy.validate();
  trace.validate();
  require(duration_s > 0.0, "simulate: duration must be positive");

  const bool camera_active =
      workload.mode == WorkloadMode::edge_inference || workload.mode == WorkloadMode::end_to_end;
  const bool streaming = workload.mode == WorkloadMode::raw_streaming;
  const bool sensors_active = workload.mode == WorkloadMode::end_to_end;

  // Mandatory per-period phases must fit their period.
  if (camera_active) {
    const double active_s = 1.0 / workload.model_config.fps +
                            workload.radio.tx_time_s(workload.payload_bytes_per_event);
    if (active_s > workload.camera_interval_s) {
      throw std::runtime_error(
          "simulate: camera cycle 0 overruns its period (inference + tx = " +
          std::to_string(active_s) + " s > " + std::to_string(workload.camera_interval_s) + " s)");
    }
  }
  if (streaming) {
    const double active_s = workload.capture.duration_s +
                            workload.radio.tx_time_s(workload.streaming_payload_bytes);
    if (active_s > workload.camera_interval_s) {
      throw std::runtime_error(
          "simulate: streaming cycle 0 overruns its period (capture + tx = " +
          std::to_string(active_s) + " s > " + std::to_string(workload.camera_interval_s) + " s)");
    }
  }

  const std::int64_t horizon_us = to_us(duration_s);
  TraceBuilder tb(horizon_us);

  if (camera_active || streaming) {
    const std::int64_t period_us = to_us(workload.camera_interval_s);
    for (std::int64_t t = 0; t < horizon_us; t += period_us) {
      if (camera_active) {
        add_inference_sample(tb, t, workload);
      } else {
        add_streaming_sample(tb, t, workload);
      }
    }
  }

  if (sensors_active) {
    double readout_s = workload.suite ? workload.suite->total_readout_duration_s()
                                      : workload.sensor_readout_duration_s;
    if (workload.include_sensor_payload) {
      readout_s += workload.radio.tx_time_s(workload.sensor_payload_bytes);
    }
    std::int64_t t = 0;
    std::int64_t cycle = 0;
    while (t < horizon_us) {
      const double interval_s =
          policy.trigger == SamplingPolicy::Trigger::fixed
              ? workload.sensor_interval_s
              : (trace.count_at(us_to_s(t)) > 0 ? policy.occupied_sensor_interval_s
                                                : policy.vacant_sensor_interval_s);
      if (readout_s > interval_s) {
        throw std::runtime_error("simulate: sensor cycle " + std::to_string(cycle) +
                                 " overruns its interval (readout " + std::to_string(readout_s) +
                                 " s > " + std::to_string(interval_s) + " s)");
      }
      add_sensor_readout(tb, t, workload);
      t += to_us(interval_s);
      ++cycle;
    }
  }

  tb.resolve_overlaps();
  tb.fill_sleep(workload.sleep_power_mw);

  SimResult result;
  result.trace = tb.finish(duration_s);
  result.total_energy_mj = result.trace.summary.total_mj;
  result.avg_power_mw = result.trace.summary.average_power_mw();
  result.cycle_s = sensors_active ? workload.sensor_interval_s : workload.camera_interval_s;
  result.cycle_energy_mj = result.total_energy_mj / (duration_s / result.cycle_s);
  result.lifetime_hours = lifetime_hours(result.avg_power_mw, battery);
  return result;
}

std::vector<PowerProfile> workload_power_profiles(const Workload& workload) {
  workload.validate();
  require(workload.sleep_power_mw > 0.0,
          "workload_power_profiles: the sleep floor must be strictly positive");
  std::vector<PowerProfile> profiles;
  const bool inference =
      workload.mode == WorkloadMode::edge_inference || workload.mode == WorkloadMode::end_to_end;
  if (inference) {
    const ModelConfig& mc = workload.model_config;
    profiles.push_back({component::compute_soc, PowerState::active, mc.p_soc_mw});
    profiles.push_back({component::external_memory, PowerState::active, mc.p_mem_mw});
    profiles.push_back({component::camera, PowerState::active, mc.p_cam_mw});
  }
  if (workload.mode == WorkloadMode::raw_streaming) {
    profiles.push_back({component::camera, PowerState::active, workload.capture.power_mw});
  }
  if (workload.mode != WorkloadMode::idle) {
    profiles.push_back({component::radio, PowerState::active, workload.radio.tx_power_mw});
    profiles.push_back({component::radio, PowerState::off, 0.0});
  }
  if (workload.mode == WorkloadMode::end_to_end) {
    if (workload.suite) {
      for (const auto& s : workload.suite->sensors) {
        profiles.push_back({component::sensor(s.name), PowerState::active,
                            s.readout_energy_mj / s.readout_duration_s});
      }
    } else {
      profiles.push_back({component::sensor("suite"), PowerState::active,
                          workload.sensor_readout_energy_mj / workload.sensor_readout_duration_s});
    }
  }
  profiles.push_back({component::sleep_floor, PowerState::active, workload.sleep_power_mw});
  for (const auto& p : profiles) p.validate();
  return profiles;
}

std::vector<ReportRow> lifetime_table(const std::vector<ModelConfig>& configs,
                                      const Workload& workload_template, const Battery& battery) {
  require(!configs.empty(), "lifetime_table: no configurations");
  std::vector<ReportRow> rows;
  rows.reserve(configs.size());
  for (const ModelConfig& mc : configs) {
    ReportRow r;
    r.resolution = mc.input_resolution;
    r.map50 = mc.map50;
    r.map5095 = mc.map5095;
    r.energy_per_frame_mj = energy_per_frame(mc);
    r.efficiency_pp_per_mj = efficiency_pp_per_mj(mc);
    if (workload_template.mode == WorkloadMode::raw_streaming) {
      r.per_sample_mj = per_sample_energy_streaming(
          workload_template.radio, workload_template.capture, workload_template.sleep_power_mw,
          workload_template.camera_interval_s, workload_template.streaming_payload_bytes);
    } else {
      r.per_sample_mj = per_sample_energy_edge(mc, workload_template.radio,
                                               workload_template.sleep_power_mw,
                                               workload_template.camera_interval_s,
                                               workload_template.payload_bytes_per_event);
    }
    r.avg_power_mw = r.per_sample_mj / workload_template.camera_interval_s;
    r.lifetime_h = lifetime_hours(r.avg_power_mw, battery);
    rows.push_back(r);
  }
  size_t best = 0;
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].efficiency_pp_per_mj > rows[best].efficiency_pp_per_mj) best = i;
  }
  rows[best].best_efficiency = true;
  return rows;
}

}  // namespace edgesim
