// Command-line front end: duty-cycle simulation, resolution sweeps,
// tiling plans and detection runs over image fixtures.
//
// Exit codes: 0 success, 2 input/config error, 3 tiling infeasibility.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "edgesim/detect.hpp"
#include "edgesim/model_io.hpp"
#include "edgesim/nn.hpp"
#include "edgesim/pipeline.hpp"
#include "edgesim/scenario_io.hpp"
#include "edgesim/sim.hpp"
#include "edgesim/tiler.hpp"

namespace {

using namespace edgesim;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

int run_simulate(const std::string& scenario_path, double duration_s,
                 const std::string& trace_path, const std::string& occupancy_path) {
  const Scenario sc = load_scenario(scenario_path);
  OccupancyTrace trace;
  if (!occupancy_path.empty()) trace = load_occupancy_trace(occupancy_path);

  const SimResult r = simulate(sc.workload, sc.policy, trace, duration_s, sc.battery);

  std::cout << "scenario: " << scenario_path << "\n";
  std::cout << "mode: " << to_string(sc.workload.mode) << "\n";
  std::cout << "duration_s: " << fixed(duration_s, 1) << "\n";
  std::cout << "cycle_s: " << fixed(r.cycle_s, 1) << "\n";
  std::cout << "cycle_energy_mj: " << fixed(r.cycle_energy_mj, 3) << "\n";
  std::cout << "total_energy_mj: " << fixed(r.total_energy_mj, 3) << "\n";
  std::cout << "avg_power_mw: " << fixed(r.avg_power_mw, 4) << "\n";
  std::cout << "lifetime_h: " << fixed(r.lifetime_hours, 2) << "\n";
  std::cout << "lifetime_days: " << fixed(hours_to_days(r.lifetime_hours), 2) << "\n";
  for (const auto& key : sc.assumptions) {
    std::cout << "assumption: " << key << "\n";
  }

  if (!trace_path.empty()) {
    std::ofstream out(trace_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + trace_path + " for writing");
    write_trace_csv(out, r.trace);
  }
  return kExitOk;
}

int run_sweep(const std::string& calibration_path, const std::string& mode,
              const std::string& scenario_path, const std::string& format) {
  const Scenario sc = load_scenario(scenario_path);
  const auto table = load_calibration(calibration_path);

  Workload w = sc.workload;
  w.mode = mode == "streaming" ? WorkloadMode::raw_streaming : WorkloadMode::edge_inference;
  const auto rows = lifetime_table(table, w, sc.battery);

  Report report;
  report.rows = rows;
  report.metadata.emplace_back("mode", mode);
  report.metadata.emplace_back("calibration", calibration_path);
  report.metadata.emplace_back("period_s", fixed(w.camera_interval_s, 1));
  for (const auto& r : rows) {
    if (!r.best_efficiency) continue;
    report.metadata.emplace_back("best_efficiency_resolution",
                                 std::to_string(r.resolution) + "x" + std::to_string(r.resolution));
    // savings of edge inference over the streaming baseline at the
    // most efficient resolution
    const double edge = per_sample_energy_edge(config_for_resolution(table, r.resolution), w.radio,
                                               w.sleep_power_mw, w.camera_interval_s,
                                               w.payload_bytes_per_event);
    const double streaming = per_sample_energy_streaming(
        w.radio, w.capture, w.sleep_power_mw, w.camera_interval_s, w.streaming_payload_bytes);
    report.metadata.emplace_back(
        "savings_percent_at_" + std::to_string(r.resolution),
        fixed(savings_percent(edge, streaming), 1) + " (edge " + fixed(edge, 2) +
            " mJ vs streaming " + fixed(streaming, 2) + " mJ)");
  }
  for (const auto& key : sc.assumptions) report.metadata.emplace_back("assumption", key);

  std::cout << emit_report(report, report_format_from_string(format));
  return kExitOk;
}

int run_tile(const std::string& model_path, std::int64_t l1_bytes, int depth) {
  const MicroModel model = load_model(model_path);
  MemoryHierarchy mem = MemoryHierarchy::defaults();
  mem.l1_bytes = l1_bytes;

  const GraphPlan g = plan_graph(model, mem, depth);
  std::cout << "layer,tile_h,tile_w,tile_oc,tiles,working_set_bytes,dma_in,dma_out\n";
  for (const auto& [spec, p] : g.per_layer) {
    std::cout << spec.name << ',' << p.tile_h << ',' << p.tile_w << ',' << p.tile_oc << ','
              << p.tiles_total << ',' << p.l1_working_set_bytes << ',' << p.dma_bytes_in << ','
              << p.dma_bytes_out << "\n";
  }
  std::cout << "total,,,,,," << g.dma_bytes_in << ',' << g.dma_bytes_out << "\n";
  return kExitOk;
}

int run_detect(const std::string& image_path, const std::string& model_path, double conf,
               double iou_thr, const std::string& pattern, const std::string& config_path,
               bool conf_set, bool iou_set) {
  if (!config_path.empty()) {
    // Thresholds come from the config file; explicit flags still win.
    const Scenario sc = load_scenario(config_path);
    if (!conf_set) conf = sc.conf_threshold;
    if (!iou_set) iou_thr = sc.iou_threshold;
  }
  const MicroModel model = load_model(model_path);
  const RawBayerImage raw = load_pgm(image_path, bayer_pattern_from_string(pattern));

  const RgbImage rgb = downscale(auto_white_balance(debayer(raw)), model.input_side);
  const ForwardResult fwd = forward(model, rgb);
  const auto boxes = nms(decode_all(model, fwd, conf), iou_thr);

  std::cout << "frame_id,cx,cy,w,h,confidence\n";
  for (const auto& b : boxes) {
    std::cout << "0," << fixed(b.cx, 6) << ',' << fixed(b.cy, 6) << ',' << fixed(b.w, 6) << ','
              << fixed(b.h, 6) << ',' << fixed(b.confidence, 6) << "\n";
  }
  std::cout << "occupancy: " << count_occupancy(boxes) << "\n";
  return kExitOk;
}

int run_report(const std::string& input_path, const std::string& format) {
  std::ifstream in(input_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + input_path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const Report report = parse_report_csv(data);
  std::cout << emit_report(report, report_format_from_string(format));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy/performance toolkit for a duty-cycled edge-inference sensing node"};
  app.require_subcommand(1);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Run a scenario and report cycle energy, "
                                                 "average power and battery lifetime");
  std::string scenario_path, trace_path, occupancy_path;
  double duration_s = 3600.0;
  sim_cmd->add_option("--scenario", scenario_path, "Scenario config file")->required();
  sim_cmd->add_option("--duration", duration_s, "Simulated horizon in seconds")
      ->default_val(3600.0);
  sim_cmd->add_option("--trace", trace_path, "Write the event trace CSV here");
  sim_cmd->add_option("--occupancy", occupancy_path, "Occupancy trace CSV (t_s,count)");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate every calibration row and report "
                                                "energy, efficiency and lifetime");
  std::string calibration_path, sweep_mode = "edge", sweep_scenario = "scenarios/defaults.cfg";
  std::string sweep_format = "text";
  sweep_cmd->add_option("--calibration", calibration_path, "Calibration table CSV")->required();
  sweep_cmd->add_option("--mode", sweep_mode, "Workload mode")
      ->check(CLI::IsMember({"edge", "streaming"}))
      ->default_val("edge");
  sweep_cmd->add_option("--scenario", sweep_scenario, "Defaults file for radio/sleep/battery")
      ->default_val("scenarios/defaults.cfg");
  sweep_cmd->add_option("--format", sweep_format, "Output format")
      ->check(CLI::IsMember({"text", "csv"}))
      ->default_val("text");

  // tile
  auto* tile_cmd = app.add_subcommand("tile", "Plan operator tiling for a model over the "
                                              "memory hierarchy");
  std::string tile_model;
  std::int64_t l1_bytes = 131072;
  int depth = 3;
  tile_cmd->add_option("--model", tile_model, "Model file (.edgs)")->required();
  tile_cmd->add_option("--l1", l1_bytes, "L1 budget in bytes")->default_val(131072);
  tile_cmd->add_option("--depth", depth, "Buffering depth")
      ->check(CLI::IsMember({2, 3}))
      ->default_val(3);

  // detect
  auto* det_cmd = app.add_subcommand("detect", "Run the detection pipeline on a Bayer PGM "
                                               "fixture and print detections + occupancy");
  std::string image_path, det_model, pattern = "RGGB", det_config;
  double conf = 0.4, iou_thr = 0.5;
  det_cmd->add_option("--image", image_path, "8-bit binary PGM Bayer mosaic")->required();
  det_cmd->add_option("--model", det_model, "Model file (.edgs)")->required();
  auto* conf_opt = det_cmd->add_option("--conf", conf, "Confidence threshold")->default_val(0.4);
  auto* iou_opt =
      det_cmd->add_option("--iou", iou_thr, "Suppression IoU threshold")->default_val(0.5);
  det_cmd->add_option("--config", det_config,
                      "Scenario file supplying detect.conf_threshold / detect.iou_threshold");
  det_cmd->add_option("--pattern", pattern, "Bayer pattern of the mosaic")
      ->check(CLI::IsMember({"RGGB", "BGGR", "GRBG", "GBRG"}))
      ->default_val("RGGB");

  // report
  auto* rep_cmd = app.add_subcommand("report", "Re-render a sweep report CSV");
  std::string report_input, report_format = "text";
  rep_cmd->add_option("--input", report_input, "Report CSV produced by sweep")->required();
  rep_cmd->add_option("--format", report_format, "Output format")
      ->check(CLI::IsMember({"text", "csv"}))
      ->default_val("text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and --version exit 0; every parse failure is an input error
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (sim_cmd->parsed()) return run_simulate(scenario_path, duration_s, trace_path, occupancy_path);
    if (sweep_cmd->parsed()) return run_sweep(calibration_path, sweep_mode, sweep_scenario, sweep_format);
    if (tile_cmd->parsed()) return run_tile(tile_model, l1_bytes, depth);
    if (det_cmd->parsed()) {
      return run_detect(image_path, det_model, conf, iou_thr, pattern, det_config,
                        conf_opt->count() > 0, iou_opt->count() > 0);
    }
    if (rep_cmd->parsed()) return run_report(report_input, report_format);
  } catch (const InfeasibleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
