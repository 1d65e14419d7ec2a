#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "edgesim/image.hpp"
#include "edgesim/scenario_io.hpp"

using namespace edgesim;

namespace {

const std::string kRoot = EDGESIM_SOURCE_DIR;

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content) : path(name) {
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("shipped calibration table loads with 8 validated rows") {
  const auto table = load_calibration(kRoot + "/calibration/table1.csv");
  REQUIRE(table.size() == 8);
  CHECK(table.front().input_resolution == 64);
  CHECK(table.back().input_resolution == 512);
  CHECK(table.back().p_total_mw == doctest::Approx(86.4));
  CHECK(table.back().energy_mj == doctest::Approx(12.99));
}

TEST_CASE("calibration loader: empty file and schema violations") {
  TempFile empty("tmp_empty.csv", "");
  CHECK_THROWS_AS(load_calibration(empty.path), ConfigError);

  TempFile bad_header("tmp_badh.csv", "res,stuff\n1,2\n");
  CHECK_THROWS_AS(load_calibration(bad_header.path), ConfigError);

  // p_total off by 0.3 mW from the component sum
  TempFile bad_sum("tmp_badsum.csv",
                   "resolution,map50,map5095,ops_m,params_k,p_soc_mw,p_mem_mw,p_cam_mw,"
                   "p_total_mw,fps,energy_mj\n"
                   "192,35.1,13.4,42,317,40.1,0.8,10.4,51.6,19.5,2.63\n");
  try {
    load_calibration(bad_sum.path);
    FAIL("expected rejection");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("192") != std::string::npos);
  }

  TempFile bad_num("tmp_badnum.csv",
                   "resolution,map50,map5095,ops_m,params_k,p_soc_mw,p_mem_mw,p_cam_mw,"
                   "p_total_mw,fps,energy_mj\n"
                   "192,abc,13.4,42,317,40.1,0.8,10.4,51.3,19.5,2.63\n");
  try {
    load_calibration(bad_num.path);
    FAIL("expected rejection");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("map50") != std::string::npos);
  }
}

TEST_CASE("occupancy trace loads and rejects disorder") {
  const auto trace = load_occupancy_trace(kRoot + "/fixtures/occupancy_office.csv");
  REQUIRE(trace.timeline.size() == 7);
  CHECK(trace.count_at(-5.0) == 0);
  CHECK(trace.count_at(3600.0) == 3);
  CHECK(trace.count_at(5000.0) == 3);
  CHECK(trace.count_at(99999.0) == 0);

  TempFile bad("tmp_badtrace.csv", "t_s,count\n10,1\n5,2\n");
  CHECK_THROWS_AS(load_occupancy_trace(bad.path), ConfigError);
}

TEST_CASE("scenario files load with resolved calibration and assumption flags") {
  const Scenario sc = load_scenario(kRoot + "/scenarios/end_to_end.cfg");
  CHECK(sc.workload.mode == WorkloadMode::end_to_end);
  CHECK(sc.resolution == 512);
  CHECK(sc.workload.model_config.p_total_mw == doctest::Approx(86.4));
  CHECK(sc.workload.radio.throughput_bps == doctest::Approx(1.36e6));
  CHECK(sc.workload.sleep_power_mw == doctest::Approx(1.0));
  CHECK(sc.battery.capacity_mah == doctest::Approx(600.0));
  bool flagged = false;
  for (const auto& k : sc.assumptions) {
    if (k == "radio.throughput_bps") flagged = true;
  }
  CHECK(flagged);

  CHECK_THROWS_AS(load_scenario(kRoot + "/scenarios/missing.cfg"), ConfigError);

  TempFile unknown("tmp_unknown.cfg", "workload.mode = idle\nnot.a.key = 1\n");
  try {
    load_scenario(unknown.path);
    FAIL("expected rejection");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
  }

  TempFile noeq("tmp_noeq.cfg", "workload.mode idle\n");
  CHECK_THROWS_AS(load_scenario(noeq.path), ConfigError);
}

TEST_CASE("report emission round-trips through CSV byte for byte") {
  Report rep;
  rep.metadata = {{"mode", "edge-inference"}, {"assumption", "radio.throughput_bps"}};
  ReportRow a;
  a.resolution = 192;
  a.map50 = 35.1;
  a.map5095 = 13.4;
  a.energy_per_frame_mj = 2.6307692;
  a.per_sample_mj = 4.5803351;
  a.efficiency_pp_per_mj = 13.3421;
  a.avg_power_mw = 2.2901675;
  a.lifetime_h = 969.37;
  a.best_efficiency = true;
  ReportRow b = a;
  b.resolution = 512;
  b.best_efficiency = false;
  rep.rows = {a, b};

  const std::string csv = emit_report(rep, ReportFormat::csv);
  const Report parsed = parse_report_csv(csv);
  CHECK(parsed.rows.size() == 2);
  CHECK(parsed.metadata == rep.metadata);
  const std::string csv2 = emit_report(parsed, ReportFormat::csv);
  CHECK(csv == csv2);

  const std::string text = emit_report(rep, ReportFormat::text);
  CHECK(text.find("192x192") != std::string::npos);
  CHECK(text.find('*') != std::string::npos);

  CHECK_THROWS_AS(emit_report(Report{}, ReportFormat::csv), std::invalid_argument);
  CHECK_THROWS_AS(parse_report_csv("nonsense\n"), ConfigError);
}

TEST_CASE("trace CSV has the documented schema") {
  SimTrace trace;
  trace.events.push_back({0, 149254, "compute-soc", "inference", 73.9});
  trace.summary.duration_s = 2.0;
  trace.summary.add("compute-soc", "inference", 73.9 * 0.149254);
  std::ostringstream out;
  write_trace_csv(out, trace);
  CHECK(out.str() ==
        "t_start_us,t_end_us,component,phase,power_mw\n"
        "0,149254,compute-soc,inference,73.900000\n");
}

TEST_CASE("PGM/PPM round trip is bit exact") {
  PlaneU8 plane(4, 6);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 6; ++x) plane(y, x) = static_cast<std::uint8_t>(17 * y + x);
  }
  save_pgm("tmp_img.pgm", plane);
  const RawBayerImage back = load_pgm("tmp_img.pgm", BayerPattern::GRBG);
  CHECK(back.pattern == BayerPattern::GRBG);
  CHECK((back.mosaic == plane).all());
  std::remove("tmp_img.pgm");

  RgbImage rgb;
  for (int c = 0; c < 3; ++c) {
    rgb.planes[c].resize(4, 6);
    for (int y = 0; y < 4; ++y) {
      for (int x = 0; x < 6; ++x) {
        rgb.planes[c](y, x) = static_cast<std::uint8_t>(3 * c + 11 * y + x);
      }
    }
  }
  save_ppm("tmp_img.ppm", rgb);
  const RgbImage rback = load_ppm("tmp_img.ppm");
  for (int c = 0; c < 3; ++c) CHECK((rback.planes[c] == rgb.planes[c]).all());
  std::remove("tmp_img.ppm");

  TempFile junk("tmp_junk.pgm", "P2\n2 2\n255\n0 0 0 0\n");
  CHECK_THROWS_AS(load_pgm(junk.path), std::runtime_error);
}
