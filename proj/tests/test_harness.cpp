#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "s3kf/harness.hpp"
#include "s3kf/metrics.hpp"

using namespace s3kf;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("s3kf_harness_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_mini_scenario(const fs::path& dir) {
  Scenario sc;
  sc.name = "mini";
  sc.duration = 4.0;
  sc.camera_rate = 30.0;
  TargetSpec a;
  a.position = Eigen::Vector3d(3.0, 1.0, 0.0);
  TargetSpec b;
  b.pattern = MotionPattern::CircleCW;
  b.radius = 5.0;
  b.azimuth0 = 2.0;
  b.angular_speed = 0.2;
  sc.targets = {a, b};
  const fs::path path = dir / "mini.json";
  atomic_write(path, scenario_to_json(sc));
  return path;
}

}  // namespace

TEST_CASE("simulate writes all four files and is reproducible") {
  const fs::path dir = temp_dir("simulate");
  const fs::path scenario = write_mini_scenario(dir);

  run_simulate(scenario, 42, dir / "a");
  for (const char* name : {"gt.jsonl", "detections.jsonl", "lidar.jsonl", "manifest.json"}) {
    CHECK(fs::exists(dir / "a" / name));
  }
  CHECK(read_detections(dir / "a" / "detections.jsonl").frames.size() == 120);

  run_simulate(scenario, 42, dir / "b");
  for (const char* name : {"gt.jsonl", "detections.jsonl", "lidar.jsonl", "manifest.json"}) {
    CHECK(read_file(dir / "a" / name) == read_file(dir / "b" / name));
  }

  run_simulate(scenario, 43, dir / "c");
  CHECK(read_file(dir / "a" / "detections.jsonl") !=
        read_file(dir / "c" / "detections.jsonl"));
}

TEST_CASE("track produces a parseable log and a manifest with timings") {
  const fs::path dir = temp_dir("track");
  const fs::path scenario = write_mini_scenario(dir);
  run_simulate(scenario, 7, dir / "sim");

  run_track(dir / "sim" / "detections.jsonl", dir / "sim" / "lidar.jsonl", std::nullopt,
            "spherical", dir / "trk");
  const auto records = read_tracks(dir / "trk" / "tracks.jsonl");
  CHECK(!records.empty());
  CHECK(read_file(dir / "trk" / "manifest.json").find("timings") != std::string::npos);

  // Identical inputs and config give a byte-identical track log.
  run_track(dir / "sim" / "detections.jsonl", dir / "sim" / "lidar.jsonl", std::nullopt,
            "spherical", dir / "trk2");
  CHECK(read_file(dir / "trk" / "tracks.jsonl") == read_file(dir / "trk2" / "tracks.jsonl"));

  SUBCASE("unknown engine raises ConfigError") {
    CHECK_THROWS_AS(run_track(dir / "sim" / "detections.jsonl",
                              dir / "sim" / "lidar.jsonl", std::nullopt, "warp",
                              dir / "trk3"),
                    ConfigError);
  }
}

TEST_CASE("eval of ground truth re-serialized as tracks gives zero error") {
  const fs::path dir = temp_dir("eval");
  const fs::path scenario = write_mini_scenario(dir);
  run_simulate(scenario, 7, dir / "sim");

  const GroundTruthLog gt = read_ground_truth(dir / "sim" / "gt.jsonl");
  std::vector<TrackRecord> fake;
  for (const GroundTruthRecord& rec : gt) {
    TrackRecord r;
    r.t = rec.t;
    r.id = 1000 + rec.target_id;
    r.bearing = UnitBearing{rec.position};
    r.depth = rec.position.norm();
    r.planar = rec.position.head<2>();
    fake.push_back(r);
  }
  write_tracks(dir / "fake_tracks.jsonl", fake, "spherical");
  run_eval(dir / "fake_tracks.jsonl", dir / "sim" / "gt.jsonl", dir / "ev");

  const std::string metrics = read_file(dir / "ev" / "metrics.json");
  CHECK(metrics.find("\"total_switches\": 0") != std::string::npos);
  CHECK(metrics.find("\"max_id_total\": 2") != std::string::npos);
  CHECK(fs::exists(dir / "ev" / "errors.csv"));

  SUBCASE("missing gt file fails with IoError naming the path") {
    CHECK_THROWS_WITH_AS(run_eval(dir / "fake_tracks.jsonl", dir / "nope.jsonl", dir / "ev2"),
                         doctest::Contains("nope.jsonl"), IoError);
  }
}

TEST_CASE("compare writes both engine trees and a side-by-side summary") {
  const fs::path dir = temp_dir("compare");
  const fs::path scenario = write_mini_scenario(dir);
  run_compare(scenario, 11, dir / "cmp");

  for (const char* p :
       {"sim/gt.jsonl", "sim/detections.jsonl", "sim/lidar.jsonl", "spherical/tracks.jsonl",
        "spherical/metrics.json", "pixel/tracks.jsonl", "pixel/metrics.json",
        "comparison.json"}) {
    CHECK(fs::exists(dir / "cmp" / p));
  }
  const std::string cmp = read_file(dir / "cmp" / "comparison.json");
  CHECK(cmp.find("spherical") != std::string::npos);
  CHECK(cmp.find("pixel") != std::string::npos);
  // Timings are omitted inside compare so reruns are byte-identical.
  CHECK(read_file(dir / "cmp" / "spherical" / "manifest.json").find("timings") ==
        std::string::npos);
}

TEST_CASE("cli maps error classes to exit codes") {
  const fs::path dir = temp_dir("cli");
  atomic_write(dir / "bad.json", "{\"duration\": -3}");

  const std::string quiet = "S3KF_LOG=error ";
  const std::string bin = S3KF_BIN;

  int rc = std::system((quiet + bin + " simulate --scenario " + (dir / "bad.json").string() +
                        " --seed 1 --out " + (dir / "out").string())
                           .c_str());
  CHECK(WEXITSTATUS(rc) == 2);

  rc = std::system((quiet + bin + " eval --tracks /nonexistent.jsonl --gt /nonexistent.jsonl --out " +
                    (dir / "out").string())
                       .c_str());
  CHECK(WEXITSTATUS(rc) == 3);

  atomic_write(dir / "bad.jsonl", "{\"schema_version\": 99}\n");
  rc = std::system((quiet + bin + " eval --tracks " + (dir / "bad.jsonl").string() + " --gt " +
                    (dir / "bad.jsonl").string() + " --out " + (dir / "out").string())
                       .c_str());
  CHECK(WEXITSTATUS(rc) == 4);

  const fs::path scenario = write_mini_scenario(dir);
  rc = std::system((quiet + bin + " simulate --scenario " + scenario.string() +
                    " --seed 1 --out " + (dir / "ok").string())
                       .c_str());
  CHECK(WEXITSTATUS(rc) == 0);
}
