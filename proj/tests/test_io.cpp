#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "s3kf/io.hpp"
#include "s3kf/rng.hpp"

using namespace s3kf;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("s3kf_io_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("scenario loading") {
  const fs::path dir = temp_dir("scenario");

  SUBCASE("a full scenario round-trips through its JSON form") {
    const std::string text = R"({
      "name": "mini",
      "duration": 5.0,
      "camera_rate": 30.0,
      "sweep_period": 0.5,
      "img_h": 800.0,
      "occlusion_angle": 0.08,
      "noise": {"sigma_px": 1.5, "sigma_depth": 0.04, "dropout_prob": 0.05},
      "targets": [
        {"pattern": "static", "position": [3, 1, 0], "body_height": 1.6},
        {"pattern": "circle_cw", "radius": 5.0, "azimuth_deg": -120.0, "angular_speed": 0.2},
        {"pattern": "radial", "azimuth_deg": 90.0, "r_min": 2.0, "r_max": 6.0, "period": 8.0}
      ]
    })";
    atomic_write(dir / "sc.json", text);
    const Scenario sc = load_scenario(dir / "sc.json");
    CHECK(sc.name == "mini");
    CHECK(sc.duration == 5.0);
    CHECK(sc.img_h == 800.0);
    CHECK(sc.noise.sigma_px == 1.5);
    CHECK(sc.noise.dropout_prob == 0.05);
    REQUIRE(sc.targets.size() == 3);
    CHECK(sc.targets[0].pattern == MotionPattern::Static);
    CHECK(sc.targets[0].body_height == 1.6);
    CHECK(sc.targets[1].pattern == MotionPattern::CircleCW);
    CHECK(sc.targets[1].azimuth0 == doctest::Approx(-120.0 * M_PI / 180.0));
    CHECK(sc.targets[2].pattern == MotionPattern::RadialOscillate);

    atomic_write(dir / "sc2.json", scenario_to_json(sc));
    const Scenario sc2 = load_scenario(dir / "sc2.json");
    CHECK(sc2.targets[1].azimuth0 == doctest::Approx(sc.targets[1].azimuth0));
    CHECK(sc2.noise.sigma_px == sc.noise.sigma_px);
  }
  SUBCASE("missing duration names the field") {
    atomic_write(dir / "bad.json", R"({"targets": [{"pattern":"static","position":[1,0,0]}]})");
    CHECK_THROWS_WITH_AS(load_scenario(dir / "bad.json"),
                         doctest::Contains("duration"), ConfigError);
  }
  SUBCASE("unknown pattern names the value") {
    atomic_write(dir / "bad2.json",
                 R"({"duration": 1.0, "targets": [{"pattern": "warp"}]})");
    CHECK_THROWS_WITH_AS(load_scenario(dir / "bad2.json"), doctest::Contains("warp"),
                         ConfigError);
  }
  SUBCASE("missing file raises IoError") {
    CHECK_THROWS_AS(load_scenario(dir / "nope.json"), IoError);
  }
}

TEST_CASE("tracker config round trip") {
  const fs::path dir = temp_dir("cfg");
  TrackerConfig cfg;
  cfg.association.tau_high = 0.7;
  cfg.process_noise.depth = 2.5;
  atomic_write(dir / "cfg.json", tracker_config_to_json(cfg));
  const TrackerConfig back = load_tracker_config(dir / "cfg.json");
  CHECK(back.association.tau_high == 0.7);
  CHECK(back.process_noise.depth == 2.5);
  CHECK(tracker_config_to_json(back) == tracker_config_to_json(cfg));
}

TEST_CASE("jsonl round trips") {
  const fs::path dir = temp_dir("jsonl");
  CounterRng rng = CounterRng::derive(77, 0);

  SUBCASE("ground truth") {
    GroundTruthLog log;
    for (int f = 0; f < 20; ++f) {
      for (int k = 0; k < 3; ++k) {
        log.push_back({f / 30.0, k,
                       Eigen::Vector3d(rng.gaussian(), rng.gaussian(), rng.gaussian())});
      }
    }
    write_ground_truth(dir / "gt.jsonl", log);
    const GroundTruthLog back = read_ground_truth(dir / "gt.jsonl");
    REQUIRE(back.size() == log.size());
    for (size_t i = 0; i < log.size(); ++i) {
      CHECK(back[i].t == log[i].t);
      CHECK(back[i].target_id == log[i].target_id);
      CHECK(back[i].position == log[i].position);
    }
  }
  SUBCASE("detections keep frame grouping and meta") {
    DetectionStream stream;
    stream.img_h = 640.0;
    stream.camera_rate = 15.0;
    for (int f = 0; f < 5; ++f) {
      std::vector<CameraDetection> dets;
      Eigen::Vector3d v(rng.gaussian(), rng.gaussian(), rng.gaussian());
      for (int k = 0; k < f % 3; ++k) {
        CameraDetection d;
        d.t = f / 15.0;
        d.bearing = UnitBearing{v};
        d.aspect_det = 0.4;
        d.box_h_det = 120.0 + k;
        d.score = 0.8;
        dets.push_back(d);
      }
      stream.frames.emplace_back(f / 15.0, dets);
    }
    write_detections(dir / "det.jsonl", stream);
    const DetectionStream back = read_detections(dir / "det.jsonl");
    CHECK(back.img_h == 640.0);
    CHECK(back.camera_rate == 15.0);
    REQUIRE(back.frames.size() == 5);
    CHECK(back.frames[2].second.size() == 2);
    CHECK(back.frames[2].second[1].box_h_det == 121.0);
    // Bearings renormalize on construction, so parsing is exact only to ulps.
    CHECK(back.frames[2].second[0].bearing.vec().isApprox(
        stream.frames[2].second[0].bearing.vec(), 1e-15));
  }
  SUBCASE("lidar") {
    std::vector<LidarDepthObs> obs;
    for (int i = 0; i < 10; ++i) {
      obs.push_back({0.1 * i, rng.uniform(-M_PI, M_PI), rng.uniform(1.0, 9.0), 0.05});
    }
    write_lidar(dir / "lidar.jsonl", obs);
    const auto back = read_lidar(dir / "lidar.jsonl");
    REQUIRE(back.size() == obs.size());
    for (size_t i = 0; i < obs.size(); ++i) {
      CHECK(back[i].t == obs[i].t);
      CHECK(back[i].azimuth == obs[i].azimuth);
      CHECK(back[i].depth == obs[i].depth);
    }
  }
  SUBCASE("tracks") {
    std::vector<TrackRecord> recs;
    for (int i = 0; i < 8; ++i) {
      TrackRecord r;
      r.t = i / 30.0;
      r.id = 100 + i;
      r.bearing = UnitBearing{Eigen::Vector3d(rng.gaussian(), rng.gaussian(), rng.gaussian())};
      r.depth = rng.uniform(1.0, 8.0);
      r.planar = r.depth * r.bearing.vec().head<2>();
      for (int k = 0; k < kStateDim; ++k) r.cov_diag[k] = rng.uniform01();
      recs.push_back(r);
    }
    write_tracks(dir / "tracks.jsonl", recs, "spherical");
    const auto back = read_tracks(dir / "tracks.jsonl");
    REQUIRE(back.size() == recs.size());
    for (size_t i = 0; i < recs.size(); ++i) {
      CHECK(back[i].id == recs[i].id);
      CHECK(back[i].bearing.vec().isApprox(recs[i].bearing.vec(), 1e-15));
      CHECK(back[i].cov_diag == recs[i].cov_diag);
    }
  }
}

TEST_CASE("schema version is enforced") {
  const fs::path dir = temp_dir("schema");
  {
    std::ofstream f(dir / "bad.jsonl");
    f << R"({"schema_version": 2, "t": 0.0, "target_id": 0, "position": [1,0,0]})" << "\n";
  }
  CHECK_THROWS_AS(read_ground_truth(dir / "bad.jsonl"), SchemaError);
  {
    std::ofstream f(dir / "none.jsonl");
    f << R"({"t": 0.0})" << "\n";
  }
  CHECK_THROWS_AS(read_ground_truth(dir / "none.jsonl"), SchemaError);
  {
    std::ofstream f(dir / "garbage.jsonl");
    f << "not json at all\n";
  }
  CHECK_THROWS_AS(read_ground_truth(dir / "garbage.jsonl"), SchemaError);
}

TEST_CASE("frame assembly attaches lidar to the right frames") {
  DetectionStream dets;
  dets.frames = {{0.0, {}}, {1.0 / 30, {}}, {2.0 / 30, {}}};
  std::vector<LidarDepthObs> lidar{{0.01, 0, 3, 0.05}, {0.05, 1, 4, 0.05},
                                   {0.9, 2, 5, 0.05}};
  const auto frames = assemble_frames(dets, lidar);
  REQUIRE(frames.size() == 3);
  CHECK(frames[0].lidar_obs.empty());      // t=0: nothing at or before
  CHECK(frames[1].lidar_obs.size() == 1);  // 0.01 <= 1/30
  CHECK(frames[2].lidar_obs.size() == 1);  // 0.05 <= 2/30
  CHECK(frames[2].lidar_obs[0].azimuth == 1.0);
  // The 0.9 s observation lands after the last frame and is dropped.
}

TEST_CASE("manifest and hashing") {
  const fs::path dir = temp_dir("manifest");
  CHECK(fnv1a_hex("abc") == fnv1a_hex("abc"));
  CHECK(fnv1a_hex("abc") != fnv1a_hex("abd"));

  TimingStats ts = timing_stats_from_samples({0.5, 1.0, 2.0, 4.0}, 1.23);
  CHECK(ts.steps == 4);
  CHECK(ts.max_ms == 4.0);

  write_manifest(dir / "manifest.json", "track", 42, "deadbeef", "{\"a\": 1}", &ts);
  const std::string with = read_file(dir / "manifest.json");
  CHECK(with.find("timings") != std::string::npos);
  CHECK(with.find("deadbeef") != std::string::npos);

  write_manifest(dir / "manifest2.json", "track", 42, "deadbeef", "{\"a\": 1}", nullptr);
  const std::string without = read_file(dir / "manifest2.json");
  CHECK(without.find("timings") == std::string::npos);
}

TEST_CASE("atomic write replaces content and leaves no temp file") {
  const fs::path dir = temp_dir("atomic");
  atomic_write(dir / "f.txt", "one");
  atomic_write(dir / "f.txt", "two");
  CHECK(read_file(dir / "f.txt") == "two");
  CHECK(!fs::exists(dir / "f.txt.tmp"));
}
