#include "s3kf/harness.hpp"

#include <chrono>

#include <nlohmann/json.hpp>

#include "s3kf/errors.hpp"
#include "s3kf/log.hpp"
#include "s3kf/pixel_tracker.hpp"

namespace s3kf {

using nlohmann::json;
namespace fs = std::filesystem;

void run_simulate(const fs::path& scenario_path, uint64_t seed, const fs::path& out_dir) {
  const Scenario scenario = load_scenario(scenario_path);
  log_info("simulate: scenario '" + scenario.name + "', seed " + std::to_string(seed));

  const GroundTruthLog gt = generate_ground_truth(scenario, seed);
  write_ground_truth(out_dir / "gt.jsonl", gt);

  DetectionStream stream;
  stream.img_h = scenario.img_h;
  stream.camera_rate = scenario.camera_rate;
  const int n_frames = scenario.frame_count();
  stream.frames.reserve(static_cast<size_t>(n_frames));
  for (int f = 0; f < n_frames; ++f) {
    stream.frames.emplace_back(f / scenario.camera_rate,
                               render_camera_frame(scenario, f, seed));
  }
  write_detections(out_dir / "detections.jsonl", stream);
  write_lidar(out_dir / "lidar.jsonl", render_lidar_sweeps(scenario, seed));

  write_manifest(out_dir / "manifest.json", "simulate", seed,
                 fnv1a_hex(read_file(scenario_path)), scenario_to_json(scenario),
                 nullptr);
}

void run_track(const fs::path& detections_path, const fs::path& lidar_path,
               const std::optional<fs::path>& config_path, const std::string& engine,
               const fs::path& out_dir, bool with_timings) {
  if (engine != "spherical" && engine != "pixel") {
    throw ConfigError("unknown engine: " + engine + " (expected spherical|pixel)");
  }
  const DetectionStream dets = read_detections(detections_path);
  const std::vector<LidarDepthObs> lidar = read_lidar(lidar_path);
  const std::vector<FrameInput> frames = assemble_frames(dets, lidar);

  TrackerConfig cfg;
  bool cfg_sets_img_h = false;
  if (config_path) {
    cfg = load_tracker_config(*config_path);
    const json raw = json::parse(read_file(*config_path));
    cfg_sets_img_h = raw.contains("measurement") && raw["measurement"].contains("img_h");
  }
  if (!cfg_sets_img_h) {
    cfg.measurement.img_h = dets.img_h;  // camera geometry from the stream meta
  }
  log_info("track: engine=" + engine + ", " + std::to_string(frames.size()) + " frames");

  std::vector<TrackRecord> records;
  std::vector<double> step_ms;
  step_ms.reserve(frames.size());
  const auto wall0 = std::chrono::steady_clock::now();

  auto run_engine = [&](auto& tracker) {
    for (const FrameInput& frame : frames) {
      const auto t0 = std::chrono::steady_clock::now();
      std::vector<TrackRecord> rows = tracker.step(frame);
      const auto t1 = std::chrono::steady_clock::now();
      step_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      records.insert(records.end(), rows.begin(), rows.end());
    }
  };
  if (engine == "spherical") {
    SphericalTracker tracker(cfg);
    run_engine(tracker);
  } else {
    PixelTracker tracker(cfg);
    run_engine(tracker);
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

  write_tracks(out_dir / "tracks.jsonl", records, engine);

  json cfg_with_engine = json::parse(tracker_config_to_json(cfg));
  cfg_with_engine["engine"] = engine;
  const TimingStats ts = timing_stats_from_samples(step_ms, wall);
  write_manifest(out_dir / "manifest.json", "track", 0,
                 fnv1a_hex(read_file(detections_path)), cfg_with_engine.dump(2),
                 with_timings ? &ts : nullptr);
}

void run_eval(const fs::path& tracks_path, const fs::path& gt_path,
              const fs::path& out_dir) {
  const std::vector<TrackRecord> tracks = read_tracks(tracks_path);
  const GroundTruthLog gt = read_ground_truth(gt_path);

  const MetricsReport report = evaluate(tracks, gt);
  write_metrics_json(out_dir / "metrics.json", report);
  write_errors_csv(out_dir / "errors.csv", match_tracks_to_gt(tracks, gt));
  write_manifest(out_dir / "manifest.json", "eval", 0, fnv1a_hex(read_file(gt_path)),
                 "{}", nullptr);
}

void run_compare(const fs::path& scenario_path, uint64_t seed, const fs::path& out_dir) {
  const fs::path sim_dir = out_dir / "sim";
  run_simulate(scenario_path, seed, sim_dir);

  for (const std::string engine : {"spherical", "pixel"}) {
    const fs::path engine_dir = out_dir / engine;
    run_track(sim_dir / "detections.jsonl", sim_dir / "lidar.jsonl", std::nullopt,
              engine, engine_dir, /*with_timings=*/false);
    run_eval(engine_dir / "tracks.jsonl", sim_dir / "gt.jsonl", engine_dir);
  }

  json side_by_side{{"schema_version", kSchemaVersion},
                    {"scenario", load_scenario(scenario_path).name},
                    {"seed", seed}};
  for (const std::string engine : {"spherical", "pixel"}) {
    side_by_side["engines"][engine] =
        json::parse(read_file(out_dir / engine / "metrics.json"));
  }
  atomic_write(out_dir / "comparison.json", side_by_side.dump(2) + "\n");
}

}  // namespace s3kf
