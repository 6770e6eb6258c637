#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "s3kf/io.hpp"

namespace s3kf {

/// simulate: render gt.jsonl, detections.jsonl, lidar.jsonl, manifest.json.
void run_simulate(const std::filesystem::path& scenario_path, uint64_t seed,
                  const std::filesystem::path& out_dir);

/// track: read detection/LiDAR logs, run the selected engine, write
/// tracks.jsonl + manifest.json. `with_timings` controls whether per-step
/// latency percentiles go into the manifest (they are omitted inside
/// `compare`, whose output must be reproducible byte-for-byte).
void run_track(const std::filesystem::path& detections_path,
               const std::filesystem::path& lidar_path,
               const std::optional<std::filesystem::path>& config_path,
               const std::string& engine, const std::filesystem::path& out_dir,
               bool with_timings = true);

/// eval: metrics.json + errors.csv from a track log and ground truth.
void run_eval(const std::filesystem::path& tracks_path,
              const std::filesystem::path& gt_path,
              const std::filesystem::path& out_dir);

/// compare: simulate once, track with both engines, evaluate both, and write
/// a side-by-side comparison.json. Fully deterministic in (scenario, seed).
void run_compare(const std::filesystem::path& scenario_path, uint64_t seed,
                 const std::filesystem::path& out_dir);

}  // namespace s3kf
