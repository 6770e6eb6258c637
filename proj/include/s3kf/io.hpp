#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "s3kf/metrics.hpp"
#include "s3kf/simulator.hpp"
#include "s3kf/tracker.hpp"

namespace s3kf {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a 64-bit hash, hex-encoded; used for config/scenario fingerprints.
std::string fnv1a_hex(const std::string& data);

/// Write `content` to `path` atomically (temp file + rename).
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/// Scenario config from JSON. Unknown patterns or missing required fields
/// raise ConfigError naming the offending field.
Scenario load_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const Scenario& scenario);

/// Tracker config from JSON; every field optional, defaults preserved.
TrackerConfig load_tracker_config(const std::filesystem::path& path);
std::string tracker_config_to_json(const TrackerConfig& cfg);

// ---- JSONL streams. Every record carries schema_version; readers raise
// ---- SchemaError on unknown versions or malformed records.

void write_ground_truth(const std::filesystem::path& path, const GroundTruthLog& log);
GroundTruthLog read_ground_truth(const std::filesystem::path& path);

struct DetectionStream {
  double img_h = 1000.0;
  double camera_rate = 30.0;
  std::vector<std::pair<double, std::vector<CameraDetection>>> frames;
};

void write_detections(const std::filesystem::path& path, const DetectionStream& stream);
DetectionStream read_detections(const std::filesystem::path& path);

void write_lidar(const std::filesystem::path& path,
                 const std::vector<LidarDepthObs>& obs);
std::vector<LidarDepthObs> read_lidar(const std::filesystem::path& path);

void write_tracks(const std::filesystem::path& path,
                  const std::vector<TrackRecord>& records,
                  const std::string& engine);
std::vector<TrackRecord> read_tracks(const std::filesystem::path& path);

/// Merge a detection stream and a LiDAR stream into per-frame inputs; each
/// frame carries the observations with t in (previous frame, this frame].
std::vector<FrameInput> assemble_frames(const DetectionStream& dets,
                                        const std::vector<LidarDepthObs>& lidar);

/// Per-step latency statistics recorded in the run manifest.
struct TimingStats {
  double wall_seconds = 0.0;
  double p50_ms = 0.0;
  double p90_ms = 0.0;
  double p99_ms = 0.0;
  double max_ms = 0.0;
  int steps = 0;
};

TimingStats timing_stats_from_samples(std::vector<double> step_ms,
                                      double wall_seconds);

/// Manifest written next to every output. `timings == nullptr` omits the
/// timing section, keeping the file reproducible for determinism checks.
void write_manifest(const std::filesystem::path& path, const std::string& command,
                    uint64_t seed, const std::string& scenario_hash,
                    const std::string& effective_config_json,
                    const TimingStats* timings);

void write_metrics_json(const std::filesystem::path& path, const MetricsReport& report);
void write_errors_csv(const std::filesystem::path& path,
                      const std::vector<FrameMatching>& matching);

}  // namespace s3kf
