#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "s3kf/simulator.hpp"
#include "s3kf/tracker.hpp"

namespace s3kf {

/// One frame of the GT-to-estimate matching: gt target id -> track id.
struct FrameMatching {
  double t = 0.0;
  std::map<int, int64_t> gt_to_track;
  std::map<int, double> planar_err;  // planar distance of each matched pair [m]
};

/// Per-frame greedy nearest-neighbor matching in the x-y plane.
///
/// GT frames are aligned to the nearest track-record time within half a
/// frame interval; within a frame, candidate pairs inside `radius` are taken
/// closest-first with ties broken by lower gt id, then lower track id.
std::vector<FrameMatching> match_tracks_to_gt(const std::vector<TrackRecord>& tracks,
                                              const GroundTruthLog& gt,
                                              double radius = 1.0);

/// RMSE of the planar error over matched frames, per GT target. Throws
/// NoMatchesError if some GT target was never matched.
std::map<int, double> planar_rmse(const GroundTruthLog& gt,
                                  const std::vector<FrameMatching>& matching);

struct SwitchCounts {
  std::map<int, int> per_target;  // matched-id changes per GT target
  int total_switches = 0;
  int max_id_total = 0;  // distinct track ids ever matched to any GT target
};

/// Identity-switch statistics from the matched-id sequences.
SwitchCounts identity_switches(const std::vector<FrameMatching>& matching);

struct TargetMetrics {
  int gt_id = 0;
  std::optional<double> rmse;  // empty when the target was never matched
  int switches = 0;
  int matched_frames = 0;
  int gt_frames = 0;
  double coverage = 0.0;              // matched / all gt frames
  double coverage_after_first = 0.0;  // matched / gt frames from first match on
};

struct MetricsReport {
  std::vector<TargetMetrics> per_target;
  int total_switches = 0;
  int max_id_total = 0;
};

/// Full evaluation used by the CLI: tolerant of never-matched targets.
MetricsReport evaluate(const std::vector<TrackRecord>& tracks,
                       const GroundTruthLog& gt, double radius = 1.0);

}  // namespace s3kf
