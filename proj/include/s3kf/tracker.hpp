#pragma once

#include <optional>
#include <vector>

#include "s3kf/association.hpp"
#include "s3kf/filter.hpp"
#include "s3kf/measurement.hpp"

namespace s3kf {

/// One camera frame plus the LiDAR observations that arrived since the
/// previous frame.
struct FrameInput {
  double t = 0.0;
  std::vector<CameraDetection> detections;
  std::vector<LidarDepthObs> lidar_obs;
};

/// Output row for one confirmed track at one frame.
struct TrackRecord {
  double t = 0.0;
  int64_t id = -1;
  UnitBearing bearing;
  double depth = 0.0;
  Eigen::Vector2d planar = Eigen::Vector2d::Zero();  // depth * bearing_xy [m]
  StateVec cov_diag = StateVec::Zero();
};

/// Initial covariance diagonal for freshly spawned tracks.
struct InitCovariance {
  double dir_sigma_px_scale = 2.0;  // direction std = scale * sigma_px / f_ang
  double w_dot = 0.5;               // rad/s
  double aspect = 0.1;
  double aspect_dot = 0.1;
  double box_h_px_scale = 2.0;      // box-height std = scale * sigma_px
  double box_h_dot = 20.0;          // px/s
  double depth = 0.5;               // m
  double depth_dot = 1.0;           // m/s
};

struct TrackerConfig {
  MeasurementConfig measurement;
  AssociationConfig association;
  ProcessNoiseSigmas process_noise;
  InitCovariance init_cov;
  double height_init = 1.7;       // initial physical-height estimate [m]
  double height_ema_alpha = 0.05; // EMA gain for the height estimate
  // LiDAR-to-track gate: half-width 3*sigma_w around the predicted azimuth,
  // but never narrower than this floor.
  double lidar_gate_floor = 0.05;  // rad
};

/// Spherical-state multi-object tracker: per frame, predict, re-center each
/// chart at the predicted bearing, run two-stage gated assignment, apply
/// image then LiDAR updates, reproject onto the sphere, and age the tracks.
class SphericalTracker {
 public:
  explicit SphericalTracker(TrackerConfig cfg = {});

  /// Process one frame; returns output rows for confirmed tracks.
  /// Throws NonMonotonicTimeError if frame.t precedes the previous frame.
  std::vector<TrackRecord> step(const FrameInput& frame);

  const std::vector<TrackHypothesis>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return cfg_; }
  int64_t next_id() const { return next_id_; }

 private:
  TrackHypothesis spawn(const CameraDetection& det, double t);
  void apply_lidar_updates(std::vector<size_t>& matched_track_idx,
                           const FrameInput& frame);

  TrackerConfig cfg_;
  std::vector<TrackHypothesis> tracks_;
  int64_t next_id_ = 1;
  std::optional<double> last_t_;
};

/// Shortest signed angular difference a-b wrapped into (-pi, pi].
double wrap_angle(double a);

}  // namespace s3kf
