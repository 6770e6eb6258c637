#pragma once

#include <string>
#include <vector>

#include "s3kf/measurement.hpp"
#include "s3kf/rng.hpp"

namespace s3kf {

enum class MotionPattern : uint8_t { Static, CircleCW, CircleCCW, RadialOscillate };

/// One simulated target. Circle patterns orbit the sensor at fixed radius;
/// the radial pattern oscillates in range at fixed azimuth.
struct TargetSpec {
  MotionPattern pattern = MotionPattern::Static;
  Eigen::Vector3d position = Eigen::Vector3d(3.0, 0.0, 0.0);  // Static
  double radius = 5.0;         // m, circle patterns
  double azimuth0 = 0.0;       // rad, start azimuth (circle) / fixed azimuth (radial)
  double z = 0.0;              // m, height of the tracked point
  double angular_speed = 0.15; // rad/s, circle patterns
  double r_min = 2.5;          // m, radial pattern
  double r_max = 6.0;          // m
  double period = 10.0;        // s, radial pattern
  double phase0 = 0.0;         // rad, radial pattern
  double body_height = 1.7;    // m, physical height
  double aspect = 0.4;         // true box aspect ratio
};

struct NoiseSpec {
  double sigma_px = 2.0;          // detection pixel noise
  double sigma_depth = 0.05;      // LiDAR depth noise [m]
  double sigma_aspect = 0.02;     // aspect-ratio noise
  double dropout_prob = 0.0;      // per-target per-frame detection dropout
  double false_positive_rate = 0.0;  // expected false positives per frame
  double score_lo = 0.75;         // true-detection score range
  double score_hi = 0.95;
};

struct Scenario {
  std::string name = "scenario";
  double duration = 30.0;      // s
  double camera_rate = 30.0;   // Hz
  double sweep_period = 1.0;   // s per full LiDAR revolution
  double img_h = 1000.0;       // px
  double occlusion_angle = 0.06;  // rad; nearer target within this angle occludes
  std::vector<TargetSpec> targets;
  NoiseSpec noise;

  int frame_count() const { return static_cast<int>(duration * camera_rate + 0.5); }
};

struct GroundTruthRecord {
  double t = 0.0;
  int target_id = 0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

using GroundTruthLog = std::vector<GroundTruthRecord>;

/// True position of one target at time t (noise-free, deterministic).
Eigen::Vector3d target_position(const TargetSpec& target, double t);

/// Complete per-frame truth for every target; deterministic in (scenario, seed).
GroundTruthLog generate_ground_truth(const Scenario& scenario, uint64_t seed);

/// Camera detections for the frame at index `frame`: occlusion and dropout
/// filtering, tangent-plane bearing noise, pixel box noise, scored, plus
/// uniformly placed low-score false positives.
std::vector<CameraDetection> render_camera_frame(const Scenario& scenario,
                                                 int frame, uint64_t seed);

/// Depth observations of one full scenario. The sweep azimuth advances 2*pi
/// per sweep_period from azimuth 0 at t=0; each target yields one observation
/// per sweep at the azimuth-crossing instant (solved by bisection).
std::vector<LidarDepthObs> render_lidar_sweeps(const Scenario& scenario,
                                               uint64_t seed);

}  // namespace s3kf
