#include "s3kf/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "s3kf/errors.hpp"
#include "s3kf/sphere.hpp"

namespace s3kf {

namespace {

// Stream labels for substream derivation.
constexpr uint64_t kStreamCamera = 1;
constexpr uint64_t kStreamDropout = 2;
constexpr uint64_t kStreamFalsePositive = 3;
constexpr uint64_t kStreamLidar = 4;

constexpr uint64_t kLabelStride = 1 << 16;

// Target azimuth as a continuous (unwrapped) function of time. Needed for
// monotone sweep-crossing root finding.
double unwrapped_azimuth(const TargetSpec& tgt, double t) {
  switch (tgt.pattern) {
    case MotionPattern::Static:
      return std::atan2(tgt.position.y(), tgt.position.x());
    case MotionPattern::CircleCW:
      return tgt.azimuth0 - tgt.angular_speed * t;
    case MotionPattern::CircleCCW:
      return tgt.azimuth0 + tgt.angular_speed * t;
    case MotionPattern::RadialOscillate:
      return tgt.azimuth0;
  }
  return 0.0;
}

}  // namespace

Eigen::Vector3d target_position(const TargetSpec& tgt, double t) {
  switch (tgt.pattern) {
    case MotionPattern::Static:
      return tgt.position;
    case MotionPattern::CircleCW:
    case MotionPattern::CircleCCW: {
      const double az = unwrapped_azimuth(tgt, t);
      return {tgt.radius * std::cos(az), tgt.radius * std::sin(az), tgt.z};
    }
    case MotionPattern::RadialOscillate: {
      const double mid = 0.5 * (tgt.r_min + tgt.r_max);
      const double amp = 0.5 * (tgt.r_max - tgt.r_min);
      const double r = mid + amp * std::sin(2.0 * M_PI * t / tgt.period + tgt.phase0);
      return {r * std::cos(tgt.azimuth0), r * std::sin(tgt.azimuth0), tgt.z};
    }
  }
  return Eigen::Vector3d::Zero();
}

GroundTruthLog generate_ground_truth(const Scenario& scenario, uint64_t /*seed*/) {
  if (scenario.duration <= 0.0 || scenario.camera_rate <= 0.0 ||
      scenario.sweep_period <= 0.0 || scenario.img_h <= 0.0) {
    throw ConfigError("generate_ground_truth: non-positive duration/rate/period/img_h");
  }
  for (const TargetSpec& tgt : scenario.targets) {
    if (tgt.body_height <= 0.0) {
      throw ConfigError("generate_ground_truth: target body_height must be > 0");
    }
  }
  GroundTruthLog log;
  const int n_frames = scenario.frame_count();
  log.reserve(static_cast<size_t>(n_frames) * scenario.targets.size());
  for (int f = 0; f < n_frames; ++f) {
    const double t = f / scenario.camera_rate;
    for (size_t k = 0; k < scenario.targets.size(); ++k) {
      log.push_back({t, static_cast<int>(k), target_position(scenario.targets[k], t)});
    }
  }
  return log;
}

std::vector<CameraDetection> render_camera_frame(const Scenario& scenario,
                                                 int frame, uint64_t seed) {
  const double t = frame / scenario.camera_rate;
  const double gain = angular_gain(scenario.img_h);
  const NoiseSpec& noise = scenario.noise;

  std::vector<Eigen::Vector3d> positions(scenario.targets.size());
  for (size_t k = 0; k < scenario.targets.size(); ++k) {
    positions[k] = target_position(scenario.targets[k], t);
  }

  std::vector<CameraDetection> dets;
  for (size_t k = 0; k < scenario.targets.size(); ++k) {
    const Eigen::Vector3d& p = positions[k];
    const double range = p.norm();
    const UnitBearing true_bearing{p};

    // Occluded when a strictly nearer target sits within the occlusion cone.
    bool occluded = false;
    for (size_t m = 0; m < scenario.targets.size(); ++m) {
      if (m == k) continue;
      if (positions[m].norm() < range &&
          true_bearing.angle_to(UnitBearing{positions[m]}) < scenario.occlusion_angle) {
        occluded = true;
        break;
      }
    }
    if (occluded) continue;

    CounterRng drop = CounterRng::derive(
        seed, kStreamDropout, static_cast<uint64_t>(frame) * kLabelStride + k);
    if (noise.dropout_prob > 0.0 && drop.uniform01() < noise.dropout_prob) continue;

    CounterRng rng = CounterRng::derive(
        seed, kStreamCamera, static_cast<uint64_t>(frame) * kLabelStride + k);

    CameraDetection det;
    det.t = t;
    const double sigma_dir = noise.sigma_px / gain;
    const TangentBasis basis = make_tangent_basis(true_bearing);
    const TangentCoords jitter(sigma_dir * rng.gaussian(), sigma_dir * rng.gaussian());
    det.bearing = exp_map(true_bearing, basis, jitter);

    const double alpha_true =
        2.0 * std::atan(scenario.targets[k].body_height / (2.0 * range));
    det.box_h_det = std::max(alpha_true * gain + noise.sigma_px * rng.gaussian(), 1.0);
    det.aspect_det =
        std::max(scenario.targets[k].aspect + noise.sigma_aspect * rng.gaussian(), 0.05);
    det.score = rng.uniform(noise.score_lo, noise.score_hi);
    dets.push_back(det);
  }

  if (noise.false_positive_rate > 0.0) {
    CounterRng rng =
        CounterRng::derive(seed, kStreamFalsePositive, static_cast<uint64_t>(frame));
    const int n_fp = rng.poisson(noise.false_positive_rate);
    for (int i = 0; i < n_fp; ++i) {
      CameraDetection det;
      det.t = t;
      const double z = rng.uniform(-1.0, 1.0);
      const double az = rng.uniform(0.0, 2.0 * M_PI);
      const double c = std::sqrt(std::max(1.0 - z * z, 0.0));
      det.bearing = UnitBearing{Eigen::Vector3d(c * std::cos(az), c * std::sin(az), z)};
      det.box_h_det = rng.uniform(20.0, 200.0);
      det.aspect_det = rng.uniform(0.2, 0.8);
      det.score = rng.uniform(0.1, 0.5);  // clutter never reaches tau_high
      dets.push_back(det);
    }
  }
  return dets;
}

std::vector<LidarDepthObs> render_lidar_sweeps(const Scenario& scenario,
                                               uint64_t seed) {
  std::vector<LidarDepthObs> all;
  const double T = scenario.sweep_period;
  const double D = scenario.duration;
  const NoiseSpec& noise = scenario.noise;

  for (size_t k = 0; k < scenario.targets.size(); ++k) {
    const TargetSpec& tgt = scenario.targets[k];
    // Sweep phase minus target azimuth; strictly increasing when the sweep
    // outruns the target (2*pi/T >> angular_speed), so each 2*pi increment
    // holds exactly one crossing.
    auto gap = [&](double t) { return 2.0 * M_PI * t / T - unwrapped_azimuth(tgt, t); };

    const double g0 = gap(0.0);
    const double g1 = gap(D);
    const int64_t k_lo = static_cast<int64_t>(std::ceil(g0 / (2.0 * M_PI)));
    const int64_t k_hi = static_cast<int64_t>(std::floor(g1 / (2.0 * M_PI)));

    for (int64_t n = k_lo; n <= k_hi; ++n) {
      const double target_gap = 2.0 * M_PI * static_cast<double>(n);
      double lo = 0.0, hi = D;
      for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (gap(mid) < target_gap) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const double t_cross = 0.5 * (lo + hi);
      if (t_cross >= D - 1e-9) continue;  // duration-exclusive, like frames

      const Eigen::Vector3d p = target_position(tgt, t_cross);
      CounterRng rng = CounterRng::derive(
          seed, kStreamLidar, static_cast<uint64_t>(n) * kLabelStride + k);
      LidarDepthObs obs;
      obs.t = t_cross;
      obs.azimuth = std::atan2(p.y(), p.x());
      obs.depth = std::max(p.norm() + noise.sigma_depth * rng.gaussian(), 1e-3);
      obs.spread = noise.sigma_depth;
      all.push_back(obs);
    }
  }

  std::sort(all.begin(), all.end(), [](const LidarDepthObs& a, const LidarDepthObs& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.azimuth < b.azimuth;
  });
  return all;
}

}  // namespace s3kf
