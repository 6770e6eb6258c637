#include "s3kf/measurement.hpp"

#include <cmath>

#include "s3kf/errors.hpp"

namespace s3kf {

double depth_from_box(double box_h_det, double height_est, double img_h,
                      double h_px_min) {
  if (box_h_det <= h_px_min) {
    throw DegenerateBoxError("depth_from_box: box height <= " +
                             std::to_string(h_px_min) + " px, depth diverges");
  }
  const double alpha = M_PI * box_h_det / (2.0 * img_h);
  return 0.5 * height_est / std::tan(0.5 * alpha);
}

double height_obs_from_depth(double depth_obs, double height_est, double img_h) {
  const double alpha_exp = 2.0 * std::atan(height_est / (2.0 * depth_obs));
  return alpha_exp * angular_gain(img_h);
}

double depth_from_box_jacobian(double box_h_det, double height_est, double img_h) {
  const double half_alpha = M_PI * box_h_det / (4.0 * img_h);
  const double s = std::sin(half_alpha);
  return -(M_PI * height_est) / (8.0 * img_h * s * s);
}

namespace {

Eigen::MatrixXd selector(std::initializer_list<int> rows) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), kStateDim);
  int r = 0;
  for (int c : rows) H(r++, c) = 1.0;
  return H;
}

}  // namespace

MeasurementPacket image_measurement(const CameraDetection& det,
                                    const TrackHypothesis& track,
                                    const MeasurementConfig& cfg) {
  const TangentCoords w_det = log_map(track.g_ref, track.basis, det.bearing);
  const double d_det =
      depth_from_box(det.box_h_det, track.height_est, cfg.img_h, cfg.h_px_min);

  MeasurementPacket pkt;
  pkt.t = det.t;
  pkt.modality = Modality::Image;
  pkt.z.resize(4);
  pkt.z << w_det.x(), w_det.y(), det.aspect_det, d_det;
  pkt.H = selector({idx::kW1, idx::kW2, idx::kAspect, idx::kDepth});

  const double var_dir = std::pow(cfg.sigma_px / angular_gain(cfg.img_h), 2);
  const double jac = depth_from_box_jacobian(det.box_h_det, track.height_est, cfg.img_h);
  const double var_d = jac * jac * cfg.sigma_px * cfg.sigma_px;
  pkt.R = Eigen::Vector4d(var_dir, var_dir, cfg.sigma_aspect * cfg.sigma_aspect, var_d)
              .asDiagonal();

  pkt.box_h_raw = det.box_h_det;
  pkt.box_h_var = cfg.sigma_px * cfg.sigma_px;
  return pkt;
}

MeasurementPacket lidar_measurement(const LidarDepthObs& obs,
                                    const TrackHypothesis& track,
                                    const MeasurementConfig& cfg) {
  const double h_obs = height_obs_from_depth(obs.depth, track.height_est, cfg.img_h);

  MeasurementPacket pkt;
  pkt.t = obs.t;
  pkt.modality = Modality::Lidar;
  pkt.z.resize(2);
  pkt.z << h_obs, obs.depth;
  pkt.H = selector({idx::kBoxH, idx::kDepth});

  const double var_d =
      std::max(obs.spread * obs.spread, cfg.sigma_d_min * cfg.sigma_d_min);
  // The box-height row is derived from the depth; propagate the depth
  // variance through the conversion and keep a pixel-level floor.
  const double gain = angular_gain(cfg.img_h);
  const double half = track.height_est / (2.0 * obs.depth);
  const double dh_dd = -gain * track.height_est / (2.0 * obs.depth * obs.depth) /
                       (1.0 + half * half);
  const double var_h = std::max(dh_dd * dh_dd * var_d, 4.0);
  pkt.R = Eigen::Vector2d(var_h, var_d).asDiagonal();
  return pkt;
}

MeasurementPacket joint_measurement(const MeasurementPacket& img_pkt,
                                    const MeasurementPacket& lidar_pkt,
                                    const MeasurementConfig& cfg) {
  if (img_pkt.modality != Modality::Image || lidar_pkt.modality != Modality::Lidar) {
    throw DimensionMismatch("joint_measurement: expected an image and a lidar packet");
  }
  if (std::abs(img_pkt.t - lidar_pkt.t) > cfg.dt_sync) {
    throw SyncError("joint_measurement: packet timestamps diverge beyond dt_sync");
  }

  MeasurementPacket pkt;
  pkt.t = img_pkt.t;
  pkt.modality = Modality::Joint;
  // Box-height row carries the raw pixel detection; the depth row carries the
  // LiDAR observation. The image packet's derived depth is dropped in favor
  // of the direct one.
  pkt.z.resize(5);
  pkt.z << img_pkt.z[0], img_pkt.z[1], img_pkt.z[2], img_pkt.box_h_raw,
      lidar_pkt.z[1];
  pkt.H = selector({idx::kW1, idx::kW2, idx::kAspect, idx::kBoxH, idx::kDepth});

  Eigen::VectorXd rdiag(5);
  rdiag << img_pkt.R(0, 0), img_pkt.R(1, 1), img_pkt.R(2, 2), img_pkt.box_h_var,
      lidar_pkt.R(1, 1);
  pkt.R = rdiag.asDiagonal();
  return pkt;
}

}  // namespace s3kf
