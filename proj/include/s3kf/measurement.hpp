#pragma once

#include <Eigen/Core>

#include "s3kf/sphere.hpp"
#include "s3kf/state.hpp"

namespace s3kf {

/// Linear angle<->pixel gain [px/rad]: the angle-to-pixel map is
/// alpha = pi * h_px / (2 * img_h), so f_ang = 2 * img_h / pi.
inline double angular_gain(double img_h) { return 2.0 * img_h / M_PI; }

struct CameraDetection {
  double t = 0.0;
  UnitBearing bearing;     // detection direction in the sensor frame
  double aspect_det = 0.0; // box aspect ratio
  double box_h_det = 0.0;  // image-plane box height [px]
  double score = 0.0;      // detector confidence in [0, 1]
};

struct LidarDepthObs {
  double t = 0.0;
  double azimuth = 0.0;  // sweep angle at emission [rad]
  double depth = 0.0;    // aggregated range [m]
  double spread = 0.0;   // robust std of the aggregated returns [m]
};

enum class Modality : uint8_t { Image, Lidar, Joint };

/// One ready-to-apply linear measurement (z, H, R).
struct MeasurementPacket {
  double t = 0.0;
  Eigen::VectorXd z;
  Eigen::MatrixXd H;  // rows x 10 selector
  Eigen::MatrixXd R;
  Modality modality = Modality::Image;
  // Raw box-height detection and its variance, kept so a synchronized pair
  // can be assembled into the 5-row joint packet.
  double box_h_raw = 0.0;
  double box_h_var = 0.0;
};

/// Camera geometry and measurement-noise configuration.
struct MeasurementConfig {
  double img_h = 1000.0;     // image height [px]
  double sigma_px = 2.0;     // pixel noise std [px]
  double sigma_aspect = 0.05;
  double sigma_d_min = 0.02; // LiDAR depth std floor [m]
  double h_px_min = 2.0;     // smallest usable box height [px]
  double dt_sync = 0.005;    // joint-packet sync window [s]
};

/// Depth implied by an image box height: alpha = pi*h/(2*img_h),
/// d = 0.5*height_est / tan(alpha/2).
double depth_from_box(double box_h_det, double height_est, double img_h,
                      double h_px_min = 2.0);

/// Expected box height for a measured depth; exact inverse of depth_from_box:
/// h = (4*img_h/pi) * atan(height_est / (2*depth_obs)).
double height_obs_from_depth(double depth_obs, double height_est, double img_h);

/// Derivative of depth_from_box w.r.t. the box height, used to propagate
/// pixel noise into the derived-depth variance.
double depth_from_box_jacobian(double box_h_det, double height_est, double img_h);

/// 4-dim image packet [w1, w2, aspect, derived depth].
MeasurementPacket image_measurement(const CameraDetection& det,
                                    const TrackHypothesis& track,
                                    const MeasurementConfig& cfg);

/// 2-dim LiDAR packet [expected box height, depth].
MeasurementPacket lidar_measurement(const LidarDepthObs& obs,
                                    const TrackHypothesis& track,
                                    const MeasurementConfig& cfg);

/// 5-dim joint packet [w1, w2, aspect, raw box height, LiDAR depth] from a
/// synchronized image/LiDAR pair. Throws SyncError beyond cfg.dt_sync.
MeasurementPacket joint_measurement(const MeasurementPacket& img_pkt,
                                    const MeasurementPacket& lidar_pkt,
                                    const MeasurementConfig& cfg);

}  // namespace s3kf
