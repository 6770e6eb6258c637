#pragma once

#include <Eigen/Core>
#include <limits>
#include <utility>
#include <vector>

#include "s3kf/filter.hpp"
#include "s3kf/measurement.hpp"

namespace s3kf {

/// Gating, cost weighting, and lifecycle parameters.
struct AssociationConfig {
  double chi2_img = 9.488;    // chi^2 95% at 4 dof
  double chi2_lidar = 5.991;  // chi^2 95% at 2 dof
  double tau_high = 0.6;      // detection-score threshold, stage 1
  double tau_low = 0.1;       // detection-score threshold, stage 2
  double lambda_maha = 1.0;
  double lambda_iou = 1.0;
  double lambda_depth = 0.5;
  double sigma_d_gate = 1.0;  // depth-cost normalization [m]
  int confirm_hits = 3;       // consecutive hits for Tentative -> Confirmed
  int max_age_frames = 30;    // patience window before deletion
};

/// Axis-aligned angular bounding box: a bearing plus angular extents [rad].
struct AngularBox {
  UnitBearing center;
  double width = 0.0;   // rad
  double height = 0.0;  // rad
};

/// Box of a detection or track from its pixel-space size: height h_px/f_ang,
/// width aspect*h_px/f_ang.
AngularBox angular_box(const UnitBearing& center, double aspect, double box_h_px,
                       double img_h);

/// IoU of the two boxes projected as rectangles onto the tangent plane at the
/// spherical midpoint of their centers. Antipodal centers yield 0.
double spherical_iou(const AngularBox& a, const AngularBox& b);

/// Dense cost matrix with a feasibility mask. Infeasible entries hold +inf.
struct CostMatrix {
  Eigen::MatrixXd cost;                      // tracks x detections
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> feasible;

  Eigen::Index rows() const { return cost.rows(); }
  Eigen::Index cols() const { return cost.cols(); }
};

/// Composite association cost:
/// lambda_maha * D^2/chi2_img + lambda_iou * (1 - sIoU)
/// + lambda_depth * |d_track - d_det| / sigma_d_gate,
/// with entries gated infeasible when D^2 > chi2_img (or the image packet
/// cannot be formed at all).
CostMatrix build_cost_matrix(const std::vector<TrackHypothesis>& tracks,
                             const std::vector<CameraDetection>& detections,
                             const AssociationConfig& cfg,
                             const MeasurementConfig& mcfg);

/// Maximum-cardinality, minimum-total-cost one-to-one matching over the
/// feasible entries. Ties between equal-cost optima are broken toward the
/// lexicographically smallest (row, column) pairing. Deterministic.
std::vector<std::pair<int, int>> solve_assignment(const CostMatrix& cm);

}  // namespace s3kf
