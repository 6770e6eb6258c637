#include "s3kf/state.hpp"

#include <algorithm>

#include "s3kf/errors.hpp"

namespace s3kf {

StateVec apply_state_floors(StateVec x) {
  x[idx::kDepth] = std::max(x[idx::kDepth], kDepthMin);
  x[idx::kAspect] = std::max(x[idx::kAspect], kAspectMin);
  x[idx::kBoxH] = std::max(x[idx::kBoxH], kBoxHMin);
  return x;
}

Eigen::Matrix<double, kStateDim, kStateDim> build_transition(double dt) {
  if (dt < 0.0) {
    throw NegativeDtError("build_transition: dt must be >= 0");
  }
  Eigen::Matrix<double, kStateDim, kStateDim> F =
      Eigen::Matrix<double, kStateDim, kStateDim>::Identity();
  F(idx::kW1, idx::kW1Dot) = dt;
  F(idx::kW2, idx::kW2Dot) = dt;
  F(idx::kAspect, idx::kAspectDot) = dt;
  F(idx::kBoxH, idx::kBoxHDot) = dt;
  F(idx::kDepth, idx::kDepthDot) = dt;
  return F;
}

namespace {

void fill_dwna_block(Eigen::Matrix<double, kStateDim, kStateDim>& Q, int pos,
                     int vel, double sigma, double dt) {
  const double s2 = sigma * sigma;
  const double dt2 = dt * dt;
  Q(pos, pos) = s2 * dt2 * dt2 / 4.0;
  Q(pos, vel) = s2 * dt2 * dt / 2.0;
  Q(vel, pos) = Q(pos, vel);
  Q(vel, vel) = s2 * dt2;
}

}  // namespace

Eigen::Matrix<double, kStateDim, kStateDim> build_process_noise(
    double dt, const ProcessNoiseSigmas& sigmas) {
  if (dt <= 0.0) {
    throw NonPositiveDtError("build_process_noise: dt must be > 0");
  }
  if (sigmas.direction <= 0.0 || sigmas.aspect <= 0.0 || sigmas.box_h <= 0.0 ||
      sigmas.depth <= 0.0) {
    throw ConfigError("build_process_noise: all sigmas must be > 0");
  }
  Eigen::Matrix<double, kStateDim, kStateDim> Q =
      Eigen::Matrix<double, kStateDim, kStateDim>::Zero();
  fill_dwna_block(Q, idx::kW1, idx::kW1Dot, sigmas.direction, dt);
  fill_dwna_block(Q, idx::kW2, idx::kW2Dot, sigmas.direction, dt);
  fill_dwna_block(Q, idx::kAspect, idx::kAspectDot, sigmas.aspect, dt);
  fill_dwna_block(Q, idx::kBoxH, idx::kBoxHDot, sigmas.box_h, dt);
  fill_dwna_block(Q, idx::kDepth, idx::kDepthDot, sigmas.depth, dt);
  return Q;
}

}  // namespace s3kf
