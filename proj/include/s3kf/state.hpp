#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "s3kf/sphere.hpp"

namespace s3kf {

inline constexpr int kStateDim = 10;

using StateVec = Eigen::Matrix<double, kStateDim, 1>;
using StateCov = Eigen::Matrix<double, kStateDim, kStateDim>;

/// Frozen state-vector layout. Every observation matrix in the measurement
/// module indexes these positions.
namespace idx {
inline constexpr int kW1 = 0;        // tangent coord 1 [rad]
inline constexpr int kW2 = 1;        // tangent coord 2 [rad]
inline constexpr int kW1Dot = 2;     // [rad/s]
inline constexpr int kW2Dot = 3;     // [rad/s]
inline constexpr int kAspect = 4;    // box aspect ratio [-]
inline constexpr int kAspectDot = 5; // [1/s]
inline constexpr int kBoxH = 6;      // image-plane box height [px]
inline constexpr int kBoxHDot = 7;   // [px/s]
inline constexpr int kDepth = 8;     // [m]
inline constexpr int kDepthDot = 9;  // [m/s]
}  // namespace idx

/// Per-block white-noise-acceleration std devs driving the process noise.
struct ProcessNoiseSigmas {
  double direction = 0.5;  // rad/s^2, shared by w1 and w2
  double aspect = 0.1;     // 1/s^2
  double box_h = 20.0;     // px/s^2
  double depth = 1.0;      // m/s^2
};

/// State floors applied after every correction.
inline constexpr double kDepthMin = 0.1;   // m
inline constexpr double kAspectMin = 0.01;
inline constexpr double kBoxHMin = 1.0;    // px

/// Block-diagonal constant-velocity transition for the frozen layout
/// (position rows couple to their velocity rows with gain dt).
StateVec apply_state_floors(StateVec x);
Eigen::Matrix<double, kStateDim, kStateDim> build_transition(double dt);

/// Discrete white-noise-acceleration process noise:
/// per pair, sigma^2 * [[dt^4/4, dt^3/2], [dt^3/2, dt^2]].
Eigen::Matrix<double, kStateDim, kStateDim> build_process_noise(
    double dt, const ProcessNoiseSigmas& sigmas);

enum class TrackStatus : uint8_t { Tentative, Confirmed, Lost };

/// One tracked target: filtered state plus the chart it lives in.
struct TrackHypothesis {
  int64_t id = -1;
  StateVec state = StateVec::Zero();
  StateCov cov = StateCov::Zero();
  UnitBearing g_ref;
  TangentBasis basis;
  double height_est = 1.7;  // estimated physical height [m]
  TrackStatus status = TrackStatus::Tentative;
  int hits = 0;    // consecutive matched frames
  int misses = 0;  // consecutive unmatched frames
  double last_update = 0.0;

  TangentCoords w() const { return state.head<2>(); }
  TangentCoords w_dot() const { return state.segment<2>(idx::kW1Dot); }
  double aspect() const { return state[idx::kAspect]; }
  double box_h() const { return state[idx::kBoxH]; }
  double depth() const { return state[idx::kDepth]; }

  /// Current bearing estimate: chart point at the filtered tangent coords.
  UnitBearing bearing() const { return exp_map(g_ref, basis, w()); }
};

}  // namespace s3kf
