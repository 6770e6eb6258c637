#pragma once

#include <optional>
#include <vector>

#include "s3kf/tracker.hpp"

namespace s3kf {

/// Equirectangular projection used by the pixel baseline. The canvas spans
/// the full sphere at the same angular gain as the spherical modules:
/// width W = 4*img_h (2*pi of azimuth), height 2*img_h (pi of elevation).
Eigen::Vector2d project_equirect(const UnitBearing& bearing, double img_h);
UnitBearing unproject_equirect(const Eigen::Vector2d& uv, double img_h);

inline constexpr int kPixelStateDim = 8;
using PixelStateVec = Eigen::Matrix<double, kPixelStateDim, 1>;
using PixelStateCov = Eigen::Matrix<double, kPixelStateDim, kPixelStateDim>;

namespace pixel_idx {
inline constexpr int kU = 0;  // azimuth column [px]
inline constexpr int kV = 1;  // elevation row [px]
inline constexpr int kUDot = 2;
inline constexpr int kVDot = 3;
inline constexpr int kAspect = 4;
inline constexpr int kAspectDot = 5;
inline constexpr int kBoxH = 6;
inline constexpr int kBoxHDot = 7;
}  // namespace pixel_idx

struct PixelTrack {
  int64_t id = -1;
  PixelStateVec state = PixelStateVec::Zero();
  PixelStateCov cov = PixelStateCov::Zero();
  TrackStatus status = TrackStatus::Tentative;
  int hits = 0;
  int misses = 0;
};

/// Image-plane baseline: same detections, score stages, and lifecycle as the
/// spherical tracker, but the state is a pixel-space CV filter on the
/// equirectangular canvas with a pixel IoU cost.
///
/// Deliberately NO azimuth wrapping anywhere — not in the motion model, not
/// in the residual, not in the IoU. A target crossing the +-pi seam makes the
/// pixel residual jump by ~W, the gate fails, and a new identity is spawned.
/// That representational failure is the behavior under comparison; do not
/// "fix" it.
class PixelTracker {
 public:
  explicit PixelTracker(TrackerConfig cfg = {});

  std::vector<TrackRecord> step(const FrameInput& frame);

  const std::vector<PixelTrack>& tracks() const { return tracks_; }

 private:
  PixelTrack spawn(const CameraDetection& det);
  double pair_cost(const PixelTrack& trk, const Eigen::Vector4d& z,
                   bool* feasible) const;

  TrackerConfig cfg_;
  std::vector<PixelTrack> tracks_;
  int64_t next_id_ = 1;
  std::optional<double> last_t_;
};

}  // namespace s3kf
