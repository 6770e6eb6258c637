#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <cmath>

#include "s3kf/errors.hpp"

namespace s3kf {

/// Chart / map constants. The antipodal margin bounds the log-map domain
/// (cos(theta) must exceed -1 + kAntipodalEps); below kSmallAngle the exp map
/// switches to its first-order branch.
inline constexpr double kAntipodalEps = 1e-6;
inline constexpr double kSmallAngle = 1e-7;

/// Unit direction on the sphere. Renormalized on every construction so the
/// norm-1 invariant holds within 1e-9 regardless of input rounding.
template <typename Scalar>
class UnitBearingT {
 public:
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

  UnitBearingT() : v_(Vec3::UnitX()) {}

  template <typename Derived>
  explicit UnitBearingT(const Eigen::MatrixBase<Derived>& v) : v_(v.normalized()) {}

  static UnitBearingT from_azimuth_elevation(Scalar azimuth, Scalar elevation) {
    using std::cos;
    using std::sin;
    return UnitBearingT(Vec3(cos(elevation) * cos(azimuth),
                             cos(elevation) * sin(azimuth), sin(elevation)));
  }

  const Vec3& vec() const { return v_; }
  Scalar x() const { return v_.x(); }
  Scalar y() const { return v_.y(); }
  Scalar z() const { return v_.z(); }

  Scalar azimuth() const { return std::atan2(v_.y(), v_.x()); }
  Scalar elevation() const { return std::asin(std::clamp(v_.z(), Scalar(-1), Scalar(1))); }

  /// Geodesic angle to another bearing, well conditioned over [0, pi].
  Scalar angle_to(const UnitBearingT& other) const {
    return std::atan2(v_.cross(other.v_).norm(), v_.dot(other.v_));
  }

 private:
  Vec3 v_;
};

/// Orthonormal 3x2 frame spanning the tangent plane at a reference bearing.
template <typename Scalar>
struct TangentBasisT {
  Eigen::Matrix<Scalar, 3, 2> B = Eigen::Matrix<Scalar, 3, 2>::Zero();

  Eigen::Matrix<Scalar, 3, 1> b1() const { return B.col(0); }
  Eigen::Matrix<Scalar, 3, 1> b2() const { return B.col(1); }
};

using UnitBearing = UnitBearingT<double>;
using TangentBasis = TangentBasisT<double>;
using TangentCoords = Eigen::Vector2d;

/// Deterministic orthonormal basis orthogonal to g.
///
/// Rule: pick the canonical axis e with the smallest |g.e| (ties broken by
/// lowest axis index), then b1 = normalize(e x g), b2 = g x b1.
template <typename Scalar>
TangentBasisT<Scalar> make_tangent_basis(const UnitBearingT<Scalar>& g) {
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
  const Vec3& v = g.vec();
  const Scalar ax = std::abs(v.x());
  const Scalar ay = std::abs(v.y());
  const Scalar az = std::abs(v.z());

  Vec3 e = Vec3::Zero();
  if (ax <= ay && ax <= az) {
    e = Vec3::UnitX();
  } else if (ay <= az) {
    e = Vec3::UnitY();
  } else {
    e = Vec3::UnitZ();
  }

  TangentBasisT<Scalar> basis;
  basis.B.col(0) = e.cross(v).normalized();
  basis.B.col(1) = v.cross(basis.B.col(0));
  return basis;
}

/// Tangent coordinates of g in the chart anchored at (g_ref, B).
///
/// w = B^T (theta * p_hat) where theta is the geodesic angle and p_hat the
/// normalized tangential projection of g; ||w|| = theta.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> log_map(const UnitBearingT<Scalar>& g_ref,
                                    const TangentBasisT<Scalar>& B,
                                    const UnitBearingT<Scalar>& g) {
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
  const Vec3& r = g_ref.vec();
  const Vec3& v = g.vec();

  const Scalar c = r.dot(v);
  if (c <= Scalar(-1) + Scalar(kAntipodalEps)) {
    throw AntipodalError("log_map: bearings are antipodal, displacement direction undefined");
  }

  const Vec3 p = v - c * r;  // tangential projection, |p| = sin(theta)
  const Scalar s = p.norm();
  const Scalar theta = std::atan2(s, c);
  if (s < Scalar(kSmallAngle)) {
    // theta ~ |p| to first order; error O(theta^3).
    return B.B.transpose() * p;
  }
  return B.B.transpose() * (p * (theta / s));
}

/// Point of the chart (g_ref, B) at tangent coordinates w.
///
/// g = g_ref cos(theta) + u sin(theta), theta = ||w||, u = B w / theta; the
/// first-order branch g ~ g_ref + B w is used below kSmallAngle. Result is
/// renormalized to unit length.
template <typename Scalar>
UnitBearingT<Scalar> exp_map(const UnitBearingT<Scalar>& g_ref,
                             const TangentBasisT<Scalar>& B,
                             const Eigen::Matrix<Scalar, 2, 1>& w) {
  using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
  const Scalar theta = w.norm();
  if (theta >= Scalar(M_PI)) {
    throw ChartDomainError("exp_map: ||w|| >= pi, outside the chart domain");
  }
  const Vec3 bw = B.B * w;
  if (theta < Scalar(kSmallAngle)) {
    return UnitBearingT<Scalar>(g_ref.vec() + bw);
  }
  return UnitBearingT<Scalar>(g_ref.vec() * std::cos(theta) +
                              (bw / theta) * std::sin(theta));
}

/// Frame-change matrix carrying tangent vectors from B_from to B_to:
/// T = B_to^T B_from, applied as v_new = T v_old.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 2> parallel_transport(const TangentBasisT<Scalar>& B_from,
                                               const TangentBasisT<Scalar>& B_to) {
  return B_to.B.transpose() * B_from.B;
}

}  // namespace s3kf
