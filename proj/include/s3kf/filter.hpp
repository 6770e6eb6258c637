#pragma once

#include "s3kf/measurement.hpp"
#include "s3kf/state.hpp"

namespace s3kf {

/// Innovation-covariance eigenvalues are clamped below at this floor before
/// inversion.
inline constexpr double kInnovationEigFloor = 1e-9;

/// Symmetric inverse of S = H P H^T + R with eigenvalues clamped at
/// kInnovationEigFloor. Throws SingularInnovation on non-finite input.
Eigen::MatrixXd clamped_innovation_inverse(const Eigen::MatrixXd& S);

/// Constant-velocity propagation of state and covariance in the current
/// chart; the reference bearing and basis are untouched.
TrackHypothesis predict(const TrackHypothesis& track, double dt,
                        const ProcessNoiseSigmas& sigmas);

/// Standard Kalman correction on the locally Euclidean state with the
/// Joseph-form covariance update, symmetrization, and state floors.
TrackHypothesis kalman_update(const TrackHypothesis& track,
                              const MeasurementPacket& pkt);

/// Squared Mahalanobis distance of the packet residual in measurement space.
double mahalanobis_sq(const MeasurementPacket& pkt, const TrackHypothesis& track);

/// Absorb the filtered tangent coordinates into the reference bearing:
/// g_ref <- exp(g_ref, B, w), basis recomputed, velocities and the direction
/// block of the covariance parallel-transported into the new frame, w <- 0.
TrackHypothesis finalize_on_sphere(const TrackHypothesis& track);

}  // namespace s3kf
