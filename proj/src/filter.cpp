#include "s3kf/filter.hpp"

#include <Eigen/Dense>

#include "s3kf/errors.hpp"

namespace s3kf {

Eigen::MatrixXd clamped_innovation_inverse(const Eigen::MatrixXd& S) {
  if (!S.allFinite()) {
    throw SingularInnovation("innovation covariance has non-finite entries");
  }
  const Eigen::MatrixXd S_sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S_sym);
  if (eig.info() != Eigen::Success) {
    throw SingularInnovation("innovation eigendecomposition failed");
  }
  Eigen::VectorXd lam = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    lam[i] = std::max(lam[i], kInnovationEigFloor);
  }
  return eig.eigenvectors() * lam.cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

TrackHypothesis predict(const TrackHypothesis& track, double dt,
                        const ProcessNoiseSigmas& sigmas) {
  if (dt < 0.0) {
    throw NegativeDtError("predict: dt must be >= 0");
  }
  TrackHypothesis out = track;
  if (dt == 0.0) {
    return out;
  }
  const auto F = build_transition(dt);
  const auto Q = build_process_noise(dt, sigmas);
  out.state = F * track.state;
  out.cov = F * track.cov * F.transpose() + Q;
  return out;
}

TrackHypothesis kalman_update(const TrackHypothesis& track,
                              const MeasurementPacket& pkt) {
  const Eigen::Index m = pkt.z.size();
  if (pkt.H.rows() != m || pkt.H.cols() != kStateDim || pkt.R.rows() != m ||
      pkt.R.cols() != m) {
    throw DimensionMismatch("kalman_update: z/H/R dimensions are inconsistent");
  }

  const Eigen::MatrixXd S = pkt.H * track.cov * pkt.H.transpose() + pkt.R;
  const Eigen::MatrixXd S_inv = clamped_innovation_inverse(S);
  const Eigen::MatrixXd K = track.cov * pkt.H.transpose() * S_inv;

  TrackHypothesis out = track;
  out.state = track.state + K * (pkt.z - pkt.H * track.state);

  const StateCov I = StateCov::Identity();
  const StateCov IKH = I - K * pkt.H;
  StateCov P = IKH * track.cov * IKH.transpose() + K * pkt.R * K.transpose();
  out.cov = 0.5 * (P + P.transpose());
  out.state = apply_state_floors(out.state);
  return out;
}

double mahalanobis_sq(const MeasurementPacket& pkt, const TrackHypothesis& track) {
  const Eigen::Index m = pkt.z.size();
  if (pkt.H.rows() != m || pkt.H.cols() != kStateDim || pkt.R.rows() != m ||
      pkt.R.cols() != m) {
    throw DimensionMismatch("mahalanobis_sq: z/H/R dimensions are inconsistent");
  }
  const Eigen::MatrixXd S = pkt.H * track.cov * pkt.H.transpose() + pkt.R;
  const Eigen::VectorXd y = pkt.z - pkt.H * track.state;
  return y.dot(clamped_innovation_inverse(S) * y);
}

TrackHypothesis finalize_on_sphere(const TrackHypothesis& track) {
  const TangentCoords w = track.w();

  TrackHypothesis out = track;
  out.g_ref = exp_map(track.g_ref, track.basis, w);  // throws ChartDomainError
  out.basis = make_tangent_basis(out.g_ref);

  const Eigen::Matrix2d T = parallel_transport(track.basis, out.basis);
  out.state.head<2>().setZero();
  out.state.segment<2>(idx::kW1Dot) = T * track.w_dot();

  // The four direction rows/cols change frame with the basis.
  Eigen::Matrix4d J4 = Eigen::Matrix4d::Zero();
  J4.topLeftCorner<2, 2>() = T;
  J4.bottomRightCorner<2, 2>() = T;
  StateCov J = StateCov::Identity();
  J.topLeftCorner<4, 4>() = J4;
  StateCov P = J * track.cov * J.transpose();
  out.cov = 0.5 * (P + P.transpose());
  return out;
}

}  // namespace s3kf
