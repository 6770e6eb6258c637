#include "s3kf/pixel_tracker.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "s3kf/errors.hpp"

namespace s3kf {

Eigen::Vector2d project_equirect(const UnitBearing& bearing, double img_h) {
  const double W = 4.0 * img_h;
  const double u = W * (std::atan2(bearing.y(), bearing.x()) + M_PI) / (2.0 * M_PI);
  const double v = 2.0 * img_h * (M_PI / 2.0 - bearing.elevation()) / M_PI;
  return {u, v};
}

UnitBearing unproject_equirect(const Eigen::Vector2d& uv, double img_h) {
  const double W = 4.0 * img_h;
  const double az = uv.x() * 2.0 * M_PI / W - M_PI;
  const double el = M_PI / 2.0 - uv.y() * M_PI / (2.0 * img_h);
  return UnitBearing::from_azimuth_elevation(az, el);
}

namespace {

Eigen::Matrix<double, kPixelStateDim, kPixelStateDim> pixel_transition(double dt) {
  Eigen::Matrix<double, kPixelStateDim, kPixelStateDim> F =
      Eigen::Matrix<double, kPixelStateDim, kPixelStateDim>::Identity();
  F(pixel_idx::kU, pixel_idx::kUDot) = dt;
  F(pixel_idx::kV, pixel_idx::kVDot) = dt;
  F(pixel_idx::kAspect, pixel_idx::kAspectDot) = dt;
  F(pixel_idx::kBoxH, pixel_idx::kBoxHDot) = dt;
  return F;
}

Eigen::Matrix<double, kPixelStateDim, kPixelStateDim> pixel_process_noise(
    double dt, const TrackerConfig& cfg) {
  // Same white-noise-acceleration model as the spherical filter, with the
  // direction sigma mapped through the angular gain.
  const double gain = angular_gain(cfg.measurement.img_h);
  const double s_px = cfg.process_noise.direction * gain;
  auto block = [dt](double sigma) {
    const double s2 = sigma * sigma;
    Eigen::Matrix2d b;
    b << s2 * dt * dt * dt * dt / 4.0, s2 * dt * dt * dt / 2.0,
        s2 * dt * dt * dt / 2.0, s2 * dt * dt;
    return b;
  };
  Eigen::Matrix<double, kPixelStateDim, kPixelStateDim> Q =
      Eigen::Matrix<double, kPixelStateDim, kPixelStateDim>::Zero();
  auto put = [&](int pos, int vel, const Eigen::Matrix2d& b) {
    Q(pos, pos) = b(0, 0);
    Q(pos, vel) = b(0, 1);
    Q(vel, pos) = b(1, 0);
    Q(vel, vel) = b(1, 1);
  };
  put(pixel_idx::kU, pixel_idx::kUDot, block(s_px));
  put(pixel_idx::kV, pixel_idx::kVDot, block(s_px));
  put(pixel_idx::kAspect, pixel_idx::kAspectDot, block(cfg.process_noise.aspect));
  put(pixel_idx::kBoxH, pixel_idx::kBoxHDot, block(cfg.process_noise.box_h));
  return Q;
}

// Measurement selector for [u, v, aspect, box_h].
Eigen::Matrix<double, 4, kPixelStateDim> pixel_H() {
  Eigen::Matrix<double, 4, kPixelStateDim> H =
      Eigen::Matrix<double, 4, kPixelStateDim>::Zero();
  H(0, pixel_idx::kU) = 1.0;
  H(1, pixel_idx::kV) = 1.0;
  H(2, pixel_idx::kAspect) = 1.0;
  H(3, pixel_idx::kBoxH) = 1.0;
  return H;
}

double rect_iou(double ua, double va, double wa, double ha, double ub, double vb,
                double wb, double hb) {
  const double ix = std::min(ua + 0.5 * wa, ub + 0.5 * wb) -
                    std::max(ua - 0.5 * wa, ub - 0.5 * wb);
  const double iy = std::min(va + 0.5 * ha, vb + 0.5 * hb) -
                    std::max(va - 0.5 * ha, vb - 0.5 * hb);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = wa * ha + wb * hb - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace

PixelTracker::PixelTracker(TrackerConfig cfg) : cfg_(std::move(cfg)) {}

PixelTrack PixelTracker::spawn(const CameraDetection& det) {
  const Eigen::Vector2d uv = project_equirect(det.bearing, cfg_.measurement.img_h);
  PixelTrack trk;
  trk.id = next_id_++;
  trk.state.setZero();
  trk.state[pixel_idx::kU] = uv.x();
  trk.state[pixel_idx::kV] = uv.y();
  trk.state[pixel_idx::kAspect] = det.aspect_det;
  trk.state[pixel_idx::kBoxH] = det.box_h_det;

  const InitCovariance& ic = cfg_.init_cov;
  const double sig_uv = ic.dir_sigma_px_scale * cfg_.measurement.sigma_px;
  const double sig_uv_dot = ic.w_dot * angular_gain(cfg_.measurement.img_h);
  const double sig_box = ic.box_h_px_scale * cfg_.measurement.sigma_px;
  Eigen::Matrix<double, kPixelStateDim, 1> diag;
  diag << sig_uv * sig_uv, sig_uv * sig_uv, sig_uv_dot * sig_uv_dot,
      sig_uv_dot * sig_uv_dot, ic.aspect * ic.aspect, ic.aspect_dot * ic.aspect_dot,
      sig_box * sig_box, ic.box_h_dot * ic.box_h_dot;
  trk.cov = diag.asDiagonal();

  trk.status = TrackStatus::Tentative;
  trk.hits = 1;
  return trk;
}

double PixelTracker::pair_cost(const PixelTrack& trk, const Eigen::Vector4d& z,
                               bool* feasible) const {
  const auto H = pixel_H();
  const Eigen::Vector4d pred = H * trk.state;
  const double s_px = cfg_.measurement.sigma_px;
  const Eigen::Vector4d rdiag(s_px * s_px, s_px * s_px,
                              cfg_.measurement.sigma_aspect * cfg_.measurement.sigma_aspect,
                              s_px * s_px);
  const Eigen::Matrix4d S =
      H * trk.cov * H.transpose() + Eigen::Matrix4d(rdiag.asDiagonal());
  const Eigen::Vector4d y = z - pred;  // no azimuth wrap: the seam bug under test
  const double d2 = y.dot(clamped_innovation_inverse(S) * y);
  if (d2 > cfg_.association.chi2_img) {
    *feasible = false;
    return std::numeric_limits<double>::infinity();
  }
  *feasible = true;
  const double iou = rect_iou(pred[0], pred[1], pred[2] * pred[3], pred[3], z[0],
                              z[1], z[2] * z[3], z[3]);
  return cfg_.association.lambda_maha * d2 / cfg_.association.chi2_img +
         cfg_.association.lambda_iou * (1.0 - iou);
}

std::vector<TrackRecord> PixelTracker::step(const FrameInput& frame) {
  if (last_t_ && frame.t < *last_t_) {
    throw NonMonotonicTimeError("baseline_step: frame time went backwards");
  }
  const double dt = last_t_ ? frame.t - *last_t_ : 0.0;
  last_t_ = frame.t;

  if (dt > 0.0) {
    const auto F = pixel_transition(dt);
    const auto Q = pixel_process_noise(dt, cfg_);
    for (PixelTrack& trk : tracks_) {
      trk.state = F * trk.state;
      trk.cov = F * trk.cov * F.transpose() + Q;
    }
  }

  std::vector<CameraDetection> high_dets, low_dets;
  for (const CameraDetection& det : frame.detections) {
    if (det.score >= cfg_.association.tau_high) {
      high_dets.push_back(det);
    } else if (det.score >= cfg_.association.tau_low) {
      low_dets.push_back(det);
    }
  }
  auto to_z = [&](const CameraDetection& det) {
    const Eigen::Vector2d uv = project_equirect(det.bearing, cfg_.measurement.img_h);
    return Eigen::Vector4d(uv.x(), uv.y(), det.aspect_det, det.box_h_det);
  };

  std::vector<char> is_unmatched(tracks_.size(), 1);
  std::vector<char> det_used_high(high_dets.size(), 0);

  auto run_stage = [&](const std::vector<size_t>& track_idx,
                       const std::vector<CameraDetection>& dets,
                       std::vector<char>& det_used) {
    std::vector<size_t> live_dets;
    for (size_t j = 0; j < dets.size(); ++j) {
      if (!det_used[j]) live_dets.push_back(j);
    }
    if (track_idx.empty() || live_dets.empty()) return;

    CostMatrix cm;
    cm.cost = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(track_idx.size()),
                                        static_cast<Eigen::Index>(live_dets.size()),
                                        std::numeric_limits<double>::infinity());
    cm.feasible.setConstant(static_cast<Eigen::Index>(track_idx.size()),
                            static_cast<Eigen::Index>(live_dets.size()), false);
    for (size_t a = 0; a < track_idx.size(); ++a) {
      for (size_t b = 0; b < live_dets.size(); ++b) {
        bool ok = false;
        const double c =
            pair_cost(tracks_[track_idx[a]], to_z(dets[live_dets[b]]), &ok);
        if (ok) {
          cm.cost(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = c;
          cm.feasible(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = true;
        }
      }
    }
    for (const auto& [si, sj] : solve_assignment(cm)) {
      const size_t ti = track_idx[static_cast<size_t>(si)];
      const size_t dj = live_dets[static_cast<size_t>(sj)];
      PixelTrack& trk = tracks_[ti];
      const Eigen::Vector4d z = to_z(dets[dj]);
      const auto H = pixel_H();
      const double s_px = cfg_.measurement.sigma_px;
      const Eigen::Vector4d rdiag(
          s_px * s_px, s_px * s_px,
          cfg_.measurement.sigma_aspect * cfg_.measurement.sigma_aspect, s_px * s_px);
      const Eigen::Matrix4d R = rdiag.asDiagonal();
      const Eigen::Matrix4d S = H * trk.cov * H.transpose() + R;
      const Eigen::Matrix<double, kPixelStateDim, 4> K =
          trk.cov * H.transpose() * clamped_innovation_inverse(S);
      trk.state += K * (z - H * trk.state);
      const PixelStateCov IKH = PixelStateCov::Identity() - K * H;
      PixelStateCov P = IKH * trk.cov * IKH.transpose() + K * R * K.transpose();
      trk.cov = 0.5 * (P + P.transpose());
      is_unmatched[ti] = 0;
      det_used[dj] = 1;
    }
  };

  std::vector<size_t> stage1_idx;
  for (size_t i = 0; i < tracks_.size(); ++i) {
    if (tracks_[i].status != TrackStatus::Tentative) stage1_idx.push_back(i);
  }
  run_stage(stage1_idx, high_dets, det_used_high);

  std::vector<size_t> tentative_idx;
  for (size_t i = 0; i < tracks_.size(); ++i) {
    if (tracks_[i].status == TrackStatus::Tentative && is_unmatched[i]) {
      tentative_idx.push_back(i);
    }
  }
  run_stage(tentative_idx, high_dets, det_used_high);

  std::vector<size_t> unmatched_idx;
  for (size_t i = 0; i < tracks_.size(); ++i) {
    if (is_unmatched[i]) unmatched_idx.push_back(i);
  }
  std::vector<char> det_used_low(low_dets.size(), 0);
  run_stage(unmatched_idx, low_dets, det_used_low);

  for (size_t i = 0; i < tracks_.size(); ++i) {
    PixelTrack& trk = tracks_[i];
    if (!is_unmatched[i]) {
      trk.misses = 0;
      trk.hits += 1;
      if (trk.status == TrackStatus::Lost) {
        trk.status = TrackStatus::Confirmed;
      } else if (trk.status == TrackStatus::Tentative &&
                 trk.hits >= cfg_.association.confirm_hits) {
        trk.status = TrackStatus::Confirmed;
      }
    } else {
      trk.misses += 1;
      trk.hits = 0;
      trk.status = TrackStatus::Lost;
    }
  }
  std::erase_if(tracks_, [&](const PixelTrack& trk) {
    return trk.misses > cfg_.association.max_age_frames;
  });

  for (size_t j = 0; j < high_dets.size(); ++j) {
    if (!det_used_high[j]) tracks_.push_back(spawn(high_dets[j]));
  }

  std::vector<TrackRecord> out;
  for (const PixelTrack& trk : tracks_) {
    if (trk.status != TrackStatus::Confirmed) continue;
    TrackRecord rec;
    rec.t = frame.t;
    rec.id = trk.id;
    rec.bearing = unproject_equirect(trk.state.head<2>(), cfg_.measurement.img_h);
    double depth = kDepthMin;
    if (trk.state[pixel_idx::kBoxH] > cfg_.measurement.h_px_min) {
      depth = depth_from_box(trk.state[pixel_idx::kBoxH], cfg_.height_init,
                             cfg_.measurement.img_h, cfg_.measurement.h_px_min);
    }
    rec.depth = depth;
    rec.planar = depth * rec.bearing.vec().head<2>();
    // 8-dim pixel covariance padded into the 10-entry diagonal slot.
    rec.cov_diag.setZero();
    rec.cov_diag.head<kPixelStateDim>() = trk.cov.diagonal();
    out.push_back(rec);
  }
  return out;
}

}  // namespace s3kf
