#include "s3kf/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "s3kf/errors.hpp"

namespace s3kf {

double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

SphericalTracker::SphericalTracker(TrackerConfig cfg) : cfg_(std::move(cfg)) {}

TrackHypothesis SphericalTracker::spawn(const CameraDetection& det, double t) {
  TrackHypothesis trk;
  trk.id = next_id_++;
  trk.g_ref = det.bearing;
  trk.basis = make_tangent_basis(trk.g_ref);
  trk.height_est = cfg_.height_init;

  trk.state.setZero();
  trk.state[idx::kAspect] = det.aspect_det;
  trk.state[idx::kBoxH] = det.box_h_det;
  trk.state[idx::kDepth] = depth_from_box(det.box_h_det, trk.height_est,
                                          cfg_.measurement.img_h,
                                          cfg_.measurement.h_px_min);
  trk.state = apply_state_floors(trk.state);

  const InitCovariance& ic = cfg_.init_cov;
  const double sig_dir =
      ic.dir_sigma_px_scale * cfg_.measurement.sigma_px / angular_gain(cfg_.measurement.img_h);
  const double sig_box = ic.box_h_px_scale * cfg_.measurement.sigma_px;
  StateVec diag;
  diag << sig_dir * sig_dir, sig_dir * sig_dir, ic.w_dot * ic.w_dot,
      ic.w_dot * ic.w_dot, ic.aspect * ic.aspect, ic.aspect_dot * ic.aspect_dot,
      sig_box * sig_box, ic.box_h_dot * ic.box_h_dot, ic.depth * ic.depth,
      ic.depth_dot * ic.depth_dot;
  trk.cov = diag.asDiagonal();

  trk.status = TrackStatus::Tentative;
  trk.hits = 1;
  trk.misses = 0;
  trk.last_update = t;
  return trk;
}

namespace {

std::vector<size_t> pick(const std::vector<size_t>& all,
                         const std::vector<char>& keep) {
  std::vector<size_t> out;
  for (size_t i : all) {
    if (keep[i]) out.push_back(i);
  }
  return out;
}

}  // namespace

void SphericalTracker::apply_lidar_updates(std::vector<size_t>& matched_track_idx,
                                           const FrameInput& frame) {
  if (frame.lidar_obs.empty() || matched_track_idx.empty()) return;

  // Greedy one-to-one pairing by wrapped azimuth gap, each track limited to
  // its 3-sigma angular gate.
  struct Cand {
    double gap;
    size_t trk;
    size_t obs;
  };
  std::vector<Cand> cands;
  for (size_t ti : matched_track_idx) {
    const TrackHypothesis& trk = tracks_[ti];
    const UnitBearing b = trk.bearing();
    const double az = b.azimuth();
    const double cos_el = std::max(std::cos(b.elevation()), 0.1);
    const double sigma_w = std::sqrt(trk.cov(idx::kW1, idx::kW1) +
                                     trk.cov(idx::kW2, idx::kW2));
    const double gate = std::max(3.0 * sigma_w / cos_el, cfg_.lidar_gate_floor);
    for (size_t oi = 0; oi < frame.lidar_obs.size(); ++oi) {
      const double gap = std::abs(wrap_angle(frame.lidar_obs[oi].azimuth - az));
      if (gap <= gate) cands.push_back({gap, ti, oi});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.gap != b.gap) return a.gap < b.gap;
    if (a.trk != b.trk) return a.trk < b.trk;
    return a.obs < b.obs;
  });

  std::vector<char> trk_used(tracks_.size(), 0), obs_used(frame.lidar_obs.size(), 0);
  std::vector<std::pair<size_t, size_t>> pairs;
  for (const Cand& c : cands) {
    if (trk_used[c.trk] || obs_used[c.obs]) continue;
    trk_used[c.trk] = 1;
    obs_used[c.obs] = 1;
    pairs.emplace_back(c.trk, c.obs);
  }
  // Updates in observation timestamp order.
  std::sort(pairs.begin(), pairs.end(),
            [&](const std::pair<size_t, size_t>& a, const std::pair<size_t, size_t>& b) {
              const double ta = frame.lidar_obs[a.second].t;
              const double tb = frame.lidar_obs[b.second].t;
              if (ta != tb) return ta < tb;
              return a.first < b.first;
            });

  for (const auto& [ti, oi] : pairs) {
    TrackHypothesis& trk = tracks_[ti];
    const LidarDepthObs& obs = frame.lidar_obs[oi];
    trk = kalman_update(trk, lidar_measurement(obs, trk, cfg_.measurement));
    // Height estimate follows depth-consistent box size after LiDAR updates.
    const double h_implied =
        2.0 * trk.depth() *
        std::tan(M_PI * trk.box_h() / (4.0 * cfg_.measurement.img_h));
    trk.height_est = (1.0 - cfg_.height_ema_alpha) * trk.height_est +
                     cfg_.height_ema_alpha * h_implied;
  }
}

std::vector<TrackRecord> SphericalTracker::step(const FrameInput& frame) {
  if (last_t_ && frame.t < *last_t_) {
    throw NonMonotonicTimeError("tracker_step: frame time went backwards");
  }
  const double dt = last_t_ ? frame.t - *last_t_ : 0.0;
  last_t_ = frame.t;

  // Predict, then re-center every chart at the predicted bearing so gating
  // and measurements happen in the post-prediction chart (temporary basis).
  for (TrackHypothesis& trk : tracks_) {
    trk = finalize_on_sphere(predict(trk, dt, cfg_.process_noise));
  }

  // Split detections by score.
  std::vector<CameraDetection> high_dets, low_dets;
  for (const CameraDetection& det : frame.detections) {
    if (det.score >= cfg_.association.tau_high) {
      high_dets.push_back(det);
    } else if (det.score >= cfg_.association.tau_low) {
      low_dets.push_back(det);
    }
  }

  std::vector<size_t> all_idx(tracks_.size());
  for (size_t i = 0; i < tracks_.size(); ++i) all_idx[i] = i;
  std::vector<char> is_unmatched(tracks_.size(), 1);
  std::vector<char> det_used_high(high_dets.size(), 0);

  std::vector<size_t> matched_idx;

  auto run_stage = [&](const std::vector<size_t>& track_idx,
                       std::vector<CameraDetection>& dets,
                       std::vector<char>& det_used) {
    std::vector<size_t> live_dets;
    for (size_t j = 0; j < dets.size(); ++j) {
      if (!det_used[j]) live_dets.push_back(j);
    }
    if (track_idx.empty() || live_dets.empty()) return;

    std::vector<TrackHypothesis> sub_tracks;
    sub_tracks.reserve(track_idx.size());
    for (size_t i : track_idx) sub_tracks.push_back(tracks_[i]);
    std::vector<CameraDetection> sub_dets;
    sub_dets.reserve(live_dets.size());
    for (size_t j : live_dets) sub_dets.push_back(dets[j]);

    const CostMatrix cm =
        build_cost_matrix(sub_tracks, sub_dets, cfg_.association, cfg_.measurement);
    for (const auto& [si, sj] : solve_assignment(cm)) {
      const size_t ti = track_idx[static_cast<size_t>(si)];
      const size_t dj = live_dets[static_cast<size_t>(sj)];
      TrackHypothesis& trk = tracks_[ti];
      trk = kalman_update(trk, image_measurement(dets[dj], trk, cfg_.measurement));
      trk.last_update = frame.t;
      is_unmatched[ti] = 0;
      det_used[dj] = 1;
      matched_idx.push_back(ti);
    }
  };

  // Stage 1: high-score detections against confirmed and lost tracks.
  std::vector<size_t> stage1_idx;
  for (size_t i = 0; i < tracks_.size(); ++i) {
    if (tracks_[i].status != TrackStatus::Tentative) stage1_idx.push_back(i);
  }
  run_stage(stage1_idx, high_dets, det_used_high);

  // Remaining high-score detections against tentative tracks; without this
  // pass a tentative track could never accumulate the hits to confirm.
  std::vector<size_t> tentative_idx;
  for (size_t i = 0; i < tracks_.size(); ++i) {
    if (tracks_[i].status == TrackStatus::Tentative && is_unmatched[i]) {
      tentative_idx.push_back(i);
    }
  }
  run_stage(tentative_idx, high_dets, det_used_high);

  // Stage 2: low-score detections against still-unmatched tracks.
  std::vector<char> det_used_low(low_dets.size(), 0);
  run_stage(pick(all_idx, is_unmatched), low_dets, det_used_low);

  // LiDAR updates for image-matched tracks, then reprojection.
  std::sort(matched_idx.begin(), matched_idx.end());
  apply_lidar_updates(matched_idx, frame);
  for (TrackHypothesis& trk : tracks_) {
    trk = finalize_on_sphere(trk);
  }

  // Lifecycle.
  for (size_t i = 0; i < tracks_.size(); ++i) {
    TrackHypothesis& trk = tracks_[i];
    if (!is_unmatched[i]) {
      trk.misses = 0;
      trk.hits += 1;
      if (trk.status == TrackStatus::Lost) {
        trk.status = TrackStatus::Confirmed;  // track recycling
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
  std::erase_if(tracks_, [&](const TrackHypothesis& trk) {
    return trk.misses > cfg_.association.max_age_frames;
  });

  // Unmatched high-score detections spawn tentative tracks.
  for (size_t j = 0; j < high_dets.size(); ++j) {
    if (!det_used_high[j]) {
      try {
        tracks_.push_back(spawn(high_dets[j], frame.t));
      } catch (const DegenerateBoxError&) {
        // Unusable box geometry; skip the detection.
      }
    }
  }

  // Output rows for confirmed tracks.
  std::vector<TrackRecord> out;
  for (const TrackHypothesis& trk : tracks_) {
    if (trk.status != TrackStatus::Confirmed) continue;
    TrackRecord rec;
    rec.t = frame.t;
    rec.id = trk.id;
    rec.bearing = trk.g_ref;  // chart centered: w = 0 after reprojection
    rec.depth = trk.depth();
    rec.planar = trk.depth() * trk.g_ref.vec().head<2>();
    rec.cov_diag = trk.cov.diagonal();
    out.push_back(rec);
  }
  return out;
}

}  // namespace s3kf
