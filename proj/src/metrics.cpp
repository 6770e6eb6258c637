#include "s3kf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "s3kf/errors.hpp"

namespace s3kf {

namespace {

double median_frame_interval(const std::vector<double>& times) {
  std::vector<double> gaps;
  for (size_t i = 1; i < times.size(); ++i) {
    gaps.push_back(times[i] - times[i - 1]);
  }
  if (gaps.empty()) return 1.0 / 30.0;
  std::sort(gaps.begin(), gaps.end());
  return gaps[gaps.size() / 2];
}

}  // namespace

std::vector<FrameMatching> match_tracks_to_gt(const std::vector<TrackRecord>& tracks,
                                              const GroundTruthLog& gt,
                                              double radius) {
  if (tracks.empty() || gt.empty()) {
    throw EmptyLogError("match_tracks_to_gt: empty track or ground-truth log");
  }

  // Group both logs by frame time.
  std::map<double, std::vector<const TrackRecord*>> track_frames;
  for (const TrackRecord& rec : tracks) track_frames[rec.t].push_back(&rec);
  std::map<double, std::vector<const GroundTruthRecord*>> gt_frames;
  for (const GroundTruthRecord& rec : gt) gt_frames[rec.t].push_back(&rec);

  std::vector<double> gt_times;
  for (const auto& [t, _] : gt_frames) gt_times.push_back(t);
  const double half_interval = 0.5 * median_frame_interval(gt_times);

  std::vector<FrameMatching> out;
  for (const auto& [t, gts] : gt_frames) {
    FrameMatching fm;
    fm.t = t;

    // Nearest track frame within half a frame interval.
    auto it = track_frames.lower_bound(t - half_interval);
    const std::vector<const TrackRecord*>* est = nullptr;
    double best_gap = half_interval;
    for (; it != track_frames.end() && it->first <= t + half_interval; ++it) {
      const double gap = std::abs(it->first - t);
      if (gap <= best_gap) {
        best_gap = gap;
        est = &it->second;
      }
    }
    if (est != nullptr) {
      struct Cand {
        double dist;
        int gt_id;
        int64_t track_id;
        const TrackRecord* rec;
      };
      std::vector<Cand> cands;
      for (const GroundTruthRecord* g : gts) {
        for (const TrackRecord* r : *est) {
          const double d = (r->planar - g->position.head<2>()).norm();
          if (d <= radius) cands.push_back({d, g->target_id, r->id, r});
        }
      }
      std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.gt_id != b.gt_id) return a.gt_id < b.gt_id;
        return a.track_id < b.track_id;
      });
      std::set<int> gt_used;
      std::set<int64_t> trk_used;
      for (const Cand& c : cands) {
        if (gt_used.count(c.gt_id) || trk_used.count(c.track_id)) continue;
        gt_used.insert(c.gt_id);
        trk_used.insert(c.track_id);
        fm.gt_to_track[c.gt_id] = c.track_id;
        fm.planar_err[c.gt_id] = c.dist;
      }
    }
    out.push_back(std::move(fm));
  }
  return out;
}

std::map<int, double> planar_rmse(const GroundTruthLog& gt,
                                  const std::vector<FrameMatching>& matching) {
  std::set<int> gt_ids;
  for (const GroundTruthRecord& rec : gt) gt_ids.insert(rec.target_id);

  std::map<int, double> sum_sq;
  std::map<int, int> count;
  for (const FrameMatching& fm : matching) {
    for (const auto& [gt_id, err] : fm.planar_err) {
      sum_sq[gt_id] += err * err;
      count[gt_id] += 1;
    }
  }

  std::map<int, double> rmse;
  for (int id : gt_ids) {
    if (count.find(id) == count.end()) {
      throw NoMatchesError("planar_rmse: ground-truth target " + std::to_string(id) +
                           " has no matched frames");
    }
    rmse[id] = std::sqrt(sum_sq[id] / count[id]);
  }
  return rmse;
}

SwitchCounts identity_switches(const std::vector<FrameMatching>& matching) {
  SwitchCounts sc;
  std::map<int, int64_t> prev_id;
  std::set<int64_t> distinct;
  for (const FrameMatching& fm : matching) {
    for (const auto& [gt_id, track_id] : fm.gt_to_track) {
      distinct.insert(track_id);
      auto it = prev_id.find(gt_id);
      if (it != prev_id.end() && it->second != track_id) {
        sc.per_target[gt_id] += 1;
        sc.total_switches += 1;
      }
      prev_id[gt_id] = track_id;
      sc.per_target.try_emplace(gt_id, 0);
    }
  }
  sc.max_id_total = static_cast<int>(distinct.size());
  return sc;
}

MetricsReport evaluate(const std::vector<TrackRecord>& tracks,
                       const GroundTruthLog& gt, double radius) {
  const std::vector<FrameMatching> matching = match_tracks_to_gt(tracks, gt, radius);
  const SwitchCounts sc = identity_switches(matching);

  std::set<int> gt_ids;
  std::map<int, int> gt_frames;
  for (const GroundTruthRecord& rec : gt) {
    gt_ids.insert(rec.target_id);
    gt_frames[rec.target_id] += 1;
  }

  MetricsReport report;
  report.total_switches = sc.total_switches;
  report.max_id_total = sc.max_id_total;

  for (int id : gt_ids) {
    TargetMetrics tm;
    tm.gt_id = id;
    tm.gt_frames = gt_frames[id];

    double sum_sq = 0.0;
    int matched = 0;
    int frames_since_first = 0;
    bool seen = false;
    for (const FrameMatching& fm : matching) {
      const auto it = fm.planar_err.find(id);
      if (it != fm.planar_err.end()) {
        seen = true;
        sum_sq += it->second * it->second;
        matched += 1;
      }
      if (seen) frames_since_first += 1;
    }
    tm.matched_frames = matched;
    if (matched > 0) {
      tm.rmse = std::sqrt(sum_sq / matched);
      tm.coverage = static_cast<double>(matched) / tm.gt_frames;
      tm.coverage_after_first = static_cast<double>(matched) / frames_since_first;
    }
    const auto sw = sc.per_target.find(id);
    tm.switches = sw != sc.per_target.end() ? sw->second : 0;
    report.per_target.push_back(tm);
  }
  return report;
}

}  // namespace s3kf
