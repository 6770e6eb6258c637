#include <doctest.h>

#include <set>

#include "s3kf/simulator.hpp"
#include "s3kf/tracker.hpp"

using namespace s3kf;

namespace {

CameraDetection det_for(const Eigen::Vector3d& position, double body_height,
                        double img_h, double score = 0.9) {
  CameraDetection det;
  det.bearing = UnitBearing{position};
  det.box_h_det = height_obs_from_depth(position.norm(), body_height, img_h);
  det.aspect_det = 0.4;
  det.score = score;
  return det;
}

}  // namespace

TEST_CASE("empty frame predicts and ages every track") {
  SphericalTracker tracker;
  FrameInput f0;
  f0.t = 0.0;
  f0.detections.push_back(det_for({4, 0, 0}, 1.7, 1000.0));
  tracker.step(f0);
  REQUIRE(tracker.tracks().size() == 1);
  CHECK(tracker.tracks()[0].misses == 0);

  FrameInput f1;
  f1.t = 1.0 / 30.0;
  tracker.step(f1);
  REQUIRE(tracker.tracks().size() == 1);
  CHECK(tracker.tracks()[0].misses == 1);
  CHECK(tracker.tracks()[0].status == TrackStatus::Lost);
}

TEST_CASE("matching detection pulls the bearing toward it") {
  SphericalTracker tracker;
  FrameInput f0;
  f0.t = 0.0;
  f0.detections.push_back(det_for({4, 1, 0}, 1.7, 1000.0));
  tracker.step(f0);

  const UnitBearing prior = tracker.tracks()[0].g_ref;
  const UnitBearing target = UnitBearing{Eigen::Vector3d(4, 1.2, 0)};
  FrameInput f1;
  f1.t = 1.0 / 30.0;
  f1.detections.push_back(det_for({4, 1.2, 0}, 1.7, 1000.0));
  tracker.step(f1);
  REQUIRE(tracker.tracks().size() == 1);
  const UnitBearing posterior = tracker.tracks()[0].g_ref;
  CHECK(posterior.angle_to(target) < prior.angle_to(target));
  CHECK(tracker.tracks()[0].hits == 2);
}

TEST_CASE("tentative tracks confirm after the configured hit count") {
  SphericalTracker tracker;
  for (int i = 0; i < 3; ++i) {
    FrameInput f;
    f.t = i / 30.0;
    f.detections.push_back(det_for({4, 0, 0}, 1.7, 1000.0));
    tracker.step(f);
    if (i < 2) {
      CHECK(tracker.tracks()[0].status == TrackStatus::Tentative);
    }
  }
  CHECK(tracker.tracks()[0].status == TrackStatus::Confirmed);
}

TEST_CASE("low-score detections never spawn tracks") {
  SphericalTracker tracker;
  FrameInput f;
  f.t = 0.0;
  f.detections.push_back(det_for({4, 0, 0}, 1.7, 1000.0, /*score=*/0.3));
  tracker.step(f);
  CHECK(tracker.tracks().empty());
}

TEST_CASE("a gated-out high detection spawns instead of claiming stage 2") {
  SphericalTracker tracker;
  for (int i = 0; i < 3; ++i) {
    FrameInput f;
    f.t = i / 30.0;
    f.detections.push_back(det_for({4, 0, 0}, 1.7, 1000.0));
    tracker.step(f);
  }
  REQUIRE(tracker.tracks().size() == 1);
  const int64_t id0 = tracker.tracks()[0].id;

  // One far-away high-score detection (fails the track's gate) and one
  // low-score detection on top of the track.
  FrameInput f;
  f.t = 0.1;
  f.detections.push_back(det_for({0, 4, 0}, 1.7, 1000.0, 0.95));
  f.detections.push_back(det_for({4, 0, 0}, 1.7, 1000.0, 0.3));
  tracker.step(f);

  REQUIRE(tracker.tracks().size() == 2);
  const TrackHypothesis* original = nullptr;
  const TrackHypothesis* spawned = nullptr;
  for (const TrackHypothesis& trk : tracker.tracks()) {
    (trk.id == id0 ? original : spawned) = &trk;
  }
  REQUIRE(original != nullptr);
  REQUIRE(spawned != nullptr);
  CHECK(original->misses == 0);  // claimed by the low-score detection
  CHECK(spawned->status == TrackStatus::Tentative);
  CHECK(spawned->g_ref.angle_to(UnitBearing{Eigen::Vector3d(0, 4, 0)}) < 0.01);
}

TEST_CASE("lost track recycles to confirmed on re-association") {
  SphericalTracker tracker;
  for (int i = 0; i < 3; ++i) {
    FrameInput f;
    f.t = i / 30.0;
    f.detections.push_back(det_for({4, 0, 0}, 1.7, 1000.0));
    tracker.step(f);
  }
  const int64_t id0 = tracker.tracks()[0].id;

  for (int i = 3; i < 6; ++i) {
    FrameInput f;
    f.t = i / 30.0;
    tracker.step(f);
  }
  CHECK(tracker.tracks()[0].status == TrackStatus::Lost);

  FrameInput f;
  f.t = 6 / 30.0;
  f.detections.push_back(det_for({4, 0, 0}, 1.7, 1000.0));
  tracker.step(f);
  REQUIRE(tracker.tracks().size() == 1);
  CHECK(tracker.tracks()[0].id == id0);
  CHECK(tracker.tracks()[0].status == TrackStatus::Confirmed);
}

TEST_CASE("track ids strictly increase and are never reused") {
  SphericalTracker tracker;
  std::set<int64_t> all_ids;
  int64_t last_new = 0;
  // A detection burst every 40 frames: the previous track ages past the
  // 30-frame patience window and is deleted, so each burst allocates a fresh
  // id even at the identical bearing.
  for (int i = 0; i < 120; ++i) {
    FrameInput f;
    f.t = i / 30.0;
    if (i % 40 == 0) {
      f.detections.push_back(det_for({4, 0, 0}, 1.7, 1000.0));
    }
    tracker.step(f);
    for (const TrackHypothesis& trk : tracker.tracks()) {
      if (!all_ids.count(trk.id)) {
        CHECK(trk.id > last_new);
        last_new = trk.id;
        all_ids.insert(trk.id);
      }
    }
  }
  CHECK(all_ids.size() == 3);
}

TEST_CASE("lidar update sharpens depth") {
  SphericalTracker tracker;
  const Eigen::Vector3d p(5, 0, 0);
  for (int i = 0; i < 3; ++i) {
    FrameInput f;
    f.t = i / 30.0;
    f.detections.push_back(det_for(p, 1.7, 1000.0));
    tracker.step(f);
  }
  const double var_before = tracker.tracks()[0].cov(idx::kDepth, idx::kDepth);

  FrameInput f;
  f.t = 4 / 30.0;
  f.detections.push_back(det_for(p, 1.7, 1000.0));
  LidarDepthObs obs;
  obs.t = f.t - 0.005;
  obs.azimuth = 0.0;
  obs.depth = 5.0;
  obs.spread = 0.03;
  f.lidar_obs.push_back(obs);
  tracker.step(f);
  CHECK(tracker.tracks()[0].cov(idx::kDepth, idx::kDepth) < var_before);
  CHECK(tracker.tracks()[0].depth() == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("non-monotonic frame time raises") {
  SphericalTracker tracker;
  FrameInput f0;
  f0.t = 1.0;
  tracker.step(f0);
  FrameInput f1;
  f1.t = 0.5;
  CHECK_THROWS_AS(tracker.step(f1), NonMonotonicTimeError);
}

TEST_CASE("a target circling through the azimuth seam keeps one id") {
  Scenario sc;
  sc.name = "seam";
  sc.duration = 8.0;
  sc.camera_rate = 30.0;
  sc.noise.sigma_px = 0.0;
  sc.noise.sigma_depth = 0.0;
  sc.noise.sigma_aspect = 0.0;
  TargetSpec t;
  t.pattern = MotionPattern::CircleCW;
  t.radius = 5.0;
  t.azimuth0 = M_PI - 0.4;  // crosses -pi within a couple of seconds
  t.angular_speed = 0.25;
  sc.targets.push_back(t);

  SphericalTracker tracker;
  std::set<int64_t> ids;
  for (int f = 0; f < sc.frame_count(); ++f) {
    FrameInput frame;
    frame.t = f / sc.camera_rate;
    frame.detections = render_camera_frame(sc, f, 1);
    for (const TrackRecord& rec : tracker.step(frame)) ids.insert(rec.id);
  }
  CHECK(ids.size() == 1);
}
