#include <doctest.h>

#include "s3kf/simulator.hpp"
#include "s3kf/sphere.hpp"
#include "s3kf/tracker.hpp"

using namespace s3kf;

namespace {

Scenario base_scenario() {
  Scenario sc;
  sc.duration = 4.0;
  sc.camera_rate = 30.0;
  sc.sweep_period = 1.0;
  sc.img_h = 1000.0;
  TargetSpec t;
  t.pattern = MotionPattern::Static;
  t.position = Eigen::Vector3d(3.0, 0.0, 0.0);
  sc.targets.push_back(t);
  return sc;
}

}  // namespace

TEST_CASE("ground-truth trajectories") {
  SUBCASE("static target never moves") {
    const Scenario sc = base_scenario();
    for (const GroundTruthRecord& rec : generate_ground_truth(sc, 1)) {
      CHECK(rec.position == Eigen::Vector3d(3.0, 0.0, 0.0));
    }
  }
  SUBCASE("clockwise circle retreats by pi/2 after t = pi/0.4") {
    TargetSpec t;
    t.pattern = MotionPattern::CircleCW;
    t.radius = 5.0;
    t.azimuth0 = 0.8;
    t.angular_speed = 0.2;
    const Eigen::Vector3d p = target_position(t, M_PI / 0.4);
    const double az = std::atan2(p.y(), p.x());
    CHECK(az == doctest::Approx(0.8 - M_PI / 2).epsilon(1e-12));
    CHECK(p.norm() == doctest::Approx(5.0));
  }
  SUBCASE("radial oscillation stays within its range at fixed azimuth") {
    TargetSpec t;
    t.pattern = MotionPattern::RadialOscillate;
    t.azimuth0 = 1.2;
    t.r_min = 2.0;
    t.r_max = 6.0;
    t.period = 8.0;
    for (double tt = 0.0; tt < 16.0; tt += 0.37) {
      const Eigen::Vector3d p = target_position(t, tt);
      CHECK(p.norm() >= 2.0 - 1e-12);
      CHECK(p.norm() <= 6.0 + 1e-12);
      CHECK(std::atan2(p.y(), p.x()) == doctest::Approx(1.2));
    }
  }
  SUBCASE("frame count follows duration x rate") {
    Scenario sc = base_scenario();
    sc.duration = 30.0;
    CHECK(sc.frame_count() == 900);
    CHECK(generate_ground_truth(sc, 1).size() == 900);
  }
  SUBCASE("bad scenario raises") {
    Scenario sc = base_scenario();
    sc.duration = -1.0;
    CHECK_THROWS_AS(generate_ground_truth(sc, 1), ConfigError);
  }
}

TEST_CASE("camera rendering") {
  SUBCASE("noiseless rendering is exact") {
    Scenario sc = base_scenario();
    sc.noise.sigma_px = 0.0;
    sc.noise.sigma_aspect = 0.0;
    const auto dets = render_camera_frame(sc, 10, 7);
    REQUIRE(dets.size() == 1);
    CHECK((dets[0].bearing.vec() - Eigen::Vector3d(1, 0, 0)).norm() < 1e-12);
    const double alpha = 2.0 * std::atan(1.7 / 6.0);
    CHECK(dets[0].box_h_det == doctest::Approx(alpha * angular_gain(1000.0)).epsilon(1e-12));
    CHECK(dets[0].aspect_det == doctest::Approx(0.4));
  }
  SUBCASE("identical seeds render identical frames") {
    Scenario sc = base_scenario();
    sc.noise.dropout_prob = 0.1;
    sc.noise.false_positive_rate = 0.5;
    const auto a = render_camera_frame(sc, 42, 123);
    const auto b = render_camera_frame(sc, 42, 123);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].bearing.vec() == b[i].bearing.vec());
      CHECK(a[i].box_h_det == b[i].box_h_det);
      CHECK(a[i].score == b[i].score);
    }
  }
  SUBCASE("different seeds change the noise draws") {
    const Scenario sc = base_scenario();
    const auto a = render_camera_frame(sc, 5, 1);
    const auto b = render_camera_frame(sc, 5, 2);
    REQUIRE(a.size() == 1);
    REQUIRE(b.size() == 1);
    CHECK(a[0].bearing.vec() != b[0].bearing.vec());
  }
  SUBCASE("nearer target occludes the farther one") {
    Scenario sc = base_scenario();
    sc.targets.clear();
    TargetSpec near;
    near.position = Eigen::Vector3d(2.0, 0.0, 0.0);
    TargetSpec far;
    far.position = Eigen::Vector3d(5.0, 0.05, 0.0);  // ~0.01 rad off
    sc.targets = {near, far};
    sc.occlusion_angle = 0.06;
    sc.noise.sigma_px = 0.0;
    const auto dets = render_camera_frame(sc, 0, 1);
    REQUIRE(dets.size() == 1);
    CHECK(dets[0].bearing.x() > 0.99);
    CHECK(depth_from_box(dets[0].box_h_det, 1.7, 1000.0) == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("full dropout empties the frame") {
    Scenario sc = base_scenario();
    sc.noise.dropout_prob = 1.0;
    CHECK(render_camera_frame(sc, 3, 1).empty());
  }
}

TEST_CASE("lidar sweep schedule") {
  SUBCASE("static target at +x is hit once per sweep at exact range") {
    Scenario sc = base_scenario();
    sc.noise.sigma_depth = 0.0;
    const auto obs = render_lidar_sweeps(sc, 1);
    REQUIRE(obs.size() == 4);  // 4 s / 1 s sweep
    for (const LidarDepthObs& o : obs) {
      CHECK(o.depth == doctest::Approx(3.0).epsilon(1e-12));
      CHECK(std::abs(o.azimuth) < 1e-9);
    }
  }
  SUBCASE("target at azimuth pi/2 is first seen at t = 0.25 s") {
    Scenario sc = base_scenario();
    sc.targets[0].position = Eigen::Vector3d(0.0, 3.0, 0.0);
    sc.noise.sigma_depth = 0.0;
    const auto obs = render_lidar_sweeps(sc, 1);
    REQUIRE(!obs.empty());
    CHECK(obs[0].t == doctest::Approx(0.25).epsilon(1e-9));
  }
  SUBCASE("moving target: sweep azimuth meets the target azimuth at each crossing") {
    Scenario sc = base_scenario();
    sc.duration = 6.0;
    sc.targets.clear();
    TargetSpec t;
    t.pattern = MotionPattern::CircleCCW;
    t.radius = 4.0;
    t.azimuth0 = 0.3;
    t.angular_speed = 0.3;
    sc.targets.push_back(t);
    sc.noise.sigma_depth = 0.0;
    const auto obs = render_lidar_sweeps(sc, 1);
    CHECK(obs.size() >= 5);
    for (const LidarDepthObs& o : obs) {
      const Eigen::Vector3d p = target_position(t, o.t);
      const double az_target = std::atan2(p.y(), p.x());
      CHECK(std::abs(wrap_angle(o.azimuth - az_target)) < 1e-6);
      const double sweep_az = wrap_angle(2.0 * M_PI * o.t / sc.sweep_period);
      CHECK(std::abs(wrap_angle(sweep_az - az_target)) < 1e-6);
    }
  }
  SUBCASE("depth noise is seeded and reproducible") {
    Scenario sc = base_scenario();
    sc.noise.sigma_depth = 0.1;
    const auto a = render_lidar_sweeps(sc, 9);
    const auto b = render_lidar_sweeps(sc, 9);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].depth == b[i].depth);
      CHECK(a[i].t == b[i].t);
    }
  }
}

TEST_CASE("noiseless end-to-end: static target planar error converges to zero") {
  Scenario sc = base_scenario();
  sc.duration = 6.0;
  sc.noise.sigma_px = 0.0;
  sc.noise.sigma_depth = 0.0;
  sc.noise.sigma_aspect = 0.0;

  const auto lidar = render_lidar_sweeps(sc, 1);
  SphericalTracker tracker;
  double last_err = 1e9;
  size_t li = 0;
  for (int f = 0; f < sc.frame_count(); ++f) {
    FrameInput frame;
    frame.t = f / sc.camera_rate;
    frame.detections = render_camera_frame(sc, f, 1);
    while (li < lidar.size() && lidar[li].t <= frame.t) {
      frame.lidar_obs.push_back(lidar[li++]);
    }
    for (const TrackRecord& rec : tracker.step(frame)) {
      last_err = (rec.planar - Eigen::Vector2d(3.0, 0.0)).norm();
    }
  }
  CHECK(last_err <= 1e-3);
}
