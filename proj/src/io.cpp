#include "s3kf/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "s3kf/errors.hpp"

namespace s3kf {

using nlohmann::json;

std::string fnv1a_hex(const std::string& data) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + tmp.string());
    f << content;
    if (!f) throw IoError("short write: " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + path.string() + " (" + ec.message() + ")");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

namespace {

json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw SchemaError("malformed JSON in " + what);
  return j;
}

double require_positive(const json& j, const std::string& field, double fallback,
                        bool required = false) {
  if (!j.contains(field)) {
    if (required) throw ConfigError("missing required field: " + field);
    return fallback;
  }
  if (!j[field].is_number()) throw ConfigError("field is not a number: " + field);
  const double v = j[field].get<double>();
  if (v <= 0.0) throw ConfigError("field must be > 0: " + field);
  return v;
}

double get_number(const json& j, const std::string& field, double fallback) {
  if (!j.contains(field)) return fallback;
  if (!j[field].is_number()) throw ConfigError("field is not a number: " + field);
  return j[field].get<double>();
}

void check_schema_version(const json& rec, const std::string& what) {
  if (!rec.contains("schema_version") || !rec["schema_version"].is_number_integer()) {
    throw SchemaError(what + ": record missing schema_version");
  }
  if (rec["schema_version"].get<int>() != kSchemaVersion) {
    throw SchemaError(what + ": unsupported schema_version " +
                      rec["schema_version"].dump());
  }
}

std::vector<json> read_jsonl(const std::filesystem::path& path, const std::string& what) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open: " + path.string());
  std::vector<json> records;
  std::string line;
  size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) {
      throw SchemaError(what + ": malformed JSON at line " + std::to_string(line_no));
    }
    check_schema_version(rec, what);
    records.push_back(std::move(rec));
  }
  return records;
}

json vec3_to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d json_to_vec3(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw SchemaError(what + ": expected 3-array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

Scenario load_scenario(const std::filesystem::path& path) {
  const json j = parse_json(read_file(path), path.string());

  Scenario s;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ConfigError("field is not a string: name");
    s.name = j["name"].get<std::string>();
  }
  s.duration = require_positive(j, "duration", s.duration, true);
  s.camera_rate = require_positive(j, "camera_rate", s.camera_rate);
  s.sweep_period = require_positive(j, "sweep_period", s.sweep_period);
  s.img_h = require_positive(j, "img_h", s.img_h);
  s.occlusion_angle = get_number(j, "occlusion_angle", s.occlusion_angle);

  if (j.contains("noise")) {
    const json& n = j["noise"];
    if (!n.is_object()) throw ConfigError("field is not an object: noise");
    s.noise.sigma_px = get_number(n, "sigma_px", s.noise.sigma_px);
    s.noise.sigma_depth = get_number(n, "sigma_depth", s.noise.sigma_depth);
    s.noise.sigma_aspect = get_number(n, "sigma_aspect", s.noise.sigma_aspect);
    s.noise.dropout_prob = get_number(n, "dropout_prob", s.noise.dropout_prob);
    s.noise.false_positive_rate =
        get_number(n, "false_positive_rate", s.noise.false_positive_rate);
    s.noise.score_lo = get_number(n, "score_lo", s.noise.score_lo);
    s.noise.score_hi = get_number(n, "score_hi", s.noise.score_hi);
    if (s.noise.sigma_px < 0 || s.noise.sigma_depth < 0 || s.noise.sigma_aspect < 0) {
      throw ConfigError("noise sigmas must be >= 0: noise");
    }
    if (s.noise.dropout_prob < 0 || s.noise.dropout_prob > 1) {
      throw ConfigError("field must be in [0,1]: noise.dropout_prob");
    }
  }

  if (!j.contains("targets") || !j["targets"].is_array() || j["targets"].empty()) {
    throw ConfigError("missing or empty required field: targets");
  }
  for (const json& tj : j["targets"]) {
    TargetSpec t;
    const std::string pattern = tj.value("pattern", "static");
    if (pattern == "static") {
      t.pattern = MotionPattern::Static;
      if (!tj.contains("position")) {
        throw ConfigError("static target missing field: targets[].position");
      }
      t.position = json_to_vec3(tj["position"], "targets[].position");
    } else if (pattern == "circle_cw" || pattern == "circle_ccw") {
      t.pattern = pattern == "circle_cw" ? MotionPattern::CircleCW
                                         : MotionPattern::CircleCCW;
      t.radius = require_positive(tj, "radius", t.radius, true);
      t.azimuth0 = get_number(tj, "azimuth_deg", t.azimuth0 * 180.0 / M_PI) * M_PI / 180.0;
      t.angular_speed = require_positive(tj, "angular_speed", t.angular_speed);
      t.z = get_number(tj, "z", t.z);
    } else if (pattern == "radial") {
      t.pattern = MotionPattern::RadialOscillate;
      t.azimuth0 = get_number(tj, "azimuth_deg", 0.0) * M_PI / 180.0;
      t.r_min = require_positive(tj, "r_min", t.r_min, true);
      t.r_max = require_positive(tj, "r_max", t.r_max, true);
      if (t.r_max <= t.r_min) throw ConfigError("targets[].r_max must exceed r_min");
      t.period = require_positive(tj, "period", t.period);
      t.phase0 = get_number(tj, "phase0", t.phase0);
      t.z = get_number(tj, "z", t.z);
    } else {
      throw ConfigError("unknown value for targets[].pattern: " + pattern);
    }
    t.body_height = require_positive(tj, "body_height", t.body_height);
    t.aspect = require_positive(tj, "aspect", t.aspect);
    s.targets.push_back(t);
  }
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json targets = json::array();
  for (const TargetSpec& t : s.targets) {
    json tj;
    switch (t.pattern) {
      case MotionPattern::Static:
        tj["pattern"] = "static";
        tj["position"] = vec3_to_json(t.position);
        break;
      case MotionPattern::CircleCW:
      case MotionPattern::CircleCCW:
        tj["pattern"] = t.pattern == MotionPattern::CircleCW ? "circle_cw" : "circle_ccw";
        tj["radius"] = t.radius;
        tj["azimuth_deg"] = t.azimuth0 * 180.0 / M_PI;
        tj["angular_speed"] = t.angular_speed;
        tj["z"] = t.z;
        break;
      case MotionPattern::RadialOscillate:
        tj["pattern"] = "radial";
        tj["azimuth_deg"] = t.azimuth0 * 180.0 / M_PI;
        tj["r_min"] = t.r_min;
        tj["r_max"] = t.r_max;
        tj["period"] = t.period;
        tj["phase0"] = t.phase0;
        tj["z"] = t.z;
        break;
    }
    tj["body_height"] = t.body_height;
    tj["aspect"] = t.aspect;
    targets.push_back(tj);
  }
  json j{{"name", s.name},
         {"duration", s.duration},
         {"camera_rate", s.camera_rate},
         {"sweep_period", s.sweep_period},
         {"img_h", s.img_h},
         {"occlusion_angle", s.occlusion_angle},
         {"noise",
          {{"sigma_px", s.noise.sigma_px},
           {"sigma_depth", s.noise.sigma_depth},
           {"sigma_aspect", s.noise.sigma_aspect},
           {"dropout_prob", s.noise.dropout_prob},
           {"false_positive_rate", s.noise.false_positive_rate},
           {"score_lo", s.noise.score_lo},
           {"score_hi", s.noise.score_hi}}},
         {"targets", targets}};
  return j.dump(2);
}

TrackerConfig load_tracker_config(const std::filesystem::path& path) {
  const json j = parse_json(read_file(path), path.string());
  TrackerConfig cfg;
  if (j.contains("measurement")) {
    const json& m = j["measurement"];
    cfg.measurement.img_h = require_positive(m, "img_h", cfg.measurement.img_h);
    cfg.measurement.sigma_px = require_positive(m, "sigma_px", cfg.measurement.sigma_px);
    cfg.measurement.sigma_aspect =
        require_positive(m, "sigma_aspect", cfg.measurement.sigma_aspect);
    cfg.measurement.sigma_d_min =
        require_positive(m, "sigma_d_min", cfg.measurement.sigma_d_min);
    cfg.measurement.h_px_min = require_positive(m, "h_px_min", cfg.measurement.h_px_min);
    cfg.measurement.dt_sync = require_positive(m, "dt_sync", cfg.measurement.dt_sync);
  }
  if (j.contains("association")) {
    const json& a = j["association"];
    cfg.association.chi2_img = require_positive(a, "chi2_img", cfg.association.chi2_img);
    cfg.association.chi2_lidar =
        require_positive(a, "chi2_lidar", cfg.association.chi2_lidar);
    cfg.association.tau_high = get_number(a, "tau_high", cfg.association.tau_high);
    cfg.association.tau_low = get_number(a, "tau_low", cfg.association.tau_low);
    if (cfg.association.tau_high < cfg.association.tau_low) {
      throw ConfigError("association.tau_high must be >= tau_low");
    }
    cfg.association.lambda_maha = get_number(a, "lambda_maha", cfg.association.lambda_maha);
    cfg.association.lambda_iou = get_number(a, "lambda_iou", cfg.association.lambda_iou);
    cfg.association.lambda_depth =
        get_number(a, "lambda_depth", cfg.association.lambda_depth);
    if (cfg.association.lambda_maha < 0 || cfg.association.lambda_iou < 0 ||
        cfg.association.lambda_depth < 0) {
      throw ConfigError("association weights must be >= 0");
    }
    cfg.association.sigma_d_gate =
        require_positive(a, "sigma_d_gate", cfg.association.sigma_d_gate);
    cfg.association.confirm_hits = static_cast<int>(
        require_positive(a, "confirm_hits", cfg.association.confirm_hits));
    cfg.association.max_age_frames = static_cast<int>(
        require_positive(a, "max_age_frames", cfg.association.max_age_frames));
  }
  if (j.contains("process_noise")) {
    const json& p = j["process_noise"];
    cfg.process_noise.direction =
        require_positive(p, "direction", cfg.process_noise.direction);
    cfg.process_noise.aspect = require_positive(p, "aspect", cfg.process_noise.aspect);
    cfg.process_noise.box_h = require_positive(p, "box_h", cfg.process_noise.box_h);
    cfg.process_noise.depth = require_positive(p, "depth", cfg.process_noise.depth);
  }
  cfg.height_init = require_positive(j, "height_init", cfg.height_init);
  cfg.height_ema_alpha = get_number(j, "height_ema_alpha", cfg.height_ema_alpha);
  cfg.lidar_gate_floor = get_number(j, "lidar_gate_floor", cfg.lidar_gate_floor);
  return cfg;
}

std::string tracker_config_to_json(const TrackerConfig& cfg) {
  json j{{"measurement",
          {{"img_h", cfg.measurement.img_h},
           {"sigma_px", cfg.measurement.sigma_px},
           {"sigma_aspect", cfg.measurement.sigma_aspect},
           {"sigma_d_min", cfg.measurement.sigma_d_min},
           {"h_px_min", cfg.measurement.h_px_min},
           {"dt_sync", cfg.measurement.dt_sync}}},
         {"association",
          {{"chi2_img", cfg.association.chi2_img},
           {"chi2_lidar", cfg.association.chi2_lidar},
           {"tau_high", cfg.association.tau_high},
           {"tau_low", cfg.association.tau_low},
           {"lambda_maha", cfg.association.lambda_maha},
           {"lambda_iou", cfg.association.lambda_iou},
           {"lambda_depth", cfg.association.lambda_depth},
           {"sigma_d_gate", cfg.association.sigma_d_gate},
           {"confirm_hits", cfg.association.confirm_hits},
           {"max_age_frames", cfg.association.max_age_frames}}},
         {"process_noise",
          {{"direction", cfg.process_noise.direction},
           {"aspect", cfg.process_noise.aspect},
           {"box_h", cfg.process_noise.box_h},
           {"depth", cfg.process_noise.depth}}},
         {"height_init", cfg.height_init},
         {"height_ema_alpha", cfg.height_ema_alpha},
         {"lidar_gate_floor", cfg.lidar_gate_floor}};
  return j.dump(2);
}

void write_ground_truth(const std::filesystem::path& path, const GroundTruthLog& log) {
  std::ostringstream out;
  for (const GroundTruthRecord& rec : log) {
    json j{{"schema_version", kSchemaVersion},
           {"t", rec.t},
           {"target_id", rec.target_id},
           {"position", vec3_to_json(rec.position)}};
    out << j.dump() << '\n';
  }
  atomic_write(path, out.str());
}

GroundTruthLog read_ground_truth(const std::filesystem::path& path) {
  GroundTruthLog log;
  for (const json& rec : read_jsonl(path, "ground truth")) {
    GroundTruthRecord r;
    r.t = rec.at("t").get<double>();
    r.target_id = rec.at("target_id").get<int>();
    r.position = json_to_vec3(rec.at("position"), "ground truth position");
    log.push_back(r);
  }
  return log;
}

void write_detections(const std::filesystem::path& path, const DetectionStream& stream) {
  std::ostringstream out;
  json meta{{"schema_version", kSchemaVersion},
            {"kind", "meta"},
            {"stream", "detections"},
            {"img_h", stream.img_h},
            {"camera_rate", stream.camera_rate}};
  out << meta.dump() << '\n';
  for (const auto& [t, dets] : stream.frames) {
    json list = json::array();
    for (const CameraDetection& d : dets) {
      list.push_back(json{{"bearing", vec3_to_json(d.bearing.vec())},
                          {"aspect", d.aspect_det},
                          {"box_h", d.box_h_det},
                          {"score", d.score}});
    }
    json j{{"schema_version", kSchemaVersion}, {"t", t}, {"detections", list}};
    out << j.dump() << '\n';
  }
  atomic_write(path, out.str());
}

DetectionStream read_detections(const std::filesystem::path& path) {
  DetectionStream stream;
  bool have_meta = false;
  for (const json& rec : read_jsonl(path, "detections")) {
    if (rec.value("kind", "") == "meta") {
      stream.img_h = rec.value("img_h", stream.img_h);
      stream.camera_rate = rec.value("camera_rate", stream.camera_rate);
      have_meta = true;
      continue;
    }
    if (!rec.contains("t") || !rec.contains("detections")) {
      throw SchemaError("detections: frame record missing t/detections");
    }
    const double t = rec["t"].get<double>();
    std::vector<CameraDetection> dets;
    for (const json& dj : rec["detections"]) {
      CameraDetection d;
      d.t = t;
      d.bearing = UnitBearing{json_to_vec3(dj.at("bearing"), "detection bearing")};
      d.aspect_det = dj.at("aspect").get<double>();
      d.box_h_det = dj.at("box_h").get<double>();
      d.score = dj.at("score").get<double>();
      dets.push_back(d);
    }
    stream.frames.emplace_back(t, std::move(dets));
  }
  if (!have_meta) throw SchemaError("detections: missing meta record");
  return stream;
}

void write_lidar(const std::filesystem::path& path,
                 const std::vector<LidarDepthObs>& obs) {
  std::ostringstream out;
  json meta{{"schema_version", kSchemaVersion}, {"kind", "meta"}, {"stream", "lidar"}};
  out << meta.dump() << '\n';
  for (const LidarDepthObs& o : obs) {
    json j{{"schema_version", kSchemaVersion},
           {"t", o.t},
           {"azimuth", o.azimuth},
           {"depth", o.depth},
           {"spread", o.spread}};
    out << j.dump() << '\n';
  }
  atomic_write(path, out.str());
}

std::vector<LidarDepthObs> read_lidar(const std::filesystem::path& path) {
  std::vector<LidarDepthObs> obs;
  for (const json& rec : read_jsonl(path, "lidar")) {
    if (rec.value("kind", "") == "meta") continue;
    LidarDepthObs o;
    o.t = rec.at("t").get<double>();
    o.azimuth = rec.at("azimuth").get<double>();
    o.depth = rec.at("depth").get<double>();
    o.spread = rec.at("spread").get<double>();
    obs.push_back(o);
  }
  return obs;
}

void write_tracks(const std::filesystem::path& path,
                  const std::vector<TrackRecord>& records,
                  const std::string& engine) {
  std::ostringstream out;
  json meta{{"schema_version", kSchemaVersion},
            {"kind", "meta"},
            {"stream", "tracks"},
            {"engine", engine}};
  out << meta.dump() << '\n';
  for (const TrackRecord& rec : records) {
    json cov = json::array();
    for (int i = 0; i < kStateDim; ++i) cov.push_back(rec.cov_diag[i]);
    json j{{"schema_version", kSchemaVersion},
           {"t", rec.t},
           {"id", rec.id},
           {"bearing", vec3_to_json(rec.bearing.vec())},
           {"depth", rec.depth},
           {"planar", json::array({rec.planar.x(), rec.planar.y()})},
           {"cov_diag", cov}};
    out << j.dump() << '\n';
  }
  atomic_write(path, out.str());
}

std::vector<TrackRecord> read_tracks(const std::filesystem::path& path) {
  std::vector<TrackRecord> records;
  for (const json& rec : read_jsonl(path, "tracks")) {
    if (rec.value("kind", "") == "meta") continue;
    TrackRecord r;
    r.t = rec.at("t").get<double>();
    r.id = rec.at("id").get<int64_t>();
    r.bearing = UnitBearing{json_to_vec3(rec.at("bearing"), "track bearing")};
    r.depth = rec.at("depth").get<double>();
    const json& pl = rec.at("planar");
    if (!pl.is_array() || pl.size() != 2) throw SchemaError("tracks: planar must be 2-array");
    r.planar = Eigen::Vector2d(pl[0].get<double>(), pl[1].get<double>());
    const json& cov = rec.at("cov_diag");
    if (!cov.is_array() || cov.size() != kStateDim) {
      throw SchemaError("tracks: cov_diag must have 10 entries");
    }
    for (int i = 0; i < kStateDim; ++i) r.cov_diag[i] = cov[i].get<double>();
    records.push_back(r);
  }
  return records;
}

std::vector<FrameInput> assemble_frames(const DetectionStream& dets,
                                        const std::vector<LidarDepthObs>& lidar) {
  std::vector<FrameInput> frames;
  frames.reserve(dets.frames.size());
  size_t li = 0;
  for (const auto& [t, d] : dets.frames) {
    FrameInput f;
    f.t = t;
    f.detections = d;
    while (li < lidar.size() && lidar[li].t <= t) {
      f.lidar_obs.push_back(lidar[li]);
      ++li;
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

TimingStats timing_stats_from_samples(std::vector<double> step_ms, double wall_seconds) {
  TimingStats ts;
  ts.wall_seconds = wall_seconds;
  ts.steps = static_cast<int>(step_ms.size());
  if (step_ms.empty()) return ts;
  std::sort(step_ms.begin(), step_ms.end());
  auto pct = [&](double q) {
    const size_t i = std::min(step_ms.size() - 1,
                              static_cast<size_t>(q * (step_ms.size() - 1) + 0.5));
    return step_ms[i];
  };
  ts.p50_ms = pct(0.50);
  ts.p90_ms = pct(0.90);
  ts.p99_ms = pct(0.99);
  ts.max_ms = step_ms.back();
  return ts;
}

void write_manifest(const std::filesystem::path& path, const std::string& command,
                    uint64_t seed, const std::string& scenario_hash,
                    const std::string& effective_config_json,
                    const TimingStats* timings) {
  json j{{"schema_version", kSchemaVersion},
         {"tool_version", kToolVersion},
         {"command", command},
         {"seed", seed},
         {"scenario_hash", scenario_hash},
         {"config", parse_json(effective_config_json, "effective config")},
         {"config_hash", fnv1a_hex(effective_config_json)}};
  if (timings != nullptr) {
    j["timings"] = {{"wall_seconds", timings->wall_seconds},
                    {"p50_ms", timings->p50_ms},
                    {"p90_ms", timings->p90_ms},
                    {"p99_ms", timings->p99_ms},
                    {"max_ms", timings->max_ms},
                    {"steps", timings->steps}};
  }
  atomic_write(path, j.dump(2) + "\n");
}

void write_metrics_json(const std::filesystem::path& path, const MetricsReport& report) {
  json targets = json::array();
  for (const TargetMetrics& tm : report.per_target) {
    json tj{{"gt_id", tm.gt_id},
            {"switches", tm.switches},
            {"matched_frames", tm.matched_frames},
            {"gt_frames", tm.gt_frames},
            {"coverage", tm.coverage},
            {"coverage_after_first", tm.coverage_after_first}};
    if (tm.rmse) {
      tj["rmse"] = *tm.rmse;
    } else {
      tj["rmse"] = nullptr;
    }
    targets.push_back(tj);
  }
  json j{{"schema_version", kSchemaVersion},
         {"per_target", targets},
         {"total_switches", report.total_switches},
         {"max_id_total", report.max_id_total}};
  atomic_write(path, j.dump(2) + "\n");
}

void write_errors_csv(const std::filesystem::path& path,
                      const std::vector<FrameMatching>& matching) {
  std::ostringstream out;
  out << "t,gt_id,track_id,planar_error_m\n";
  char buf[64];
  for (const FrameMatching& fm : matching) {
    for (const auto& [gt_id, track_id] : fm.gt_to_track) {
      std::snprintf(buf, sizeof(buf), "%.9g,%d,%lld,%.9g", fm.t, gt_id,
                    static_cast<long long>(track_id), fm.planar_err.at(gt_id));
      out << buf << '\n';
    }
  }
  atomic_write(path, out.str());
}

}  // namespace s3kf
