#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>

#include "s3kf/errors.hpp"
#include "s3kf/harness.hpp"
#include "s3kf/io.hpp"
#include "s3kf/log.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitSchema = 4;

int guarded(int (*fn)()) {
  try {
    return fn();
  } catch (const s3kf::ConfigError& e) {
    s3kf::log_error(std::string("config error: ") + e.what());
    return kExitConfig;
  } catch (const s3kf::SchemaError& e) {
    s3kf::log_error(std::string("schema error: ") + e.what());
    return kExitSchema;
  } catch (const s3kf::IoError& e) {
    s3kf::log_error(std::string("i/o error: ") + e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    s3kf::log_error(e.what());
    return 1;
  }
}

std::string g_scenario, g_detections, g_lidar, g_config, g_tracks, g_gt, g_out;
std::string g_engine = "spherical";
uint64_t g_seed = 0;

int do_simulate() {
  s3kf::run_simulate(g_scenario, g_seed, g_out);
  return 0;
}

int do_track() {
  std::optional<std::filesystem::path> config;
  if (!g_config.empty()) config = g_config;
  s3kf::run_track(g_detections, g_lidar, config, g_engine, g_out);
  return 0;
}

int do_eval() {
  s3kf::run_eval(g_tracks, g_gt, g_out);
  return 0;
}

int do_compare() {
  s3kf::run_compare(g_scenario, g_seed, g_out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical-state panoramic multi-object tracking harness"};
  app.require_subcommand(1);
  app.set_version_flag("--version", s3kf::kToolVersion);

  CLI::App* sim = app.add_subcommand("simulate", "Render a synthetic scenario");
  sim->add_option("--scenario", g_scenario, "Scenario config (JSON)")->required();
  sim->add_option("--seed", g_seed, "Random seed")->required();
  sim->add_option("--out", g_out, "Output directory")->required();

  CLI::App* trk = app.add_subcommand("track", "Run a tracking engine on logs");
  trk->add_option("--detections", g_detections, "detections.jsonl")->required();
  trk->add_option("--lidar", g_lidar, "lidar.jsonl")->required();
  trk->add_option("--config", g_config, "Tracker config (JSON, optional)");
  trk->add_option("--engine", g_engine, "spherical|pixel")
      ->check(CLI::IsMember({"spherical", "pixel"}));
  trk->add_option("--out", g_out, "Output directory")->required();

  CLI::App* ev = app.add_subcommand("eval", "Evaluate tracks against ground truth");
  ev->add_option("--tracks", g_tracks, "tracks.jsonl")->required();
  ev->add_option("--gt", g_gt, "gt.jsonl")->required();
  ev->add_option("--out", g_out, "Output directory")->required();

  CLI::App* cmp = app.add_subcommand("compare",
                                     "Simulate, run both engines, and evaluate both");
  cmp->add_option("--scenario", g_scenario, "Scenario config (JSON)")->required();
  cmp->add_option("--seed", g_seed, "Random seed")->required();
  cmp->add_option("--out", g_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (sim->parsed()) return guarded(do_simulate);
  if (trk->parsed()) return guarded(do_track);
  if (ev->parsed()) return guarded(do_eval);
  if (cmp->parsed()) return guarded(do_compare);
  return 1;
}
