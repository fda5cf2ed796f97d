// atlas-fuse: offline sensor-fusion pipeline runner and synthetic dataset generator.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "atlas/config.hpp"
#include "atlas/errors.hpp"
#include "atlas/pipeline.hpp"
#include "atlas/scenario_gen.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;

int cmd_run(const std::string& config_path, const std::optional<std::string>& output,
            const std::optional<std::uint64_t>& until, const std::string& disable,
            const std::optional<double>& snapshot_every, bool verbose) {
  atlas::PipelineConfig cfg = atlas::load_config(config_path);
  if (output) cfg.output_path = *output;
  if (until) cfg.until = atlas::Timestamp{*until};
  if (snapshot_every) cfg.aggregation.snapshot_every = *snapshot_every;
  if (verbose) cfg.log_level = "debug";
  std::stringstream stages(disable);
  for (std::string stage; std::getline(stages, stage, ',');) {
    if (!stage.empty()) cfg.stages.disable(stage);
  }

  const atlas::RunReport report = atlas::run(cfg);
  for (const auto& [sensor, count] : report.packets_per_sensor) fmt::print("{:<18} {:>8}\n", sensor, count);
  fmt::print("packets            {:>8}\n", report.total_packets);
  fmt::print("anomalies          {:>8}\n", report.anomalies.size());
  fmt::print("scans aggregated   {:>8} (skipped {})\n", report.lidar_scans_aggregated, report.lidar_scans_skipped);
  fmt::print("frames fused       {:>8} (skipped {})\n", report.camera_frames_fused, report.camera_frames_skipped);
  fmt::print("frustums           {:>8}\n", report.frustums_built);
  fmt::print("annotation files   {:>8}\n", report.annotation_files);
  fmt::print("depth images       {:>8}\n", report.depth_images);
  fmt::print("wall time          {:>8.2f} s\n", report.wall_time_seconds);
  return kExitOk;
}

int cmd_gen(const std::string& spec_path, const std::string& out) {
  const atlas::ScenarioSpec spec = atlas::load_scenario(spec_path);
  const atlas::GenerationReport report = atlas::generate_scenario(spec, out);
  for (const auto& [sensor, count] : report.records) fmt::print("{:<18} {:>8}\n", sensor, count);
  fmt::print("records            {:>8}\n", report.total());
  fmt::print("pipeline config    {}/pipeline.yaml\n", out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline GNSS/IMU/LiDAR/camera fusion pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> output;
  std::optional<std::uint64_t> until;
  std::string disable;
  std::optional<double> snapshot_every;
  bool verbose = false;
  auto* run = app.add_subcommand("run", "Replay a dataset through the pipeline");
  run->add_option("--config", config_path, "Pipeline YAML config")->required()->check(CLI::ExistingFile);
  run->add_option("--output", output, "Output directory (overrides output.path)");
  run->add_option("--until", until, "Stop after this timestamp (ns)");
  run->add_option("--disable", disable,
                  "Comma-separated stages to turn off: failcheck,positioning,aggregation,detection,transfer,depth");
  run->add_option("--snapshot-every", snapshot_every, "Write aggregated_<ts>.ply every N seconds of data time");
  run->add_flag("-v,--verbose", verbose, "Debug logging");

  std::string spec_path;
  std::string out_dir;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset with ground truth");
  gen->add_option("--spec", spec_path, "Scenario YAML")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out_dir, "Output dataset directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, output, until, disable, snapshot_every, verbose);
    return cmd_gen(spec_path, out_dir);
  } catch (const atlas::ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kExitConfig;
  } catch (const atlas::DataError& e) {
    spdlog::error("data error: {}", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    spdlog::error("error: {}", e.what());
    return kExitData;
  }
}
