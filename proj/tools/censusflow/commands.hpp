#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace censusflow::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;

struct IngestArgs {
  std::filesystem::path csv, mapping, gazetteer;
  std::optional<std::filesystem::path> resolutions;
  std::optional<std::filesystem::path> out;  // defaults to the workspace
  std::optional<double> threshold, auto_threshold;
  std::optional<std::string> department;
};

struct CheckImagesArgs {
  std::filesystem::path registry;
  std::optional<std::string> endpoint;
  std::optional<int> api_version;
  std::optional<std::size_t> concurrency;
  std::optional<std::filesystem::path> out;
  bool verify_pixels = false;
};

struct PlanArgs {
  std::filesystem::path registry;
  std::optional<int> year;
  std::optional<std::string> commune, register_id, batch;
  std::optional<std::size_t> limit;
};

struct RunArgs {
  std::optional<std::string> endpoint;
  std::optional<int> api_version;
  std::string stages = "pre,proc,post";
  std::optional<std::string> workers, scheduler, batch;
  std::optional<int> retries;
  std::optional<std::size_t> window;
  std::optional<std::size_t> interrupt_after;
  std::optional<std::filesystem::path> report;
};

struct StatusArgs {
  std::optional<std::string> batch;
  bool json = false;
};

struct EvaluateArgs {
  std::optional<std::filesystem::path> truth, pred, classes, json;
};

struct ExportArgs {
  std::optional<std::filesystem::path> households, transcripts, classes, truth_classes;
  bool continue_across_gaps = false;
};

struct SimulateArgs {
  std::size_t images = 0;
  std::vector<std::string> stages;
  std::optional<std::string> deadline, mode;
  std::optional<std::filesystem::path> json;
  std::optional<int> max_workers;
};

struct GenFixturesArgs {
  std::filesystem::path out;
  std::size_t registers = 2;
  std::size_t pages = 5;
  bool covers = false;
};

int cmd_ingest(const GlobalConfig& cfg, const IngestArgs& args, bool dry_run);
int cmd_check_images(const GlobalConfig& cfg, const CheckImagesArgs& args, bool dry_run);
int cmd_plan(const GlobalConfig& cfg, const PlanArgs& args, bool dry_run);
int cmd_run(const GlobalConfig& cfg, const RunArgs& args, bool dry_run);
int cmd_status(const GlobalConfig& cfg, const StatusArgs& args, bool dry_run);
int cmd_evaluate(const GlobalConfig& cfg, const EvaluateArgs& args, bool dry_run);
int cmd_export(const GlobalConfig& cfg, const ExportArgs& args, bool dry_run);
int cmd_simulate(const GlobalConfig& cfg, const SimulateArgs& args, bool dry_run);
int cmd_gen_fixtures(const GlobalConfig& cfg, const GenFixturesArgs& args, bool dry_run);

}  // namespace censusflow::cli
