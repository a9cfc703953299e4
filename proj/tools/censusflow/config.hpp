#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace censusflow::cli {

// Settings shared by all subcommands. Defaults below; a JSON config file may
// override any of them, and explicit flags override the file.
struct GlobalConfig {
  std::filesystem::path workspace = ".";
  std::uint64_t seed = 0;
  std::size_t jobs = 0;  // 0 = no global cap
  int verbosity = 0;

  struct Ingest {
    double threshold = 0.85;
    double auto_threshold = 0.95;
    std::optional<std::string> department;
  } ingest;

  struct Iiif {
    std::string endpoint;
    int api_version = 3;
    int max_attempts = 3;
    int base_backoff_ms = 200;
    int timeout_ms = 10000;
    std::size_t concurrency = 8;
  } iiif;

  struct Pipeline {
    int retry_limit = 3;
    int backoff_ms = 50;
    std::size_t window = 32;
    std::size_t io_workers = 14;
    std::string scheduler = "local:n=4";
    std::string workers = "mock";
  } pipeline;

  struct Simulate {
    std::string mode = "pipelined";
    int max_workers = 4096;
  } simulate;

  // Applies a config document; unknown keys or wrong types throw
  // Error(ConfigInvalid).
  void apply(const nlohmann::json& doc);
  void load(const std::filesystem::path& path);

  // min(value, jobs) when a global cap is set.
  std::size_t capped(std::size_t value) const;

  nlohmann::json to_json() const;
};

}  // namespace censusflow::cli
