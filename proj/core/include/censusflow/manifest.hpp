#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "censusflow/domain.hpp"

namespace censusflow {

enum class TaskState { Pending, Staged, Processing, Processed, Integrated, Failed };
enum class Stage { Prestage, Process, Integrate };

std::string_view to_string(TaskState state);
std::string_view to_string(Stage stage);
std::optional<TaskState> task_state_from_name(std::string_view name);
std::optional<Stage> stage_from_name(std::string_view name);

constexpr bool is_terminal(TaskState s) { return s == TaskState::Integrated || s == TaskState::Failed; }

// PENDING -> STAGED -> PROCESSING -> PROCESSED -> INTEGRATED, plus FAILED
// from any non-terminal state.
bool transition_allowed(TaskState from, TaskState to);

struct FailureInfo {
  Stage stage = Stage::Prestage;
  std::string reason;
  int attempt = 0;

  friend bool operator==(const FailureInfo&, const FailureInfo&) = default;
};

struct Transition {
  TaskState from = TaskState::Pending;
  TaskState to = TaskState::Pending;
  std::int64_t at_ms = 0;
  std::optional<FailureInfo> failure;
};

// Task ids are filesystem-safe: register id and zero-padded sequence index.
std::string make_task_id(const ImageRef& image);

struct TaskManifest {
  std::string task_id;
  ImageRef image;
  TaskState state = TaskState::Pending;
  std::optional<FailureInfo> failure;
  std::string staged_path;  // relative to the workspace root
  std::string result_path;
  std::int64_t created_ms = 0;
  std::vector<Transition> history;

  // Applies a transition, clamping at_ms so timestamps never decrease.
  // Throws Error(InvalidTransition) for an edge outside the state graph.
  const Transition& advance(TaskState to, std::int64_t at_ms, std::optional<FailureInfo> failure = std::nullopt);
};

nlohmann::json to_json(const TaskManifest& manifest);
TaskManifest manifest_from_json(const nlohmann::json& j);
nlohmann::json to_json(const std::string& task_id, const Transition& t);

// Directory layout of a batch:
//   manifests/{task_id}.json
//   staging/{task_id}/image.jpg
//   results/{task_id}.json
//   store/records.ndjson
//   log/transitions.ndjson
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path manifest_path(std::string_view task_id) const;
  std::filesystem::path staged_image_path(std::string_view task_id) const;
  std::filesystem::path result_path(std::string_view task_id) const;
  std::filesystem::path store_path() const;
  std::filesystem::path log_path() const;
  std::filesystem::path batch_path(std::string_view batch) const;

  bool has_manifest(std::string_view task_id) const;
  TaskManifest load(std::string_view task_id) const;
  // Atomic write.
  void save(const TaskManifest& manifest) const;
  // All manifests ordered by (register id, sequence index).
  std::vector<TaskManifest> load_all() const;

  // Serialized append to the transition log.
  void log_transition(const std::string& task_id, const Transition& t);

  // Named task lists written by plan.
  void save_batch(std::string_view batch, const std::vector<std::string>& task_ids) const;
  std::vector<std::string> load_batch(std::string_view batch) const;

 private:
  std::filesystem::path root_;
  std::mutex log_mutex_;
};

// Replays log/transitions.ndjson and returns every recorded edge that is
// outside the state graph or does not start from the task's previous state.
std::vector<std::string> audit_transition_log(const std::filesystem::path& log_path);

}  // namespace censusflow
