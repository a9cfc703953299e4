#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "censusflow/household.hpp"
#include "censusflow/iiif.hpp"
#include "censusflow/ingest.hpp"
#include "censusflow/label_codec.hpp"
#include "censusflow/manifest.hpp"
#include "censusflow/scheduler.hpp"
#include "censusflow/workers.hpp"

namespace censusflow {

// ---------------------------------------------------------------------------
// Planning

struct PlanFilter {
  std::optional<int> year;
  std::optional<std::string> commune_code;
  std::optional<std::string> register_id;
  std::optional<std::size_t> limit;
};

struct PlanResult {
  std::vector<std::string> task_ids;   // every selected task, registry order
  std::vector<TaskManifest> pending;   // selected tasks now PENDING
  std::size_t created = 0;
  std::size_t skipped = 0;             // already past PENDING, left untouched
};

// One task per selected image. Existing manifests are never rewritten, so
// replanning is idempotent. Throws Error(EmptySelection). With dry_run
// nothing is written.
PlanResult plan_batch(Workspace& workspace, const Registry& registry, const PlanFilter& filter = {},
                      bool dry_run = false);

// ---------------------------------------------------------------------------
// Result payloads

struct ResultPayload {
  std::string task_id;
  ImageRef image;
  PageClass page_class = PageClass::Other;
  std::optional<PageTranscript> transcript;  // LIST pages only
  std::vector<DecodeWarning> warnings;
  std::string label;  // raw recognizer output, LIST pages only
  std::string worker_version;
};

// Schema:
// {"schema":1, "task_id", "register_id", "sequence_index", "iiif_identifier",
//  "page_class", "worker",
//  "records":[{"is_head":bool, "fields":[{"tag":"SURNAME_HEAD","text":"..."}]}],
//  "label":"...", "warnings":[{"kind":"UnknownToken","position":7}]}
// "records" and "label" appear for LIST pages only.
nlohmann::json to_json(const ResultPayload& payload);

// Empty when the document satisfies the schema and the payload invariants.
std::vector<std::string> validate_payload(const nlohmann::json& j);

// Throws Error(Parse) listing validate_payload problems.
ResultPayload payload_from_json(const nlohmann::json& j);

// Keyed result store with an exactly-once append.
class ResultSink {
 public:
  virtual ~ResultSink() = default;
  virtual bool contains(const std::string& key) = 0;
  // Returns false, writing nothing, when the key is already stored.
  virtual bool append(const std::string& key, const nlohmann::json& record) = 0;
};

// Append-only NDJSON file: {"key": ..., "payload": ...} per line.
class FileSink : public ResultSink {
 public:
  explicit FileSink(std::filesystem::path path);
  bool contains(const std::string& key) override;
  bool append(const std::string& key, const nlohmann::json& record) override;
  std::size_t size();

 private:
  std::filesystem::path path_;
  std::set<std::string> keys_;
  std::mutex mutex_;
};

std::map<std::string, nlohmann::json> load_store(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Stages

// Admits a fixed number of transitions, then throws Error(Interrupted) for
// every later one, imitating a crash between two persisted steps.
class Interrupter {
 public:
  explicit Interrupter(std::optional<std::size_t> after = std::nullopt) : after_(after) {}
  void admit();
  bool tripped() const;

 private:
  std::optional<std::size_t> after_;
  std::size_t count_ = 0;
  mutable std::mutex mutex_;
};

// Per-stage wall time of tasks that did work.
struct LatencyStats {
  std::map<Stage, double> total_ms;
  std::map<Stage, std::size_t> samples;
  std::mutex mutex;

  void add(Stage stage, double ms);
  double mean(Stage stage);
};

struct StageOptions {
  int retry_limit = 3;  // attempts per task and stage
  int backoff_ms = 50;
  Sleeper sleeper;      // defaults to a real sleep
  std::uint64_t seed = 0;
  std::size_t io_workers = 14;
  CheckOptions check;
  Interrupter* interrupter = nullptr;
  LatencyStats* latency = nullptr;
};

// Fetches info.json and the full image of PENDING tasks into staging/.
// Other tasks are returned unchanged.
std::vector<TaskManifest> run_stage_prestage(Workspace& workspace, std::vector<TaskManifest> tasks,
                                             const IiifEndpoint& endpoint, Transport& transport,
                                             const StageOptions& options = {});

// Classifies STAGED (and interrupted PROCESSING) tasks; LIST pages also go
// through the recognizer and lenient decoding. Writes results/{task_id}.json.
std::vector<TaskManifest> run_stage_process(Workspace& workspace, std::vector<TaskManifest> tasks, Worker& worker,
                                            SchedulerAdapter& scheduler, const StageOptions& options = {});

// Validates PROCESSED payloads and appends them to the sink.
std::vector<TaskManifest> run_stage_integrate(Workspace& workspace, std::vector<TaskManifest> tasks,
                                              ResultSink& sink, const StageOptions& options = {});

// ---------------------------------------------------------------------------
// Batches

struct RunConfig {
  IiifEndpoint endpoint;
  std::set<Stage> stages{Stage::Prestage, Stage::Process, Stage::Integrate};
  StageOptions stage;
  std::size_t window = 32;  // tasks per in-flight window
  std::optional<std::size_t> interrupt_after;
  std::optional<std::string> batch;  // named task list; all manifests otherwise

  // Throws Error(ConfigInvalid).
  void validate() const;
};

struct BatchReport {
  std::size_t planned = 0;
  std::map<TaskState, std::size_t> counts;
  std::map<Stage, double> mean_latency_ms;
  std::vector<std::pair<std::string, FailureInfo>> failures;
  std::string scheduler;
  std::uint64_t seed = 0;

  std::size_t count(TaskState s) const;
  bool complete() const;  // every task terminal
  nlohmann::json to_json() const;
  std::string format() const;
};

BatchReport summarize(const std::vector<TaskManifest>& tasks);

// Drives the three stages over the workspace's tasks as a software pipeline:
// window k is pre-staged while window k-1 is processed and window k-2
// integrated. Idempotent and resumable. Throws Error(Interrupted) when the
// configured interruption trips.
BatchReport run_batch(Workspace& workspace, const RunConfig& config, Worker& worker, SchedulerAdapter& scheduler,
                      ResultSink& sink);

// ---------------------------------------------------------------------------
// Export

struct RegisterExport {
  std::string register_id;
  HouseholdSet households;
  std::size_t gap_pages = 0;  // pages without an integrated result
};

// One merge_register per register over the integrated results; pages that
// are not INTEGRATED become non-LIST gaps.
std::vector<RegisterExport> export_households(const Workspace& workspace, MergeOptions options = {});
void write_households_export(std::ostream& out, const std::vector<RegisterExport>& exports);

}  // namespace censusflow
