#include "censusflow/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "censusflow/clock.hpp"
#include "censusflow/error.hpp"
#include "censusflow/rng.hpp"

namespace censusflow {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string relative_to(const Workspace& ws, const std::filesystem::path& p) {
  return std::filesystem::relative(p, ws.root()).generic_string();
}

std::filesystem::path resolve(const Workspace& ws, const std::string& relative, const std::filesystem::path& fallback) {
  return relative.empty() ? fallback : ws.root() / relative;
}

bool file_exists(const std::filesystem::path& p) {
  std::error_code ec;
  return std::filesystem::is_regular_file(p, ec);
}

// Per-task stage operations. Every operation is a no-op for tasks outside its
// input state, which makes reruns and resumption safe.
class StageRunner {
 public:
  StageRunner(Workspace& ws, const StageOptions& options) : ws_(ws), options_(options) {}

  void prestage(TaskManifest& m, const IiifEndpoint& endpoint, Transport& transport) {
    if (m.state != TaskState::Pending) return;
    const auto start = std::chrono::steady_clock::now();
    CheckOptions check = options_.check;
    if (!check.sleeper) check.sleeper = options_.sleeper;
    check.jitter_seed = options_.seed;
    const IntegrityResult integrity = check_integrity(endpoint, m.image, transport, check);
    if (integrity.status != IntegrityStatus::Ok) {
      fail(m, Stage::Prestage, lower(to_string(integrity.status)), integrity.attempts);
      return;
    }
    TransportResponse response;
    int attempts = 0;
    try {
      Rng rng(mix_seed(options_.seed, fnv1a(m.task_id)));
      std::tie(response, attempts) =
          get_with_retry(endpoint, full_image_url(endpoint, m.image.iiif_identifier), transport, rng, check.sleeper);
    } catch (const std::exception& e) {
      response = {false, 0, {}, e.what()};
    }
    attempts += integrity.attempts;
    if (response.ok && (response.status == 404 || response.status == 410)) {
      fail(m, Stage::Prestage, "missing", attempts);
      return;
    }
    if (!response.ok || response.status < 200 || response.status >= 300) {
      fail(m, Stage::Prestage, "transport_error", attempts);
      return;
    }
    const auto path = ws_.staged_image_path(m.task_id);
    write_text_file_atomic(path, response.body);
    m.image = integrity.image;
    m.staged_path = relative_to(ws_, path);
    transition(m, TaskState::Staged);
    record(Stage::Prestage, start);
  }

  void process(TaskManifest& m, Worker& worker, ExecutionContext& ctx) {
    if (m.state != TaskState::Staged && m.state != TaskState::Processing) return;
    const auto start = std::chrono::steady_clock::now();
    const auto staged = resolve(ws_, m.staged_path, ws_.staged_image_path(m.task_id));
    if (!file_exists(staged)) {
      fail(m, Stage::Process, "missing_input", 0);
      return;
    }
    const std::string bytes = read_text_file(staged);
    if (m.state == TaskState::Staged) transition(m, TaskState::Processing);

    Rng rng(mix_seed(options_.seed, fnv1a(m.task_id)));
    const RetryPolicy backoff{options_.retry_limit, options_.backoff_ms};
    const Sleeper sleep = options_.sleeper ? options_.sleeper
                                           : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); });
    for (int attempt = 1; attempt <= options_.retry_limit; ++attempt) {
      ctx.attempt = attempt;
      std::optional<ResultPayload> payload;
      bool isolation = false;
      try {
        payload = run_worker(m, bytes, worker, ctx);
      } catch (const Error& e) {
        isolation = e.code() == ErrorCode::IsolationViolation;
      } catch (const std::exception&) {
      }
      if (payload) {
        const auto path = ws_.result_path(m.task_id);
        write_text_file_atomic(path, to_json(*payload).dump(2) + "\n");
        m.result_path = relative_to(ws_, path);
        transition(m, TaskState::Processed);
        record(Stage::Process, start);
        return;
      }
      if (isolation) {
        fail(m, Stage::Process, "isolation_violation", attempt);
        return;
      }
      if (attempt < options_.retry_limit) sleep(backoff_delay(backoff, attempt - 1, rng));
    }
    fail(m, Stage::Process, "worker_error", options_.retry_limit);
  }

  void integrate(TaskManifest& m, ResultSink& sink) {
    if (m.state != TaskState::Processed) return;
    const auto start = std::chrono::steady_clock::now();
    const auto path = resolve(ws_, m.result_path, ws_.result_path(m.task_id));
    if (!file_exists(path)) {
      fail(m, Stage::Integrate, "missing_result", 1);
      return;
    }
    const auto j = nlohmann::json::parse(read_text_file(path), nullptr, false);
    auto problems = j.is_discarded() ? std::vector<std::string>{"not JSON"} : validate_payload(j);
    if (problems.empty() && j.at("task_id") != m.task_id) problems.push_back("task_id mismatch");
    if (!problems.empty()) {
      fail(m, Stage::Integrate, "schema", 1);
      return;
    }
    sink.append(m.task_id, j);
    transition(m, TaskState::Integrated);
    record(Stage::Integrate, start);
  }

 private:
  ResultPayload run_worker(const TaskManifest& m, const std::string& bytes, Worker& worker, ExecutionContext& ctx) {
    ResultPayload payload;
    payload.task_id = m.task_id;
    payload.image = m.image;
    payload.worker_version = worker.version();
    payload.page_class = worker.classify(bytes, ctx);
    if (payload.page_class == PageClass::List) {
      payload.label = worker.recognize(bytes, ctx);
      DecodeReport report = decode_lenient(payload.label);
      report.transcript.page_id = m.task_id;
      report.transcript.page_index = m.image.sequence_index;
      payload.transcript = std::move(report.transcript);
      payload.warnings = std::move(report.warnings);
    }
    return payload;
  }

  void transition(TaskManifest& m, TaskState to, std::optional<FailureInfo> failure = std::nullopt) {
    if (options_.interrupter) options_.interrupter->admit();
    const Transition t = m.advance(to, now_ms(), std::move(failure));
    ws_.save(m);
    ws_.log_transition(m.task_id, t);
  }

  void fail(TaskManifest& m, Stage stage, std::string reason, int attempt) {
    transition(m, TaskState::Failed, FailureInfo{stage, std::move(reason), attempt});
  }

  void record(Stage stage, std::chrono::steady_clock::time_point start) {
    if (!options_.latency) return;
    const std::chrono::duration<double, std::milli> elapsed = std::chrono::steady_clock::now() - start;
    options_.latency->add(stage, elapsed.count());
  }

  Workspace& ws_;
  const StageOptions& options_;
};

template <typename Op>
std::vector<StageTask> make_tasks(std::vector<TaskManifest>& tasks, const std::vector<std::size_t>& indices, Op op) {
  std::vector<StageTask> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back([&tasks, i, op](ExecutionContext& ctx) { op(tasks[i], ctx); });
  return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

void check_stage_options(const StageOptions& o) {
  if (o.retry_limit < 1) throw Error(ErrorCode::ConfigInvalid, "retry limit must be >= 1");
  if (o.backoff_ms < 0) throw Error(ErrorCode::ConfigInvalid, "backoff must be >= 0");
  if (o.io_workers < 1) throw Error(ErrorCode::ConfigInvalid, "io workers must be >= 1");
}

}  // namespace

// ---------------------------------------------------------------------------

PlanResult plan_batch(Workspace& workspace, const Registry& registry, const PlanFilter& filter, bool dry_run) {
  PlanResult result;
  std::set<std::string> seen;
  for (const auto& reg : registry.registers) {
    const auto& meta = reg.metadata;
    if (filter.year && meta.census_year != *filter.year) continue;
    if (filter.commune_code && meta.commune.code != *filter.commune_code) continue;
    if (filter.register_id && meta.register_id != *filter.register_id) continue;
    for (const auto& image : reg.images) {
      if (filter.limit && result.task_ids.size() >= *filter.limit) break;
      const std::string id = make_task_id(image);
      if (!seen.insert(id).second) throw Error(ErrorCode::ConfigInvalid, "two images map to task id " + id);
      result.task_ids.push_back(id);
      if (workspace.has_manifest(id)) {
        TaskManifest existing = workspace.load(id);
        if (existing.state == TaskState::Pending) {
          result.pending.push_back(std::move(existing));
        } else {
          ++result.skipped;
        }
        continue;
      }
      TaskManifest m;
      m.task_id = id;
      m.image = image;
      m.created_ms = now_ms();
      if (!dry_run) workspace.save(m);
      ++result.created;
      result.pending.push_back(std::move(m));
    }
  }
  if (result.task_ids.empty()) throw Error(ErrorCode::EmptySelection, "no registry image matches the filter");
  return result;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const ResultPayload& p) {
  nlohmann::json j{{"schema", 1},
                   {"task_id", p.task_id},
                   {"register_id", p.image.register_id},
                   {"sequence_index", p.image.sequence_index},
                   {"iiif_identifier", p.image.iiif_identifier},
                   {"page_class", page_class_name(p.page_class)},
                   {"worker", p.worker_version}};
  nlohmann::json warnings = nlohmann::json::array();
  for (const auto& w : p.warnings) warnings.push_back({{"kind", to_string(w.kind)}, {"position", w.position}});
  j["warnings"] = std::move(warnings);
  if (p.transcript) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : p.transcript->records) {
      nlohmann::json fields = nlohmann::json::array();
      for (const auto& [tag, text] : r.fields) fields.push_back({{"tag", tag_name(tag)}, {"text", text}});
      records.push_back({{"is_head", r.is_head}, {"fields", std::move(fields)}});
    }
    j["records"] = std::move(records);
    j["label"] = p.label;
  }
  return j;
}

std::vector<std::string> validate_payload(const nlohmann::json& j) {
  std::vector<std::string> problems;
  if (!j.is_object()) return {"payload is not an object"};
  for (const char* key : {"task_id", "register_id", "iiif_identifier", "page_class", "worker"}) {
    if (!j.contains(key) || !j[key].is_string()) problems.push_back(std::string("missing string '") + key + "'");
  }
  if (!j.contains("sequence_index") || !j["sequence_index"].is_number_unsigned())
    problems.push_back("missing unsigned 'sequence_index'");
  if (!j.contains("warnings") || !j["warnings"].is_array()) problems.push_back("missing array 'warnings'");
  if (!problems.empty()) return problems;

  const auto cls = page_class_from_name(j["page_class"].get<std::string>());
  if (!cls) return {"unknown page_class"};
  const bool has_records = j.contains("records") && !j["records"].is_null();
  if (*cls == PageClass::List && !has_records) problems.push_back("LIST page without records");
  if (*cls != PageClass::List && has_records) problems.push_back("transcript on a non-LIST page");
  if (has_records) {
    if (!j["records"].is_array()) return {"'records' is not an array"};
    std::size_t row = 0;
    for (const auto& r : j["records"]) {
      const std::string where = "record " + std::to_string(row++);
      if (!r.is_object() || !r.contains("fields") || !r["fields"].is_array() || !r.contains("is_head") ||
          !r["is_head"].is_boolean()) {
        problems.push_back(where + ": malformed");
        continue;
      }
      std::set<EntityTag> seen;
      for (const auto& f : r["fields"]) {
        if (!f.is_object() || !f.contains("tag") || !f["tag"].is_string() || !f.contains("text") ||
            !f["text"].is_string()) {
          problems.push_back(where + ": malformed field");
          continue;
        }
        const auto tag = tag_from_name(f["tag"].get<std::string>());
        if (!tag) {
          problems.push_back(where + ": unknown tag " + f["tag"].get<std::string>());
        } else if (!seen.insert(*tag).second) {
          problems.push_back(where + ": repeated tag " + f["tag"].get<std::string>());
        }
        if (f["text"].get<std::string>().empty()) problems.push_back(where + ": empty text");
      }
      if (seen.empty()) problems.push_back(where + ": no fields");
      if (r["is_head"].get<bool>() != seen.contains(EntityTag::SurnameHead))
        problems.push_back(where + ": is_head disagrees with the surname tag");
    }
  }
  return problems;
}

ResultPayload payload_from_json(const nlohmann::json& j) {
  if (const auto problems = validate_payload(j); !problems.empty())
    throw Error(ErrorCode::Parse, "result payload: " + problems.front());
  ResultPayload p;
  p.task_id = j["task_id"].get<std::string>();
  p.image.register_id = j["register_id"].get<std::string>();
  p.image.sequence_index = j["sequence_index"].get<std::size_t>();
  p.image.iiif_identifier = j["iiif_identifier"].get<std::string>();
  p.page_class = *page_class_from_name(j["page_class"].get<std::string>());
  p.worker_version = j["worker"].get<std::string>();
  for (const auto& w : j["warnings"]) {
    DecodeWarning warning;
    warning.position = w.value("position", std::size_t{0});
    const std::string kind = w.value("kind", "");
    for (auto k : {DecodeWarningKind::UnknownToken, DecodeWarningKind::EmptyField,
                   DecodeWarningKind::RecordWithoutSurname, DecodeWarningKind::DuplicateFieldInRecord,
                   DecodeWarningKind::StrayText}) {
      if (to_string(k) == kind) warning.kind = k;
    }
    p.warnings.push_back(warning);
  }
  if (j.contains("records") && !j["records"].is_null()) {
    PageTranscript t;
    t.page_id = p.task_id;
    t.page_index = p.image.sequence_index;
    for (const auto& r : j["records"]) {
      PersonRecord rec;
      rec.is_head = r["is_head"].get<bool>();
      for (const auto& f : r["fields"]) rec.fields[*tag_from_name(f["tag"].get<std::string>())] = f["text"];
      t.records.push_back(std::move(rec));
    }
    p.transcript = std::move(t);
    p.label = j.value("label", "");
  }
  return p;
}

FileSink::FileSink(std::filesystem::path path) : path_(std::move(path)) {
  for (auto& [key, payload] : load_store(path_)) keys_.insert(key);
}

bool FileSink::contains(const std::string& key) {
  std::lock_guard lock(mutex_);
  return keys_.contains(key);
}

bool FileSink::append(const std::string& key, const nlohmann::json& record) {
  std::lock_guard lock(mutex_);
  if (keys_.contains(key)) return false;
  std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot append to " + path_.string());
  out << nlohmann::json{{"key", key}, {"payload", record}}.dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "write failed on " + path_.string());
  keys_.insert(key);
  return true;
}

std::size_t FileSink::size() {
  std::lock_guard lock(mutex_);
  return keys_.size();
}

std::map<std::string, nlohmann::json> load_store(const std::filesystem::path& path) {
  std::map<std::string, nlohmann::json> store;
  if (!file_exists(path)) return store;
  std::ifstream in(path, std::ios::binary);
  std::string line;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line, nullptr, false);
    // A torn final line from a crash is ignored.
    if (j.is_discarded() || !j.is_object() || !j.contains("key") || !j["key"].is_string()) continue;
    store.emplace(j["key"].get<std::string>(), j.value("payload", nlohmann::json(nullptr)));
  }
  return store;
}

// ---------------------------------------------------------------------------

void Interrupter::admit() {
  std::lock_guard lock(mutex_);
  if (after_ && count_ >= *after_) throw Error(ErrorCode::Interrupted, "interrupted after " + std::to_string(count_) + " transitions");
  ++count_;
}

bool Interrupter::tripped() const {
  std::lock_guard lock(mutex_);
  return after_ && count_ >= *after_;
}

void LatencyStats::add(Stage stage, double ms) {
  std::lock_guard lock(mutex);
  total_ms[stage] += ms;
  ++samples[stage];
}

double LatencyStats::mean(Stage stage) {
  std::lock_guard lock(mutex);
  const auto n = samples[stage];
  return n ? total_ms[stage] / static_cast<double>(n) : 0.0;
}

std::vector<TaskManifest> run_stage_prestage(Workspace& workspace, std::vector<TaskManifest> tasks,
                                             const IiifEndpoint& endpoint, Transport& transport,
                                             const StageOptions& options) {
  check_stage_options(options);
  endpoint.validate();
  StageRunner runner(workspace, options);
  LocalExecutor pool(transport, 1, options.io_workers);
  auto handle = pool.submit(Stage::Prestage, make_tasks(tasks, all_indices(tasks.size()),
                                                        [&](TaskManifest& m, ExecutionContext& ctx) {
                                                          runner.prestage(m, endpoint, ctx.transport);
                                                        }));
  pool.wait(handle);
  return tasks;
}

std::vector<TaskManifest> run_stage_process(Workspace& workspace, std::vector<TaskManifest> tasks, Worker& worker,
                                            SchedulerAdapter& scheduler, const StageOptions& options) {
  check_stage_options(options);
  StageRunner runner(workspace, options);
  auto handle = scheduler.submit(Stage::Process, make_tasks(tasks, all_indices(tasks.size()),
                                                            [&](TaskManifest& m, ExecutionContext& ctx) {
                                                              runner.process(m, worker, ctx);
                                                            }));
  scheduler.wait(handle);
  return tasks;
}

std::vector<TaskManifest> run_stage_integrate(Workspace& workspace, std::vector<TaskManifest> tasks,
                                              ResultSink& sink, const StageOptions& options) {
  check_stage_options(options);
  StageRunner runner(workspace, options);
  NullTransport offline;
  LocalExecutor pool(offline, 1, options.io_workers);
  auto handle = pool.submit(Stage::Integrate, make_tasks(tasks, all_indices(tasks.size()),
                                                         [&](TaskManifest& m, ExecutionContext&) {
                                                           runner.integrate(m, sink);
                                                         }));
  pool.wait(handle);
  return tasks;
}

// ---------------------------------------------------------------------------

void RunConfig::validate() const {
  check_stage_options(stage);
  if (window < 1) throw Error(ErrorCode::ConfigInvalid, "window must be >= 1");
  if (stages.empty()) throw Error(ErrorCode::ConfigInvalid, "no stage selected");
  if (stages.contains(Stage::Prestage)) endpoint.validate();
}

std::size_t BatchReport::count(TaskState s) const {
  const auto it = counts.find(s);
  return it == counts.end() ? 0 : it->second;
}

bool BatchReport::complete() const { return count(TaskState::Integrated) + count(TaskState::Failed) == planned; }

nlohmann::json BatchReport::to_json() const {
  nlohmann::json states = nlohmann::json::object();
  for (TaskState s : {TaskState::Pending, TaskState::Staged, TaskState::Processing, TaskState::Processed,
                      TaskState::Integrated, TaskState::Failed})
    states[std::string(censusflow::to_string(s))] = count(s);
  nlohmann::json latency = nlohmann::json::object();
  for (const auto& [stage, ms] : mean_latency_ms) latency[std::string(censusflow::to_string(stage))] = ms;
  nlohmann::json failed = nlohmann::json::array();
  for (const auto& [id, f] : failures)
    failed.push_back({{"task_id", id},
                      {"stage", censusflow::to_string(f.stage)},
                      {"reason", f.reason},
                      {"attempt", f.attempt}});
  return {{"planned", planned}, {"states", states},       {"mean_latency_ms", latency},
          {"failures", failed}, {"scheduler", scheduler}, {"seed", seed}};
}

std::string BatchReport::format() const {
  std::string out = fmt::format("tasks: {}  scheduler: {}  seed: {}\n", planned, scheduler.empty() ? "-" : scheduler, seed);
  for (TaskState s : {TaskState::Pending, TaskState::Staged, TaskState::Processing, TaskState::Processed,
                      TaskState::Integrated, TaskState::Failed})
    out += fmt::format("  {:<11} {}\n", censusflow::to_string(s), count(s));
  for (const auto& [stage, ms] : mean_latency_ms)
    out += fmt::format("  mean {:<9} {:.1f} ms\n", censusflow::to_string(stage), ms);
  for (const auto& [id, f] : failures)
    out += fmt::format("  FAILED {} ({}, {}, attempt {})\n", id, censusflow::to_string(f.stage), f.reason, f.attempt);
  return out;
}

BatchReport summarize(const std::vector<TaskManifest>& tasks) {
  BatchReport report;
  report.planned = tasks.size();
  for (const auto& m : tasks) {
    ++report.counts[m.state];
    if (m.state == TaskState::Failed && m.failure) report.failures.emplace_back(m.task_id, *m.failure);
  }
  return report;
}

BatchReport run_batch(Workspace& workspace, const RunConfig& config, Worker& worker, SchedulerAdapter& scheduler,
                      ResultSink& sink) {
  config.validate();
  std::vector<TaskManifest> tasks;
  if (config.batch) {
    for (const auto& id : workspace.load_batch(*config.batch)) tasks.push_back(workspace.load(id));
  } else {
    tasks = workspace.load_all();
  }

  Interrupter interrupter(config.interrupt_after);
  LatencyStats latency;
  StageOptions options = config.stage;
  options.interrupter = &interrupter;
  options.latency = &latency;
  StageRunner runner(workspace, options);

  std::vector<std::vector<std::size_t>> windows;
  for (std::size_t i = 0; i < tasks.size(); i += config.window) {
    std::vector<std::size_t> w;
    for (std::size_t k = i; k < std::min(tasks.size(), i + config.window); ++k) w.push_back(k);
    windows.push_back(std::move(w));
  }

  std::exception_ptr failure;
  const std::size_t steps = windows.size() + 2;
  for (std::size_t step = 0; step < steps && !failure; ++step) {
    std::vector<JobHandle> handles;
    if (config.stages.contains(Stage::Prestage) && step < windows.size())
      handles.push_back(scheduler.submit(Stage::Prestage, make_tasks(tasks, windows[step],
                                                                     [&](TaskManifest& m, ExecutionContext& ctx) {
                                                                       runner.prestage(m, config.endpoint, ctx.transport);
                                                                     })));
    if (config.stages.contains(Stage::Process) && step >= 1 && step - 1 < windows.size())
      handles.push_back(scheduler.submit(Stage::Process, make_tasks(tasks, windows[step - 1],
                                                                    [&](TaskManifest& m, ExecutionContext& ctx) {
                                                                      runner.process(m, worker, ctx);
                                                                    })));
    if (config.stages.contains(Stage::Integrate) && step >= 2 && step - 2 < windows.size())
      handles.push_back(scheduler.submit(Stage::Integrate, make_tasks(tasks, windows[step - 2],
                                                                      [&](TaskManifest& m, ExecutionContext&) {
                                                                        runner.integrate(m, sink);
                                                                      })));
    for (const auto& h : handles) {
      try {
        scheduler.wait(h);
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);

  BatchReport report = summarize(tasks);
  for (Stage s : {Stage::Prestage, Stage::Process, Stage::Integrate}) {
    if (latency.samples[s]) report.mean_latency_ms[s] = latency.mean(s);
  }
  report.scheduler = scheduler.name();
  report.seed = config.stage.seed;
  return report;
}

// ---------------------------------------------------------------------------

std::vector<RegisterExport> export_households(const Workspace& workspace, MergeOptions options) {
  const auto manifests = workspace.load_all();
  const auto store = load_store(workspace.store_path());
  std::vector<RegisterExport> exports;
  std::size_t i = 0;
  while (i < manifests.size()) {
    RegisterDocument doc;
    doc.metadata.register_id = manifests[i].image.register_id;
    RegisterExport ex;
    ex.register_id = doc.metadata.register_id;
    for (; i < manifests.size() && manifests[i].image.register_id == ex.register_id; ++i) {
      const TaskManifest& m = manifests[i];
      RegisterPage page;
      page.page_id = m.task_id;
      const auto it = store.find(m.task_id);
      if (m.state == TaskState::Integrated && it != store.end()) {
        ResultPayload payload = payload_from_json(it->second);
        page.page_class = payload.page_class;
        page.transcript = std::move(payload.transcript);
      } else {
        ++ex.gap_pages;
      }
      doc.pages.push_back(std::move(page));
    }
    ex.households = merge_register(doc, options);
    exports.push_back(std::move(ex));
  }
  return exports;
}

void write_households_export(std::ostream& out, const std::vector<RegisterExport>& exports) {
  write_households_csv_header(out);
  std::size_t next = 0;
  for (const auto& ex : exports) {
    write_households_csv(out, ex.register_id, ex.households, next);
    next += ex.households.households.size();
  }
}

}  // namespace censusflow
