#include "censusflow/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "censusflow/error.hpp"

namespace censusflow {

namespace {

constexpr TaskState kAllStates[] = {TaskState::Pending,   TaskState::Staged,     TaskState::Processing,
                                    TaskState::Processed, TaskState::Integrated, TaskState::Failed};
constexpr Stage kAllStages[] = {Stage::Prestage, Stage::Process, Stage::Integrate};

std::string safe_component(std::string_view text) {
  std::string out;
  for (char c : text) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    out.push_back(ok ? c : '_');
  }
  if (out.empty() || out.front() == '.') out.insert(out.begin(), '_');
  return out;
}

TaskState state_or_throw(const std::string& name) {
  if (auto s = task_state_from_name(name)) return *s;
  throw Error(ErrorCode::Parse, "unknown task state '" + name + "'");
}

Stage stage_or_throw(const std::string& name) {
  if (auto s = stage_from_name(name)) return *s;
  throw Error(ErrorCode::Parse, "unknown stage '" + name + "'");
}

nlohmann::json failure_json(const std::optional<FailureInfo>& f) {
  if (!f) return nullptr;
  return {{"stage", to_string(f->stage)}, {"reason", f->reason}, {"attempt", f->attempt}};
}

std::optional<FailureInfo> failure_from(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return FailureInfo{stage_or_throw(j.at("stage").get<std::string>()), j.at("reason").get<std::string>(),
                     j.at("attempt").get<int>()};
}

}  // namespace

std::string_view to_string(TaskState state) {
  switch (state) {
    case TaskState::Pending: return "PENDING";
    case TaskState::Staged: return "STAGED";
    case TaskState::Processing: return "PROCESSING";
    case TaskState::Processed: return "PROCESSED";
    case TaskState::Integrated: return "INTEGRATED";
    case TaskState::Failed: return "FAILED";
  }
  return "FAILED";
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Prestage: return "prestage";
    case Stage::Process: return "process";
    case Stage::Integrate: return "integrate";
  }
  return "process";
}

std::optional<TaskState> task_state_from_name(std::string_view name) {
  for (TaskState s : kAllStates) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

std::optional<Stage> stage_from_name(std::string_view name) {
  for (Stage s : kAllStages) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

bool transition_allowed(TaskState from, TaskState to) {
  if (is_terminal(from)) return false;
  if (to == TaskState::Failed) return true;
  return static_cast<int>(to) == static_cast<int>(from) + 1;
}

std::string make_task_id(const ImageRef& image) {
  char seq[16];
  std::snprintf(seq, sizeof seq, "%05zu", image.sequence_index);
  return safe_component(image.register_id) + "-" + seq;
}

const Transition& TaskManifest::advance(TaskState to, std::int64_t at_ms, std::optional<FailureInfo> info) {
  if (!transition_allowed(state, to))
    throw Error(ErrorCode::InvalidTransition, task_id + ": " + std::string(to_string(state)) + " -> " +
                                                  std::string(to_string(to)));
  if (to == TaskState::Failed && !info) throw Error(ErrorCode::InvalidTransition, task_id + ": FAILED without reason");
  const std::int64_t last = history.empty() ? created_ms : history.back().at_ms;
  history.push_back({state, to, std::max(at_ms, last), to == TaskState::Failed ? info : std::nullopt});
  state = to;
  if (to == TaskState::Failed) failure = std::move(info);
  return history.back();
}

nlohmann::json to_json(const TaskManifest& m) {
  nlohmann::json history = nlohmann::json::array();
  for (const auto& t : m.history) {
    history.push_back({{"from", to_string(t.from)},
                       {"to", to_string(t.to)},
                       {"at_ms", t.at_ms},
                       {"failure", failure_json(t.failure)}});
  }
  return {{"task_id", m.task_id},
          {"image",
           {{"register_id", m.image.register_id},
            {"iiif_identifier", m.image.iiif_identifier},
            {"sequence_index", m.image.sequence_index},
            {"verified", m.image.verified},
            {"width", m.image.width ? nlohmann::json(*m.image.width) : nlohmann::json(nullptr)},
            {"height", m.image.height ? nlohmann::json(*m.image.height) : nlohmann::json(nullptr)}}},
          {"state", to_string(m.state)},
          {"failure", failure_json(m.failure)},
          {"staged_path", m.staged_path},
          {"result_path", m.result_path},
          {"created_ms", m.created_ms},
          {"history", history}};
}

TaskManifest manifest_from_json(const nlohmann::json& j) {
  try {
    TaskManifest m;
    m.task_id = j.at("task_id").get<std::string>();
    const auto& img = j.at("image");
    m.image.register_id = img.at("register_id").get<std::string>();
    m.image.iiif_identifier = img.at("iiif_identifier").get<std::string>();
    m.image.sequence_index = img.at("sequence_index").get<std::size_t>();
    m.image.verified = img.value("verified", false);
    if (img.contains("width") && !img["width"].is_null()) m.image.width = img["width"].get<int>();
    if (img.contains("height") && !img["height"].is_null()) m.image.height = img["height"].get<int>();
    m.state = state_or_throw(j.at("state").get<std::string>());
    m.failure = failure_from(j.value("failure", nlohmann::json(nullptr)));
    m.staged_path = j.value("staged_path", "");
    m.result_path = j.value("result_path", "");
    m.created_ms = j.value("created_ms", std::int64_t{0});
    for (const auto& t : j.value("history", nlohmann::json::array())) {
      m.history.push_back({state_or_throw(t.at("from").get<std::string>()),
                           state_or_throw(t.at("to").get<std::string>()), t.at("at_ms").get<std::int64_t>(),
                           failure_from(t.value("failure", nlohmann::json(nullptr)))});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("manifest: ") + e.what());
  }
}

nlohmann::json to_json(const std::string& task_id, const Transition& t) {
  return {{"task_id", task_id},
          {"from", to_string(t.from)},
          {"to", to_string(t.to)},
          {"at_ms", t.at_ms},
          {"failure", failure_json(t.failure)}};
}

Workspace::Workspace(std::filesystem::path root) : root_(std::move(root)) {}

std::filesystem::path Workspace::manifest_path(std::string_view task_id) const {
  return root_ / "manifests" / (std::string(task_id) + ".json");
}
std::filesystem::path Workspace::staged_image_path(std::string_view task_id) const {
  return root_ / "staging" / std::string(task_id) / "image.jpg";
}
std::filesystem::path Workspace::result_path(std::string_view task_id) const {
  return root_ / "results" / (std::string(task_id) + ".json");
}
std::filesystem::path Workspace::store_path() const { return root_ / "store" / "records.ndjson"; }
std::filesystem::path Workspace::log_path() const { return root_ / "log" / "transitions.ndjson"; }
std::filesystem::path Workspace::batch_path(std::string_view batch) const {
  return root_ / "batches" / (safe_component(batch) + ".json");
}

bool Workspace::has_manifest(std::string_view task_id) const {
  std::error_code ec;
  return std::filesystem::is_regular_file(manifest_path(task_id), ec);
}

TaskManifest Workspace::load(std::string_view task_id) const {
  const auto text = read_text_file(manifest_path(task_id));
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::Parse, "manifest " + std::string(task_id) + " is not JSON");
  return manifest_from_json(j);
}

void Workspace::save(const TaskManifest& manifest) const {
  write_text_file_atomic(manifest_path(manifest.task_id), to_json(manifest).dump(2) + "\n");
}

std::vector<TaskManifest> Workspace::load_all() const {
  std::vector<TaskManifest> all;
  const auto dir = root_ / "manifests";
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return all;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    all.push_back(load(entry.path().stem().string()));
  }
  std::sort(all.begin(), all.end(), [](const TaskManifest& a, const TaskManifest& b) {
    if (a.image.register_id != b.image.register_id) return a.image.register_id < b.image.register_id;
    return a.image.sequence_index < b.image.sequence_index;
  });
  return all;
}

void Workspace::log_transition(const std::string& task_id, const Transition& t) {
  const std::string line = to_json(task_id, t).dump() + "\n";
  std::lock_guard lock(log_mutex_);
  std::filesystem::create_directories(log_path().parent_path());
  std::ofstream out(log_path(), std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot append to " + log_path().string());
  out << line;
  out.flush();
}

void Workspace::save_batch(std::string_view batch, const std::vector<std::string>& task_ids) const {
  write_text_file_atomic(batch_path(batch), nlohmann::json{{"batch", batch}, {"tasks", task_ids}}.dump(2) + "\n");
}

std::vector<std::string> Workspace::load_batch(std::string_view batch) const {
  const auto j = nlohmann::json::parse(read_text_file(batch_path(batch)), nullptr, false);
  if (j.is_discarded() || !j.contains("tasks")) throw Error(ErrorCode::Parse, "batch file " + std::string(batch));
  return j["tasks"].get<std::vector<std::string>>();
}

std::vector<std::string> audit_transition_log(const std::filesystem::path& log_path) {
  std::vector<std::string> problems;
  std::error_code ec;
  if (!std::filesystem::exists(log_path, ec)) return problems;
  std::ifstream in(log_path);
  std::map<std::string, TaskState> current;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    const auto where = "line " + std::to_string(lineno);
    if (j.is_discarded() || !j.is_object()) {
      problems.push_back(where + ": not JSON");
      continue;
    }
    const auto id = j.value("task_id", "");
    const auto from = task_state_from_name(j.value("from", ""));
    const auto to = task_state_from_name(j.value("to", ""));
    if (!from || !to) {
      problems.push_back(where + ": unknown state");
      continue;
    }
    if (!transition_allowed(*from, *to))
      problems.push_back(where + ": " + id + " " + std::string(to_string(*from)) + " -> " +
                         std::string(to_string(*to)));
    const auto it = current.find(id);
    const TaskState expected = it == current.end() ? TaskState::Pending : it->second;
    if (*from != expected)
      problems.push_back(where + ": " + id + " leaves " + std::string(to_string(*from)) + " but was " +
                         std::string(to_string(expected)));
    current[id] = *to;
  }
  return problems;
}

}  // namespace censusflow
