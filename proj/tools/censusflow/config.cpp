#include "config.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include <censusflow/domain.hpp>
#include <censusflow/error.hpp>

namespace censusflow::cli {

namespace {

using Setter = std::function<void(const nlohmann::json&)>;

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(ErrorCode::ConfigInvalid, "config key '" + key + "': " + what);
}

template <typename T>
Setter set(const std::string& key, T& target) {
  return [key, &target](const nlohmann::json& v) {
    try {
      if constexpr (std::is_same_v<T, std::optional<std::string>>) {
        if (v.is_null()) {
          target.reset();
        } else {
          if (!v.is_string()) bad(key, "expected a string");
          target = v.get<std::string>();
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) bad(key, "expected a string");
        target = v.get<std::string>();
      } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
        if (!v.is_string()) bad(key, "expected a string");
        target = v.get<std::string>();
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) bad(key, "expected a number");
        target = v.get<T>();
      } else {
        if (!v.is_number_integer()) bad(key, "expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.get<std::int64_t>() < 0) bad(key, "must not be negative");
        }
        target = v.get<T>();
      }
    } catch (const nlohmann::json::exception& e) {
      bad(key, e.what());
    }
  };
}

void apply_section(const nlohmann::json& doc, const std::string& prefix, const std::map<std::string, Setter>& keys,
                   const std::map<std::string, std::function<void(const nlohmann::json&)>>& sections = {}) {
  if (!doc.is_object()) bad(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (const auto& [key, value] : doc.items()) {
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (auto it = keys.find(key); it != keys.end()) {
      it->second(value);
    } else if (auto s = sections.find(key); s != sections.end()) {
      s->second(value);
    } else {
      bad(full, "unknown key");
    }
  }
}

}  // namespace

void GlobalConfig::apply(const nlohmann::json& doc) {
  apply_section(doc, "",
                {{"workspace", set("workspace", workspace)},
                 {"seed", set("seed", seed)},
                 {"jobs", set("jobs", jobs)},
                 {"verbosity", set("verbosity", verbosity)}},
                {{"ingest",
                  [this](const nlohmann::json& d) {
                    apply_section(d, "ingest",
                                  {{"threshold", set("ingest.threshold", ingest.threshold)},
                                   {"auto_threshold", set("ingest.auto_threshold", ingest.auto_threshold)},
                                   {"department", set("ingest.department", ingest.department)}});
                  }},
                 {"iiif",
                  [this](const nlohmann::json& d) {
                    apply_section(d, "iiif",
                                  {{"endpoint", set("iiif.endpoint", iiif.endpoint)},
                                   {"api_version", set("iiif.api_version", iiif.api_version)},
                                   {"max_attempts", set("iiif.max_attempts", iiif.max_attempts)},
                                   {"base_backoff_ms", set("iiif.base_backoff_ms", iiif.base_backoff_ms)},
                                   {"timeout_ms", set("iiif.timeout_ms", iiif.timeout_ms)},
                                   {"concurrency", set("iiif.concurrency", iiif.concurrency)}});
                  }},
                 {"pipeline",
                  [this](const nlohmann::json& d) {
                    apply_section(d, "pipeline",
                                  {{"retry_limit", set("pipeline.retry_limit", pipeline.retry_limit)},
                                   {"backoff_ms", set("pipeline.backoff_ms", pipeline.backoff_ms)},
                                   {"window", set("pipeline.window", pipeline.window)},
                                   {"io_workers", set("pipeline.io_workers", pipeline.io_workers)},
                                   {"scheduler", set("pipeline.scheduler", pipeline.scheduler)},
                                   {"workers", set("pipeline.workers", pipeline.workers)}});
                  }},
                 {"simulate", [this](const nlohmann::json& d) {
                    apply_section(d, "simulate",
                                  {{"mode", set("simulate.mode", simulate.mode)},
                                   {"max_workers", set("simulate.max_workers", simulate.max_workers)}});
                  }}});
}

void GlobalConfig::load(const std::filesystem::path& path) {
  const auto doc = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::ConfigInvalid, path.string() + " is not valid JSON");
  apply(doc);
}

std::size_t GlobalConfig::capped(std::size_t value) const { return jobs == 0 ? value : std::min(value, jobs); }

nlohmann::json GlobalConfig::to_json() const {
  return {{"workspace", workspace.string()},
          {"seed", seed},
          {"jobs", jobs},
          {"verbosity", verbosity},
          {"ingest",
           {{"threshold", ingest.threshold},
            {"auto_threshold", ingest.auto_threshold},
            {"department", ingest.department ? nlohmann::json(*ingest.department) : nlohmann::json(nullptr)}}},
          {"iiif",
           {{"endpoint", iiif.endpoint},
            {"api_version", iiif.api_version},
            {"max_attempts", iiif.max_attempts},
            {"base_backoff_ms", iiif.base_backoff_ms},
            {"timeout_ms", iiif.timeout_ms},
            {"concurrency", iiif.concurrency}}},
          {"pipeline",
           {{"retry_limit", pipeline.retry_limit},
            {"backoff_ms", pipeline.backoff_ms},
            {"window", pipeline.window},
            {"io_workers", pipeline.io_workers},
            {"scheduler", pipeline.scheduler},
            {"workers", pipeline.workers}}},
          {"simulate", {{"mode", simulate.mode}, {"max_workers", simulate.max_workers}}}};
}

}  // namespace censusflow::cli
