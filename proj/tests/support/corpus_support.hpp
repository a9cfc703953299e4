#pragma once

#include <memory>
#include <string>

#include <censusflow/corpus.hpp>
#include <censusflow/ingest.hpp>
#include <censusflow/pipeline.hpp>

#include "test_support.hpp"

namespace cftest {

using namespace censusflow;

// Generated corpus, ingested registry and a fresh workspace side by side.
struct CorpusBed {
  TempDir dir{"cf-bed"};
  GeneratedCorpus corpus;
  Registry registry;
  IiifEndpoint endpoint;

  explicit CorpusBed(const CorpusOptions& options) {
    corpus = generate_corpus(dir / "corpus", options);
    const auto mapping = ColumnMapping::load(corpus.root / "mapping.txt");
    const auto rows = import_csv_file(corpus.root / "metadata.csv", mapping);
    const auto gazetteer = Gazetteer::load(corpus.root / "gazetteer.csv");
    registry = build_registry(rows.rows, gazetteer).registry;
    endpoint = IiifEndpoint::make(corpus.endpoint_url, 3, RetryPolicy{2, 0});
  }

  std::filesystem::path workspace_root(const std::string& name = "ws") const { return dir / name; }

  std::string identifier_of(const std::string& task_id) const {
    for (const auto& reg : registry.registers) {
      for (const auto& image : reg.images) {
        if (make_task_id(image) == task_id) return image.iiif_identifier;
      }
    }
    return {};
  }

  std::filesystem::path iiif_dir(const std::string& task_id) const {
    return corpus.root / "iiif" / identifier_of(task_id);
  }
};

inline RunConfig quiet_run(const IiifEndpoint& endpoint, std::size_t window = 32) {
  RunConfig config;
  config.endpoint = endpoint;
  config.window = window;
  config.stage.sleeper = no_sleep();
  config.stage.backoff_ms = 0;
  config.stage.io_workers = 4;
  return config;
}

// Register documents rebuilt from the truth of a generated corpus, in the
// same shape export_households produces.
inline std::vector<std::vector<std::vector<RecordPosition>>> truth_households(const GeneratedCorpus& corpus) {
  std::vector<std::vector<std::vector<RecordPosition>>> out;
  for (const auto& reg : corpus.registers) {
    std::vector<std::vector<RecordPosition>> households;
    for (const auto& h : reg.content.households) households.push_back(h.positions);
    out.push_back(std::move(households));
  }
  return out;
}

}  // namespace cftest
