#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "censusflow/synthetic.hpp"

namespace censusflow {

struct CorpusOptions {
  std::size_t registers = 2;
  std::size_t pages_per_register = 5;
  std::uint64_t seed = 0;
  SyntheticProfile profile;
  // Adds a FRONT page before and a TOTALS page after the list pages.
  bool covers = false;
  int width = 2000;
  int height = 3000;
};

struct CorpusRegister {
  std::string register_id;  // as build_registry will name it
  int year = 0;
  std::string commune_code;
  std::string archival_id;
  std::vector<std::string> task_ids;  // one per image, sequence order
  std::vector<PageClass> classes;     // parallel to task_ids
  SyntheticRegister content;          // list pages and their households
};

// Files written under the corpus root:
//   metadata.csv, mapping.txt, gazetteer.csv    ingest inputs
//   iiif/<identifier>/info.json                 static IIIF tree
//   iiif/<identifier>/full/{full,max}/0/default.jpg
//   truth/pages/<task_id>.txt                   one fixture per list page
//   truth/classes.csv                           task_id,class
struct GeneratedCorpus {
  std::filesystem::path root;
  std::string endpoint_url;  // file:// base of the IIIF tree
  std::vector<CorpusRegister> registers;

  std::size_t image_count() const;
};

// Deterministic in options. With dry_run only the in-memory description is
// produced.
GeneratedCorpus generate_corpus(const std::filesystem::path& root, const CorpusOptions& options,
                                bool dry_run = false);

}  // namespace censusflow
