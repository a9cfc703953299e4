#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "censusflow/domain.hpp"

namespace censusflow {

// ---------------------------------------------------------------------------
// CSV import

enum class ColumnRole { Year, Commune, ArchivalId, ImagePath, Ignore };

std::string_view to_string(ColumnRole role);
std::optional<ColumnRole> column_role_from_name(std::string_view name);

// Assigns a role to CSV columns by header name. Columns not listed are
// ignored. Needs exactly one YEAR, COMMUNE and IMAGE_PATH column and at most
// one ARCHIVAL_ID.
class ColumnMapping {
 public:
  ColumnMapping() = default;

  // key=value document, one "column=ROLE" per line, '#' comments.
  static ColumnMapping parse(std::string_view text);
  static ColumnMapping load(const std::filesystem::path& path);

  void assign(std::string column, ColumnRole role) { roles_[std::move(column)] = role; }
  const std::map<std::string, ColumnRole>& roles() const { return roles_; }
  std::optional<std::string> column_for(ColumnRole role) const;

  // Throws Error(MissingColumn) if a required role is unassigned and
  // Error(ConfigInvalid) if a role is assigned more than once.
  void validate() const;

 private:
  std::map<std::string, ColumnRole> roles_;
};

enum class RowFlag { UnparseableYear };

struct RawRow {
  std::size_t line = 0;  // 1-based line in the source CSV
  std::string year_text;
  std::optional<int> year;
  std::string commune;
  std::string archival_id;
  std::string image_path;
  std::vector<RowFlag> flags;

  bool flagged(RowFlag f) const;
};

struct ImportResult {
  std::vector<RawRow> rows;
  std::vector<std::string> diagnostics;
};

// Throws Error(EmptyFile) without a header row and Error(MissingColumn) when
// the mapping names a column the header lacks or misses a required role.
ImportResult import_csv(std::string_view text, const ColumnMapping& mapping);
ImportResult import_csv_file(const std::filesystem::path& path, const ColumnMapping& mapping);

// ---------------------------------------------------------------------------
// Gazetteer and fuzzy matching

struct GazetteerEntry {
  std::string code;
  std::string canonical_name;
  std::string department;
  std::vector<std::string> valid_names;  // historical variants
};

class Gazetteer {
 public:
  Gazetteer() = default;
  // Throws Error(ConfigInvalid) for an empty canonical name or repeated code.
  explicit Gazetteer(std::vector<GazetteerEntry> entries);

  // CSV with header code,canonical_name,department,variants; variants are
  // pipe-separated.
  static Gazetteer parse(std::string_view csv_text);
  static Gazetteer load(const std::filesystem::path& path);

  const std::vector<GazetteerEntry>& entries() const { return entries_; }
  const GazetteerEntry* find_code(std::string_view code) const;
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<GazetteerEntry> entries_;
  // Normalized names, parallel to entries_: canonical first, then variants.
  std::vector<std::vector<std::string>> normalized_;

  friend struct GazetteerAccess;
};

// Lower-cases, folds Latin diacritics (é -> e, œ -> oe), turns punctuation
// and hyphens into spaces and collapses whitespace.
std::string normalize_name(std::string_view name);

// 1 - levenshtein / max(length) over code points of the two strings, as
// given; both empty scores 1.
double normalized_similarity(std::string_view a, std::string_view b);

// normalized_similarity of the normalized forms.
double name_similarity(std::string_view a, std::string_view b);

struct MatchOptions {
  double threshold = 0.85;
  double auto_threshold = 0.95;
};

enum class MatchStatus { Matched, Ambiguous, Unmatched };
std::string_view to_string(MatchStatus status);

struct Candidate {
  GazetteerEntry entry;
  double score = 0.0;
  std::string matched_name;  // the canonical name or variant that scored best
};

struct MatchResult {
  MatchStatus status = MatchStatus::Unmatched;
  // score >= threshold, best first; ties prefer the department hint, then the
  // shorter canonical name, then the smaller code.
  std::vector<Candidate> candidates;
  std::optional<GazetteerEntry> accepted;
};

// Accepts when exactly one candidate reaches auto_threshold, or exactly one
// of those is in the hinted department. Throws Error(EmptyGazetteer).
MatchResult match_commune(std::string_view name, const Gazetteer& gazetteer,
                          const std::optional<std::string>& department_hint = std::nullopt,
                          const MatchOptions& options = {});

// ---------------------------------------------------------------------------
// Registry

// "img_2" < "img_10": digit runs compare by numeric value.
bool natural_less(std::string_view a, std::string_view b);

enum class ExceptionReason {
  UnparseableYear,
  InvalidCensusYear,
  MissingImagePath,
  MissingCommune,
  UnmatchedCommune,
  AmbiguousCommune,
  UnknownResolutionCode,
  DuplicateRow,
  ConflictingDuplicate,
};

std::string_view to_string(ExceptionReason reason);

struct ExceptionRecord {
  ExceptionReason reason;
  std::string detail;
  RawRow row;
};

struct AmbiguousItem {
  std::string name;
  std::vector<Candidate> candidates;
  std::vector<std::size_t> lines;
};

struct RegistryEntry {
  RegisterMetadata metadata;  // metadata.source_rows[i] is the CSV line of images[i]
  std::vector<ImageRef> images;  // sequence order
};

struct Registry {
  std::vector<RegistryEntry> registers;  // sorted by (year, commune code, archival id)

  std::size_t image_count() const;
  const RegistryEntry* find(std::string_view register_id) const;
};

struct BuildOptions {
  MatchOptions match;
  std::optional<std::string> department_hint;
  // Manual resolutions: commune name as written -> gazetteer code.
  std::map<std::string, std::string> resolutions;
};

struct BuildResult {
  Registry registry;
  std::vector<ExceptionRecord> exceptions;  // source line order
  std::vector<AmbiguousItem> worklist;
};

// Every input row ends up in exactly one place: an image of the registry or
// an exception record.
BuildResult build_registry(const std::vector<RawRow>& rows, const Gazetteer& gazetteer,
                           const BuildOptions& options = {});

// Resolution file: CSV with header name,code.
std::map<std::string, std::string> load_resolutions(const std::filesystem::path& path);

// One JSON object per image, keys sorted, images in registry order.
std::string registry_to_jsonl(const Registry& registry);
Registry registry_from_jsonl(std::string_view text);
void save_registry(const std::filesystem::path& path, const Registry& registry);
Registry load_registry(const std::filesystem::path& path);

void write_exceptions_csv(std::ostream& out, const std::vector<ExceptionRecord>& exceptions);
void write_worklist_csv(std::ostream& out, const std::vector<AmbiguousItem>& worklist);

}  // namespace censusflow
