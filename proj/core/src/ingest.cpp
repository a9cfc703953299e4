#include "censusflow/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "censusflow/csv.hpp"
#include "censusflow/error.hpp"
#include "censusflow/metrics.hpp"
#include "censusflow/utf8.hpp"

namespace censusflow {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::optional<int> parse_year(std::string_view text) {
  text = trim(text);
  if (text.size() != 4) return std::nullopt;
  int year = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), year);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return year;
}

// Base letters for U+00C0..U+00FF; "" marks a separator.
constexpr std::string_view kLatin1Fold[64] = {
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
    "d", "n", "o", "o", "o", "o", "o",  "",  "o", "u", "u", "u", "u", "y", "th", "ss",
    "a", "a", "a", "a", "a", "a", "ae", "c", "e", "e", "e", "e", "i", "i", "i", "i",
    "d", "n", "o", "o", "o", "o", "o",  "",  "o", "u", "u", "u", "u", "y", "th", "y"};

// U+0100..U+017F folded by ranges.
std::string_view fold_extended_a(char32_t cp) {
  struct Range {
    char32_t first, last;
    std::string_view base;
  };
  static constexpr Range kRanges[] = {
      {0x100, 0x105, "a"}, {0x106, 0x10D, "c"}, {0x10E, 0x111, "d"}, {0x112, 0x11B, "e"},
      {0x11C, 0x123, "g"}, {0x124, 0x127, "h"}, {0x128, 0x131, "i"}, {0x132, 0x133, "ij"},
      {0x134, 0x135, "j"}, {0x136, 0x138, "k"}, {0x139, 0x142, "l"}, {0x143, 0x14B, "n"},
      {0x14C, 0x151, "o"}, {0x152, 0x153, "oe"}, {0x154, 0x159, "r"}, {0x15A, 0x161, "s"},
      {0x162, 0x167, "t"}, {0x168, 0x173, "u"}, {0x174, 0x175, "w"}, {0x176, 0x178, "y"},
      {0x179, 0x17E, "z"}, {0x17F, 0x17F, "s"},
  };
  for (const auto& r : kRanges) {
    if (cp >= r.first && cp <= r.last) return r.base;
  }
  return {};
}

bool is_separator(char32_t cp) {
  if (cp < 0x80) return !std::isalnum(static_cast<int>(cp));
  return cp == 0xA0 || (cp >= 0xA1 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7 || (cp >= 0x2000 && cp <= 0x206F);
}

nlohmann::json image_json(const RegistryEntry& reg, std::size_t i) {
  const ImageRef& img = reg.images[i];
  const RegisterMetadata& m = reg.metadata;
  return {{"register_id", m.register_id},
          {"census_year", m.census_year},
          {"commune_code", m.commune.code},
          {"commune_name", m.commune.name},
          {"department", m.commune.department},
          {"archival_id", m.archival_id},
          {"sequence_index", img.sequence_index},
          {"iiif_identifier", img.iiif_identifier},
          {"source_line", i < m.source_rows.size() ? m.source_rows[i] : 0},
          {"verified", img.verified},
          {"width", img.width ? nlohmann::json(*img.width) : nlohmann::json(nullptr)},
          {"height", img.height ? nlohmann::json(*img.height) : nlohmann::json(nullptr)}};
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(ColumnRole role) {
  switch (role) {
    case ColumnRole::Year: return "YEAR";
    case ColumnRole::Commune: return "COMMUNE";
    case ColumnRole::ArchivalId: return "ARCHIVAL_ID";
    case ColumnRole::ImagePath: return "IMAGE_PATH";
    case ColumnRole::Ignore: return "IGNORE";
  }
  return "IGNORE";
}

std::optional<ColumnRole> column_role_from_name(std::string_view name) {
  const std::string u = upper(trim(name));
  for (ColumnRole r : {ColumnRole::Year, ColumnRole::Commune, ColumnRole::ArchivalId, ColumnRole::ImagePath,
                       ColumnRole::Ignore}) {
    if (u == to_string(r)) return r;
  }
  return std::nullopt;
}

ColumnMapping ColumnMapping::parse(std::string_view text) {
  ColumnMapping mapping;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto eq = view.rfind('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::ConfigInvalid, "mapping line " + std::to_string(lineno) + ": expected column=ROLE");
    const auto role = column_role_from_name(view.substr(eq + 1));
    if (!role)
      throw Error(ErrorCode::ConfigInvalid, "mapping line " + std::to_string(lineno) + ": unknown role '" +
                                                std::string(trim(view.substr(eq + 1))) + "'");
    mapping.assign(std::string(trim(view.substr(0, eq))), *role);
  }
  return mapping;
}

ColumnMapping ColumnMapping::load(const std::filesystem::path& path) { return parse(read_text_file(path)); }

std::optional<std::string> ColumnMapping::column_for(ColumnRole role) const {
  for (const auto& [column, r] : roles_) {
    if (r == role) return column;
  }
  return std::nullopt;
}

void ColumnMapping::validate() const {
  std::map<ColumnRole, int> counts;
  for (const auto& [column, role] : roles_) ++counts[role];
  for (ColumnRole r : {ColumnRole::Year, ColumnRole::Commune, ColumnRole::ImagePath}) {
    if (counts[r] == 0) throw Error(ErrorCode::MissingColumn, "mapping has no " + std::string(to_string(r)) + " column");
  }
  for (ColumnRole r : {ColumnRole::Year, ColumnRole::Commune, ColumnRole::ImagePath, ColumnRole::ArchivalId}) {
    if (counts[r] > 1)
      throw Error(ErrorCode::ConfigInvalid, "mapping assigns " + std::string(to_string(r)) + " to several columns");
  }
}

bool RawRow::flagged(RowFlag f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }

ImportResult import_csv(std::string_view text, const ColumnMapping& mapping) {
  mapping.validate();
  const csv::Table table = csv::parse_table(text);

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < table.header.size(); ++i) index.emplace(std::string(trim(table.header[i])), i);
  for (const auto& [column, role] : mapping.roles()) {
    if (!index.contains(column)) throw Error(ErrorCode::MissingColumn, "CSV has no column '" + column + "'");
  }
  auto column = [&](ColumnRole role) -> std::optional<std::size_t> {
    if (auto name = mapping.column_for(role)) return index.at(*name);
    return std::nullopt;
  };
  const auto year_col = column(ColumnRole::Year);
  const auto commune_col = column(ColumnRole::Commune);
  const auto archival_col = column(ColumnRole::ArchivalId);
  const auto path_col = column(ColumnRole::ImagePath);

  ImportResult result;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const csv::Row& cells = table.rows[r];
    auto cell = [&](std::optional<std::size_t> c) -> std::string {
      if (!c || *c >= cells.size()) return {};
      return std::string(trim(cells[*c]));
    };
    RawRow row;
    row.line = table.lines[r];
    row.year_text = cell(year_col);
    row.year = parse_year(row.year_text);
    row.commune = cell(commune_col);
    row.archival_id = cell(archival_col);
    row.image_path = cell(path_col);
    if (!row.year) {
      row.flags.push_back(RowFlag::UnparseableYear);
      result.diagnostics.push_back("line " + std::to_string(row.line) + ": unparseable year '" + row.year_text + "'");
    }
    if (cells.size() != table.header.size())
      result.diagnostics.push_back("line " + std::to_string(row.line) + ": " + std::to_string(cells.size()) +
                                   " cells, header has " + std::to_string(table.header.size()));
    result.rows.push_back(std::move(row));
  }
  return result;
}

ImportResult import_csv_file(const std::filesystem::path& path, const ColumnMapping& mapping) {
  return import_csv(read_text_file(path), mapping);
}

// ---------------------------------------------------------------------------

Gazetteer::Gazetteer(std::vector<GazetteerEntry> entries) : entries_(std::move(entries)) {
  std::set<std::string> codes;
  for (const auto& e : entries_) {
    if (e.canonical_name.empty()) throw Error(ErrorCode::ConfigInvalid, "gazetteer entry " + e.code + " has no name");
    if (!codes.insert(e.code).second) throw Error(ErrorCode::ConfigInvalid, "duplicate gazetteer code " + e.code);
    std::vector<std::string> names{normalize_name(e.canonical_name)};
    for (const auto& v : e.valid_names) names.push_back(normalize_name(v));
    normalized_.push_back(std::move(names));
  }
}

Gazetteer Gazetteer::parse(std::string_view csv_text) {
  const csv::Table table = csv::parse_table(csv_text);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < table.header.size(); ++i) index.emplace(std::string(trim(table.header[i])), i);
  for (const char* required : {"code", "canonical_name", "department"}) {
    if (!index.contains(required))
      throw Error(ErrorCode::MissingColumn, std::string("gazetteer has no '") + required + "' column");
  }
  const auto variants = index.find("variants");

  std::vector<GazetteerEntry> entries;
  for (const auto& cells : table.rows) {
    auto cell = [&](std::size_t c) { return c < cells.size() ? std::string(trim(cells[c])) : std::string(); };
    GazetteerEntry e;
    e.code = cell(index.at("code"));
    e.canonical_name = cell(index.at("canonical_name"));
    e.department = cell(index.at("department"));
    if (variants != index.end()) {
      const std::string all = cell(variants->second);
      std::size_t start = 0;
      while (start <= all.size()) {
        auto bar = all.find('|', start);
        if (bar == std::string::npos) bar = all.size();
        const auto v = trim(std::string_view(all).substr(start, bar - start));
        if (!v.empty()) e.valid_names.emplace_back(v);
        start = bar + 1;
      }
    }
    entries.push_back(std::move(e));
  }
  return Gazetteer(std::move(entries));
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) { return parse(read_text_file(path)); }

const GazetteerEntry* Gazetteer::find_code(std::string_view code) const {
  for (const auto& e : entries_) {
    if (e.code == code) return &e;
  }
  return nullptr;
}

struct GazetteerAccess {
  static const std::vector<std::string>& names(const Gazetteer& g, std::size_t i) { return g.normalized_[i]; }
};

std::string normalize_name(std::string_view name) {
  std::string folded;
  for (char32_t cp : utf8::decode(name)) {
    if (cp < 0x80) {
      if (is_separator(cp)) {
        folded.push_back(' ');
      } else {
        folded.push_back(static_cast<char>(std::tolower(static_cast<int>(cp))));
      }
    } else if (cp >= 0xC0 && cp <= 0xFF) {
      const std::string_view base = kLatin1Fold[cp - 0xC0];
      folded += base.empty() ? std::string_view(" ") : base;
    } else if (auto base = fold_extended_a(cp); !base.empty()) {
      folded += base;
    } else if (is_separator(cp)) {
      folded.push_back(' ');
    } else {
      folded += utf8::encode(cp);
    }
  }
  std::string out;
  for (char c : folded) {
    if (c == ' ') {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  if (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

double normalized_similarity(std::string_view a, std::string_view b) {
  const std::u32string x = utf8::decode(a);
  const std::u32string y = utf8::decode(b);
  const std::size_t longest = std::max(x.size(), y.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(x, y)) / static_cast<double>(longest);
}

double name_similarity(std::string_view a, std::string_view b) {
  return normalized_similarity(normalize_name(a), normalize_name(b));
}

std::string_view to_string(MatchStatus status) {
  switch (status) {
    case MatchStatus::Matched: return "MATCHED";
    case MatchStatus::Ambiguous: return "AMBIGUOUS";
    case MatchStatus::Unmatched: return "UNMATCHED";
  }
  return "UNMATCHED";
}

MatchResult match_commune(std::string_view name, const Gazetteer& gazetteer,
                          const std::optional<std::string>& department_hint, const MatchOptions& options) {
  if (gazetteer.empty()) throw Error(ErrorCode::EmptyGazetteer, "cannot match '" + std::string(name) + "'");
  const std::string query = normalize_name(name);

  MatchResult result;
  const auto& entries = gazetteer.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& names = GazetteerAccess::names(gazetteer, i);
    double best = -1.0;
    std::size_t best_name = 0;
    for (std::size_t k = 0; k < names.size(); ++k) {
      const double s = normalized_similarity(query, names[k]);
      if (s > best) {
        best = s;
        best_name = k;
      }
    }
    if (best >= options.threshold) {
      const GazetteerEntry& e = entries[i];
      result.candidates.push_back(
          {e, best, best_name == 0 ? e.canonical_name : e.valid_names[best_name - 1]});
    }
  }

  auto hinted = [&](const Candidate& c) { return department_hint && c.entry.department == *department_hint; };
  std::sort(result.candidates.begin(), result.candidates.end(), [&](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    if (hinted(a) != hinted(b)) return hinted(a);
    const auto la = utf8::length(a.entry.canonical_name);
    const auto lb = utf8::length(b.entry.canonical_name);
    if (la != lb) return la < lb;
    return a.entry.code < b.entry.code;
  });

  std::vector<const Candidate*> strong;
  for (const auto& c : result.candidates) {
    if (c.score >= options.auto_threshold) strong.push_back(&c);
  }
  if (strong.size() > 1 && department_hint) {
    std::erase_if(strong, [&](const Candidate* c) { return !hinted(*c); });
  }
  if (strong.size() == 1) {
    result.status = MatchStatus::Matched;
    result.accepted = strong.front()->entry;
  } else {
    result.status = result.candidates.empty() ? MatchStatus::Unmatched : MatchStatus::Ambiguous;
  }
  return result;
}

// ---------------------------------------------------------------------------

bool natural_less(std::string_view a, std::string_view b) {
  std::size_t i = 0, j = 0;
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  while (i < a.size() && j < b.size()) {
    if (digit(a[i]) && digit(b[j])) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && digit(a[ie])) ++ie;
      while (je < b.size() && digit(b[je])) ++je;
      std::string_view da = a.substr(i, ie - i), db = b.substr(j, je - j);
      const auto strip = [](std::string_view d) {
        while (d.size() > 1 && d.front() == '0') d.remove_prefix(1);
        return d;
      };
      const auto sa = strip(da), sb = strip(db);
      if (sa.size() != sb.size()) return sa.size() < sb.size();
      if (sa != sb) return sa < sb;
      // Equal values: fewer leading zeros first.
      if (da.size() != db.size()) return da.size() < db.size();
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return static_cast<unsigned char>(a[i]) < static_cast<unsigned char>(b[j]);
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

std::string_view to_string(ExceptionReason reason) {
  switch (reason) {
    case ExceptionReason::UnparseableYear: return "UnparseableYear";
    case ExceptionReason::InvalidCensusYear: return "InvalidCensusYear";
    case ExceptionReason::MissingImagePath: return "MissingImagePath";
    case ExceptionReason::MissingCommune: return "MissingCommune";
    case ExceptionReason::UnmatchedCommune: return "UnmatchedCommune";
    case ExceptionReason::AmbiguousCommune: return "AmbiguousCommune";
    case ExceptionReason::UnknownResolutionCode: return "UnknownResolutionCode";
    case ExceptionReason::DuplicateRow: return "DuplicateRow";
    case ExceptionReason::ConflictingDuplicate: return "ConflictingDuplicate";
  }
  return "Unknown";
}

std::size_t Registry::image_count() const {
  std::size_t n = 0;
  for (const auto& r : registers) n += r.images.size();
  return n;
}

const RegistryEntry* Registry::find(std::string_view register_id) const {
  for (const auto& r : registers) {
    if (r.metadata.register_id == register_id) return &r;
  }
  return nullptr;
}

BuildResult build_registry(const std::vector<RawRow>& rows, const Gazetteer& gazetteer, const BuildOptions& options) {
  BuildResult result;

  struct Accepted {
    const RawRow* row;
    const GazetteerEntry* commune;
  };
  std::vector<Accepted> accepted;
  std::map<std::string, MatchResult> match_cache;
  std::map<std::string, std::size_t> worklist_index;

  auto reject = [&](const RawRow& row, ExceptionReason reason, std::string detail) {
    result.exceptions.push_back({reason, std::move(detail), row});
  };

  for (const RawRow& row : rows) {
    if (row.flagged(RowFlag::UnparseableYear) || !row.year) {
      reject(row, ExceptionReason::UnparseableYear, row.year_text);
      continue;
    }
    if (!is_census_year(*row.year)) {
      reject(row, ExceptionReason::InvalidCensusYear, std::to_string(*row.year));
      continue;
    }
    if (row.image_path.empty()) {
      reject(row, ExceptionReason::MissingImagePath, "");
      continue;
    }
    if (row.commune.empty()) {
      reject(row, ExceptionReason::MissingCommune, "");
      continue;
    }
    if (auto it = options.resolutions.find(row.commune); it != options.resolutions.end()) {
      if (const auto* entry = gazetteer.find_code(it->second)) {
        accepted.push_back({&row, entry});
      } else {
        reject(row, ExceptionReason::UnknownResolutionCode, it->second);
      }
      continue;
    }
    auto cached = match_cache.find(row.commune);
    if (cached == match_cache.end())
      cached = match_cache.emplace(row.commune, match_commune(row.commune, gazetteer, options.department_hint, options.match))
                   .first;
    const MatchResult& match = cached->second;
    switch (match.status) {
      case MatchStatus::Matched: accepted.push_back({&row, &*match.accepted}); break;
      case MatchStatus::Unmatched: reject(row, ExceptionReason::UnmatchedCommune, row.commune); break;
      case MatchStatus::Ambiguous: {
        reject(row, ExceptionReason::AmbiguousCommune, row.commune);
        auto [slot, inserted] = worklist_index.emplace(row.commune, result.worklist.size());
        if (inserted) result.worklist.push_back({row.commune, match.candidates, {}});
        result.worklist[slot->second].lines.push_back(row.line);
        break;
      }
    }
  }

  // Duplicate image paths: identical metadata keeps the first row, conflicting
  // metadata rejects every row sharing the path.
  using Key = std::tuple<int, std::string, std::string>;
  auto key_of = [](const Accepted& a) { return Key{*a.row->year, a.commune->code, a.row->archival_id}; };
  std::map<std::string, std::vector<std::size_t>> by_path;
  for (std::size_t i = 0; i < accepted.size(); ++i) by_path[accepted[i].row->image_path].push_back(i);

  std::map<Key, std::vector<const Accepted*>> groups;
  for (const auto& [path, indices] : by_path) {
    bool conflicting = false;
    for (std::size_t k : indices) conflicting |= key_of(accepted[k]) != key_of(accepted[indices.front()]);
    if (conflicting) {
      for (std::size_t k : indices)
        reject(*accepted[k].row, ExceptionReason::ConflictingDuplicate, path);
      continue;
    }
    groups[key_of(accepted[indices.front()])].push_back(&accepted[indices.front()]);
    for (std::size_t k = 1; k < indices.size(); ++k)
      reject(*accepted[indices[k]].row, ExceptionReason::DuplicateRow,
             "same as line " + std::to_string(accepted[indices.front()].row->line));
  }

  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end(), [](const Accepted* a, const Accepted* b) {
      if (a->row->image_path != b->row->image_path) return natural_less(a->row->image_path, b->row->image_path);
      return a->row->line < b->row->line;
    });
    RegistryEntry entry;
    const auto& [year, code, archival] = key;
    const GazetteerEntry* commune = members.front()->commune;
    entry.metadata.register_id = std::to_string(year) + "-" + code + (archival.empty() ? "" : "-" + archival);
    entry.metadata.census_year = year;
    entry.metadata.commune = {commune->code, commune->canonical_name, commune->department};
    entry.metadata.archival_id = archival;
    for (std::size_t s = 0; s < members.size(); ++s) {
      ImageRef image;
      image.register_id = entry.metadata.register_id;
      image.iiif_identifier = members[s]->row->image_path;
      image.sequence_index = s;
      entry.images.push_back(std::move(image));
      entry.metadata.source_rows.push_back(members[s]->row->line);
    }
    result.registry.registers.push_back(std::move(entry));
  }

  std::stable_sort(result.exceptions.begin(), result.exceptions.end(),
                   [](const ExceptionRecord& a, const ExceptionRecord& b) { return a.row.line < b.row.line; });
  return result;
}

std::map<std::string, std::string> load_resolutions(const std::filesystem::path& path) {
  const csv::Table table = csv::parse_table(read_text_file(path));
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < table.header.size(); ++i) index.emplace(std::string(trim(table.header[i])), i);
  if (!index.contains("name") || !index.contains("code"))
    throw Error(ErrorCode::MissingColumn, "resolution file needs 'name' and 'code' columns");
  std::map<std::string, std::string> out;
  for (const auto& cells : table.rows) {
    const std::size_t n = index.at("name"), c = index.at("code");
    if (n < cells.size() && c < cells.size() && !trim(cells[c]).empty())
      out[std::string(trim(cells[n]))] = std::string(trim(cells[c]));
  }
  return out;
}

std::string registry_to_jsonl(const Registry& registry) {
  std::string out;
  for (const auto& reg : registry.registers) {
    for (std::size_t i = 0; i < reg.images.size(); ++i) {
      out += image_json(reg, i).dump();
      out.push_back('\n');
    }
  }
  return out;
}

Registry registry_from_jsonl(std::string_view text) {
  Registry registry;
  std::map<std::string, std::size_t> index;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string id = j.at("register_id").get<std::string>();
      auto [slot, inserted] = index.emplace(id, registry.registers.size());
      if (inserted) {
        RegistryEntry entry;
        entry.metadata.register_id = id;
        entry.metadata.census_year = j.at("census_year").get<int>();
        entry.metadata.commune = {j.at("commune_code").get<std::string>(), j.value("commune_name", ""),
                                  j.value("department", "")};
        entry.metadata.archival_id = j.value("archival_id", "");
        registry.registers.push_back(std::move(entry));
      }
      RegistryEntry& entry = registry.registers[slot->second];
      ImageRef image;
      image.register_id = id;
      image.iiif_identifier = j.at("iiif_identifier").get<std::string>();
      image.sequence_index = j.at("sequence_index").get<std::size_t>();
      image.verified = j.value("verified", false);
      if (j.contains("width") && !j["width"].is_null()) image.width = j["width"].get<int>();
      if (j.contains("height") && !j["height"].is_null()) image.height = j["height"].get<int>();
      entry.images.push_back(std::move(image));
      entry.metadata.source_rows.push_back(j.value("source_line", std::size_t{0}));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::Parse, "registry line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return registry;
}

void save_registry(const std::filesystem::path& path, const Registry& registry) {
  write_text_file_atomic(path, registry_to_jsonl(registry));
}

Registry load_registry(const std::filesystem::path& path) { return registry_from_jsonl(read_text_file(path)); }

void write_exceptions_csv(std::ostream& out, const std::vector<ExceptionRecord>& exceptions) {
  csv::write_row(out, {"line", "reason", "detail", "year", "commune", "archival_id", "image_path"});
  for (const auto& e : exceptions) {
    csv::write_row(out, {std::to_string(e.row.line), std::string(to_string(e.reason)), e.detail, e.row.year_text,
                         e.row.commune, e.row.archival_id, e.row.image_path});
  }
}

void write_worklist_csv(std::ostream& out, const std::vector<AmbiguousItem>& worklist) {
  csv::write_row(out, {"name", "lines", "candidate_code", "candidate_name", "department", "score"});
  for (const auto& item : worklist) {
    std::string lines;
    for (std::size_t i = 0; i < item.lines.size(); ++i) lines += (i ? "|" : "") + std::to_string(item.lines[i]);
    for (const auto& c : item.candidates) {
      std::ostringstream score;
      score.precision(6);
      score << std::fixed << c.score;
      csv::write_row(out, {item.name, lines, c.entry.code, c.entry.canonical_name, c.entry.department, score.str()});
    }
  }
}

}  // namespace censusflow
