#include "censusflow/domain.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "censusflow/error.hpp"

namespace censusflow {

namespace {

constexpr std::array<std::string_view, kTagCount> kTagNames = {
    "SURNAME_HEAD", "SURNAME",    "FIRSTNAME",   "OCCUPATION", "LINK", "EMPLOYER",
    "AGE",          "NATIONALITY", "BIRTH_DATE", "CIVIL_STATUS", "LOB", "OBSERVATION",
};

constexpr std::array<std::string_view, kTagCount> kTagKeys = {
    "surname_head", "surname",     "firstname",  "occupation",   "link", "employer",
    "age",          "nationality", "birth_date", "civil_status", "lob",  "observation",
};

constexpr std::array<std::string_view, kPageClassCount> kPageClassNames = {
    "FRONT", "LIST", "RECAP", "TOTALS", "OTHER"};

constexpr std::size_t kMaxTokenBody = 16;

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool has_unsafe_content(std::string_view value) {
  if (value.find_first_of("\t\n\r") != std::string_view::npos) return true;
  if (std::isspace(static_cast<unsigned char>(value.front())) ||
      std::isspace(static_cast<unsigned char>(value.back())))
    return true;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (value[i] == '<' && token_length_at(value.substr(i)) > 0) return true;
  }
  return false;
}

constexpr std::array<int, 20> kCensusYears = {1836, 1841, 1846, 1851, 1856, 1861, 1866,
                                              1872, 1876, 1881, 1886, 1891, 1896, 1901,
                                              1906, 1911, 1921, 1926, 1931, 1936};

}  // namespace

std::string_view tag_name(EntityTag tag) { return kTagNames[index_of(tag)]; }
std::string_view tag_key(EntityTag tag) { return kTagKeys[index_of(tag)]; }

std::optional<EntityTag> tag_from_name(std::string_view name) {
  for (EntityTag tag : kAllTags) {
    if (iequals(name, kTagNames[index_of(tag)])) return tag;
  }
  return std::nullopt;
}

std::size_t token_length_at(std::string_view text) {
  if (text.empty() || text.front() != '<') return 0;
  for (std::size_t i = 1; i < text.size() && i <= kMaxTokenBody + 1; ++i) {
    const char c = text[i];
    if (c == '>') return i > 1 ? i + 1 : 0;
    if (c == '<' || c == ' ' || c == '\t' || c == '\n' || c == '\r') return 0;
  }
  return 0;
}

bool is_token_shaped(std::string_view text) {
  return !text.empty() && token_length_at(text) == text.size();
}

const TagAlphabet& TagAlphabet::standard() {
  static const TagAlphabet alphabet({"<s-h>", "<s>", "<f>", "<o>", "<l>", "<e>", "<a>", "<n>",
                                     "<b>", "<c>", "<p>", "<x>"});
  return alphabet;
}

TagAlphabet::TagAlphabet(std::array<std::string, kTagCount> surfaces) : surfaces_(std::move(surfaces)) {
  std::set<std::string_view> seen;
  for (EntityTag tag : kAllTags) {
    const std::string& s = surfaces_[index_of(tag)];
    if (!is_token_shaped(s))
      throw Error(ErrorCode::ConfigInvalid,
                  "surface form for " + std::string(tag_name(tag)) + " is not a <token>: '" + s + "'");
    if (!seen.insert(s).second)
      throw Error(ErrorCode::ConfigInvalid, "duplicate surface form '" + s + "'");
  }
}

TagAlphabet TagAlphabet::parse(std::string_view text) {
  std::array<std::string, kTagCount> surfaces;
  for (EntityTag tag : kAllTags) surfaces[index_of(tag)] = std::string(standard().surface(tag));

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::ConfigInvalid, "alphabet line " + std::to_string(lineno) + ": expected TAG=<token>");
    const auto tag = tag_from_name(trim(view.substr(0, eq)));
    if (!tag)
      throw Error(ErrorCode::ConfigInvalid,
                  "alphabet line " + std::to_string(lineno) + ": unknown tag '" + std::string(trim(view.substr(0, eq))) + "'");
    surfaces[index_of(*tag)] = std::string(trim(view.substr(eq + 1)));
  }
  return TagAlphabet(std::move(surfaces));
}

TagAlphabet TagAlphabet::load(const std::filesystem::path& path) { return parse(read_text_file(path)); }

std::optional<EntityTag> TagAlphabet::find(std::string_view token) const {
  for (EntityTag tag : kAllTags) {
    if (surfaces_[index_of(tag)] == token) return tag;
  }
  return std::nullopt;
}

EntityTag tag_from_token(std::string_view token, const TagAlphabet& alphabet) {
  if (auto tag = alphabet.find(token)) return *tag;
  throw Error(ErrorCode::UnknownToken, "'" + std::string(token) + "'");
}

std::string_view page_class_name(PageClass c) { return kPageClassNames[index_of(c)]; }

std::optional<PageClass> page_class_from_name(std::string_view name) {
  for (PageClass c : kAllPageClasses) {
    if (iequals(name, kPageClassNames[index_of(c)])) return c;
  }
  return std::nullopt;
}

PersonRecord PersonRecord::of(std::initializer_list<std::pair<EntityTag, std::string>> values) {
  PersonRecord r;
  for (const auto& [tag, value] : values) r.fields[tag] = value;
  r.is_head = r.has(EntityTag::SurnameHead);
  return r;
}

const std::string* PersonRecord::get(EntityTag tag) const {
  auto it = fields.find(tag);
  return it == fields.end() ? nullptr : &it->second;
}

std::string Violation::describe() const {
  std::string out;
  switch (kind) {
    case ViolationKind::DualSurname: out = "DualSurname"; break;
    case ViolationKind::EmptyValue: out = "EmptyValue"; break;
    case ViolationKind::HeadFlagMismatch: out = "HeadFlagMismatch"; break;
    case ViolationKind::EmptyRecord: out = "EmptyRecord"; break;
    case ViolationKind::UnsafeValue: out = "UnsafeValue"; break;
  }
  if (tag) out += "(" + std::string(tag_name(*tag)) + ")";
  return out;
}

std::vector<Violation> validate_record(const PersonRecord& record) {
  std::vector<Violation> out;
  if (record.fields.empty()) out.push_back({ViolationKind::EmptyRecord, std::nullopt});
  if (record.has(EntityTag::SurnameHead) && record.has(EntityTag::Surname))
    out.push_back({ViolationKind::DualSurname, std::nullopt});
  if (record.is_head != record.has(EntityTag::SurnameHead))
    out.push_back({ViolationKind::HeadFlagMismatch, std::nullopt});
  for (const auto& [tag, value] : record.fields) {
    if (value.empty())
      out.push_back({ViolationKind::EmptyValue, tag});
    else if (has_unsafe_content(value))
      out.push_back({ViolationKind::UnsafeValue, tag});
  }
  return out;
}

std::vector<std::string> page_warnings(const PageTranscript& page) {
  std::vector<std::string> out;
  if (page.records.size() > kTypicalMaxRows)
    out.push_back("page " + page.page_id + " has " + std::to_string(page.records.size()) +
                  " records (typical maximum " + std::to_string(kTypicalMaxRows) + ")");
  for (std::size_t i = 0; i < page.records.size(); ++i) {
    for (const auto& v : validate_record(page.records[i]))
      out.push_back("page " + page.page_id + " row " + std::to_string(i) + ": " + v.describe());
  }
  return out;
}

bool is_census_year(int year) {
  return std::binary_search(kCensusYears.begin(), kCensusYears.end(), year);
}

std::span<const int> census_years() { return kCensusYears; }

std::string write_fixture(std::span<const PageTranscript> pages) {
  std::string out;
  for (std::size_t p = 0; p < pages.size(); ++p) {
    if (p) out += "---\n";
    const auto& page = pages[p];
    out += "@page " + page.page_id + " " + std::to_string(page.page_index) + "\n";
    for (const auto& record : page.records) {
      bool first = true;
      for (const auto& [tag, value] : record.fields) {
        if (!first) out.push_back('\t');
        first = false;
        out += tag_key(tag);
        out.push_back('=');
        out += value;
      }
      out.push_back('\n');
    }
  }
  return out;
}

std::vector<PageTranscript> read_fixture(std::string_view text) {
  std::vector<PageTranscript> pages;
  PageTranscript current;
  bool open = false;  // current page has a header or records

  auto close_page = [&](bool force) {
    if (!open && !force) return;
    if (current.page_id.empty()) {
      current.page_id = "page" + std::to_string(pages.size());
      current.page_index = pages.size();
    }
    pages.push_back(std::move(current));
    current = PageTranscript{};
    open = false;
  };

  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string where = "line " + std::to_string(lineno) + ": ";

    if (line == "---") {
      close_page(true);
      continue;
    }
    if (trim(line).empty() || line.front() == '#') continue;
    if (line.rfind("@page", 0) == 0) {
      if (open) throw Error(ErrorCode::Parse, where + "@page header inside a page");
      std::istringstream header{std::string(line.substr(5))};
      std::string id;
      std::size_t index = 0;
      if (!(header >> id >> index)) throw Error(ErrorCode::Parse, where + "expected '@page <id> <index>'");
      current.page_id = id;
      current.page_index = index;
      open = true;
      continue;
    }

    PersonRecord record;
    std::size_t pos = 0;
    while (pos < line.size()) {
      auto tab = line.find('\t', pos);
      if (tab == std::string_view::npos) tab = line.size();
      const std::string_view pair = line.substr(pos, tab - pos);
      pos = tab + 1;
      if (pair.empty()) continue;
      const auto eq = pair.find('=');
      if (eq == std::string_view::npos)
        throw Error(ErrorCode::Parse, where + "expected tag=value, got '" + std::string(pair) + "'");
      const auto tag = tag_from_name(pair.substr(0, eq));
      if (!tag) throw Error(ErrorCode::Parse, where + "unknown tag '" + std::string(pair.substr(0, eq)) + "'");
      if (!record.fields.emplace(*tag, std::string(pair.substr(eq + 1))).second)
        throw Error(ErrorCode::Parse, where + "duplicate tag " + std::string(tag_name(*tag)));
    }
    record.is_head = record.has(EntityTag::SurnameHead);
    current.records.push_back(std::move(record));
    open = true;
  }
  close_page(false);
  return pages;
}

std::vector<PageTranscript> load_fixture_file(const std::filesystem::path& path) {
  return read_fixture(read_text_file(path));
}

void save_fixture_file(const std::filesystem::path& path, std::span<const PageTranscript> pages) {
  write_text_file_atomic(path, write_fixture(pages));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::Io, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace censusflow
