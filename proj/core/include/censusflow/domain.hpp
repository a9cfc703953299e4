#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace censusflow {

// Column categories of a nominative list. Declaration order is the
// canonical field order used by the label encoder.
enum class EntityTag : std::uint8_t {
  SurnameHead,
  Surname,
  Firstname,
  Occupation,
  Link,
  Employer,
  Age,
  Nationality,
  BirthDate,
  CivilStatus,
  PlaceOfBirth,
  Observation,
};

inline constexpr std::size_t kTagCount = 12;

inline constexpr std::array<EntityTag, kTagCount> kAllTags = {
    EntityTag::SurnameHead, EntityTag::Surname,     EntityTag::Firstname,   EntityTag::Occupation,
    EntityTag::Link,        EntityTag::Employer,    EntityTag::Age,         EntityTag::Nationality,
    EntityTag::BirthDate,   EntityTag::CivilStatus, EntityTag::PlaceOfBirth, EntityTag::Observation,
};

constexpr std::size_t index_of(EntityTag tag) { return static_cast<std::size_t>(tag); }
constexpr bool is_surname(EntityTag tag) {
  return tag == EntityTag::SurnameHead || tag == EntityTag::Surname;
}

// Upper-case identifier, e.g. "SURNAME_HEAD", "LOB".
std::string_view tag_name(EntityTag tag);
// Lower-case key used in fixture files, e.g. "surname_head".
std::string_view tag_key(EntityTag tag);
// Accepts either spelling, case-insensitively.
std::optional<EntityTag> tag_from_name(std::string_view name);

// True when text has the shape of a tag token: '<', 1-16 non-space
// characters other than angle brackets, '>'.
bool is_token_shaped(std::string_view text);
// Length in bytes of the token starting at text[0], or 0 if none does.
std::size_t token_length_at(std::string_view text);

// Bijective mapping between tags and their single-token surface forms.
class TagAlphabet {
 public:
  // <s-h> <s> <f> <o> <l> <e> <a> <n> <b> <c> <p> <x>
  static const TagAlphabet& standard();

  // Throws Error(ConfigInvalid) unless the forms are 12 distinct
  // token-shaped strings.
  explicit TagAlphabet(std::array<std::string, kTagCount> surfaces);

  // key=value document, one "TAG_NAME=<token>" per line; '#' starts a
  // comment. Unlisted tags keep their standard form.
  static TagAlphabet parse(std::string_view text);
  static TagAlphabet load(const std::filesystem::path& path);

  std::string_view surface(EntityTag tag) const { return surfaces_[index_of(tag)]; }
  std::optional<EntityTag> find(std::string_view token) const;

 private:
  std::array<std::string, kTagCount> surfaces_;
};

// Throws Error(UnknownToken) for anything outside the alphabet.
EntityTag tag_from_token(std::string_view token, const TagAlphabet& alphabet = TagAlphabet::standard());

enum class PageClass : std::uint8_t { Front, List, Recap, Totals, Other };

inline constexpr std::size_t kPageClassCount = 5;
inline constexpr std::array<PageClass, kPageClassCount> kAllPageClasses = {
    PageClass::Front, PageClass::List, PageClass::Recap, PageClass::Totals, PageClass::Other};

constexpr std::size_t index_of(PageClass c) { return static_cast<std::size_t>(c); }
std::string_view page_class_name(PageClass c);
std::optional<PageClass> page_class_from_name(std::string_view name);

// One table row. Absent tags are empty cells.
struct PersonRecord {
  std::map<EntityTag, std::string> fields;
  bool is_head = false;

  // Builds a record with is_head derived from the presence of SURNAME_HEAD.
  static PersonRecord of(std::initializer_list<std::pair<EntityTag, std::string>> values);

  const std::string* get(EntityTag tag) const;
  bool has(EntityTag tag) const { return fields.contains(tag); }

  friend bool operator==(const PersonRecord&, const PersonRecord&) = default;
};

enum class ViolationKind {
  DualSurname,
  EmptyValue,
  HeadFlagMismatch,
  EmptyRecord,
  // Value carries a tab, newline or token-shaped substring, or has
  // surrounding whitespace; it could not survive a label round trip.
  UnsafeValue,
};

struct Violation {
  ViolationKind kind;
  std::optional<EntityTag> tag;

  std::string describe() const;
  friend bool operator==(const Violation&, const Violation&) = default;
};

std::vector<Violation> validate_record(const PersonRecord& record);

// Address of a record inside a register: page index and top-to-bottom row.
struct RecordPosition {
  std::size_t page = 0;
  std::size_t row = 0;

  friend auto operator<=>(const RecordPosition&, const RecordPosition&) = default;
};

struct Household {
  std::vector<PersonRecord> members;
  std::vector<RecordPosition> positions;  // parallel to members
  // False when the household may continue on an adjacent page.
  bool complete = true;

  friend bool operator==(const Household&, const Household&) = default;
};

// Soft bound on rows per list page; exceeding it is a warning.
inline constexpr std::size_t kTypicalMaxRows = 40;

struct PageTranscript {
  std::string page_id;
  std::size_t page_index = 0;  // position of the page inside its register
  std::vector<PersonRecord> records;

  friend bool operator==(const PageTranscript&, const PageTranscript&) = default;
};

// Non-fatal observations about a page (record-level violations, row count).
std::vector<std::string> page_warnings(const PageTranscript& page);

// Census years 1836-1936 on the five-year rhythm, with 1872 replacing 1871
// and 1916 absent.
bool is_census_year(int year);
std::span<const int> census_years();

struct CommuneRef {
  std::string code;
  std::string name;
  std::string department;

  friend bool operator==(const CommuneRef&, const CommuneRef&) = default;
};

struct RegisterMetadata {
  std::string register_id;
  int census_year = 0;
  CommuneRef commune;
  std::string archival_id;
  std::vector<std::size_t> source_rows;  // CSV line numbers

  friend bool operator==(const RegisterMetadata&, const RegisterMetadata&) = default;
};

struct ImageRef {
  std::string register_id;
  std::string iiif_identifier;
  std::size_t sequence_index = 0;
  bool verified = false;
  std::optional<int> width;
  std::optional<int> height;

  friend bool operator==(const ImageRef&, const ImageRef&) = default;
};

struct RegisterPage {
  std::string page_id;
  PageClass page_class = PageClass::Other;
  std::optional<PageTranscript> transcript;
};

struct RegisterDocument {
  RegisterMetadata metadata;
  std::vector<RegisterPage> pages;  // reading order
};

// Fixture text format:
//   @page <page_id> <page_index>
//   surname_head=Gendre<TAB>firstname=Pierre<TAB>...
//   ---
// One record per line, pages separated by "---"; '#' lines are comments.
// An "@page" header is optional; pages without one get id "page<N>".
std::string write_fixture(std::span<const PageTranscript> pages);
std::vector<PageTranscript> read_fixture(std::string_view text);

std::vector<PageTranscript> load_fixture_file(const std::filesystem::path& path);
void save_fixture_file(const std::filesystem::path& path, std::span<const PageTranscript> pages);

std::string read_text_file(const std::filesystem::path& path);
// Writes through a temporary sibling and renames it into place.
void write_text_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace censusflow
