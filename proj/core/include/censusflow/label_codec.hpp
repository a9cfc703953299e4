#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "censusflow/domain.hpp"

namespace censusflow {

// Maximum number of output tokens the recognizer may emit for one page.
inline constexpr std::size_t kDefaultTokenBudget = 2800;

// A full-page label: each field is its tag token immediately followed by the
// value, fields of a record are separated by one space and records by a
// newline, e.g.
//   <s-h>Gendre <f>Pierre <o>cultivateur <l>chef <e>patron <a>75 <n>française
//   <s>Paraud <f>Marie ...
struct LabelString {
  std::string text;
  std::size_t token_budget = kDefaultTokenBudget;
};

// Tag tokens count as one token each, every other code point as one.
std::size_t count_tokens(std::string_view label, const TagAlphabet& alphabet = TagAlphabet::standard());

// Fields are emitted in EntityTag declaration order. Throws
// Error(InvalidRecord) if a record fails validate_record and
// Error(TokenBudgetExceeded) if the result is longer than token_budget.
LabelString encode(const PageTranscript& page, std::size_t token_budget = kDefaultTokenBudget,
                   const TagAlphabet& alphabet = TagAlphabet::standard());

// Exact inverse of encode. A record ends at a newline or where a surname
// token (<s-h> or <s>) opens the next one. Throws MalformedLabel on an
// unknown token, a repeated field inside a record, an empty field or text
// ahead of the first tag of a line.
PageTranscript decode_strict(std::string_view label, const TagAlphabet& alphabet = TagAlphabet::standard());

enum class DecodeWarningKind {
  UnknownToken,
  EmptyField,
  RecordWithoutSurname,
  DuplicateFieldInRecord,
  StrayText,
};

std::string_view to_string(DecodeWarningKind kind);

struct DecodeWarning {
  std::size_t position = 0;  // 1-based code-point column in the label
  DecodeWarningKind kind = DecodeWarningKind::UnknownToken;

  friend bool operator==(const DecodeWarning&, const DecodeWarning&) = default;
};

struct DecodeReport {
  PageTranscript transcript;
  std::vector<DecodeWarning> warnings;  // sorted by position
};

// Total best-effort decoder for recognizer output. Repairs applied:
//  - text after an unknown token is dropped up to the next known tag;
//  - empty fields are skipped;
//  - a field tag repeated inside a record opens a new record;
//  - control characters in values become spaces and values are trimmed;
//  - text ahead of the first tag of a line is dropped.
// RecordWithoutSurname is informational: the record is kept as decoded.
DecodeReport decode_lenient(std::string_view label, const TagAlphabet& alphabet = TagAlphabet::standard());

// True for warning kinds that mark a repair (everything but RecordWithoutSurname).
bool is_repair(DecodeWarningKind kind);

}  // namespace censusflow
