#include "censusflow/label_codec.hpp"

#include <algorithm>
#include <optional>

#include "censusflow/error.hpp"
#include "censusflow/utf8.hpp"

namespace censusflow {

namespace {

struct Lexeme {
  enum class Kind { Tag, Unknown, Text, Newline };
  Kind kind;
  std::string_view text;
  std::size_t position;  // 1-based code-point column
  EntityTag tag = EntityTag::SurnameHead;
};

bool is_continuation(char c) { return (static_cast<unsigned char>(c) & 0xC0) == 0x80; }

std::vector<Lexeme> lex(std::string_view label, const TagAlphabet& alphabet) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  std::size_t column = 1;
  std::size_t text_start = std::string_view::npos;
  std::size_t text_column = 0;

  auto flush_text = [&] {
    if (text_start != std::string_view::npos) {
      out.push_back({Lexeme::Kind::Text, label.substr(text_start, i - text_start), text_column});
      text_start = std::string_view::npos;
    }
  };
  auto advance = [&](std::size_t bytes) {
    for (std::size_t k = 0; k < bytes; ++k) {
      if (!is_continuation(label[i + k])) ++column;
    }
    i += bytes;
  };

  while (i < label.size()) {
    const char c = label[i];
    if (c == '\n') {
      flush_text();
      out.push_back({Lexeme::Kind::Newline, label.substr(i, 1), column});
      advance(1);
      continue;
    }
    if (c == '<') {
      if (const std::size_t len = token_length_at(label.substr(i)); len > 0) {
        flush_text();
        const std::string_view token = label.substr(i, len);
        if (auto tag = alphabet.find(token)) {
          out.push_back({Lexeme::Kind::Tag, token, column, *tag});
        } else {
          out.push_back({Lexeme::Kind::Unknown, token, column});
        }
        advance(len);
        continue;
      }
    }
    if (text_start == std::string_view::npos) {
      text_start = i;
      text_column = column;
    }
    advance(1);
  }
  flush_text();
  return out;
}

std::string_view trim_spaces(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

// Shared state machine; strict mode throws where lenient mode warns.
class Decoder {
 public:
  Decoder(bool strict) : strict_(strict) {}

  DecodeReport run(const std::vector<Lexeme>& lexemes) {
    for (const auto& lx : lexemes) {
      switch (lx.kind) {
        case Lexeme::Kind::Tag: on_tag(lx); break;
        case Lexeme::Kind::Unknown: on_unknown(lx); break;
        case Lexeme::Kind::Text: on_text(lx); break;
        case Lexeme::Kind::Newline:
          close_record();
          dropping_ = false;
          break;
      }
    }
    close_record();
    std::stable_sort(report_.warnings.begin(), report_.warnings.end(),
                     [](const DecodeWarning& a, const DecodeWarning& b) { return a.position < b.position; });
    return std::move(report_);
  }

 private:
  void problem(std::size_t position, DecodeWarningKind kind, const char* what) {
    if (strict_) throw MalformedLabel(position, what);
    report_.warnings.push_back({position, kind});
  }

  void on_tag(const Lexeme& lx) {
    close_field();
    dropping_ = false;
    if (is_surname(lx.tag)) {
      close_record();
    } else if (record_.has(lx.tag)) {
      problem(lx.position, DecodeWarningKind::DuplicateFieldInRecord, "repeated field in record");
      close_record();
    }
    if (!record_open_) {
      record_open_ = true;
      record_position_ = lx.position;
    }
    field_ = lx.tag;
    field_position_ = lx.position;
  }

  void on_unknown(const Lexeme& lx) {
    problem(lx.position, DecodeWarningKind::UnknownToken, "unknown token");
    close_field();
    dropping_ = true;
  }

  void on_text(const Lexeme& lx) {
    if (dropping_) return;
    if (field_) {
      value_ += lx.text;
      return;
    }
    if (!blank(lx.text)) problem(lx.position, DecodeWarningKind::StrayText, "text before first tag");
  }

  void close_field() {
    if (!field_) return;
    std::string cleaned = value_;
    if (!strict_) {
      for (char& c : cleaned) {
        if (static_cast<unsigned char>(c) < 0x20 || c == 0x7F) c = ' ';
      }
    }
    const std::string_view v = trim_spaces(cleaned);
    if (v.empty()) {
      problem(field_position_, DecodeWarningKind::EmptyField, "empty field");
    } else {
      record_.fields.emplace(*field_, std::string(v));
    }
    field_.reset();
    value_.clear();
  }

  void close_record() {
    close_field();
    if (record_open_ && !record_.fields.empty()) {
      record_.is_head = record_.has(EntityTag::SurnameHead);
      if (strict_) {
        if (!validate_record(record_).empty()) throw MalformedLabel(record_position_, "invalid record");
      } else if (!record_.has(EntityTag::SurnameHead) && !record_.has(EntityTag::Surname)) {
        report_.warnings.push_back({record_position_, DecodeWarningKind::RecordWithoutSurname});
      }
      report_.transcript.records.push_back(std::move(record_));
    }
    record_ = PersonRecord{};
    record_open_ = false;
  }

  bool strict_;
  DecodeReport report_;
  PersonRecord record_;
  bool record_open_ = false;
  std::size_t record_position_ = 0;
  std::optional<EntityTag> field_;
  std::size_t field_position_ = 0;
  std::string value_;
  bool dropping_ = false;
};

}  // namespace

std::size_t count_tokens(std::string_view label, const TagAlphabet& alphabet) {
  std::size_t n = 0;
  for (const auto& lx : lex(label, alphabet)) {
    n += lx.kind == Lexeme::Kind::Tag ? 1 : utf8::length(lx.text);
  }
  return n;
}

LabelString encode(const PageTranscript& page, std::size_t token_budget, const TagAlphabet& alphabet) {
  LabelString label;
  label.token_budget = token_budget;
  std::size_t tokens = 0;
  for (std::size_t r = 0; r < page.records.size(); ++r) {
    const PersonRecord& record = page.records[r];
    if (const auto violations = validate_record(record); !violations.empty())
      throw Error(ErrorCode::InvalidRecord,
                  "page " + page.page_id + " row " + std::to_string(r) + ": " + violations.front().describe());
    if (r) {
      label.text.push_back('\n');
      ++tokens;
    }
    bool first = true;
    // std::map iterates in EntityTag order, which is the canonical field order.
    for (const auto& [tag, value] : record.fields) {
      if (!first) {
        label.text.push_back(' ');
        ++tokens;
      }
      first = false;
      label.text += alphabet.surface(tag);
      label.text += value;
      tokens += 1 + utf8::length(value);
    }
  }
  if (tokens > token_budget)
    throw Error(ErrorCode::TokenBudgetExceeded, "page " + page.page_id + " needs " + std::to_string(tokens) +
                                                    " tokens, budget is " + std::to_string(token_budget));
  return label;
}

PageTranscript decode_strict(std::string_view label, const TagAlphabet& alphabet) {
  return Decoder(true).run(lex(label, alphabet)).transcript;
}

DecodeReport decode_lenient(std::string_view label, const TagAlphabet& alphabet) {
  return Decoder(false).run(lex(label, alphabet));
}

std::string_view to_string(DecodeWarningKind kind) {
  switch (kind) {
    case DecodeWarningKind::UnknownToken: return "UnknownToken";
    case DecodeWarningKind::EmptyField: return "EmptyField";
    case DecodeWarningKind::RecordWithoutSurname: return "RecordWithoutSurname";
    case DecodeWarningKind::DuplicateFieldInRecord: return "DuplicateFieldInRecord";
    case DecodeWarningKind::StrayText: return "StrayText";
  }
  return "Unknown";
}

bool is_repair(DecodeWarningKind kind) { return kind != DecodeWarningKind::RecordWithoutSurname; }

}  // namespace censusflow
