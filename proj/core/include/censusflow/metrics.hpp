#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "censusflow/domain.hpp"

namespace censusflow {

// Two-row Levenshtein distance over any random-access sequences whose
// elements compare with ==.
template <typename Seq>
std::size_t levenshtein(const Seq& a, const Seq& b) {
  const std::size_t n = std::size(a);
  const std::size_t m = std::size(b);
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t substitution = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitution});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

// Distance over Unicode code points of two UTF-8 strings.
std::size_t char_distance(std::string_view a, std::string_view b);

std::vector<std::string> split_words(std::string_view text);

// Transcript text with tags removed: values joined by single spaces in
// canonical field order, records joined by newlines.
std::string plain_text(const PageTranscript& page);

struct ErrorRates {
  std::size_t char_edits = 0;
  std::size_t char_total = 0;
  std::size_t word_edits = 0;
  std::size_t word_total = 0;

  // Rates are edits/total; +inf when total is 0 and edits > 0, 0 when both are.
  double cer() const;
  double wer() const;
  bool defined() const { return char_total > 0; }

  ErrorRates& operator+=(const ErrorRates& other);
};

ErrorRates error_rates(const PageTranscript& truth, const PageTranscript& pred);

struct Entity {
  EntityTag tag;
  std::string text;

  friend bool operator==(const Entity&, const Entity&) = default;
};

// (tag, text) items in page order.
std::vector<Entity> entities(const PageTranscript& page);

struct TagCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  // Ratios with a zero denominator are reported as 0 and flagged undefined.
  double precision() const;
  double recall() const;
  double f1() const;
  bool precision_defined() const { return tp + fp > 0; }
  bool recall_defined() const { return tp + fn > 0; }
  std::size_t support() const { return tp + fn; }

  TagCounts& operator+=(const TagCounts& other);
};

struct EntityScore {
  std::array<TagCounts, kTagCount> per_tag{};
  TagCounts total;  // micro average

  const TagCounts& operator[](EntityTag tag) const { return per_tag[index_of(tag)]; }
  EntityScore& operator+=(const EntityScore& other);
};

// Exact-match scoring over an order-preserving longest common subsequence of
// the two entity sequences: aligned pairs are true positives, the rest of
// the prediction false positives, the rest of the truth false negatives.
EntityScore entity_scores(const PageTranscript& truth, const PageTranscript& pred);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool precision_defined = false;
  bool recall_defined = false;
  std::size_t support = 0;  // truth count
};

// counts[predicted][truth]
class ConfusionMatrix {
 public:
  void add(PageClass truth, PageClass predicted, std::size_t count = 1);

  std::size_t at(PageClass predicted, PageClass truth) const {
    return counts_[index_of(predicted)][index_of(truth)];
  }
  std::size_t predicted_total(PageClass c) const;
  std::size_t truth_total(PageClass c) const;
  std::size_t total() const;
  double accuracy() const;

  ClassMetrics metrics(PageClass c) const;

 private:
  std::array<std::array<std::size_t, kPageClassCount>, kPageClassCount> counts_{};
};

ConfusionMatrix classification_report(std::span<const std::pair<PageClass, PageClass>> truth_pred);

std::string format_classification(const ConfusionMatrix& matrix);
nlohmann::json classification_json(const ConfusionMatrix& matrix);

struct PageEvaluation {
  std::string name;
  ErrorRates rates;
  EntityScore entities;
  bool missing_prediction = false;
  std::size_t truth_households = 0;
  std::size_t matched_households = 0;
  // Predicted page has a different number of records than the truth, so
  // households cannot be compared position by position.
  bool household_universe_mismatch = false;
  std::size_t decode_warnings = 0;
};

struct CorpusReport {
  std::vector<PageEvaluation> pages;
  ErrorRates rates;
  EntityScore entities;
  std::size_t truth_households = 0;
  std::size_t matched_households = 0;
  std::size_t missing_predictions = 0;

  double household_accuracy() const;
};

PageEvaluation evaluate_page(std::string name, const PageTranscript& truth, const PageTranscript* pred);

// Pairs every truth page with the prediction of the same name; a missing
// prediction counts as an empty page. Throws Error(NoMatchingPages) when no
// truth page has a prediction.
CorpusReport evaluate_pages(const std::vector<std::pair<std::string, PageTranscript>>& truth,
                            const std::map<std::string, PageTranscript>& predictions);

// Truth files are fixture files (*.txt, first page used). A prediction is
// <stem>.txt in the same format or <stem>.label holding raw recognizer
// output, decoded leniently.
CorpusReport evaluate_corpus(const std::filesystem::path& truth_dir, const std::filesystem::path& pred_dir);

std::string format_report(const CorpusReport& report);
nlohmann::json report_json(const CorpusReport& report);

}  // namespace censusflow
