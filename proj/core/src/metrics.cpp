#include "censusflow/metrics.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "censusflow/error.hpp"
#include "censusflow/household.hpp"
#include "censusflow/label_codec.hpp"
#include "censusflow/utf8.hpp"

namespace censusflow {

namespace {

double ratio(std::size_t num, std::size_t den) {
  if (den == 0) return num == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return static_cast<double>(num) / static_cast<double>(den);
}

double safe_ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

nlohmann::json counts_json(const TagCounts& c) {
  return {{"tp", c.tp},
          {"fp", c.fp},
          {"fn", c.fn},
          {"support", c.support()},
          {"precision", c.precision_defined() ? nlohmann::json(c.precision()) : nlohmann::json(nullptr)},
          {"recall", c.recall_defined() ? nlohmann::json(c.recall()) : nlohmann::json(nullptr)},
          {"f1", c.precision_defined() && c.recall_defined() ? nlohmann::json(c.f1()) : nlohmann::json(nullptr)}};
}

nlohmann::json rates_json(const ErrorRates& r) {
  auto rate = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"cer", rate(r.cer())},         {"wer", rate(r.wer())},
          {"char_edits", r.char_edits}, {"char_total", r.char_total},
          {"word_edits", r.word_edits}, {"word_total", r.word_total}};
}

std::string fmt_ratio(double v, bool defined) { return defined ? fmt::format("{:.2f}", v) : std::string("n/a"); }

}  // namespace

std::size_t char_distance(std::string_view a, std::string_view b) {
  return levenshtein(utf8::decode(a), utf8::decode(b));
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (char c : text) {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::string plain_text(const PageTranscript& page) {
  std::string out;
  for (std::size_t r = 0; r < page.records.size(); ++r) {
    if (r) out.push_back('\n');
    bool first = true;
    for (const auto& [tag, value] : page.records[r].fields) {
      if (!first) out.push_back(' ');
      first = false;
      out += value;
    }
  }
  return out;
}

double ErrorRates::cer() const { return ratio(char_edits, char_total); }
double ErrorRates::wer() const { return ratio(word_edits, word_total); }

ErrorRates& ErrorRates::operator+=(const ErrorRates& other) {
  char_edits += other.char_edits;
  char_total += other.char_total;
  word_edits += other.word_edits;
  word_total += other.word_total;
  return *this;
}

ErrorRates error_rates(const PageTranscript& truth, const PageTranscript& pred) {
  const std::u32string t = utf8::decode(plain_text(truth));
  const std::u32string p = utf8::decode(plain_text(pred));
  const auto tw = split_words(plain_text(truth));
  const auto pw = split_words(plain_text(pred));
  ErrorRates r;
  r.char_edits = levenshtein(t, p);
  r.char_total = t.size();
  r.word_edits = levenshtein(tw, pw);
  r.word_total = tw.size();
  return r;
}

std::vector<Entity> entities(const PageTranscript& page) {
  std::vector<Entity> out;
  for (const auto& record : page.records) {
    for (const auto& [tag, value] : record.fields) out.push_back({tag, value});
  }
  return out;
}

double TagCounts::precision() const { return safe_ratio(tp, tp + fp); }
double TagCounts::recall() const { return safe_ratio(tp, tp + fn); }
double TagCounts::f1() const { return harmonic(precision(), recall()); }

TagCounts& TagCounts::operator+=(const TagCounts& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  return *this;
}

EntityScore& EntityScore::operator+=(const EntityScore& other) {
  for (std::size_t i = 0; i < kTagCount; ++i) per_tag[i] += other.per_tag[i];
  total += other.total;
  return *this;
}

EntityScore entity_scores(const PageTranscript& truth, const PageTranscript& pred) {
  const auto t = entities(truth);
  const auto p = entities(pred);
  const std::size_t n = t.size();
  const std::size_t m = p.size();

  // lcs[i][j] = LCS length of t[i..] and p[j..]
  std::vector<std::vector<std::uint32_t>> lcs(n + 1, std::vector<std::uint32_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      lcs[i][j] = t[i] == p[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }

  EntityScore score;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (t[i] == p[j] && lcs[i][j] == lcs[i + 1][j + 1] + 1) {
      ++score.per_tag[index_of(t[i].tag)].tp;
      ++i;
      ++j;
    } else if (lcs[i + 1][j] >= lcs[i][j + 1]) {
      ++score.per_tag[index_of(t[i].tag)].fn;
      ++i;
    } else {
      ++score.per_tag[index_of(p[j].tag)].fp;
      ++j;
    }
  }
  for (; i < n; ++i) ++score.per_tag[index_of(t[i].tag)].fn;
  for (; j < m; ++j) ++score.per_tag[index_of(p[j].tag)].fp;
  for (const auto& c : score.per_tag) score.total += c;
  return score;
}

void ConfusionMatrix::add(PageClass truth, PageClass predicted, std::size_t count) {
  counts_[index_of(predicted)][index_of(truth)] += count;
}

std::size_t ConfusionMatrix::predicted_total(PageClass c) const {
  std::size_t n = 0;
  for (PageClass t : kAllPageClasses) n += at(c, t);
  return n;
}

std::size_t ConfusionMatrix::truth_total(PageClass c) const {
  std::size_t n = 0;
  for (PageClass p : kAllPageClasses) n += at(p, c);
  return n;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (PageClass c : kAllPageClasses) n += truth_total(c);
  return n;
}

double ConfusionMatrix::accuracy() const {
  std::size_t diagonal = 0;
  for (PageClass c : kAllPageClasses) diagonal += at(c, c);
  return safe_ratio(diagonal, total());
}

ClassMetrics ConfusionMatrix::metrics(PageClass c) const {
  ClassMetrics m;
  const std::size_t hit = at(c, c);
  const std::size_t predicted = predicted_total(c);
  const std::size_t truth = truth_total(c);
  m.precision_defined = predicted > 0;
  m.recall_defined = truth > 0;
  m.precision = safe_ratio(hit, predicted);
  m.recall = safe_ratio(hit, truth);
  m.f1 = harmonic(m.precision, m.recall);
  m.support = truth;
  return m;
}

ConfusionMatrix classification_report(std::span<const std::pair<PageClass, PageClass>> truth_pred) {
  ConfusionMatrix matrix;
  for (const auto& [truth, pred] : truth_pred) matrix.add(truth, pred);
  return matrix;
}

std::string format_classification(const ConfusionMatrix& matrix) {
  std::string out = fmt::format("{:<8} {:>6} {:>6} {:>6} {:>8}\n", "Class", "P", "R", "F1", "Support");
  for (PageClass c : kAllPageClasses) {
    const auto m = matrix.metrics(c);
    out += fmt::format("{:<8} {:>6} {:>6} {:>6} {:>8}\n", page_class_name(c),
                       fmt_ratio(m.precision, m.precision_defined), fmt_ratio(m.recall, m.recall_defined),
                       fmt_ratio(m.f1, m.precision_defined && m.recall_defined), m.support);
  }
  out += "\nConfusion matrix (rows: predicted, columns: truth)\n";
  out += fmt::format("{:<8}", "");
  for (PageClass c : kAllPageClasses) out += fmt::format(" {:>7}", page_class_name(c));
  out += "\n";
  for (PageClass p : kAllPageClasses) {
    out += fmt::format("{:<8}", page_class_name(p));
    for (PageClass t : kAllPageClasses) out += fmt::format(" {:>7}", matrix.at(p, t));
    out += "\n";
  }
  return out;
}

nlohmann::json classification_json(const ConfusionMatrix& matrix) {
  nlohmann::json classes = nlohmann::json::object();
  nlohmann::json rows = nlohmann::json::object();
  for (PageClass c : kAllPageClasses) {
    const auto m = matrix.metrics(c);
    classes[std::string(page_class_name(c))] = {
        {"precision", m.precision_defined ? nlohmann::json(m.precision) : nlohmann::json(nullptr)},
        {"recall", m.recall_defined ? nlohmann::json(m.recall) : nlohmann::json(nullptr)},
        {"f1", m.precision_defined && m.recall_defined ? nlohmann::json(m.f1) : nlohmann::json(nullptr)},
        {"support", m.support}};
    nlohmann::json row = nlohmann::json::object();
    for (PageClass t : kAllPageClasses) row[std::string(page_class_name(t))] = matrix.at(c, t);
    rows[std::string(page_class_name(c))] = std::move(row);
  }
  return {{"classes", classes}, {"confusion_predicted_by_truth", rows}, {"total", matrix.total()},
          {"accuracy", matrix.accuracy()}};
}

double CorpusReport::household_accuracy() const {
  return truth_households == 0 ? 1.0 : safe_ratio(matched_households, truth_households);
}

PageEvaluation evaluate_page(std::string name, const PageTranscript& truth, const PageTranscript* pred) {
  static const PageTranscript kEmpty;
  const PageTranscript& p = pred ? *pred : kEmpty;
  PageEvaluation eval;
  eval.name = std::move(name);
  eval.missing_prediction = pred == nullptr;
  eval.rates = error_rates(truth, p);
  eval.entities = entity_scores(truth, p);

  HouseholdSet truth_set{group_page(truth), {}};
  eval.truth_households = truth_set.households.size();
  if (truth.records.size() == p.records.size()) {
    // Compare positions within the page only.
    PageTranscript aligned = p;
    aligned.page_index = truth.page_index;
    HouseholdSet pred_set{group_page(aligned), {}};
    eval.matched_households = matched_households(pred_set, truth_set);
  } else {
    eval.household_universe_mismatch = true;
  }
  return eval;
}

CorpusReport evaluate_pages(const std::vector<std::pair<std::string, PageTranscript>>& truth,
                            const std::map<std::string, PageTranscript>& predictions) {
  CorpusReport report;
  std::size_t matched = 0;
  for (const auto& [name, page] : truth) {
    auto it = predictions.find(name);
    const PageTranscript* pred = it == predictions.end() ? nullptr : &it->second;
    if (pred) ++matched;
    report.pages.push_back(evaluate_page(name, page, pred));
  }
  if (matched == 0) throw Error(ErrorCode::NoMatchingPages, "no truth page has a prediction");
  for (const auto& page : report.pages) {
    report.rates += page.rates;
    report.entities += page.entities;
    report.truth_households += page.truth_households;
    report.matched_households += page.matched_households;
    if (page.missing_prediction) ++report.missing_predictions;
  }
  return report;
}

CorpusReport evaluate_corpus(const std::filesystem::path& truth_dir, const std::filesystem::path& pred_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(truth_dir)) throw Error(ErrorCode::Io, "not a directory: " + truth_dir.string());
  if (!fs::is_directory(pred_dir)) throw Error(ErrorCode::Io, "not a directory: " + pred_dir.string());

  std::vector<fs::path> truth_files;
  for (const auto& entry : fs::directory_iterator(truth_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") truth_files.push_back(entry.path());
  }
  std::sort(truth_files.begin(), truth_files.end());

  std::vector<std::pair<std::string, PageTranscript>> truth;
  std::map<std::string, PageTranscript> predictions;
  std::map<std::string, std::size_t> warnings;
  for (const auto& file : truth_files) {
    const std::string stem = file.stem().string();
    auto pages = load_fixture_file(file);
    truth.emplace_back(stem, pages.empty() ? PageTranscript{} : std::move(pages.front()));

    const fs::path fixture = pred_dir / (stem + ".txt");
    const fs::path label = pred_dir / (stem + ".label");
    if (fs::exists(fixture)) {
      auto pred = load_fixture_file(fixture);
      predictions.emplace(stem, pred.empty() ? PageTranscript{} : std::move(pred.front()));
    } else if (fs::exists(label)) {
      auto decoded = decode_lenient(read_text_file(label));
      warnings[stem] = decoded.warnings.size();
      predictions.emplace(stem, std::move(decoded.transcript));
    }
  }
  auto report = evaluate_pages(truth, predictions);
  for (auto& page : report.pages) {
    if (auto it = warnings.find(page.name); it != warnings.end()) page.decode_warnings = it->second;
  }
  return report;
}

std::string format_report(const CorpusReport& report) {
  auto pct = [](double v) { return std::isfinite(v) ? fmt::format("{:.2f}", 100.0 * v) : std::string("inf"); };
  std::string out;
  out += fmt::format("Pages: {} ({} without prediction)\n\n", report.pages.size(), report.missing_predictions);
  out += fmt::format("{:<14} {:>8} {:>8}\n", "", "CER (%)", "WER (%)");
  out += fmt::format("{:<14} {:>8} {:>8}\n\n", "corpus", pct(report.rates.cer()), pct(report.rates.wer()));

  out += "Entities (exact text match)\n";
  out += fmt::format("{:<14} {:>6} {:>6} {:>6} {:>8}\n", "Tag", "P", "R", "F1", "Support");
  std::vector<EntityTag> order(kAllTags.begin(), kAllTags.end());
  std::sort(order.begin(), order.end(), [](EntityTag a, EntityTag b) { return tag_key(a) < tag_key(b); });
  for (EntityTag tag : order) {
    const TagCounts& c = report.entities[tag];
    out += fmt::format("{:<14} {:>6} {:>6} {:>6} {:>8}\n", tag_key(tag), fmt_ratio(c.precision(), c.precision_defined()),
                       fmt_ratio(c.recall(), c.recall_defined()),
                       fmt_ratio(c.f1(), c.precision_defined() && c.recall_defined()), c.support());
  }
  const TagCounts& t = report.entities.total;
  out += fmt::format("{:<14} {:>6} {:>6} {:>6} {:>8}\n\n", "Total", fmt_ratio(t.precision(), t.precision_defined()),
                     fmt_ratio(t.recall(), t.recall_defined()),
                     fmt_ratio(t.f1(), t.precision_defined() && t.recall_defined()), t.support());
  out += fmt::format("Households correctly grouped: {}/{} ({:.2f}%)\n", report.matched_households,
                     report.truth_households, 100.0 * report.household_accuracy());
  const TagCounts& heads = report.entities[EntityTag::SurnameHead];
  out += fmt::format("Head-of-household tag F1: {}\n", fmt_ratio(heads.f1(), heads.precision_defined() && heads.recall_defined()));
  return out;
}

nlohmann::json report_json(const CorpusReport& report) {
  nlohmann::json tags = nlohmann::json::object();
  for (EntityTag tag : kAllTags) tags[std::string(tag_key(tag))] = counts_json(report.entities[tag]);
  nlohmann::json pages = nlohmann::json::array();
  for (const auto& p : report.pages) {
    pages.push_back({{"name", p.name},
                     {"missing_prediction", p.missing_prediction},
                     {"rates", rates_json(p.rates)},
                     {"entities_total", counts_json(p.entities.total)},
                     {"truth_households", p.truth_households},
                     {"matched_households", p.matched_households},
                     {"household_universe_mismatch", p.household_universe_mismatch},
                     {"decode_warnings", p.decode_warnings}});
  }
  return {{"matching", "exact"},
          {"rates", rates_json(report.rates)},
          {"entities", {{"per_tag", tags}, {"micro", counts_json(report.entities.total)}}},
          {"households",
           {{"truth", report.truth_households},
            {"matched", report.matched_households},
            {"accuracy", report.household_accuracy()}}},
          {"missing_predictions", report.missing_predictions},
          {"pages", pages}};
}

}  // namespace censusflow
