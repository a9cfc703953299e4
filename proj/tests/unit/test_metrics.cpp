#include <gtest/gtest.h>

#include <censusflow/error.hpp>
#include <censusflow/metrics.hpp>
#include <censusflow/synthetic.hpp>
#include <censusflow/utf8.hpp>
#include <censusflow/workers.hpp>

#include "test_support.hpp"

using namespace censusflow;
using T = EntityTag;

namespace {

PageTranscript one(std::initializer_list<std::pair<EntityTag, std::string>> fields) {
  PageTranscript p;
  p.records = {PersonRecord::of(fields)};
  return p;
}

PageTranscript seq(std::vector<std::pair<EntityTag, std::string>> items) {
  PageTranscript p;
  for (auto& [tag, text] : items) p.records.push_back(PersonRecord::of({{tag, text}}));
  return p;
}

}  // namespace

TEST(Levenshtein, MatchesEditGraphOracle) {
  const cftest::EditGraphOracle oracle("abc", 5);
  const auto& strings = oracle.strings();
  for (std::size_t i = 0; i < strings.size(); ++i) {
    const auto dist = oracle.distances_from(i);
    for (std::size_t j = 0; j < strings.size(); ++j)
      ASSERT_EQ(levenshtein(strings[i], strings[j]), dist[j]) << strings[i] << " / " << strings[j];
  }
}

TEST(Levenshtein, CodePoints) {
  EXPECT_EQ(char_distance("mère", "mere"), 1u);
  EXPECT_EQ(char_distance("", "abc"), 3u);
  EXPECT_EQ(levenshtein(std::vector<int>{1, 2, 3}, std::vector<int>{2, 3}), 1u);
}

TEST(ErrorRates, Examples) {
  const auto same = error_rates(cftest::gendre_page(), cftest::gendre_page());
  EXPECT_EQ(same.cer(), 0.0);
  EXPECT_EQ(same.wer(), 0.0);

  const auto chef = error_rates(one({{T::Link, "chef"}}), one({{T::Link, "chez"}}));
  EXPECT_EQ(chef.cer(), 0.25);
  EXPECT_EQ(chef.wer(), 1.0);

  const auto gendre =
      error_rates(one({{T::SurnameHead, "Gendre"}, {T::Firstname, "Pierre"}}), one({{T::SurnameHead, "Gendre"}}));
  EXPECT_EQ(gendre.char_edits, 7u);
  EXPECT_EQ(gendre.char_total, 13u);
  EXPECT_DOUBLE_EQ(gendre.cer(), 7.0 / 13.0);
  EXPECT_EQ(gendre.wer(), 0.5);
}

TEST(ErrorRates, UndefinedTotals) {
  ErrorRates r;
  EXPECT_EQ(r.cer(), 0.0);
  r.char_edits = 2;
  EXPECT_TRUE(std::isinf(r.cer()));
  EXPECT_FALSE(r.defined());
}

TEST(EntityScores, Examples) {
  const auto identical = entity_scores(cftest::gendre_page(), cftest::gendre_page());
  EXPECT_EQ(identical.total.precision(), 1.0);
  EXPECT_EQ(identical.total.recall(), 1.0);
  EXPECT_EQ(identical.total.f1(), 1.0);
  EXPECT_EQ(identical.total.support(), 28u);

  const auto age = entity_scores(one({{T::Age, "75"}}), one({{T::Age, "76"}}));
  EXPECT_EQ(age[T::Age].tp, 0u);
  EXPECT_EQ(age[T::Age].fp, 1u);
  EXPECT_EQ(age[T::Age].fn, 1u);
  EXPECT_EQ(age[T::Age].f1(), 0.0);

  const auto swapped =
      entity_scores(seq({{T::Firstname, "Pierre"}, {T::Age, "75"}}), seq({{T::Age, "75"}, {T::Firstname, "Pierre"}}));
  EXPECT_EQ(swapped.total.tp, 1u);
  EXPECT_EQ(swapped.total.fp, 1u);
  EXPECT_EQ(swapped.total.fn, 1u);
}

TEST(EntityScores, LargeIdenticalPageIsPerfect) {
  PageTranscript big;
  std::size_t n = 0;
  for (std::uint64_t seed = 0; n < 13923; ++seed) {
    for (const auto& r : generate_synthetic_page(seed).records) {
      if (n == 13923) break;
      PersonRecord cut;
      for (const auto& [tag, text] : r.fields) {
        if (n == 13923) break;
        cut.fields[tag] = text;
        ++n;
      }
      cut.is_head = cut.has(T::SurnameHead);
      big.records.push_back(cut);
    }
  }
  const auto score = entity_scores(big, big);
  EXPECT_EQ(score.total.support(), 13923u);
  EXPECT_EQ(score.total.f1(), 1.0);
}

TEST(Classification, AllCorrect) {
  std::vector<std::pair<PageClass, PageClass>> pairs;
  for (int i = 0; i < 10; ++i) pairs.emplace_back(kAllPageClasses[i % 5], kAllPageClasses[i % 5]);
  const auto m = classification_report(pairs);
  for (PageClass c : kAllPageClasses) {
    EXPECT_EQ(m.metrics(c).precision, 1.0);
    EXPECT_EQ(m.metrics(c).recall, 1.0);
  }
  EXPECT_EQ(m.accuracy(), 1.0);
}

TEST(Classification, EmptyIsUndefined) {
  const auto m = classification_report({});
  EXPECT_EQ(m.total(), 0u);
  for (PageClass c : kAllPageClasses) {
    EXPECT_FALSE(m.metrics(c).precision_defined);
    EXPECT_FALSE(m.metrics(c).recall_defined);
  }
}

TEST(Classification, ReferenceMatrix) {
  using P = PageClass;
  ConfusionMatrix m;
  m.add(P::List, P::List, 145);
  m.add(P::Other, P::List, 2);
  m.add(P::Recap, P::Recap, 10);
  m.add(P::Other, P::Recap, 2);
  m.add(P::Front, P::Front, 14);
  m.add(P::Totals, P::Totals, 13);
  m.add(P::Other, P::Other, 5);
  m.add(P::Front, P::Other, 1);
  m.add(P::Recap, P::Other, 1);
  EXPECT_NEAR(m.metrics(P::List).precision, 145.0 / 147.0, 1e-9);
  EXPECT_EQ(m.metrics(P::List).recall, 1.0);
  EXPECT_NEAR(m.metrics(P::Recap).precision, 10.0 / 12.0, 1e-9);
  EXPECT_NEAR(m.metrics(P::Recap).recall, 10.0 / 11.0, 1e-9);
  EXPECT_NEAR(m.metrics(P::Other).precision, 5.0 / 7.0, 1e-9);
  EXPECT_NEAR(m.metrics(P::Other).recall, 5.0 / 9.0, 1e-9);
  EXPECT_EQ(m.total(), 193u);
}

TEST(Evaluate, MissingPredictionCountsAsDeletions) {
  const auto page = cftest::gendre_page();
  const auto eval = evaluate_page("p", page, nullptr);
  EXPECT_TRUE(eval.missing_prediction);
  EXPECT_EQ(eval.rates.char_edits, eval.rates.char_total);
  EXPECT_EQ(eval.entities.total.fn, 28u);
}

TEST(Evaluate, CorpusAgainstItself) {
  cftest::TempDir dir;
  for (std::uint64_t s = 0; s < 3; ++s) {
    const PageTranscript pages[] = {generate_synthetic_page(s)};
    save_fixture_file(dir / ("p" + std::to_string(s) + ".txt"), pages);
  }
  const auto report = evaluate_corpus(dir.path(), dir.path());
  EXPECT_EQ(report.rates.cer(), 0.0);
  EXPECT_EQ(report.entities.total.f1(), 1.0);
  EXPECT_EQ(report.household_accuracy(), 1.0);
  EXPECT_FALSE(format_report(report).empty());
  EXPECT_TRUE(report_json(report).is_object());
}

TEST(Evaluate, LabelPredictionsAreDecodedLeniently) {
  cftest::TempDir truth, pred;
  const PageTranscript pages[] = {cftest::gendre_page()};
  save_fixture_file(truth / "gendre.txt", pages);
  write_text_file_atomic(pred / "gendre.label", cftest::gendre_label());
  const auto report = evaluate_corpus(truth.path(), pred.path());
  EXPECT_EQ(report.rates.cer(), 0.0);
  EXPECT_EQ(report.missing_predictions, 0u);
}

TEST(Evaluate, NoMatchingPages) {
  cftest::TempDir truth, pred;
  const PageTranscript pages[] = {cftest::gendre_page()};
  save_fixture_file(truth / "a.txt", pages);
  save_fixture_file(pred / "b.txt", pages);
  try {
    evaluate_corpus(truth.path(), pred.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoMatchingPages);
  }
}

TEST(NoiseCalibration, CerTracksSubstitutionRate) {
  NoiseProfile noise;
  noise.char_substitution = 0.10;
  ErrorRates total;
  std::size_t value_chars = 0, all_chars = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const PageTranscript truth = generate_synthetic_page(s);
    const PageTranscript noisy = apply_noise(truth, noise, 1000 + s);
    total += error_rates(truth, noisy);
    const std::string text = plain_text(truth);
    all_chars += utf8::length(text);
    for (const auto& r : truth.records) {
      for (const auto& [tag, v] : r.fields) value_chars += utf8::length(v);
    }
  }
  // Separators are never substituted, so the expectation is p * value / total.
  const double expected = 0.10 * static_cast<double>(value_chars) / static_cast<double>(all_chars);
  EXPECT_NEAR(total.cer(), expected, 0.01);
}
