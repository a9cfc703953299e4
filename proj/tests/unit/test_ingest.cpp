#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include <censusflow/error.hpp>
#include <censusflow/ingest.hpp>
#include <censusflow/metrics.hpp>

#include "test_support.hpp"

using namespace censusflow;

namespace {

ColumnMapping basic_mapping() {
  return ColumnMapping::parse("annee=YEAR\ncommune=COMMUNE\ncote=ARCHIVAL_ID\nchemin=IMAGE_PATH\n");
}

Gazetteer allier() {
  return Gazetteer::parse(
      "code,canonical_name,department,variants\n"
      "03190,Moulins,03,Moulins-sur-Allier\n"
      "03197,Neuilly-le-Réal,03,\n"
      "03310,Vichy,03,\n"
      "58001,Moulins-Engilbert,58,\n");
}

BuildResult build(std::string_view csv, const BuildOptions& options = {}) {
  return build_registry(import_csv(csv, basic_mapping()).rows, allier(), options);
}

}  // namespace

TEST(Mapping, ParseAndValidate) {
  const auto m = basic_mapping();
  EXPECT_NO_THROW(m.validate());
  EXPECT_EQ(m.column_for(ColumnRole::Year), "annee");

  const auto missing = ColumnMapping::parse("annee=YEAR\ncommune=COMMUNE\n");
  try {
    missing.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingColumn);
  }
  EXPECT_THROW(ColumnMapping::parse("a=YEAR\nb=YEAR\nc=COMMUNE\nd=IMAGE_PATH\n").validate(), Error);
  EXPECT_THROW(ColumnMapping::parse("a=COLOUR\n"), Error);
}

TEST(Import, ThreeRows) {
  const auto r = import_csv("annee,commune,chemin\n1901,Moulins,a.jpg\n1906,Vichy,b.jpg\n1911,Vichy,c.jpg\n",
                            ColumnMapping::parse("annee=YEAR\ncommune=COMMUNE\nchemin=IMAGE_PATH\n"));
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_EQ(r.rows[0].line, 2u);
  EXPECT_EQ(r.rows[0].year, 1901);
  EXPECT_EQ(r.rows[2].image_path, "c.jpg");
}

TEST(Import, UnparseableYearIsFlagged) {
  const auto r = import_csv("annee,commune,cote,chemin\n183?,Moulins,6M1,a.jpg\n", basic_mapping());
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_TRUE(r.rows[0].flagged(RowFlag::UnparseableYear));
  EXPECT_FALSE(r.rows[0].year.has_value());
  EXPECT_FALSE(r.diagnostics.empty());
}

TEST(Import, Errors) {
  try {
    import_csv("", basic_mapping());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyFile);
  }
  try {
    import_csv("annee,commune\n1901,X\n", basic_mapping());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingColumn);
  }
}

TEST(Normalize, FoldsAndCollapses) {
  EXPECT_EQ(normalize_name("Neuilly-le-Réal"), "neuilly le real");
  EXPECT_EQ(normalize_name("  SAINT-ÉTIENNE  d'Œuvre "), "saint etienne d oeuvre");
  EXPECT_EQ(normalize_name("Montluçon"), "montlucon");
}

TEST(Similarity, Values) {
  EXPECT_NEAR(name_similarity("Moulin", "Moulins"), 6.0 / 7.0, 1e-9);
  EXPECT_EQ(name_similarity("Neuilly-le-Réal", "NEUILLY LE REAL"), 1.0);
  EXPECT_EQ(normalized_similarity("", ""), 1.0);
  EXPECT_EQ(normalized_similarity("abc", ""), 0.0);
}

// Oracle: similarity is 1 - d / max(len) for d from the exhaustive edit graph.
TEST(Similarity, MatchesEditGraphOracle) {
  const cftest::EditGraphOracle oracle("ab", 4);
  const auto& s = oracle.strings();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto d = oracle.distances_from(i);
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double longest = static_cast<double>(std::max(s[i].size(), s[j].size()));
      const double expected = longest == 0 ? 1.0 : 1.0 - d[j] / longest;
      ASSERT_NEAR(normalized_similarity(s[i], s[j]), expected, 1e-12);
    }
  }
}

TEST(Match, Statuses) {
  const auto g = allier();
  const auto exact = match_commune("Neuilly-le-Réal", g);
  EXPECT_EQ(exact.status, MatchStatus::Matched);
  ASSERT_TRUE(exact.accepted);
  EXPECT_EQ(exact.accepted->code, "03197");
  EXPECT_EQ(exact.candidates.front().score, 1.0);

  const auto moulin = match_commune("Moulin", g);
  EXPECT_EQ(moulin.status, MatchStatus::Ambiguous);
  ASSERT_FALSE(moulin.candidates.empty());
  EXPECT_NEAR(moulin.candidates.front().score, 6.0 / 7.0, 1e-9);
  EXPECT_EQ(moulin.candidates.front().entry.code, "03190");

  EXPECT_EQ(match_commune("Xyzabc", g).status, MatchStatus::Unmatched);
  EXPECT_TRUE(match_commune("Xyzabc", g).candidates.empty());

  const auto variant = match_commune("Moulins sur Allier", g);
  EXPECT_EQ(variant.status, MatchStatus::Matched);
  EXPECT_EQ(variant.candidates.front().matched_name, "Moulins-sur-Allier");

  EXPECT_THROW(match_commune("x", Gazetteer{}), Error);
}

TEST(Match, DepartmentHintBreaksTies) {
  const auto g = Gazetteer::parse(
      "code,canonical_name,department,variants\n"
      "03001,Saint-Pierre,03,\n"
      "58001,Saint-Pierre,58,\n");
  EXPECT_EQ(match_commune("Saint Pierre", g).status, MatchStatus::Ambiguous);
  const auto hinted = match_commune("Saint Pierre", g, std::string("58"));
  EXPECT_EQ(hinted.status, MatchStatus::Matched);
  EXPECT_EQ(hinted.accepted->code, "58001");
  EXPECT_EQ(hinted.candidates.front().entry.code, "58001");
}

TEST(Gazetteer, Invalid) {
  EXPECT_THROW(Gazetteer::parse("code,canonical_name,department\n1,,03\n"), Error);
  EXPECT_THROW(Gazetteer::parse("code,canonical_name,department\n1,A,03\n1,B,03\n"), Error);
  EXPECT_THROW(Gazetteer::parse("code,name\n1,A\n"), Error);
}

TEST(NaturalOrder, DigitRuns) {
  EXPECT_TRUE(natural_less("img_2.jpg", "img_10.jpg"));
  EXPECT_FALSE(natural_less("img_10.jpg", "img_2.jpg"));
  EXPECT_TRUE(natural_less("a", "b"));
  EXPECT_FALSE(natural_less("a1", "a1"));
}

TEST(Registry, NumericAwareSequence) {
  const auto r = build("annee,commune,cote,chemin\n1901,Vichy,6M1,img_10.jpg\n1901,Vichy,6M1,img_2.jpg\n");
  ASSERT_EQ(r.registry.registers.size(), 1u);
  const auto& reg = r.registry.registers.front();
  EXPECT_EQ(reg.metadata.register_id, "1901-03310-6M1");
  ASSERT_EQ(reg.images.size(), 2u);
  EXPECT_EQ(reg.images[0].iiif_identifier, "img_2.jpg");
  EXPECT_EQ(reg.images[0].sequence_index, 0u);
  EXPECT_EQ(reg.images[1].iiif_identifier, "img_10.jpg");
  EXPECT_EQ(reg.metadata.source_rows, (std::vector<std::size_t>{3, 2}));
}

TEST(Registry, ExceptionReasons) {
  const auto r = build(
      "annee,commune,cote,chemin\n"
      "1916,Vichy,6M1,a.jpg\n"
      "18x1,Vichy,6M1,b.jpg\n"
      "1901,Vichy,6M1,\n"
      "1901,,6M1,c.jpg\n"
      "1901,Xyzabc,6M1,d.jpg\n"
      "1901,Moulin,6M1,e.jpg\n"
      "1901,Vichy,6M1,f.jpg\n"
      "1901,Vichy,6M1,f.jpg\n"
      "1901,Vichy,6M1,g.jpg\n"
      "1906,Vichy,6M1,g.jpg\n");
  std::vector<ExceptionReason> reasons;
  for (const auto& e : r.exceptions) reasons.push_back(e.reason);
  using R = ExceptionReason;
  EXPECT_EQ(reasons, (std::vector<R>{R::InvalidCensusYear, R::UnparseableYear, R::MissingImagePath, R::MissingCommune,
                                     R::UnmatchedCommune, R::AmbiguousCommune, R::DuplicateRow,
                                     R::ConflictingDuplicate, R::ConflictingDuplicate}));
  EXPECT_EQ(r.registry.image_count(), 1u);
  ASSERT_EQ(r.worklist.size(), 1u);
  EXPECT_EQ(r.worklist[0].name, "Moulin");
  EXPECT_EQ(r.worklist[0].lines, (std::vector<std::size_t>{7}));
}

TEST(Registry, Resolutions) {
  BuildOptions options;
  options.resolutions = {{"Moulin", "03190"}, {"Nowhere", "99999"}};
  const auto r = build("annee,commune,cote,chemin\n1901,Moulin,6M1,a.jpg\n1901,Nowhere,6M1,b.jpg\n", options);
  EXPECT_EQ(r.registry.image_count(), 1u);
  EXPECT_EQ(r.registry.registers[0].metadata.commune.code, "03190");
  ASSERT_EQ(r.exceptions.size(), 1u);
  EXPECT_EQ(r.exceptions[0].reason, ExceptionReason::UnknownResolutionCode);
}

// Property: every row lands in exactly one of registry and exceptions.
TEST(Registry, ConservationOnRandomRows) {
  const char* communes[] = {"Vichy", "Moulins", "Moulin", "Xyz", "", "Neuilly le Real", "VICHY"};
  const char* years[] = {"1901", "1916", "19x1", "1836", "1872", "1871", ""};
  Rng rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    std::ostringstream csv;
    csv << "annee,commune,cote,chemin\n";
    const auto n = 1 + rng.below(40);
    for (std::uint64_t i = 0; i < n; ++i) {
      csv << years[rng.below(std::size(years))] << ',' << communes[rng.below(std::size(communes))] << ",6M"
          << rng.below(3) << ",img_" << rng.below(15) << ".jpg\n";
    }
    const auto imported = import_csv(csv.str(), basic_mapping());
    const auto r = build_registry(imported.rows, allier());
    std::multiset<std::size_t> lines;
    for (const auto& reg : r.registry.registers) lines.insert(reg.metadata.source_rows.begin(), reg.metadata.source_rows.end());
    for (const auto& e : r.exceptions) lines.insert(e.row.line);
    std::multiset<std::size_t> expected;
    for (const auto& row : imported.rows) expected.insert(row.line);
    ASSERT_EQ(lines, expected) << csv.str();
  }
}

TEST(Registry, DeterministicJsonl) {
  const std::string csv =
      "annee,commune,cote,chemin\n1901,Vichy,6M1,b.jpg\n1901,Moulins,6M2,a.jpg\n1906,Vichy,,c.jpg\n";
  const auto a = registry_to_jsonl(build(csv).registry);
  const auto b = registry_to_jsonl(build(csv).registry);
  EXPECT_EQ(a, b);
  const Registry back = registry_from_jsonl(a);
  EXPECT_EQ(registry_to_jsonl(back), a);
  ASSERT_NE(back.find("1906-03310"), nullptr);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 3);
}

TEST(Registry, ExceptionAndWorklistCsv) {
  const auto r = build("annee,commune,cote,chemin\n1916,Vichy,6M1,a.jpg\n1901,Moulin,6M1,e.jpg\n");
  std::ostringstream ex, wl;
  write_exceptions_csv(ex, r.exceptions);
  write_worklist_csv(wl, r.worklist);
  EXPECT_NE(ex.str().find("InvalidCensusYear"), std::string::npos);
  EXPECT_NE(wl.str().find("03190"), std::string::npos);
}
