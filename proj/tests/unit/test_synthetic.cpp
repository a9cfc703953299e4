#include <gtest/gtest.h>

#include <censusflow/error.hpp>
#include <censusflow/household.hpp>
#include <censusflow/synthetic.hpp>

using namespace censusflow;

TEST(SyntheticPage, DeterministicAndValid) {
  const PageTranscript a = generate_synthetic_page(1);
  EXPECT_EQ(a, generate_synthetic_page(1));
  EXPECT_NE(a, generate_synthetic_page(2));
  EXPECT_GE(a.records.size(), 25u);
  EXPECT_LE(a.records.size(), 36u);
  for (const auto& r : a.records) EXPECT_TRUE(validate_record(r).empty());
  ASSERT_FALSE(a.records.empty());
  EXPECT_TRUE(a.records.front().is_head);
}

TEST(SyntheticPage, FixedRowCount) {
  SyntheticProfile profile;
  profile.min_rows = profile.max_rows = 30;
  for (std::uint64_t seed = 0; seed < 20; ++seed) EXPECT_EQ(generate_synthetic_page(seed, profile).records.size(), 30u);
}

TEST(SyntheticPage, HouseholdSizeMean) {
  // Household sizes are counted on registers, where no household is cut.
  SyntheticProfile profile;
  profile.household_size_mean = 4.0;
  std::size_t members = 0, households = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto reg = generate_synthetic_register(2 * 1000 + seed, 25, profile);
    for (const auto& h : reg.households) {
      members += h.members.size();
      ++households;
    }
  }
  ASSERT_GT(households, 1000u);
  EXPECT_NEAR(static_cast<double>(members) / static_cast<double>(households), 4.0, 0.2);
}

TEST(SyntheticPage, InvalidProfiles) {
  SyntheticProfile p;
  p.min_rows = 10;
  p.max_rows = 5;
  EXPECT_THROW(validate_profile(p), Error);
  SyntheticProfile q;
  q.household_size_mean = 0.5;
  EXPECT_THROW(validate_profile(q), Error);
  SyntheticProfile r;
  r.field_presence[EntityTag::Age] = 1.5;
  EXPECT_THROW(validate_profile(r), Error);
}

TEST(SyntheticRegister, HouseholdsCoverPagesInOrder) {
  const auto reg = generate_synthetic_register(5, 6);
  ASSERT_EQ(reg.pages.size(), 6u);
  std::size_t total = 0;
  for (const auto& p : reg.pages) total += p.records.size();
  std::size_t covered = 0;
  RecordPosition last{0, 0};
  bool first = true;
  for (const auto& h : reg.households) {
    EXPECT_TRUE(h.complete);
    ASSERT_EQ(h.members.size(), h.positions.size());
    EXPECT_TRUE(h.members.front().is_head);
    for (std::size_t i = 0; i < h.members.size(); ++i) {
      const auto& pos = h.positions[i];
      EXPECT_EQ(reg.pages[pos.page].records[pos.row], h.members[i]);
      if (!first) EXPECT_LT(last, pos);
      last = pos;
      first = false;
      ++covered;
    }
  }
  EXPECT_EQ(covered, total);
}
