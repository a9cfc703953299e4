#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "censusflow/domain.hpp"

namespace censusflow {

// Distribution parameters for synthetic list pages.
struct SyntheticProfile {
  std::size_t min_rows = 25;
  std::size_t max_rows = 36;

  // Household sizes are 1 + Poisson(mean - 1) unless explicit weights are
  // given, in which case weights[i] is the relative frequency of size i+1.
  double household_size_mean = 4.0;
  std::vector<double> household_size_weights;

  // Probability that a non-head member carries a surname.
  double member_surname_presence = 1.0;
  // Per-tag presence probability for the non-surname fields.
  std::map<EntityTag, double> field_presence = default_field_presence();

  // Single pages only: probability that the page opens with the tail of a
  // household started on a previous page.
  double leading_fragment_probability = 0.0;

  static std::map<EntityTag, double> default_field_presence();
};

// Throws Error(InvalidProfile) describing the first problem found.
void validate_profile(const SyntheticProfile& profile);

PageTranscript generate_synthetic_page(std::uint64_t seed, const SyntheticProfile& profile = {});

// A register whose households run continuously across page boundaries.
struct SyntheticRegister {
  std::vector<PageTranscript> pages;
  // Ground truth, in reading order; every household is complete.
  std::vector<Household> households;
};

SyntheticRegister generate_synthetic_register(std::uint64_t seed, std::size_t page_count,
                                              const SyntheticProfile& profile = {});

}  // namespace censusflow
