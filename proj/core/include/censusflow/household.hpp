#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "censusflow/domain.hpp"

namespace censusflow {

struct SourcePage {
  std::size_t page_index = 0;
  std::string page_id;

  friend bool operator==(const SourcePage&, const SourcePage&) = default;
};

struct HouseholdSet {
  std::vector<Household> households;  // reading order
  std::vector<SourcePage> source_pages;

  std::size_t record_count() const;
};

// Splits a page before every head. Records ahead of the first head form a
// fragment household (complete=false, it may continue the previous page);
// the last household is also incomplete since it may continue on the next.
std::vector<Household> group_page(const PageTranscript& page);

struct MergeOptions {
  // When false, a non-LIST page closes any household open across it.
  bool continue_across_gaps = false;
};

// Folds group_page over the LIST pages of a register in reading order,
// joining the trailing household of one page with the head-less fragment
// opening the next. A household is complete once both ends are known: it
// starts with a head and was closed by a later head or the end of the
// register. A household cut by a non-LIST page stays incomplete, as does a
// head-less fragment with nothing to join. Throws Error(MissingTranscript) for a LIST
// page without a transcript.
HouseholdSet merge_register(const RegisterDocument& document, MergeOptions options = {});

// Fraction of truth households whose member positions exactly equal those of
// some predicted household. Throws Error(UniverseMismatch) when the two sets
// do not cover the same positions. An empty truth scores 1.
double household_accuracy(const HouseholdSet& predicted, const HouseholdSet& truth);

// Matched-household count used by household_accuracy.
std::size_t matched_households(const HouseholdSet& predicted, const HouseholdSet& truth);

// CSV, one line per person:
// register_id,page_id,row_index,household_index,complete,is_head,<one column per tag>
void write_households_csv_header(std::ostream& out);
void write_households_csv(std::ostream& out, const std::string& register_id, const HouseholdSet& set,
                          std::size_t first_household_index = 0);

}  // namespace censusflow
