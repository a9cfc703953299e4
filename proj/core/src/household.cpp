#include "censusflow/household.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

#include "censusflow/csv.hpp"
#include "censusflow/error.hpp"

namespace censusflow {

std::size_t HouseholdSet::record_count() const {
  std::size_t n = 0;
  for (const auto& h : households) n += h.members.size();
  return n;
}

std::vector<Household> group_page(const PageTranscript& page) {
  std::vector<Household> out;
  for (std::size_t row = 0; row < page.records.size(); ++row) {
    const PersonRecord& record = page.records[row];
    if (out.empty() || record.is_head) {
      out.emplace_back();
      out.back().complete = record.is_head;
    }
    out.back().members.push_back(record);
    out.back().positions.push_back({page.page_index, row});
  }
  if (!out.empty()) out.back().complete = false;
  return out;
}

HouseholdSet merge_register(const RegisterDocument& document, MergeOptions options) {
  HouseholdSet set;
  // Index into set.households of the household that may still continue.
  std::optional<std::size_t> open;

  for (const RegisterPage& page : document.pages) {
    if (page.page_class != PageClass::List) {
      if (!options.continue_across_gaps) open.reset();
      continue;
    }
    if (!page.transcript) throw Error(ErrorCode::MissingTranscript, "page " + page.page_id);
    set.source_pages.push_back({page.transcript->page_index, page.page_id});

    auto groups = group_page(*page.transcript);
    if (groups.empty()) continue;

    std::size_t first = 0;
    const bool leading_fragment = !groups.front().members.front().is_head;
    if (open) {
      Household& tail = set.households[*open];
      if (leading_fragment) {
        Household& fragment = groups.front();
        tail.members.insert(tail.members.end(), fragment.members.begin(), fragment.members.end());
        tail.positions.insert(tail.positions.end(), fragment.positions.begin(), fragment.positions.end());
        first = 1;
      }
      tail.complete = tail.members.front().is_head;
      open.reset();
      if (first == 1 && groups.size() == 1) {
        // The whole page continued the household; it may go on further.
        tail.complete = false;
        open = set.households.size() - 1;
        continue;
      }
    }
    for (std::size_t g = first; g < groups.size(); ++g) set.households.push_back(std::move(groups[g]));
    open = set.households.size() - 1;
  }
  if (open) set.households[*open].complete = set.households[*open].members.front().is_head;
  return set;
}

namespace {

std::set<RecordPosition> universe(const HouseholdSet& set) {
  std::set<RecordPosition> out;
  for (const auto& h : set.households) out.insert(h.positions.begin(), h.positions.end());
  return out;
}

}  // namespace

std::size_t matched_households(const HouseholdSet& predicted, const HouseholdSet& truth) {
  std::set<std::vector<RecordPosition>> predicted_sets;
  for (const auto& h : predicted.households) {
    std::vector<RecordPosition> members = h.positions;
    std::sort(members.begin(), members.end());
    predicted_sets.insert(std::move(members));
  }
  std::size_t matched = 0;
  for (const auto& h : truth.households) {
    std::vector<RecordPosition> members = h.positions;
    std::sort(members.begin(), members.end());
    if (predicted_sets.contains(members)) ++matched;
  }
  return matched;
}

double household_accuracy(const HouseholdSet& predicted, const HouseholdSet& truth) {
  if (predicted.record_count() != truth.record_count() || universe(predicted) != universe(truth))
    throw Error(ErrorCode::UniverseMismatch, std::to_string(predicted.record_count()) + " predicted records vs " +
                                                 std::to_string(truth.record_count()) + " truth records");
  if (truth.households.empty()) return 1.0;
  return static_cast<double>(matched_households(predicted, truth)) / static_cast<double>(truth.households.size());
}

void write_households_csv_header(std::ostream& out) {
  csv::Row header = {"register_id", "page_id", "row_index", "household_index", "complete", "is_head"};
  for (EntityTag tag : kAllTags) header.emplace_back(tag_key(tag));
  csv::write_row(out, header);
}

void write_households_csv(std::ostream& out, const std::string& register_id, const HouseholdSet& set,
                          std::size_t first_household_index) {
  std::map<std::size_t, std::string> page_ids;
  for (const auto& p : set.source_pages) page_ids[p.page_index] = p.page_id;

  for (std::size_t h = 0; h < set.households.size(); ++h) {
    const Household& household = set.households[h];
    for (std::size_t m = 0; m < household.members.size(); ++m) {
      const PersonRecord& person = household.members[m];
      const RecordPosition& pos = household.positions[m];
      auto id = page_ids.find(pos.page);
      csv::Row row = {register_id,
                      id == page_ids.end() ? std::to_string(pos.page) : id->second,
                      std::to_string(pos.row),
                      std::to_string(first_household_index + h),
                      household.complete ? "1" : "0",
                      person.is_head ? "1" : "0"};
      for (EntityTag tag : kAllTags) {
        const std::string* value = person.get(tag);
        row.push_back(value ? *value : std::string());
      }
      csv::write_row(out, row);
    }
  }
}

}  // namespace censusflow
