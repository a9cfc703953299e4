#include "censusflow/synthetic.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <string_view>

#include "censusflow/error.hpp"
#include "censusflow/rng.hpp"

namespace censusflow {

namespace {

constexpr std::array<std::string_view, 40> kSurnames = {
    "Gendre",  "Paraud",   "Martin",   "Joyoz",    "Bernard", "Dubois",   "Thomas",  "Robert",
    "Richard", "Petit",    "Durand",   "Leroy",    "Moreau",  "Simon",    "Laurent", "Lefebvre",
    "Michel",  "Bertrand", "Roux",     "Vincent",  "Fournier", "Morel",   "Girard",  "André",
    "Lefèvre", "Mercier",  "Dupont",   "Lambert",  "Bonnet",  "François", "Legrand", "Garnier",
    "Faure",   "Rousseau", "Blanc",    "Guérin",   "Perrin",  "Chevalier", "Aubert", "Dumont"};

constexpr std::array<std::string_view, 24> kFirstnames = {
    "Pierre",    "Marie",     "Suzanne", "Jean",      "Louis",   "Joseph",   "François", "Anne",
    "Jeanne",    "Marguerite", "Antoine", "Claude",   "Catherine", "Gilbert", "Françoise", "Jacques",
    "Étienne",   "Louise",    "Philippe", "Benoît",   "Madeleine", "Gabriel", "Jean Baptiste",
    "Marie Louise"};

constexpr std::array<std::string_view, 16> kOccupations = {
    "cultivateur", "métayer",   "néant",       "journalier", "domestique", "tisserand",
    "maréchal",    "sabotier",  "propriétaire", "couturière", "menuisier", "meunier",
    "instituteur", "cordonnier", "aubergiste", "idem"};

constexpr std::array<std::string_view, 11> kMemberLinks = {
    "épouse", "fils", "fille", "mère", "père", "domestique", "beau-frère", "petit-fils",
    "nièce",  "pensionnaire", "idem"};

constexpr std::array<std::string_view, 4> kEmployers = {"patron", "néant", "chez son père", "idem"};
constexpr std::array<std::string_view, 4> kNationalities = {"française", "idem", "française", "italienne"};
constexpr std::array<std::string_view, 7> kCivilStatus = {"marié", "mariée", "veuf", "veuve",
                                                          "célibataire", "garçon", "fille"};
constexpr std::array<std::string_view, 8> kPlaces = {"Moulins",  "Neuilly-le-Réal", "idem",   "Souvigny",
                                                     "Yzeure",   "Bessay",          "Chapeau", "Allier"};
constexpr std::array<std::string_view, 4> kObservations = {"absent", "militaire", "en nourrice",
                                                           "sourd-muet"};

template <std::size_t N>
std::string pick(Rng& rng, const std::array<std::string_view, N>& pool) {
  return std::string(pool[rng.below(N)]);
}

class Generator {
 public:
  Generator(std::uint64_t seed, const SyntheticProfile& profile) : rng_(mix_seed(seed, 0x5eed)), profile_(profile) {
    if (!profile_.household_size_weights.empty()) {
      cumulative_.resize(profile_.household_size_weights.size());
      std::partial_sum(profile_.household_size_weights.begin(), profile_.household_size_weights.end(),
                       cumulative_.begin());
    }
  }

  std::size_t rows() {
    return static_cast<std::size_t>(
        rng_.between(static_cast<std::int64_t>(profile_.min_rows), static_cast<std::int64_t>(profile_.max_rows)));
  }

  std::size_t household_size() {
    if (cumulative_.empty()) return 1 + rng_.poisson(profile_.household_size_mean - 1.0);
    const double u = rng_.uniform() * cumulative_.back();
    for (std::size_t i = 0; i < cumulative_.size(); ++i) {
      if (u < cumulative_[i]) return i + 1;
    }
    return cumulative_.size();
  }

  bool bernoulli(double p) { return rng_.bernoulli(p); }

  PersonRecord person(bool head) {
    PersonRecord r;
    if (head) {
      r.fields[EntityTag::SurnameHead] = pick(rng_, kSurnames);
    } else if (rng_.bernoulli(profile_.member_surname_presence)) {
      r.fields[EntityTag::Surname] = pick(rng_, kSurnames);
    }
    for (const auto& [tag, p] : profile_.field_presence) {
      if (is_surname(tag) || !rng_.bernoulli(p)) continue;
      r.fields[tag] = value_for(tag, head);
    }
    // Every generated row carries at least one field.
    if (r.fields.empty()) r.fields[EntityTag::Firstname] = pick(rng_, kFirstnames);
    r.is_head = head;
    return r;
  }

 private:
  std::string value_for(EntityTag tag, bool head) {
    switch (tag) {
      case EntityTag::Firstname: return pick(rng_, kFirstnames);
      case EntityTag::Occupation: return pick(rng_, kOccupations);
      case EntityTag::Link: return head ? std::string("chef") : pick(rng_, kMemberLinks);
      case EntityTag::Employer: return pick(rng_, kEmployers);
      case EntityTag::Age: return std::to_string(rng_.between(0, 92));
      case EntityTag::Nationality: return pick(rng_, kNationalities);
      case EntityTag::BirthDate: return std::to_string(rng_.between(1820, 1935));
      case EntityTag::CivilStatus: return pick(rng_, kCivilStatus);
      case EntityTag::PlaceOfBirth: return pick(rng_, kPlaces);
      case EntityTag::Observation: return pick(rng_, kObservations);
      case EntityTag::SurnameHead:
      case EntityTag::Surname: return pick(rng_, kSurnames);
    }
    return "?";
  }

  Rng rng_;
  const SyntheticProfile& profile_;
  std::vector<double> cumulative_;
};

std::string page_id_for(std::size_t index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return "p" + digits;
}

}  // namespace

std::map<EntityTag, double> SyntheticProfile::default_field_presence() {
  return {
      {EntityTag::Firstname, 0.97},  {EntityTag::Occupation, 0.80}, {EntityTag::Link, 0.85},
      {EntityTag::Employer, 0.30},   {EntityTag::Age, 0.90},        {EntityTag::Nationality, 0.60},
      {EntityTag::BirthDate, 0.30},  {EntityTag::CivilStatus, 0.40}, {EntityTag::PlaceOfBirth, 0.40},
      {EntityTag::Observation, 0.02},
  };
}

void validate_profile(const SyntheticProfile& profile) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidProfile, what); };
  auto probability = [](double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; };

  if (profile.max_rows == 0 || profile.min_rows > profile.max_rows)
    fail("row range [" + std::to_string(profile.min_rows) + ", " + std::to_string(profile.max_rows) + "] is empty");
  if (profile.household_size_weights.empty()) {
    if (!std::isfinite(profile.household_size_mean) || profile.household_size_mean < 1.0)
      fail("household size mean must be a finite value >= 1");
  } else {
    double total = 0.0;
    for (double w : profile.household_size_weights) {
      if (!std::isfinite(w) || w < 0.0) fail("household size weights must be finite and non-negative");
      total += w;
    }
    if (!(total > 0.0)) fail("household size weights sum to zero");
  }
  if (!probability(profile.member_surname_presence)) fail("member surname presence is not a probability");
  if (!probability(profile.leading_fragment_probability)) fail("leading fragment probability is not a probability");
  for (const auto& [tag, p] : profile.field_presence) {
    if (!probability(p)) fail("presence of " + std::string(tag_name(tag)) + " is not a probability");
  }
}

PageTranscript generate_synthetic_page(std::uint64_t seed, const SyntheticProfile& profile) {
  validate_profile(profile);
  Generator gen(seed, profile);
  PageTranscript page;
  page.page_id = page_id_for(0);
  page.page_index = 0;

  const std::size_t rows = gen.rows();
  std::size_t remaining = 0;
  if (gen.bernoulli(profile.leading_fragment_probability)) remaining = gen.household_size();
  for (std::size_t r = 0; r < rows; ++r) {
    bool head = false;
    if (remaining == 0) {
      remaining = gen.household_size();
      head = true;
    }
    page.records.push_back(gen.person(head));
    --remaining;
  }
  return page;
}

SyntheticRegister generate_synthetic_register(std::uint64_t seed, std::size_t page_count,
                                              const SyntheticProfile& profile) {
  validate_profile(profile);
  Generator gen(seed, profile);
  SyntheticRegister out;
  std::size_t remaining = 0;
  for (std::size_t p = 0; p < page_count; ++p) {
    PageTranscript page;
    page.page_id = page_id_for(p);
    page.page_index = p;
    const std::size_t rows = gen.rows();
    for (std::size_t r = 0; r < rows; ++r) {
      const bool head = remaining == 0;
      if (head) {
        remaining = gen.household_size();
        out.households.emplace_back();
      }
      PersonRecord person = gen.person(head);
      out.households.back().members.push_back(person);
      out.households.back().positions.push_back({p, r});
      page.records.push_back(std::move(person));
      --remaining;
    }
    out.pages.push_back(std::move(page));
  }
  return out;
}

}  // namespace censusflow
