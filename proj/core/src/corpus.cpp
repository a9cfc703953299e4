#include "censusflow/corpus.hpp"

#include <array>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "censusflow/csv.hpp"
#include "censusflow/manifest.hpp"
#include "censusflow/rng.hpp"
#include "censusflow/workers.hpp"

namespace censusflow {

namespace {

struct Commune {
  std::string_view code;
  std::string_view name;
  std::string_view as_written;  // spelling used in the metadata CSV
  std::string_view variants;
};

constexpr std::array<Commune, 8> kCommunes = {{
    {"03190", "Moulins", "MOULINS", "Moulins-sur-Allier"},
    {"03310", "Vichy", "Vichy", ""},
    {"03095", "Cusset", "CUSSET", ""},
    {"03118", "Gannat", "Gannat", ""},
    {"03185", "Montluçon", "Montlucon", "Mont-Luçon"},
    {"03082", "Commentry", "Commentry", ""},
    {"03321", "Yzeure", "Iseure", "Iseure"},
    {"03138", "Lapalisse", "LAPALISSE", "La Palice"},
}};

std::string padded(std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", n);
  return buf;
}

void shift_pages(SyntheticRegister& content, std::size_t by) {
  for (auto& page : content.pages) page.page_index += by;
  for (auto& h : content.households) {
    for (auto& p : h.positions) p.page += by;
  }
}

}  // namespace

std::size_t GeneratedCorpus::image_count() const {
  std::size_t n = 0;
  for (const auto& r : registers) n += r.task_ids.size();
  return n;
}

GeneratedCorpus generate_corpus(const std::filesystem::path& root, const CorpusOptions& options, bool dry_run) {
  validate_profile(options.profile);
  GeneratedCorpus corpus;
  corpus.root = root;
  const auto iiif_root = std::filesystem::absolute(root / "iiif");
  corpus.endpoint_url = "file://" + iiif_root.generic_string();

  std::ostringstream metadata;
  csv::write_row(metadata, {"Année", "Commune", "Cote", "Fichier", "Notes"});
  std::ostringstream classes;
  csv::write_row(classes, {"task_id", "class"});

  const auto years = census_years();
  for (std::size_t r = 0; r < options.registers; ++r) {
    const Commune& commune = kCommunes[r % kCommunes.size()];
    CorpusRegister reg;
    reg.year = years[(r * 3 + 4) % years.size()];
    reg.commune_code = std::string(commune.code);
    reg.archival_id = "6M" + std::to_string(r + 1);
    reg.register_id = std::to_string(reg.year) + "-" + reg.commune_code + "-" + reg.archival_id;
    reg.content = generate_synthetic_register(mix_seed(options.seed, r), options.pages_per_register, options.profile);
    const std::size_t offset = options.covers ? 1 : 0;
    shift_pages(reg.content, offset);

    std::vector<SyntheticImage> images;
    if (options.covers) images.push_back({PageClass::Front, options.width, options.height, {}});
    for (const auto& page : reg.content.pages) images.push_back({PageClass::List, options.width, options.height, page});
    if (options.covers) images.push_back({PageClass::Totals, options.width, options.height, {}});

    for (std::size_t seq = 0; seq < images.size(); ++seq) {
      const std::string identifier =
          reg.commune_code + "/" + std::to_string(reg.year) + "/" + reg.archival_id + "/p" + padded(seq + 1) + ".jpg";
      const std::string task_id = make_task_id(ImageRef{reg.register_id, identifier, seq, false, {}, {}});
      reg.task_ids.push_back(task_id);
      reg.classes.push_back(images[seq].page_class);
      images[seq].transcript.page_id = task_id;
      csv::write_row(metadata, {std::to_string(reg.year), std::string(commune.as_written), reg.archival_id, identifier,
                                seq == 0 ? "première vue" : ""});
      csv::write_row(classes, {task_id, std::string(page_class_name(images[seq].page_class))});
      if (dry_run) continue;

      const auto dir = iiif_root / identifier;
      const nlohmann::json info{{"@context", "http://iiif.io/api/image/3/context.json"},
                                {"id", identifier},
                                {"type", "ImageService3"},
                                {"protocol", "http://iiif.io/api/image"},
                                {"profile", "level0"},
                                {"width", images[seq].width},
                                {"height", images[seq].height}};
      write_text_file_atomic(dir / "info.json", info.dump(2) + "\n");
      const std::string bytes = encode_synthetic_image(images[seq]);
      write_text_file_atomic(dir / "full" / "full" / "0" / "default.jpg", bytes);
      write_text_file_atomic(dir / "full" / "max" / "0" / "default.jpg", bytes);
      if (images[seq].page_class == PageClass::List) {
        const PageTranscript pages[] = {images[seq].transcript};
        save_fixture_file(root / "truth" / "pages" / (task_id + ".txt"), pages);
      }
    }
    for (std::size_t p = 0; p < reg.content.pages.size(); ++p) reg.content.pages[p].page_id = reg.task_ids[p + offset];
    corpus.registers.push_back(std::move(reg));
  }

  if (!dry_run) {
    write_text_file_atomic(root / "metadata.csv", metadata.str());
    write_text_file_atomic(root / "mapping.txt",
                           "# column=ROLE\nAnnée=YEAR\nCommune=COMMUNE\nCote=ARCHIVAL_ID\nFichier=IMAGE_PATH\nNotes=IGNORE\n");
    std::ostringstream gazetteer;
    csv::write_row(gazetteer, {"code", "canonical_name", "department", "variants"});
    for (const auto& c : kCommunes)
      csv::write_row(gazetteer, {std::string(c.code), std::string(c.name), "03", std::string(c.variants)});
    write_text_file_atomic(root / "gazetteer.csv", gazetteer.str());
    write_text_file_atomic(root / "truth" / "classes.csv", classes.str());
  }
  return corpus;
}

}  // namespace censusflow
