// One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <censusflow/error.hpp>
#include <censusflow/household.hpp>
#include <censusflow/ingest.hpp>
#include <censusflow/label_codec.hpp>
#include <censusflow/metrics.hpp>
#include <censusflow/pipeline.hpp>
#include <censusflow/rng.hpp>
#include <censusflow/simulate.hpp>
#include <censusflow/synthetic.hpp>

#include "corpus_support.hpp"

using namespace censusflow;
namespace fs = std::filesystem;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool condition, const std::string& what) {
    if (!condition) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int failures = 0;

void criterion(int n, const std::string& title, double budget_s, const std::function<void(Check&)>& body) {
  Check check;
  const auto start = std::chrono::steady_clock::now();
  try {
    body(check);
  } catch (const std::exception& e) {
    check.expect(false, std::string("exception: ") + e.what());
  }
  const double took = seconds_since(start);
  if (budget_s > 0.0) check.expect(took < budget_s, "took " + std::to_string(took) + " s");
  std::printf("%s criterion %d: %s (%.2f s)%s%s\n", check.ok ? "PASS" : "FAIL", n, title.c_str(), took,
              check.detail.empty() ? "" : " -- ", check.detail.c_str());
  std::fflush(stdout);
  if (!check.ok) ++failures;
}

std::vector<std::vector<RecordPosition>> positions(const HouseholdSet& set) {
  std::vector<std::vector<RecordPosition>> out;
  for (const auto& h : set.households) out.push_back(h.positions);
  return out;
}

std::vector<std::vector<RecordPosition>> concat_and_split(const std::vector<PageTranscript>& pages) {
  std::vector<std::vector<RecordPosition>> out;
  for (const auto& p : pages) {
    for (std::size_t r = 0; r < p.records.size(); ++r) {
      if (out.empty() || p.records[r].is_head) out.emplace_back();
      out.back().push_back({p.page_index, r});
    }
  }
  return out;
}

struct PipelineRun {
  std::vector<TaskManifest> tasks;
  std::string snapshot;
};

std::string terminal_snapshot(const Workspace& ws) {
  std::ostringstream out;
  for (const auto& m : ws.load_all()) {
    out << m.task_id << ' ' << to_string(m.state);
    if (m.failure) out << ' ' << m.failure->reason;
    out << '\n';
  }
  for (const auto& [key, payload] : load_store(ws.store_path())) out << key << ' ' << payload.dump() << '\n';
  write_households_export(out, export_households(ws));
  return out.str();
}

PipelineRun run_pipeline(cftest::CorpusBed& bed, const fs::path& root, Worker& worker, SchedulerAdapter& scheduler,
                         std::optional<std::size_t> interrupt_after = std::nullopt) {
  Workspace ws(root);
  plan_batch(ws, bed.registry);
  auto config = cftest::quiet_run(bed.endpoint, 16);
  config.interrupt_after = interrupt_after;
  FileSink sink(ws.store_path());
  try {
    run_batch(ws, config, worker, scheduler, sink);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Interrupted) throw;
  }
  return {ws.load_all(), terminal_snapshot(ws)};
}

// Transport that counts the calls it forwards.
class CountingTransport : public Transport {
 public:
  TransportResponse get(const std::string& url) override {
    ++calls;
    return inner.get(url);
  }
  FileTransport inner;
  std::atomic<std::size_t> calls{0};
};

}  // namespace

int main() {
  criterion(1, "reference label encodes exactly and decodes to households Gendre and Martin", 1.0, [](Check& c) {
    const auto page = cftest::gendre_page();
    const auto label = encode(page);
    c.expect(label.text == cftest::gendre_label(), "encoded label differs from the reference");
    const auto decoded = decode_strict(label.text);
    const auto households = group_page(decoded);
    c.expect(households.size() == 2, "expected 2 households, got " + std::to_string(households.size()));
    if (households.size() == 2) {
      const auto* first = households[0].members[0].get(EntityTag::SurnameHead);
      const auto* second = households[1].members[0].get(EntityTag::SurnameHead);
      c.expect(first && *first == "Gendre", "first head");
      c.expect(second && *second == "Martin", "second head");
    }
  });

  criterion(2, "round trip on 1000 pages and total lenient decoding of 10000 random inputs", 30.0, [](Check& c) {
    std::size_t mismatches = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
      const auto page = generate_synthetic_page(seed);
      const auto back = decode_strict(encode(page).text);
      if (back.records != page.records) ++mismatches;
    }
    c.expect(mismatches == 0, std::to_string(mismatches) + " pages did not round-trip");

    Rng rng(2024);
    std::size_t threw = 0;
    for (int i = 0; i < 10000; ++i) {
      std::string input(rng.below(200), '\0');
      for (auto& ch : input) {
        // Bias towards tag syntax so the decoder's repair paths are reached.
        const auto pick = rng.below(8);
        static constexpr char kSyntax[] = "<>-shfolean \n";
        ch = pick < 3 ? kSyntax[rng.below(sizeof(kSyntax) - 1)] : static_cast<char>(rng.below(256));
      }
      try {
        const auto report = decode_lenient(input);
        for (const auto& r : report.transcript.records) {
          for (const auto& [tag, value] : r.fields) {
            if (value.empty()) ++threw;
          }
        }
      } catch (...) {
        ++threw;
      }
    }
    c.expect(threw == 0, std::to_string(threw) + " lenient decodes threw or kept empty values");
  });

  criterion(3, "Levenshtein equals the edit-graph oracle on all strings up to length 8 over {a,b,c}", 0.0,
            [](Check& c) {
              const cftest::EditGraphOracle oracle("abc", 8);
              const auto& strings = oracle.strings();
              c.expect(strings.size() == 9841, "expected 9841 strings, got " + std::to_string(strings.size()));
              std::size_t bad = 0;
              for (std::size_t i = 0; i < strings.size(); ++i) {
                const auto dist = oracle.distances_from(i);
                for (std::size_t j = i; j < strings.size(); ++j) {
                  if (char_distance(strings[i], strings[j]) != dist[j]) ++bad;
                }
              }
              c.expect(bad == 0, std::to_string(bad) + " pairs disagree");
              PageTranscript chef, chez;
              chef.records.push_back(PersonRecord::of({{EntityTag::SurnameHead, "chef"}}));
              chez.records.push_back(PersonRecord::of({{EntityTag::SurnameHead, "chez"}}));
              c.expect(std::abs(error_rates(chef, chez).cer() - 0.25) < 1e-12, "cer(chef, chez) != 0.25");
            });

  criterion(4, "mock recognizer at 10% character noise gives corpus CER in [0.08, 0.12] over 60 pages", 60.0,
            [](Check& c) {
              CorpusOptions options;
              options.registers = 6;
              options.pages_per_register = 10;
              options.seed = 404;
              cftest::CorpusBed bed(options);
              NoiseProfile noise;
              noise.char_substitution = 0.10;
              MockWorker worker(17, noise);
              FileTransport network;
              LocalExecutor scheduler(network, 2, 4);
              const auto root = bed.workspace_root();
              run_pipeline(bed, root, worker, scheduler);
              Workspace ws(root);
              const auto store = load_store(ws.store_path());

              std::vector<std::pair<std::string, PageTranscript>> truth;
              std::map<std::string, PageTranscript> pred;
              for (const auto& reg : bed.corpus.registers) {
                for (std::size_t i = 0; i < reg.task_ids.size(); ++i) {
                  truth.emplace_back(reg.task_ids[i], reg.content.pages[i]);
                  const auto it = store.find(reg.task_ids[i]);
                  if (it == store.end()) continue;
                  const auto payload = payload_from_json(it->second);
                  if (payload.transcript) pred.emplace(reg.task_ids[i], *payload.transcript);
                }
              }
              c.expect(truth.size() >= 50, "only " + std::to_string(truth.size()) + " pages");
              c.expect(pred.size() == truth.size(), "missing predictions");
              const auto report = evaluate_pages(truth, pred);
              const double cer = report.rates.cer();
              char buf[64];
              std::snprintf(buf, sizeof buf, "CER %.4f", cer);
              c.expect(cer >= 0.08 && cer <= 0.12, buf);
              std::printf("  corpus %s over %zu pages\n", buf, truth.size());
            });

  criterion(5, "classification report on the reference confusion matrix gives LIST P=145/147, R=1", 0.0,
            [](Check& c) {
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
              const auto list = m.metrics(P::List);
              c.expect(std::abs(list.precision - 145.0 / 147.0) <= 1e-9, "LIST precision");
              c.expect(list.recall == 1.0, "LIST recall");
              c.expect(m.total() == 193, "matrix total");
            });

  criterion(6, "household grouping matches the oracle on 200 multi-page registers", 0.0, [](Check& c) {
    SyntheticProfile profile;
    profile.min_rows = 2;
    profile.max_rows = 15;
    std::size_t bad = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto reg = generate_synthetic_register(seed, 2 + seed % 9, profile);
      RegisterDocument doc;
      doc.metadata.register_id = "r" + std::to_string(seed);
      for (const auto& p : reg.pages) doc.pages.push_back({p.page_id, PageClass::List, p});
      const auto merged = merge_register(doc);
      if (positions(merged) != concat_and_split(reg.pages)) ++bad;
      if (household_accuracy(merged, merged) != 1.0) ++bad;
    }
    c.expect(bad == 0, std::to_string(bad) + " registers disagree");
  });

  criterion(7, "200-image batch integrates fully, resumes identically and isolates compute nodes", 120.0,
            [](Check& c) {
              CorpusOptions options;
              options.registers = 10;
              options.pages_per_register = 20;
              options.seed = 707;
              cftest::CorpusBed bed(options);
              c.expect(bed.corpus.image_count() == 200, "corpus size");
              MockWorker worker(3);

              FileTransport network;
              LocalExecutor local(network, 2, 4);
              const auto clean = run_pipeline(bed, bed.workspace_root("clean"), worker, local);
              std::size_t integrated = 0;
              for (const auto& m : clean.tasks) integrated += m.state == TaskState::Integrated;
              c.expect(integrated == 200, std::to_string(integrated) + "/200 integrated");

              const auto exports = export_households(Workspace(bed.workspace_root("clean")));
              const auto truth = cftest::truth_households(bed.corpus);
              std::map<std::string, std::size_t> by_id;
              for (std::size_t r = 0; r < bed.corpus.registers.size(); ++r) by_id[bed.corpus.registers[r].register_id] = r;
              bool same = exports.size() == truth.size();
              for (const auto& e : exports) {
                const auto it = by_id.find(e.register_id);
                same = same && it != by_id.end() && e.gap_pages == 0 && positions(e.households) == truth[it->second];
              }
              c.expect(same, "exported households differ from the fixtures");

              const auto cut_root = bed.workspace_root("cut");
              run_pipeline(bed, cut_root, worker, local, 257);
              const auto resumed = run_pipeline(bed, cut_root, worker, local);
              c.expect(resumed.snapshot == clean.snapshot, "interrupted run ended differently");
              c.expect(audit_transition_log(Workspace(cut_root).log_path()).empty(), "transition log has problems");

              CountingTransport counted;
              SimulatedBatchScheduler batch(counted, 2, 4);
              const auto isolated = run_pipeline(bed, bed.workspace_root("batch"), worker, batch);
              c.expect(batch.isolation_violations() == 0, "compute nodes touched the network");
              c.expect(counted.calls.load() == 2 * 200, "network calls outside pre-staging");
              c.expect(isolated.snapshot == clean.snapshot, "batch scheduler run ended differently");
            });

  criterion(8, "simulator finds the minimum proc workers for an 8-day deadline: 9 GPU workers, makespan ~625000 s", 0.0, [](Check& c) {
    auto model = [](int gpu) {
      return std::vector<StageModel>{parse_stage_spec("pre:1.6:14"),
                                     parse_stage_spec("proc:12.5:" + std::to_string(gpu)),
                                     parse_stage_spec("post:7.2:14")};
    };
    auto unknown = model(1);
    unknown[1].workers = 0;
    const int c_min = min_workers_for_deadline(450000, unknown, parse_duration("8d"));
    c.expect(c_min == 9, "min workers " + std::to_string(c_min));
    const double span = simulate(450000, model(9)).makespan;
    c.expect(std::abs(span - 625000.0) <= 6250.0, "makespan " + std::to_string(span));
    c.expect(span < 691200.0, "makespan over deadline");
    c.expect(std::abs(simulate(1, model(9)).makespan - 21.3) < 1e-9, "single image makespan");
  });

  criterion(9, "ingest is deterministic, Moulin~Moulins = 6/7 and every row lands exactly once", 0.0, [](Check& c) {
    CorpusOptions options;
    options.registers = 4;
    options.pages_per_register = 6;
    options.seed = 909;
    cftest::CorpusBed bed(options);
    const auto mapping = ColumnMapping::load(bed.corpus.root / "mapping.txt");
    const auto gazetteer = Gazetteer::load(bed.corpus.root / "gazetteer.csv");
    const auto a = bed.dir / "a.jsonl";
    const auto b = bed.dir / "b.jsonl";
    save_registry(a, build_registry(import_csv_file(bed.corpus.root / "metadata.csv", mapping).rows, gazetteer).registry);
    save_registry(b, build_registry(import_csv_file(bed.corpus.root / "metadata.csv", mapping).rows, gazetteer).registry);
    c.expect(read_text_file(a) == read_text_file(b), "registry bytes differ between runs");

    c.expect(std::abs(name_similarity("Moulin", "Moulins") - 6.0 / 7.0) <= 1e-9, "Moulin/Moulins similarity");

    const auto allier = Gazetteer::parse(
        "code,canonical_name,department,variants\n03190,Moulins,03,\n03197,Neuilly-le-Réal,03,\n"
        "03310,Vichy,03,\n58001,Moulins-Engilbert,58,\n");
    const auto basic = ColumnMapping::parse("annee=YEAR\ncommune=COMMUNE\ncote=ARCHIVAL_ID\nchemin=IMAGE_PATH\n");
    const char* communes[] = {"Vichy", "Moulins", "Moulin", "Xyz", "", "Neuilly le Real", "VICHY"};
    const char* years[] = {"1901", "1916", "19x1", "1836", "1872", "1871", ""};
    Rng rng(9);
    std::size_t bad = 0;
    for (int trial = 0; trial < 100; ++trial) {
      std::ostringstream csv;
      csv << "annee,commune,cote,chemin\n";
      const auto n = 1 + rng.below(60);
      for (std::uint64_t i = 0; i < n; ++i) {
        csv << years[rng.below(std::size(years))] << ',' << communes[rng.below(std::size(communes))] << ",6M"
            << rng.below(3) << ",img_" << rng.below(20) << (rng.below(10) == 0 ? "" : ".jpg") << '\n';
      }
      const auto imported = import_csv(csv.str(), basic);
      const auto r = build_registry(imported.rows, allier);
      std::multiset<std::size_t> lines;
      for (const auto& reg : r.registry.registers)
        lines.insert(reg.metadata.source_rows.begin(), reg.metadata.source_rows.end());
      for (const auto& e : r.exceptions) lines.insert(e.row.line);
      std::multiset<std::size_t> expected;
      for (const auto& row : imported.rows) expected.insert(row.line);
      if (lines != expected) ++bad;
    }
    c.expect(bad == 0, std::to_string(bad) + " random inputs lost or duplicated rows");
  });

  std::printf("%s: %d of 9 criteria failed\n", failures == 0 ? "OK" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}
