#include "commands.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include <fmt/format.h>

#include <censusflow/corpus.hpp>
#include <censusflow/csv.hpp>
#include <censusflow/error.hpp>
#include <censusflow/household.hpp>
#include <censusflow/iiif.hpp>
#include <censusflow/ingest.hpp>
#include <censusflow/metrics.hpp>
#include <censusflow/pipeline.hpp>
#include <censusflow/simulate.hpp>

namespace censusflow::cli {

namespace {

[[noreturn]] void usage(const std::string& message) { throw Error(ErrorCode::ConfigInvalid, message); }

void log(const GlobalConfig& cfg, int level, const std::string& message) {
  if (cfg.verbosity >= level) std::cerr << message << '\n';
}

// key=value pairs after "kind:".
std::map<std::string, std::string> parse_params(const std::string& spec, std::string& kind) {
  const auto colon = spec.find(':');
  kind = spec.substr(0, colon);
  std::map<std::string, std::string> params;
  if (colon == std::string::npos) return params;
  std::stringstream rest(spec.substr(colon + 1));
  std::string item;
  while (std::getline(rest, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) usage("'" + spec + "': expected key=value, got '" + item + "'");
    params[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return params;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::logic_error&) {
  }
  usage("'" + key + "' expects a number, got '" + v + "'");
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const auto n = std::stoull(v, &used);
    if (used == v.size() && v.front() != '-') return n;
  } catch (const std::logic_error&) {
  }
  usage("'" + key + "' expects a non-negative integer, got '" + v + "'");
}

std::unique_ptr<Worker> make_worker(const GlobalConfig& cfg, const std::string& spec) {
  std::string kind;
  if (spec.rfind("external:", 0) == 0) {
    return std::make_unique<ExternalProcessWorker>(spec.substr(9), cfg.workspace / "scratch");
  }
  const auto params = parse_params(spec, kind);
  if (kind != "mock") usage("unknown worker '" + kind + "' (expected mock or external:<command>)");
  std::uint64_t seed = cfg.seed;
  NoiseProfile noise;
  for (const auto& [key, value] : params) {
    if (key == "seed") {
      seed = to_count(key, value);
    } else if (key == "noise") {
      noise.char_substitution = to_double(key, value);
    } else if (key == "drop") {
      noise.entity_drop = to_double(key, value);
    } else if (key == "flip") {
      noise.head_flip = to_double(key, value);
    } else if (key == "crash") {
      noise.crash_rate = to_double(key, value);
    } else {
      usage("unknown mock worker parameter '" + key + "'");
    }
  }
  return std::make_unique<MockWorker>(seed, noise);
}

std::unique_ptr<SchedulerAdapter> make_scheduler(const GlobalConfig& cfg, const std::string& spec,
                                                 Transport& network) {
  std::string kind;
  const auto params = parse_params(spec, kind);
  const std::size_t io = cfg.capped(cfg.pipeline.io_workers);
  if (kind == "local") {
    std::size_t n = 4;
    for (const auto& [key, value] : params) {
      if (key != "n") usage("unknown local scheduler parameter '" + key + "'");
      n = to_count(key, value);
    }
    return std::make_unique<LocalExecutor>(network, cfg.capped(n), io);
  }
  if (kind == "batch" || kind == "slurm-sim") {
    std::size_t gpu = 4, cpu = io;
    for (const auto& [key, value] : params) {
      if (key == "gpu") {
        gpu = to_count(key, value);
      } else if (key == "cpu") {
        cpu = to_count(key, value);
      } else {
        usage("unknown batch scheduler parameter '" + key + "'");
      }
    }
    return std::make_unique<SimulatedBatchScheduler>(network, cfg.capped(gpu), cfg.capped(cpu));
  }
  usage("unknown scheduler '" + kind + "' (expected local or batch)");
}

IiifEndpoint endpoint_from(const GlobalConfig& cfg, const std::optional<std::string>& url,
                           const std::optional<int>& api) {
  const std::string base = url ? *url : cfg.iiif.endpoint;
  if (base.empty()) usage("an IIIF endpoint is required (--endpoint or iiif.endpoint)");
  return IiifEndpoint::make(base, api ? *api : cfg.iiif.api_version,
                            RetryPolicy{cfg.iiif.max_attempts, cfg.iiif.base_backoff_ms},
                            std::chrono::milliseconds(cfg.iiif.timeout_ms));
}

void write_output(const std::filesystem::path& path, const std::string& content, bool dry_run,
                  const GlobalConfig& cfg) {
  if (dry_run) {
    std::cout << "would write " << path.string() << " (" << content.size() << " bytes)\n";
    return;
  }
  write_text_file_atomic(path, content);
  log(cfg, 1, "wrote " + path.string());
}

}  // namespace

int cmd_ingest(const GlobalConfig& cfg, const IngestArgs& args, bool dry_run) {
  const ColumnMapping mapping = ColumnMapping::load(args.mapping);
  const ImportResult imported = import_csv_file(args.csv, mapping);
  for (const auto& d : imported.diagnostics) log(cfg, 1, d);
  const Gazetteer gazetteer = Gazetteer::load(args.gazetteer);
  if (gazetteer.empty()) throw Error(ErrorCode::EmptyGazetteer, args.gazetteer.string() + " has no entries");

  BuildOptions options;
  options.match.threshold = args.threshold.value_or(cfg.ingest.threshold);
  options.match.auto_threshold = args.auto_threshold.value_or(cfg.ingest.auto_threshold);
  options.department_hint = args.department ? args.department : cfg.ingest.department;
  if (args.resolutions) options.resolutions = load_resolutions(*args.resolutions);
  const BuildResult built = build_registry(imported.rows, gazetteer, options);

  const auto out = args.out.value_or(cfg.workspace);
  std::ostringstream exceptions, worklist;
  write_exceptions_csv(exceptions, built.exceptions);
  write_worklist_csv(worklist, built.worklist);
  write_output(out / "registry.jsonl", registry_to_jsonl(built.registry), dry_run, cfg);
  write_output(out / "exceptions.csv", exceptions.str(), dry_run, cfg);
  write_output(out / "ambiguous.csv", worklist.str(), dry_run, cfg);

  std::map<ExceptionReason, std::size_t> reasons;
  for (const auto& e : built.exceptions) ++reasons[e.reason];
  std::cout << fmt::format("rows: {}  images: {}  registers: {}  exceptions: {}  ambiguous names: {}\n",
                           imported.rows.size(), built.registry.image_count(), built.registry.registers.size(),
                           built.exceptions.size(), built.worklist.size());
  for (const auto& [reason, n] : reasons) std::cout << fmt::format("  {:<22} {}\n", to_string(reason), n);
  return kOk;
}

int cmd_check_images(const GlobalConfig& cfg, const CheckImagesArgs& args, bool dry_run) {
  const Registry registry = load_registry(args.registry.empty() ? cfg.workspace / "registry.jsonl" : args.registry);
  const IiifEndpoint endpoint = endpoint_from(cfg, args.endpoint, args.api_version);
  std::vector<ImageRef> images;
  for (const auto& reg : registry.registers) images.insert(images.end(), reg.images.begin(), reg.images.end());
  const std::size_t concurrency = cfg.capped(args.concurrency.value_or(cfg.iiif.concurrency));
  if (concurrency == 0) usage("--concurrency must be >= 1");
  if (dry_run) {
    std::cout << fmt::format("would check {} images against {} with {} concurrent requests\n", images.size(),
                             endpoint.base_url, concurrency);
    if (!images.empty()) std::cout << "first request: " << info_url(endpoint, images.front().iiif_identifier) << '\n';
    return kOk;
  }
  auto transport = make_transport(endpoint);
  CheckOptions options;
  options.verify_pixels = args.verify_pixels;
  options.jitter_seed = cfg.seed;
  const auto results = check_batch(endpoint, images, *transport, concurrency, options);

  std::ostringstream csv_out;
  write_integrity_csv(csv_out, results);
  write_output(args.out.value_or(cfg.workspace / "integrity.csv"), csv_out.str(), false, cfg);
  std::map<IntegrityStatus, std::size_t> counts;
  for (const auto& r : results) ++counts[r.status];
  std::cout << fmt::format("checked: {}", results.size());
  for (const auto& [status, n] : counts) std::cout << fmt::format("  {}: {}", to_string(status), n);
  std::cout << '\n';
  for (const auto& r : results) {
    if (r.status != IntegrityStatus::Ok)
      std::cout << fmt::format("  {} {} {}\n", to_string(r.status), r.image.iiif_identifier, r.detail);
  }
  return counts[IntegrityStatus::Ok] == results.size() ? kOk : kFailure;
}

int cmd_plan(const GlobalConfig& cfg, const PlanArgs& args, bool dry_run) {
  const Registry registry = load_registry(args.registry.empty() ? cfg.workspace / "registry.jsonl" : args.registry);
  Workspace workspace(cfg.workspace);
  PlanFilter filter{args.year, args.commune, args.register_id, args.limit};
  const PlanResult plan = plan_batch(workspace, registry, filter, dry_run);
  if (args.batch && !dry_run) workspace.save_batch(*args.batch, plan.task_ids);
  std::cout << fmt::format("{}selected: {}  new: {}  pending: {}  already past PENDING: {}\n",
                           dry_run ? "(dry run) " : "", plan.task_ids.size(), plan.created, plan.pending.size(),
                           plan.skipped);
  return kOk;
}

int cmd_run(const GlobalConfig& cfg, const RunArgs& args, bool dry_run) {
  RunConfig config;
  config.stages.clear();
  std::stringstream stages(args.stages);
  std::string s;
  while (std::getline(stages, s, ',')) {
    if (s == "pre") {
      config.stages.insert(Stage::Prestage);
    } else if (s == "proc") {
      config.stages.insert(Stage::Process);
    } else if (s == "post") {
      config.stages.insert(Stage::Integrate);
    } else {
      usage("unknown stage '" + s + "' (expected pre, proc, post)");
    }
  }
  if (config.stages.contains(Stage::Prestage)) config.endpoint = endpoint_from(cfg, args.endpoint, args.api_version);
  config.stage.retry_limit = args.retries.value_or(cfg.pipeline.retry_limit);
  config.stage.backoff_ms = cfg.pipeline.backoff_ms;
  config.stage.seed = cfg.seed;
  config.stage.io_workers = cfg.capped(cfg.pipeline.io_workers);
  config.window = args.window.value_or(cfg.pipeline.window);
  config.interrupt_after = args.interrupt_after;
  config.batch = args.batch;
  config.validate();

  Workspace workspace(cfg.workspace);
  auto worker = make_worker(cfg, args.workers.value_or(cfg.pipeline.workers));
  if (dry_run) {
    std::vector<TaskManifest> tasks;
    if (args.batch) {
      for (const auto& id : workspace.load_batch(*args.batch)) tasks.push_back(workspace.load(id));
    } else {
      tasks = workspace.load_all();
    }
    const BatchReport current = summarize(tasks);
    std::cout << "(dry run) current state:\n" << current.format();
    std::cout << fmt::format("would pre-stage {} and process {} and integrate {} tasks\n",
                             config.stages.contains(Stage::Prestage) ? current.count(TaskState::Pending) : 0,
                             config.stages.contains(Stage::Process)
                                 ? current.count(TaskState::Staged) + current.count(TaskState::Processing)
                                 : 0,
                             config.stages.contains(Stage::Integrate) ? current.count(TaskState::Processed) : 0);
    return kOk;
  }

  std::unique_ptr<Transport> network;
  if (config.stages.contains(Stage::Prestage)) {
    network = make_transport(config.endpoint);
  } else {
    network = std::make_unique<NullTransport>();
  }
  auto scheduler = make_scheduler(cfg, args.scheduler.value_or(cfg.pipeline.scheduler), *network);
  FileSink sink(workspace.store_path());
  BatchReport report;
  try {
    report = run_batch(workspace, config, *worker, *scheduler, sink);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Interrupted) throw;
    std::cout << "interrupted: " << e.what() << '\n';
    return kFailure;
  }
  std::cout << report.format();
  const auto report_path = args.report.value_or(workspace.root() / "report.json");
  write_text_file_atomic(report_path, report.to_json().dump(2) + "\n");
  return report.count(TaskState::Failed) == 0 ? kOk : kFailure;
}

int cmd_status(const GlobalConfig& cfg, const StatusArgs& args, bool) {
  Workspace workspace(cfg.workspace);
  std::vector<TaskManifest> tasks;
  if (args.batch) {
    for (const auto& id : workspace.load_batch(*args.batch)) tasks.push_back(workspace.load(id));
  } else {
    tasks = workspace.load_all();
  }
  const BatchReport report = summarize(tasks);
  const auto problems = audit_transition_log(workspace.log_path());
  if (args.json) {
    auto j = report.to_json();
    j["log_problems"] = problems;
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << report.format();
    for (const auto& p : problems) std::cout << "  log: " << p << '\n';
  }
  return problems.empty() ? kOk : kFailure;
}

int cmd_evaluate(const GlobalConfig& cfg, const EvaluateArgs& args, bool dry_run) {
  if (!args.classes && !(args.truth && args.pred)) usage("evaluate needs --truth and --pred, or --classes");
  nlohmann::json doc = nlohmann::json::object();
  if (args.truth && args.pred) {
    const CorpusReport report = evaluate_corpus(*args.truth, *args.pred);
    std::cout << format_report(report);
    doc["transcription"] = report_json(report);
  }
  if (args.classes) {
    const csv::Table table = csv::parse_table(read_text_file(*args.classes));
    std::optional<std::size_t> truth_col, pred_col;
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (table.header[i] == "truth") truth_col = i;
      if (table.header[i] == "pred") pred_col = i;
    }
    if (!truth_col || !pred_col) throw Error(ErrorCode::MissingColumn, "class pairs need 'truth' and 'pred' columns");
    std::vector<std::pair<PageClass, PageClass>> pairs;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      const auto t = row.size() > *truth_col ? page_class_from_name(row[*truth_col]) : std::nullopt;
      const auto p = row.size() > *pred_col ? page_class_from_name(row[*pred_col]) : std::nullopt;
      if (!t || !p) throw Error(ErrorCode::Parse, fmt::format("line {}: unknown page class", table.lines[r]));
      pairs.emplace_back(*t, *p);
    }
    const ConfusionMatrix matrix = classification_report(pairs);
    std::cout << format_classification(matrix);
    doc["classification"] = classification_json(matrix);
  }
  if (args.json) write_output(*args.json, doc.dump(2) + "\n", dry_run, cfg);
  return kOk;
}

int cmd_export(const GlobalConfig& cfg, const ExportArgs& args, bool dry_run) {
  if (!args.households && !args.transcripts && !args.classes)
    usage("export needs at least one of --households, --transcripts, --classes");
  Workspace workspace(cfg.workspace);
  if (args.households) {
    const auto exports = export_households(workspace, MergeOptions{args.continue_across_gaps});
    std::ostringstream out;
    write_households_export(out, exports);
    write_output(*args.households, out.str(), dry_run, cfg);
    std::size_t households = 0, gaps = 0;
    for (const auto& e : exports) {
      households += e.households.households.size();
      gaps += e.gap_pages;
    }
    std::cout << fmt::format("registers: {}  households: {}  gap pages: {}\n", exports.size(), households, gaps);
  }
  const auto store = load_store(workspace.store_path());
  if (args.transcripts) {
    std::size_t written = 0;
    for (const auto& [key, payload_json] : store) {
      const ResultPayload payload = payload_from_json(payload_json);
      if (!payload.transcript) continue;
      const PageTranscript pages[] = {*payload.transcript};
      const auto path = *args.transcripts / (key + ".txt");
      if (!dry_run) save_fixture_file(path, pages);
      ++written;
    }
    std::cout << fmt::format("{}transcripts: {}\n", dry_run ? "(dry run) " : "", written);
  }
  if (args.classes) {
    std::map<std::string, std::string> truth;
    if (args.truth_classes) {
      const csv::Table t = csv::parse_table(read_text_file(*args.truth_classes));
      for (const auto& row : t.rows) {
        if (row.size() >= 2) truth[row[0]] = row[1];
      }
    }
    std::ostringstream out;
    if (args.truth_classes) {
      csv::write_row(out, {"task_id", "truth", "pred"});
    } else {
      csv::write_row(out, {"task_id", "pred"});
    }
    for (const auto& [key, payload_json] : store) {
      const std::string pred = payload_json.value("page_class", "");
      if (args.truth_classes) {
        const auto it = truth.find(key);
        if (it == truth.end()) continue;
        csv::write_row(out, {key, it->second, pred});
      } else {
        csv::write_row(out, {key, pred});
      }
    }
    write_output(*args.classes, out.str(), dry_run, cfg);
  }
  return kOk;
}

int cmd_simulate(const GlobalConfig& cfg, const SimulateArgs& args, bool dry_run) {
  if (args.images == 0) usage("--images must be >= 1");
  if (args.stages.empty()) usage("at least one --stage is required");
  std::vector<StageModel> stages;
  for (const auto& spec : args.stages) stages.push_back(parse_stage_spec(spec));
  const std::string mode_name = args.mode.value_or(cfg.simulate.mode);
  std::vector<SimMode> modes;
  if (mode_name == "pipelined" || mode_name == "both") modes.push_back(SimMode::Pipelined);
  if (mode_name == "sequential" || mode_name == "both") modes.push_back(SimMode::Sequential);
  if (modes.empty()) usage("--mode must be pipelined, sequential or both");
  std::optional<double> deadline;
  if (args.deadline) deadline = parse_duration(*args.deadline);
  const int cap = args.max_workers.value_or(cfg.simulate.max_workers);

  std::size_t unknown = 0;
  for (const auto& s : stages) unknown += s.workers == 0 ? 1 : 0;
  if (unknown > 1) usage("at most one stage may have '?' workers");
  if (unknown == 1 && !deadline) usage("a '?' worker count needs --deadline");

  nlohmann::json doc = nlohmann::json::array();
  int status = kOk;
  for (SimMode mode : modes) {
    std::vector<StageModel> solved = stages;
    nlohmann::json entry;
    if (unknown == 1) {
      for (auto& s : solved) {
        if (s.workers != 0) continue;
        try {
          s.workers = min_workers_for_deadline(args.images, stages, deadline.value_or(0.0), cfg.seed, mode, cap);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::Infeasible) throw;
          std::cout << fmt::format("[{}] infeasible: {}\n", to_string(mode), e.what());
          entry = {{"mode", to_string(mode)}, {"infeasible", e.what()}};
          status = kFailure;
        }
        if (s.workers != 0)
          std::cout << fmt::format("[{}] minimum workers for stage '{}': {}\n", to_string(mode), s.name, s.workers);
        entry["solved_stage"] = s.name;
        entry["solved_workers"] = s.workers;
      }
      if (status == kFailure && entry.contains("infeasible")) {
        doc.push_back(entry);
        continue;
      }
    }
    const SimResult result = simulate(args.images, solved, cfg.seed, mode);
    std::cout << format_sim_report(result);
    auto j = sim_report_json(result);
    j["bottleneck_bound_s"] = bottleneck_bound(args.images, solved);
    if (deadline) {
      j["deadline_s"] = *deadline;
      j["meets_deadline"] = result.makespan <= *deadline;
      std::cout << fmt::format("deadline: {:.1f} s  {}\n", *deadline,
                               result.makespan <= *deadline ? "met" : "missed");
    }
    for (const auto& [k, v] : entry.items()) j[k] = v;
    doc.push_back(j);
  }
  if (args.json) write_output(*args.json, doc.dump(2) + "\n", dry_run, cfg);
  return status;
}

int cmd_gen_fixtures(const GlobalConfig& cfg, const GenFixturesArgs& args, bool dry_run) {
  CorpusOptions options;
  options.registers = args.registers;
  options.pages_per_register = args.pages;
  options.seed = cfg.seed;
  options.covers = args.covers;
  if (options.registers == 0 || options.pages_per_register == 0) usage("--registers and --pages must be >= 1");
  const GeneratedCorpus corpus = generate_corpus(args.out, options, dry_run);
  std::cout << fmt::format("{}registers: {}  images: {}  seed: {}\nendpoint: {}\n", dry_run ? "(dry run) " : "",
                           corpus.registers.size(), corpus.image_count(), cfg.seed, corpus.endpoint_url);
  return kOk;
}

}  // namespace censusflow::cli
