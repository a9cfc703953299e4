#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <censusflow/error.hpp>

#include "commands.hpp"

using namespace censusflow;
using namespace censusflow::cli;

namespace {

// Flags given on the command line; applied on top of the config file.
struct Overrides {
  std::optional<std::filesystem::path> config, workspace;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  int verbose = 0;
};

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ConfigInvalid:
    case ErrorCode::InvalidModel:
      return kUsage;
    default:
      return kFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"censusflow: census register ingestion, processing and capacity planning"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "censusflow 0.1.0");

  Overrides flags;
  bool dry_run = false;
  app.add_option("--config", flags.config, "JSON config file (flags override it)");
  app.add_option("--workspace,-w", flags.workspace, "workspace root (default .)");
  app.add_option("--seed", flags.seed, "seed for every random choice (default 0)");
  app.add_option("--jobs,-j", flags.jobs, "cap on total parallelism (0 = no cap)");
  app.add_flag("-v,--verbose", flags.verbose, "more logging on stderr (repeatable)");

  auto dry = [&](CLI::App* sub) { sub->add_flag("--dry-run", dry_run, "print the plan and write nothing"); };

  IngestArgs ingest;
  auto* s_ingest = app.add_subcommand("ingest", "build the register registry from a metadata CSV");
  s_ingest->add_option("--csv", ingest.csv, "metadata CSV")->required();
  s_ingest->add_option("--mapping", ingest.mapping, "column=ROLE mapping file")->required();
  s_ingest->add_option("--gazetteer", ingest.gazetteer, "gazetteer CSV")->required();
  s_ingest->add_option("--resolutions", ingest.resolutions, "manual name,code resolutions CSV");
  s_ingest->add_option("--out", ingest.out, "output directory (default: workspace)");
  s_ingest->add_option("--threshold", ingest.threshold, "candidate similarity threshold");
  s_ingest->add_option("--auto-threshold", ingest.auto_threshold, "automatic acceptance threshold");
  s_ingest->add_option("--department", ingest.department, "department hint for ties");
  dry(s_ingest);

  CheckImagesArgs check;
  auto* s_check = app.add_subcommand("check-images", "verify every registry image against an IIIF endpoint");
  s_check->add_option("--registry", check.registry, "registry.jsonl (default: <workspace>/registry.jsonl)");
  s_check->add_option("--endpoint", check.endpoint, "IIIF base URL (http, https or file)");
  s_check->add_option("--api-version", check.api_version, "IIIF Image API version (2 or 3)");
  s_check->add_option("--concurrency", check.concurrency, "concurrent requests");
  s_check->add_option("--out", check.out, "results CSV (default: workspace/integrity.csv)");
  s_check->add_flag("--verify-pixels", check.verify_pixels, "also fetch the full image and check its signature");
  dry(s_check);

  PlanArgs plan;
  auto* s_plan = app.add_subcommand("plan", "create PENDING task manifests for selected images");
  s_plan->add_option("--registry", plan.registry, "registry.jsonl (default: <workspace>/registry.jsonl)");
  s_plan->add_option("--year", plan.year, "census year filter");
  s_plan->add_option("--commune", plan.commune, "commune code filter");
  s_plan->add_option("--register", plan.register_id, "register id filter");
  s_plan->add_option("--limit", plan.limit, "maximum number of tasks");
  s_plan->add_option("--batch", plan.batch, "name the selection for later runs");
  dry(s_plan);

  RunArgs run;
  auto* s_run = app.add_subcommand("run", "advance tasks through the pre, proc and post stages");
  s_run->add_option("--endpoint", run.endpoint, "IIIF base URL for pre-staging");
  s_run->add_option("--api-version", run.api_version, "IIIF Image API version (2 or 3)");
  s_run->add_option("--stages", run.stages, "comma-separated subset of pre,proc,post")->capture_default_str();
  s_run->add_option("--workers", run.workers, "mock[:seed=,noise=,drop=,flip=,crash=] or external:<command>");
  s_run->add_option("--scheduler", run.scheduler, "local[:n=] or batch[:gpu=,cpu=]");
  s_run->add_option("--batch", run.batch, "restrict to a named batch");
  s_run->add_option("--retries", run.retries, "worker attempts per task");
  s_run->add_option("--window", run.window, "tasks per pipeline window");
  s_run->add_option("--interrupt-after", run.interrupt_after, "stop after this many state transitions");
  s_run->add_option("--report", run.report, "report JSON path (default: workspace/report.json)");
  dry(s_run);

  StatusArgs status;
  auto* s_status = app.add_subcommand("status", "summarize task states and audit the transition log");
  s_status->add_option("--batch", status.batch, "restrict to a named batch");
  s_status->add_flag("--json", status.json, "print JSON");
  dry(s_status);

  EvaluateArgs evaluate;
  auto* s_eval = app.add_subcommand("evaluate", "score predicted transcripts or page classes");
  s_eval->add_option("--truth", evaluate.truth, "directory of reference transcripts");
  s_eval->add_option("--pred", evaluate.pred, "directory of predicted transcripts");
  s_eval->add_option("--classes", evaluate.classes, "CSV with truth,pred page class columns");
  s_eval->add_option("--json", evaluate.json, "write the report as JSON");
  dry(s_eval);

  ExportArgs exp;
  auto* s_export = app.add_subcommand("export", "export integrated results");
  s_export->add_option("--households", exp.households, "household CSV");
  s_export->add_option("--transcripts", exp.transcripts, "directory for predicted transcripts");
  s_export->add_option("--classes", exp.classes, "predicted page classes CSV");
  s_export->add_option("--truth-classes", exp.truth_classes, "task_id,class CSV to pair with predictions");
  s_export->add_flag("--continue-across-gaps", exp.continue_across_gaps,
                     "let a household continue over pages without results");
  dry(s_export);

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "simulate stage throughput and size the unknown stage");
  s_sim->add_option("--images", sim.images, "number of images")->required();
  s_sim->add_option("--stage", sim.stages, "name:mean_s:workers|?[:exp|:det|:lognormal:cv], in order")->required();
  s_sim->add_option("--deadline", sim.deadline, "deadline such as 8d, 36h, 90m or seconds");
  s_sim->add_option("--mode", sim.mode, "pipelined, sequential or both");
  s_sim->add_option("--json", sim.json, "write the report as JSON");
  s_sim->add_option("--max-workers", sim.max_workers, "upper bound for the worker search");
  dry(s_sim);

  GenFixturesArgs gen;
  auto* s_gen = app.add_subcommand("gen-fixtures", "write a synthetic corpus with a file-based IIIF endpoint");
  s_gen->add_option("--out", gen.out, "output directory")->required();
  s_gen->add_option("--registers", gen.registers, "number of registers")->capture_default_str();
  s_gen->add_option("--pages", gen.pages, "list pages per register")->capture_default_str();
  s_gen->add_flag("--covers", gen.covers, "add a cover and a totals page to each register");
  dry(s_gen);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    GlobalConfig cfg;
    if (flags.config) cfg.load(*flags.config);
    if (flags.workspace) cfg.workspace = *flags.workspace;
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.jobs) cfg.jobs = *flags.jobs;
    cfg.verbosity += flags.verbose;

    if (s_ingest->parsed()) return cmd_ingest(cfg, ingest, dry_run);
    if (s_check->parsed()) return cmd_check_images(cfg, check, dry_run);
    if (s_plan->parsed()) return cmd_plan(cfg, plan, dry_run);
    if (s_run->parsed()) return cmd_run(cfg, run, dry_run);
    if (s_status->parsed()) return cmd_status(cfg, status, dry_run);
    if (s_eval->parsed()) return cmd_evaluate(cfg, evaluate, dry_run);
    if (s_export->parsed()) return cmd_export(cfg, exp, dry_run);
    if (s_sim->parsed()) return cmd_simulate(cfg, sim, dry_run);
    if (s_gen->parsed()) return cmd_gen_fixtures(cfg, gen, dry_run);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
