#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include <censusflow/manifest.hpp>

#include "test_support.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

Outcome cli(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / ".cli-output";
  const std::string command = std::string("'") + CENSUSFLOW_CLI + "' " + args + " > '" + out.string() + "' 2>&1";
  const int status = std::system(command.c_str());
  Outcome o;
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::ostringstream text;
  text << in.rdbuf();
  o.output = text.str();
  fs::remove(out);
  return o;
}

// Every regular file under root with its contents.
std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    files[fs::relative(entry.path(), root).string()] = censusflow::read_text_file(entry.path());
  }
  return files;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    ws = dir / "ws";
    corpus = dir / "corpus";
    const auto gen = cli("gen-fixtures --out '" + corpus.string() + "' --registers 2 --pages 4 --covers", dir.path());
    ASSERT_EQ(gen.code, 0) << gen.output;
  }

  std::string w() const { return "-w '" + ws.string() + "' "; }
  std::string endpoint() const { return "--endpoint 'file://" + (corpus / "iiif").string() + "' "; }
  std::string ingest_args() const {
    return "ingest --csv '" + (corpus / "metadata.csv").string() + "' --mapping '" + (corpus / "mapping.txt").string() +
           "' --gazetteer '" + (corpus / "gazetteer.csv").string() + "' ";
  }
  Outcome run(const std::string& args) const { return cli(w() + args, dir.path()); }

  cftest::TempDir dir{"cf-cli"};
  fs::path ws;
  fs::path corpus;
};

}  // namespace

TEST_F(Cli, SimulateSingleImage) {
  const auto o = run("simulate --images 1 --stage pre:1.6:14 --stage proc:12.5:9 --stage post:7.2:14");
  EXPECT_EQ(o.code, 0) << o.output;
  EXPECT_NE(o.output.find("makespan: 21.3 s"), std::string::npos) << o.output;
}

TEST_F(Cli, SimulateMinWorkers) {
  const auto o =
      run("simulate --images 450000 --stage pre:1.6:14 --stage proc:12.5:? --stage post:7.2:14 --deadline 8d");
  EXPECT_EQ(o.code, 0) << o.output;
  EXPECT_NE(o.output.find("9"), std::string::npos) << o.output;
  EXPECT_EQ(run("simulate --images 10 --stage proc:12.5:?").code, 2);
  EXPECT_EQ(run("simulate --images 10 --stage bogus").code, 2);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("plan --limit notanumber").code, 2);
  const fs::path bad = dir / "bad.json";
  std::ofstream(bad) << "{not json";
  EXPECT_EQ(run("--config '" + bad.string() + "' status").code, 2);
  std::ofstream(dir / "unknown.json") << R"({"pipeline": {"windw": 4}})";
  EXPECT_EQ(run("--config '" + (dir / "unknown.json").string() + "' status").code, 2);
  std::ofstream(dir / "typed.json") << R"({"pipeline": {"window": "four"}})";
  EXPECT_EQ(run("--config '" + (dir / "typed.json").string() + "' status").code, 2);
  EXPECT_EQ(cli("--help", dir.path()).code, 0);
  EXPECT_EQ(cli("--version", dir.path()).code, 0);
}

TEST_F(Cli, FullRunAndFailureReporting) {
  ASSERT_EQ(run(ingest_args()).code, 0);
  ASSERT_EQ(run("plan").code, 0);
  const auto check = run("check-images " + endpoint());
  EXPECT_EQ(check.code, 0) << check.output;
  EXPECT_TRUE(fs::exists(ws / "integrity.csv"));

  // Remove one image so its task fails during pre-staging.
  fs::path victim;
  for (const auto& entry : fs::directory_iterator(corpus / "iiif")) {
    victim = entry.path();
    break;
  }
  fs::remove_all(victim);
  const auto r = run("run " + endpoint() + "--scheduler slurm-sim:gpu=2,cpu=4");
  EXPECT_EQ(r.code, 1) << r.output;
  EXPECT_NE(r.output.find("FAILED"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("missing"), std::string::npos) << r.output;
  EXPECT_TRUE(fs::exists(ws / "report.json"));

  const auto status = run("status");
  EXPECT_EQ(status.code, 0) << status.output;
  EXPECT_NE(status.output.find("INTEGRATED"), std::string::npos) << status.output;

  const fs::path households = dir / "households.csv";
  EXPECT_EQ(run("export --households '" + households.string() + "'").code, 0);
  EXPECT_TRUE(fs::exists(households));
  const fs::path preds = dir / "pred";
  EXPECT_EQ(run("export --transcripts '" + preds.string() + "'").code, 0);
  const auto eval = run("evaluate --truth '" + (corpus / "truth/pages").string() + "' --pred '" + preds.string() + "'");
  EXPECT_EQ(eval.code, 0) << eval.output;
  EXPECT_NE(eval.output.find("CER"), std::string::npos) << eval.output;
}

TEST_F(Cli, InterruptExitsOneAndResumes) {
  ASSERT_EQ(run(ingest_args()).code, 0);
  ASSERT_EQ(run("plan").code, 0);
  const auto cut = run("run " + endpoint() + "--interrupt-after 5");
  EXPECT_EQ(cut.code, 1) << cut.output;
  EXPECT_NE(cut.output.find("interrupted"), std::string::npos) << cut.output;
  const auto resumed = run("run " + endpoint());
  EXPECT_EQ(resumed.code, 0) << resumed.output;
}

// Property: --dry-run leaves the filesystem unchanged for every subcommand.
TEST_F(Cli, DryRunWritesNothing) {
  ASSERT_EQ(run(ingest_args()).code, 0);
  ASSERT_EQ(run("plan").code, 0);
  ASSERT_EQ(run("run " + endpoint() + "--stages pre").code, 0);
  const auto before = snapshot(dir.path());
  const std::vector<std::string> commands = {
      ingest_args() + "--dry-run",
      "check-images " + endpoint() + "--dry-run",
      "plan --batch b --dry-run",
      "run " + endpoint() + "--dry-run",
      "status --dry-run",
      "evaluate --truth '" + (corpus / "truth/pages").string() + "' --pred '" + (corpus / "truth/pages").string() +
          "' --dry-run",
      "export --households '" + (dir / "h.csv").string() + "' --dry-run",
      "simulate --images 5 --stage a:1:1 --dry-run",
      "gen-fixtures --out '" + (dir / "more").string() + "' --dry-run",
  };
  for (const auto& c : commands) {
    const auto o = run(c);
    EXPECT_EQ(o.code, 0) << c << "\n" << o.output;
    EXPECT_EQ(snapshot(dir.path()), before) << c;
  }
}
