#include <algorithm>
#include <functional>
#include <queue>

#include <gtest/gtest.h>

#include <censusflow/error.hpp>
#include <censusflow/rng.hpp>
#include <censusflow/simulate.hpp>

using namespace censusflow;

namespace {

StageModel stage(const std::string& name, double mean, int workers) {
  StageModel s;
  s.name = name;
  s.service_mean = mean;
  s.workers = workers;
  return s;
}

std::vector<StageModel> capacity_model(int proc_workers) {
  return {stage("pre", 1.6, 14), stage("proc", 12.5, proc_workers), stage("post", 7.2, 14)};
}

// FIFO multi-server tandem line with deterministic service and unbounded
// buffers, computed image by image.
double oracle_makespan(std::size_t n, const std::vector<StageModel>& stages) {
  std::vector<double> ready(n, 0.0);
  for (const auto& s : stages) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return ready[a] < ready[b]; });
    std::priority_queue<double, std::vector<double>, std::greater<>> free_at;
    for (int w = 0; w < s.workers; ++w) free_at.push(0.0);
    std::vector<double> done(n);
    for (std::size_t i : order) {
      const double start = std::max(ready[i], free_at.top());
      free_at.pop();
      done[i] = start + s.service_mean;
      free_at.push(done[i]);
    }
    ready = done;
  }
  return n == 0 ? 0.0 : *std::max_element(ready.begin(), ready.end());
}

}  // namespace

TEST(Simulate, SingleImageIsSumOfMeans) {
  const auto r = simulate(1, capacity_model(9));
  EXPECT_NEAR(r.makespan, 21.3, 1e-9);
}

TEST(Simulate, SingleStageFullyParallel) {
  EXPECT_NEAR(simulate(100, {stage("a", 1.0, 100)}).makespan, 1.0, 1e-9);
}

TEST(Simulate, ReferenceCapacity) {
  const auto r = simulate(450000, capacity_model(9));
  EXPECT_NEAR(r.makespan, 625000.0, 6250.0);
  EXPECT_LT(r.makespan, 691200.0);
  EXPECT_EQ(r.bottleneck(), 1u);
  EXPECT_NEAR(bottleneck_bound(450000, capacity_model(9)), 625000.0, 1e-6);
  for (const auto& s : r.stages) {
    EXPECT_EQ(s.completed, 450000u);
    EXPECT_GT(s.utilization, 0.0);
    EXPECT_LE(s.utilization, 1.0 + 1e-9);
  }
  EXPECT_GT(r.stages[1].utilization, 0.99);
}

// Property: deterministic lines agree with the image-by-image oracle.
TEST(Simulate, MatchesOracleOnDeterministicLines) {
  Rng rng(5);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<StageModel> stages;
    const auto k = 1 + rng.below(4);
    for (std::size_t i = 0; i < k; ++i)
      stages.push_back(stage("s" + std::to_string(i), 0.5 + static_cast<double>(rng.below(40)) / 4.0,
                             1 + static_cast<int>(rng.below(6))));
    const std::size_t n = 1 + rng.below(120);
    EXPECT_NEAR(simulate(n, stages).makespan, oracle_makespan(n, stages), 1e-6) << trial;
  }
}

// Property: more workers at any stage never lengthen the makespan.
TEST(Simulate, MonotoneInWorkers) {
  Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    auto stages = capacity_model(1 + static_cast<int>(rng.below(12)));
    for (auto& s : stages) s.workers = 1 + static_cast<int>(rng.below(8));
    const std::size_t n = 1 + rng.below(300);
    const double base = simulate(n, stages).makespan;
    for (std::size_t i = 0; i < stages.size(); ++i) {
      auto more = stages;
      ++more[i].workers;
      EXPECT_LE(simulate(n, more).makespan, base + 1e-9);
    }
  }
}

TEST(Simulate, SequentialNeverBeatsPipelined) {
  for (int c : {1, 4, 9}) {
    const double piped = simulate(500, capacity_model(c)).makespan;
    const auto seq = simulate(500, capacity_model(c), 0, SimMode::Sequential);
    EXPECT_GE(seq.makespan + 1e-9, piped);
    EXPECT_EQ(seq.mode, SimMode::Sequential);
  }
  // Sequential deterministic makespan is the sum of per-stage batch times.
  const auto seq = simulate(28, {stage("a", 1.0, 14), stage("b", 2.0, 7)}, 0, SimMode::Sequential);
  EXPECT_NEAR(seq.makespan, 2.0 + 8.0, 1e-9);
}

TEST(Simulate, StochasticServiceIsSeeded) {
  auto stages = capacity_model(9);
  stages[1].distribution = ServiceDistribution::Exponential;
  const auto a = simulate(2000, stages, 3);
  const auto b = simulate(2000, stages, 3);
  EXPECT_EQ(a.makespan, b.makespan);
  EXPECT_NEAR(a.makespan, 2000 * 12.5 / 9, 2000 * 12.5 / 9 * 0.1);
  stages[1].distribution = ServiceDistribution::Lognormal;
  stages[1].cv = 0.5;
  EXPECT_NEAR(simulate(2000, stages, 3).makespan, 2000 * 12.5 / 9, 2000 * 12.5 / 9 * 0.1);
}

TEST(Simulate, BoundedBufferBlocksUpstream) {
  auto stages = std::vector<StageModel>{stage("fast", 1.0, 1), stage("slow", 5.0, 1)};
  stages[1].queue_capacity = 1;
  const auto r = simulate(10, stages);
  EXPECT_NEAR(r.makespan, 1.0 + 50.0, 1e-9);
  EXPECT_LE(r.stages[1].max_queue, 1u);
  EXPECT_GE(r.stages[0].max_blocked, 1u);
}

TEST(Simulate, InvalidModels) {
  EXPECT_THROW(simulate(10, {}), Error);
  EXPECT_THROW(simulate(10, {stage("a", 0.0, 1)}), Error);
  EXPECT_THROW(simulate(10, {stage("a", 1.0, 0)}), Error);
  auto neg = stage("a", 1.0, 1);
  neg.distribution = ServiceDistribution::Lognormal;
  neg.cv = -1.0;
  EXPECT_THROW(simulate(10, {neg}), Error);
}

TEST(MinWorkers, EightDayDeadline) {
  EXPECT_EQ(min_workers_for_deadline(450000, capacity_model(0), 691200.0), 9);
  EXPECT_EQ(min_workers_for_deadline(1, capacity_model(0), 21.3), 1);
  try {
    min_workers_for_deadline(450000, capacity_model(0), 1000.0, 0, SimMode::Pipelined, 64);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
  }
  auto two_unknown = capacity_model(0);
  two_unknown[0].workers = 0;
  EXPECT_THROW(min_workers_for_deadline(10, two_unknown, 100.0), Error);
}

TEST(Parse, StageSpecs) {
  const auto s = parse_stage_spec("proc:12.5:9");
  EXPECT_EQ(s.name, "proc");
  EXPECT_DOUBLE_EQ(s.service_mean, 12.5);
  EXPECT_EQ(s.workers, 9);
  EXPECT_EQ(parse_stage_spec("proc:12.5:?").workers, 0);
  const auto e = parse_stage_spec("a:1:2:exp");
  EXPECT_EQ(e.distribution, ServiceDistribution::Exponential);
  const auto l = parse_stage_spec("a:1:2:lognormal:0.3");
  EXPECT_EQ(l.distribution, ServiceDistribution::Lognormal);
  EXPECT_DOUBLE_EQ(l.cv, 0.3);
  for (const char* bad : {"a:1", "a:x:2", "a:1:-2", ":1:2", "a:1:2:weird", "a:0:2"})
    EXPECT_THROW(parse_stage_spec(bad), Error) << bad;
}

TEST(Parse, Durations) {
  EXPECT_DOUBLE_EQ(parse_duration("8d"), 691200.0);
  EXPECT_DOUBLE_EQ(parse_duration("36h"), 129600.0);
  EXPECT_DOUBLE_EQ(parse_duration("90m"), 5400.0);
  EXPECT_DOUBLE_EQ(parse_duration("45s"), 45.0);
  EXPECT_DOUBLE_EQ(parse_duration("12.5"), 12.5);
  for (const char* bad : {"", "d", "-3h", "3w"}) EXPECT_THROW(parse_duration(bad), Error) << bad;
}

TEST(Report, TextAndJson) {
  const auto r = simulate(1, capacity_model(9));
  EXPECT_NE(format_sim_report(r).find("makespan: 21.3 s"), std::string::npos);
  const auto j = sim_report_json(r);
  EXPECT_NEAR(j["makespan_s"].get<double>(), 21.3, 1e-9);
  EXPECT_EQ(j["stages"].size(), 3u);
}
