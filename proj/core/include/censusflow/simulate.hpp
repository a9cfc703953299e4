#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace censusflow {

enum class ServiceDistribution { Deterministic, Exponential, Lognormal };

struct StageModel {
  std::string name;
  double service_mean = 1.0;  // seconds per image
  ServiceDistribution distribution = ServiceDistribution::Deterministic;
  double cv = 0.0;  // coefficient of variation, lognormal only
  int workers = 1;  // 0 marks the unknown of min_workers_for_deadline
  std::optional<std::size_t> queue_capacity;  // unbounded when empty

  // Throws Error(InvalidModel); allow_unknown accepts workers == 0.
  void validate(bool allow_unknown = false) const;
};

// "name:mean:workers[:exp|:lognormal:cv]", workers may be '?'.
StageModel parse_stage_spec(std::string_view spec);

// "8d", "36h", "90m", "45s" or plain seconds.
double parse_duration(std::string_view text);

enum class SimMode { Pipelined, Sequential };
std::string_view to_string(SimMode mode);

struct StageStats {
  std::string name;
  double service_mean = 0.0;
  int workers = 0;
  double busy_time = 0.0;    // summed service time over all servers
  double utilization = 0.0;  // busy_time / (workers * makespan)
  double throughput = 0.0;   // images per second over the makespan
  std::size_t completed = 0;
  std::size_t max_queue = 0;
  std::size_t max_blocked = 0;  // servers held by a full downstream buffer
};

struct SimResult {
  SimMode mode = SimMode::Pipelined;
  std::size_t images = 0;
  std::uint64_t seed = 0;
  double makespan = 0.0;
  std::vector<StageStats> stages;

  // Stage with the largest service_mean / workers.
  std::size_t bottleneck() const;
};

// Tandem queue of multi-server stages fed by n images available at time
// zero. Bounded buffers block the upstream server after service. In
// sequential mode each stage finishes the whole batch before the next starts.
// Throws Error(InvalidModel).
SimResult simulate(std::size_t images, const std::vector<StageModel>& stages, std::uint64_t seed = 0,
                   SimMode mode = SimMode::Pipelined);

// max over stages of n * service_mean / workers.
double bottleneck_bound(std::size_t images, const std::vector<StageModel>& stages);

// Smallest worker count for the single stage with workers == 0 such that the
// simulated makespan meets the deadline. Exponential then binary search up
// to max_workers; throws Error(Infeasible) if max_workers does not suffice.
int min_workers_for_deadline(std::size_t images, std::vector<StageModel> stages, double deadline_seconds,
                             std::uint64_t seed = 0, SimMode mode = SimMode::Pipelined, int max_workers = 4096);

std::string format_sim_report(const SimResult& result);
nlohmann::json sim_report_json(const SimResult& result);

}  // namespace censusflow
