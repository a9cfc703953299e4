#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "censusflow/iiif.hpp"
#include "censusflow/manifest.hpp"
#include "censusflow/workers.hpp"

namespace censusflow {

using StageTask = std::function<void(ExecutionContext&)>;

struct JobHandle {
  std::size_t id = 0;
};

struct JobStatus {
  std::size_t total = 0;
  std::size_t completed = 0;
  bool done = false;
};

// Runs batches of stage tasks. A task that throws does not stop the batch;
// the exception is rethrown by wait() after every task has run.
class SchedulerAdapter {
 public:
  virtual ~SchedulerAdapter() = default;
  virtual JobHandle submit(Stage stage, std::vector<StageTask> tasks) = 0;
  virtual JobStatus poll(JobHandle handle) = 0;
  virtual void wait(JobHandle handle) = 0;
  virtual std::size_t parallelism(Stage stage) const = 0;
  virtual std::string name() const = 0;
};

namespace detail {
class JobTable;
}

// In-process thread pools. Every stage sees the connected transport.
class LocalExecutor : public SchedulerAdapter {
 public:
  LocalExecutor(Transport& network, std::size_t compute_workers = 4, std::size_t io_workers = 14);
  ~LocalExecutor() override;

  JobHandle submit(Stage stage, std::vector<StageTask> tasks) override;
  JobStatus poll(JobHandle handle) override;
  void wait(JobHandle handle) override;
  std::size_t parallelism(Stage stage) const override;
  std::string name() const override { return "local"; }

 private:
  Transport& network_;
  std::size_t compute_workers_;
  std::size_t io_workers_;
  std::unique_ptr<detail::JobTable> jobs_;
};

// Models a batch cluster: connected CPU nodes for pre/post stages and
// internet-isolated compute nodes whose tasks get a NullTransport.
class SimulatedBatchScheduler : public SchedulerAdapter {
 public:
  SimulatedBatchScheduler(Transport& network, std::size_t compute_nodes = 4, std::size_t cpu_nodes = 14);
  ~SimulatedBatchScheduler() override;

  JobHandle submit(Stage stage, std::vector<StageTask> tasks) override;
  JobStatus poll(JobHandle handle) override;
  void wait(JobHandle handle) override;
  std::size_t parallelism(Stage stage) const override;
  std::string name() const override { return "simulated-batch"; }

  // Transport calls refused on compute nodes so far.
  std::size_t isolation_violations() const { return isolated_.attempts(); }

 private:
  Transport& network_;
  NullTransport isolated_;
  std::size_t compute_nodes_;
  std::size_t cpu_nodes_;
  std::unique_ptr<detail::JobTable> jobs_;
};

}  // namespace censusflow
