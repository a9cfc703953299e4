#include "censusflow/scheduler.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

#include "censusflow/error.hpp"

namespace censusflow {

namespace detail {

struct Job {
  std::vector<StageTask> tasks;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> completed{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::jthread> threads;
};

// Owns running jobs. Each job gets its own fixed set of threads pulling task
// indices from a shared counter.
class JobTable {
 public:
  JobHandle start(std::vector<StageTask> tasks, std::size_t threads, Transport& transport, Stage stage) {
    auto job = std::make_shared<Job>();
    job->tasks = std::move(tasks);
    const std::size_t n = std::max<std::size_t>(1, std::min(threads, job->tasks.size()));
    for (std::size_t t = 0; t < n && !job->tasks.empty(); ++t) {
      job->threads.emplace_back([job, &transport, stage] {
        for (std::size_t i = job->next++; i < job->tasks.size(); i = job->next++) {
          ExecutionContext ctx{transport, stage, 1};
          try {
            job->tasks[i](ctx);
          } catch (...) {
            std::lock_guard lock(job->error_mutex);
            if (!job->first_error) job->first_error = std::current_exception();
          }
          ++job->completed;
        }
      });
    }
    std::lock_guard lock(mutex_);
    const std::size_t id = next_id_++;
    jobs_.emplace(id, std::move(job));
    return {id};
  }

  JobStatus poll(JobHandle h) {
    auto job = find(h);
    const std::size_t done = job->completed.load();
    return {job->tasks.size(), done, done == job->tasks.size()};
  }

  void wait(JobHandle h) {
    auto job = find(h);
    for (auto& t : job->threads) {
      if (t.joinable()) t.join();
    }
    {
      std::lock_guard lock(mutex_);
      jobs_.erase(h.id);
    }
    if (job->first_error) std::rethrow_exception(job->first_error);
  }

  void join_all() {
    std::map<std::size_t, std::shared_ptr<Job>> jobs;
    {
      std::lock_guard lock(mutex_);
      jobs.swap(jobs_);
    }
    for (auto& [id, job] : jobs) {
      for (auto& t : job->threads) {
        if (t.joinable()) t.join();
      }
    }
  }

 private:
  std::shared_ptr<Job> find(JobHandle h) {
    std::lock_guard lock(mutex_);
    const auto it = jobs_.find(h.id);
    if (it == jobs_.end()) throw Error(ErrorCode::ConfigInvalid, "unknown job handle " + std::to_string(h.id));
    return it->second;
  }

  std::mutex mutex_;
  std::size_t next_id_ = 1;
  std::map<std::size_t, std::shared_ptr<Job>> jobs_;
};

}  // namespace detail

LocalExecutor::LocalExecutor(Transport& network, std::size_t compute_workers, std::size_t io_workers)
    : network_(network),
      compute_workers_(compute_workers),
      io_workers_(io_workers),
      jobs_(std::make_unique<detail::JobTable>()) {
  if (compute_workers_ == 0 || io_workers_ == 0) throw Error(ErrorCode::ConfigInvalid, "worker counts must be >= 1");
}

LocalExecutor::~LocalExecutor() { jobs_->join_all(); }

JobHandle LocalExecutor::submit(Stage stage, std::vector<StageTask> tasks) {
  return jobs_->start(std::move(tasks), parallelism(stage), network_, stage);
}

JobStatus LocalExecutor::poll(JobHandle handle) { return jobs_->poll(handle); }
void LocalExecutor::wait(JobHandle handle) { jobs_->wait(handle); }

std::size_t LocalExecutor::parallelism(Stage stage) const {
  return stage == Stage::Process ? compute_workers_ : io_workers_;
}

SimulatedBatchScheduler::SimulatedBatchScheduler(Transport& network, std::size_t compute_nodes, std::size_t cpu_nodes)
    : network_(network),
      compute_nodes_(compute_nodes),
      cpu_nodes_(cpu_nodes),
      jobs_(std::make_unique<detail::JobTable>()) {
  if (compute_nodes_ == 0 || cpu_nodes_ == 0) throw Error(ErrorCode::ConfigInvalid, "node counts must be >= 1");
}

SimulatedBatchScheduler::~SimulatedBatchScheduler() { jobs_->join_all(); }

JobHandle SimulatedBatchScheduler::submit(Stage stage, std::vector<StageTask> tasks) {
  Transport& transport = stage == Stage::Process ? static_cast<Transport&>(isolated_) : network_;
  return jobs_->start(std::move(tasks), parallelism(stage), transport, stage);
}

JobStatus SimulatedBatchScheduler::poll(JobHandle handle) { return jobs_->poll(handle); }
void SimulatedBatchScheduler::wait(JobHandle handle) { jobs_->wait(handle); }

std::size_t SimulatedBatchScheduler::parallelism(Stage stage) const {
  return stage == Stage::Process ? compute_nodes_ : cpu_nodes_;
}

}  // namespace censusflow
