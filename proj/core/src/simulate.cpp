#include "censusflow/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include <fmt/format.h>

#include "censusflow/error.hpp"
#include "censusflow/rng.hpp"

namespace censusflow {

namespace {

struct Event {
  double time;
  std::uint64_t seq;
  std::size_t stage;

  bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
};

struct StageState {
  std::size_t queue = 0;
  int busy = 0;
  int blocked = 0;
  StageStats stats;
};

// Event loop over one tandem line. The first stage draws from an unbounded
// source, so its queue_capacity is not used.
class TandemSim {
 public:
  TandemSim(std::size_t images, const std::vector<StageModel>& models, std::uint64_t seed)
      : models_(models), source_(images), images_(images) {
    for (std::size_t i = 0; i < models.size(); ++i) {
      states_.emplace_back();
      states_.back().stats.name = models[i].name;
      states_.back().stats.service_mean = models[i].service_mean;
      states_.back().stats.workers = models[i].workers;
      rngs_.emplace_back(mix_seed(seed, i));
    }
  }

  double run() {
    double now = 0.0;
    for (int w = 0; w < models_.front().workers && source_ > 0; ++w) {
      --source_;
      start(0, now);
    }
    while (!events_.empty()) {
      const Event e = events_.top();
      events_.pop();
      now = e.time;
      complete(e.stage, now);
    }
    if (done_ != images_) throw Error(ErrorCode::InvalidModel, "simulation deadlocked");
    return now;
  }

  std::vector<StageStats> stats(double makespan) const {
    std::vector<StageStats> out;
    for (const auto& s : states_) {
      StageStats st = s.stats;
      if (makespan > 0.0) {
        st.utilization = st.busy_time / (static_cast<double>(st.workers) * makespan);
        st.throughput = static_cast<double>(st.completed) / makespan;
      }
      out.push_back(st);
    }
    return out;
  }

 private:
  double draw(std::size_t i) {
    const StageModel& m = models_[i];
    switch (m.distribution) {
      case ServiceDistribution::Deterministic: return m.service_mean;
      case ServiceDistribution::Exponential: return rngs_[i].exponential(m.service_mean);
      case ServiceDistribution::Lognormal: {
        const double sigma2 = std::log1p(m.cv * m.cv);
        const double mu = std::log(m.service_mean) - sigma2 / 2.0;
        return std::exp(mu + std::sqrt(sigma2) * rngs_[i].normal());
      }
    }
    return m.service_mean;
  }

  bool has_free_server(std::size_t i) const {
    return states_[i].busy + states_[i].blocked < models_[i].workers;
  }

  bool can_accept(std::size_t i) const {
    if (has_free_server(i)) return true;
    const auto& cap = models_[i].queue_capacity;
    return !cap || states_[i].queue < *cap;
  }

  void start(std::size_t i, double now) {
    const double d = draw(i);
    ++states_[i].busy;
    states_[i].stats.busy_time += d;
    events_.push({now + d, seq_++, i});
  }

  void arrive(std::size_t i, double now) {
    if (has_free_server(i)) {
      start(i, now);
      return;
    }
    auto& s = states_[i];
    ++s.queue;
    s.stats.max_queue = std::max(s.stats.max_queue, s.queue);
  }

  void complete(std::size_t i, double now) {
    auto& s = states_[i];
    --s.busy;
    ++s.stats.completed;
    if (i + 1 == models_.size()) {
      ++done_;
    } else if (can_accept(i + 1)) {
      arrive(i + 1, now);
    } else {
      ++s.blocked;
      s.stats.max_blocked = std::max<std::size_t>(s.stats.max_blocked, static_cast<std::size_t>(s.blocked));
      return;
    }
    server_freed(i, now);
  }

  // A server of stage i became idle: feed it from its queue, the source, or
  // a server of stage i-1 blocked on this stage.
  void server_freed(std::size_t i, double now) {
    auto& s = states_[i];
    if (s.queue > 0) {
      --s.queue;
      start(i, now);
      slot_opened(i, now);
    } else if (i == 0) {
      if (source_ > 0) {
        --source_;
        start(0, now);
      }
    } else if (states_[i - 1].blocked > 0) {
      --states_[i - 1].blocked;
      start(i, now);
      server_freed(i - 1, now);
    }
  }

  void slot_opened(std::size_t i, double now) {
    if (i == 0 || states_[i - 1].blocked == 0) return;
    --states_[i - 1].blocked;
    ++states_[i].queue;
    server_freed(i - 1, now);
  }

  const std::vector<StageModel>& models_;
  std::vector<StageState> states_;
  std::vector<Rng> rngs_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
  std::uint64_t seq_ = 0;
  std::size_t source_;
  std::size_t images_;
  std::size_t done_ = 0;
};

void validate_models(const std::vector<StageModel>& stages, bool allow_unknown) {
  if (stages.empty()) throw Error(ErrorCode::InvalidModel, "at least one stage is required");
  for (const auto& s : stages) s.validate(allow_unknown);
}

}  // namespace

void StageModel::validate(bool allow_unknown) const {
  if (!(service_mean > 0.0) || !std::isfinite(service_mean))
    throw Error(ErrorCode::InvalidModel, "stage '" + name + "': service time must be positive");
  if (workers < 0 || (workers == 0 && !allow_unknown))
    throw Error(ErrorCode::InvalidModel, "stage '" + name + "': workers must be >= 1");
  if (distribution == ServiceDistribution::Lognormal && !(cv > 0.0))
    throw Error(ErrorCode::InvalidModel, "stage '" + name + "': lognormal service needs cv > 0");
}

StageModel parse_stage_spec(std::string_view spec) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto colon = spec.find(':', start);
    parts.emplace_back(spec.substr(start, colon == std::string_view::npos ? std::string_view::npos : colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  if (parts.size() < 3 || parts.size() > 5 || parts[0].empty())
    throw Error(ErrorCode::InvalidModel, "stage spec '" + std::string(spec) + "': expected name:time:workers");
  StageModel m;
  m.name = parts[0];
  try {
    std::size_t used = 0;
    m.service_mean = std::stod(parts[1], &used);
    if (used != parts[1].size()) throw std::invalid_argument("trailing");
    if (parts[2] == "?") {
      m.workers = 0;
    } else {
      m.workers = std::stoi(parts[2], &used);
      if (used != parts[2].size()) throw std::invalid_argument("trailing");
    }
    if (parts.size() >= 4) {
      if (parts[3] == "exp" && parts.size() == 4) {
        m.distribution = ServiceDistribution::Exponential;
      } else if (parts[3] == "lognormal" && parts.size() == 5) {
        m.distribution = ServiceDistribution::Lognormal;
        m.cv = std::stod(parts[4], &used);
        if (used != parts[4].size()) throw std::invalid_argument("trailing");
      } else if (parts[3] == "det" && parts.size() == 4) {
        m.distribution = ServiceDistribution::Deterministic;
      } else {
        throw std::invalid_argument("distribution");
      }
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidModel, "stage spec '" + std::string(spec) + "' is malformed");
  }
  m.validate(true);
  return m;
}

double parse_duration(std::string_view text) {
  if (text.empty()) throw Error(ErrorCode::InvalidModel, "empty duration");
  double scale = 1.0;
  switch (text.back()) {
    case 'd': scale = 86400.0; break;
    case 'h': scale = 3600.0; break;
    case 'm': scale = 60.0; break;
    case 's': scale = 1.0; break;
    default: scale = 0.0;
  }
  const std::string number(scale == 0.0 ? text : text.substr(0, text.size() - 1));
  if (scale == 0.0) scale = 1.0;
  try {
    std::size_t used = 0;
    const double v = std::stod(number, &used);
    if (used != number.size() || !(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("duration");
    return v * scale;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidModel, "duration '" + std::string(text) + "' is malformed");
  }
}

std::string_view to_string(SimMode mode) { return mode == SimMode::Pipelined ? "pipelined" : "sequential"; }

std::size_t SimResult::bottleneck() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < stages.size(); ++i) {
    if (stages[i].service_mean / stages[i].workers > stages[best].service_mean / stages[best].workers) best = i;
  }
  return best;
}

SimResult simulate(std::size_t images, const std::vector<StageModel>& stages, std::uint64_t seed, SimMode mode) {
  if (images < 1) throw Error(ErrorCode::InvalidModel, "at least one image is required");
  validate_models(stages, false);
  SimResult result;
  result.mode = mode;
  result.images = images;
  result.seed = seed;
  if (mode == SimMode::Pipelined) {
    TandemSim sim(images, stages, seed);
    result.makespan = sim.run();
    result.stages = sim.stats(result.makespan);
    return result;
  }
  // Sequential: each stage runs the whole batch alone, one after the other.
  std::vector<StageStats> per_stage;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const std::vector<StageModel> one{stages[i]};
    TandemSim sim(images, one, mix_seed(seed, i));
    const double span = sim.run();
    result.makespan += span;
    per_stage.push_back(sim.stats(span).front());
  }
  for (auto& st : per_stage) {
    st.utilization = st.busy_time / (static_cast<double>(st.workers) * result.makespan);
    st.throughput = static_cast<double>(st.completed) / result.makespan;
  }
  result.stages = std::move(per_stage);
  return result;
}

double bottleneck_bound(std::size_t images, const std::vector<StageModel>& stages) {
  double bound = 0.0;
  for (const auto& s : stages)
    bound = std::max(bound, static_cast<double>(images) * s.service_mean / static_cast<double>(s.workers));
  return bound;
}

int min_workers_for_deadline(std::size_t images, std::vector<StageModel> stages, double deadline_seconds,
                             std::uint64_t seed, SimMode mode, int max_workers) {
  validate_models(stages, true);
  if (!(deadline_seconds > 0.0)) throw Error(ErrorCode::InvalidModel, "deadline must be positive");
  if (max_workers < 1) throw Error(ErrorCode::InvalidModel, "worker cap must be >= 1");
  std::size_t unknown = stages.size();
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].workers == 0) {
      if (unknown != stages.size()) throw Error(ErrorCode::InvalidModel, "more than one unknown worker count");
      unknown = i;
    }
  }
  if (unknown == stages.size()) throw Error(ErrorCode::InvalidModel, "no stage has an unknown worker count");

  auto fits = [&](int workers) {
    stages[unknown].workers = workers;
    return simulate(images, stages, seed, mode).makespan <= deadline_seconds;
  };
  if (!fits(max_workers))
    throw Error(ErrorCode::Infeasible, fmt::format("stage '{}' cannot meet a {:.1f} s deadline with {} workers",
                                                   stages[unknown].name, deadline_seconds, max_workers));
  int hi = 1;
  while (hi < max_workers && !fits(hi)) hi = std::min(max_workers, hi * 2);
  int lo = hi / 2 + 1;
  if (hi == 1) return 1;
  // Invariant: fits(hi), and every count below lo was tested or implied to fail.
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (fits(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return hi;
}

std::string format_sim_report(const SimResult& r) {
  std::string out = fmt::format("images: {}  mode: {}  seed: {}\n", r.images, to_string(r.mode), r.seed);
  out += fmt::format("{:<12} {:>9} {:>8} {:>12} {:>14} {:>10}\n", "stage", "service_s", "workers", "utilization",
                     "throughput/s", "max_queue");
  const std::size_t b = r.bottleneck();
  for (std::size_t i = 0; i < r.stages.size(); ++i) {
    const auto& s = r.stages[i];
    out += fmt::format("{:<12} {:>9.3f} {:>8} {:>12.4f} {:>14.4f} {:>10}{}\n", s.name, s.service_mean, s.workers,
                       s.utilization, s.throughput, s.max_queue, i == b ? "  <- bottleneck" : "");
  }
  out += fmt::format("makespan: {:.1f} s ({:.2f} days)\n", r.makespan, r.makespan / 86400.0);
  return out;
}

nlohmann::json sim_report_json(const SimResult& r) {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : r.stages) {
    stages.push_back({{"name", s.name},
                      {"service_mean_s", s.service_mean},
                      {"workers", s.workers},
                      {"utilization", s.utilization},
                      {"throughput_per_s", s.throughput},
                      {"completed", s.completed},
                      {"max_queue", s.max_queue},
                      {"max_blocked", s.max_blocked}});
  }
  return {{"images", r.images},
          {"mode", to_string(r.mode)},
          {"seed", r.seed},
          {"makespan_s", r.makespan},
          {"makespan_days", r.makespan / 86400.0},
          {"bottleneck", r.stages.empty() ? "" : r.stages[r.bottleneck()].name},
          {"stages", stages}};
}

}  // namespace censusflow
