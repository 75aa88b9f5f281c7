#include "dynmatch/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "dynmatch/pool.hpp"

namespace dynmatch {

ArrivalProcess::ArrivalProcess(const MarketParams& params)
    : m_(params.m),
      lambda_(params.lambda),
      arrivals_(make_stream(params.seed, Stream::Arrivals)),
      lifetimes_(make_stream(params.seed, Stream::Lifetimes)) {}

std::pair<double, double> ArrivalProcess::next() {
  clock_ += arrivals_.exponential(m_);
  double life = lifetimes_.exponential(lambda_);
  // criticality_time > arrival_time must hold even for a zero draw.
  if (!(life > 0.0)) life = std::numeric_limits<double>::min();
  return {clock_, clock_ + life};
}

AcceptanceOracle make_oracle(const MarketParams& params) {
  return AcceptanceOracle(derive_seed(params.seed, {static_cast<std::uint64_t>(Stream::Oracle)}),
                          params.acceptance_probability());
}

std::vector<Agent> sample_agents(const MarketParams& params) {
  params.validate();
  ArrivalProcess process(params);
  std::vector<Agent> agents;
  for (AgentId id = 0;; ++id) {
    const auto [arrival, critical] = process.next();
    if (arrival > params.horizon) break;
    Agent a;
    a.id = id;
    a.arrival_time = arrival;
    a.criticality_time = critical;
    agents.push_back(a);
  }
  return agents;
}

std::string to_string(LogKind kind) {
  switch (kind) {
    case LogKind::Arrive:
      return "ARRIVE";
    case LogKind::Critical:
      return "CRITICAL";
    case LogKind::Tick:
      return "TICK";
    case LogKind::Report:
      return "REPORT";
    case LogKind::Match:
      return "MATCH";
    case LogKind::Perish:
      return "PERISH";
  }
  return "?";
}

void write_event_log(std::ostream& out, const std::vector<LogRecord>& log) {
  const auto old_precision = out.precision(17);
  for (const auto& r : log) {
    out << r.time << '\t' << to_string(r.kind) << '\t' << r.agent;
    if (r.partner) out << '\t' << *r.partner;
    out << '\n';
  }
  out.precision(old_precision);
}

double RunMetrics::mean_sojourn() const {
  if (sojourns.empty()) return 0.0;
  double s = 0.0;
  for (double x : sojourns) s += x;
  return s / static_cast<double>(sojourns.size());
}

double RunMetrics::mean_pool_size() const {
  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t k = 0; k < occupancy.size(); ++k) {
    total += occupancy[k];
    weighted += occupancy[k] * static_cast<double>(k);
  }
  return total > 0.0 ? weighted / total : 0.0;
}

namespace {

constexpr AgentId kProbeIdBit = AgentId{1} << 63;

class Simulation {
public:
  Simulation(const MarketParams& params, const Policy& policy, const RunOptions& options)
      : params_(params),
        policy_(policy),
        options_(options),
        alpha_(policy.effective_alpha()),
        oracle_(make_oracle(params)),
        pool_(params.delta),
        arrivals_(params),
        clocks_(make_stream(params.seed, Stream::Clocks)),
        choices_(make_stream(params.seed, Stream::Policy)),
        reports_(make_stream(params.seed, Stream::Reports)),
        probe_rng_(make_stream(params.seed, Stream::Probe)) {
    snapshot_times_ = options.snapshot_times;
    std::sort(snapshot_times_.begin(), snapshot_times_.end());
  }

  RunMetrics run() {
    schedule_next_arrival();
    if (options_.probe && options_.probe->count > 0) push(options_.probe->start, EventKind::Arrival, 0, true);

    double now = 0.0;
    while (!queue_.empty() && !probe_done()) {
      const Event ev = queue_.top();
      if (ev.time > params_.horizon) break;
      queue_.pop();
      advance_to(ev.time);
      now = ev.time;
      dispatch(ev);
    }
    const double end = probe_done() ? now : params_.horizon;
    advance_to(end);
    metrics_.end_time = end;
    metrics_.in_pool_at_T = pool_.size();
    if (options_.record_agents) {
      for (AgentId id : pool_.members())
        if (!(id & kProbeIdBit)) agents_[id] = *pool_.find(id);
      metrics_.agents = std::move(agents_);
    }
    return std::move(metrics_);
  }

private:
  bool alpha_clock() const { return policy_.patient_family() && !std::isinf(alpha_); }

  bool probe_done() const { return options_.probe && probes_finished_ >= options_.probe->count; }

  void push(double t, EventKind kind, AgentId agent, bool probe = false) {
    queue_.push(Event{t, seq_++, kind, agent, probe});
  }

  void log(double t, LogKind kind, AgentId a, std::optional<AgentId> b = std::nullopt) {
    if (options_.record_events) metrics_.events.push_back(LogRecord{t, kind, a, b});
  }

  void schedule_next_arrival() {
    pending_arrival_ = arrivals_.next();
    push(pending_arrival_.first, EventKind::Arrival, 0);
  }

  // Records snapshots and occupancy up to time t, then decays X_t.
  void advance_to(double t) {
    while (next_snapshot_ < snapshot_times_.size() && snapshot_times_[next_snapshot_] <= t) {
      const double ts = snapshot_times_[next_snapshot_++];
      if (ts > params_.horizon) continue;
      pool_.advance(ts);
      metrics_.snapshots.push_back(Snapshot{ts, pool_.size(), pool_.potential_utility()});
    }
    if (options_.occupancy_after) {
      const double from = std::max(last_time_, *options_.occupancy_after);
      if (t > from) {
        auto& occ = metrics_.occupancy;
        if (occ.size() <= pool_.size()) occ.resize(pool_.size() + 1, 0.0);
        occ[pool_.size()] += t - from;
      }
    }
    last_time_ = std::max(last_time_, t);
    pool_.advance(t);
  }

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case EventKind::Arrival:
        on_arrival(ev);
        break;
      case EventKind::Criticality:
        on_criticality(ev);
        break;
      case EventKind::AlphaTick:
        if (pool_.contains(ev.agent)) {
          log(ev.time, LogKind::Tick, ev.agent);
          attempt_or_remove(ev.agent, ev.time);
        }
        break;
      case EventKind::ReportTick:
        if (pool_.contains(ev.agent)) {
          log(ev.time, LogKind::Report, ev.agent);
          attempt_or_remove(ev.agent, ev.time);
        }
        break;
    }
  }

  void on_arrival(const Event& ev) {
    Agent a;
    // Probes live in their own id space so the market's ids, and hence its
    // acceptance graph, do not depend on how many probes came before.
    a.id = ev.probe ? kProbeIdBit | probes_started_++ : next_id_++;
    a.arrival_time = ev.time;
    if (ev.probe) {
      a.criticality_time = ev.time + std::max(probe_rng_.exponential(params_.lambda), std::numeric_limits<double>::min());
      a.strategy = 0;
    } else {
      a.criticality_time = pending_arrival_.second;
      schedule_next_arrival();
    }
    ++metrics_.arrived;
    if (options_.record_agents && !ev.probe) agents_.push_back(a);
    log(ev.time, LogKind::Arrive, a.id);
    push(a.criticality_time, EventKind::Criticality, a.id);

    if (alpha_clock()) {
      Rng& rng = ev.probe ? probe_rng_ : clocks_;
      const double tick = ev.time + rng.exponential(alpha_ == 0.0 ? kInfinity : 1.0 / alpha_);
      if (tick < a.criticality_time) push(tick, EventKind::AlphaTick, a.id);
    }
    if (policy_.kind == PolicyKind::Mechanism && a.strategy) {
      const double report = ev.time + options_.probe->strategy.sample_report_delay(reports_);
      if (report < a.criticality_time) push(report, EventKind::ReportTick, a.id);
    }

    if (policy_.kind == PolicyKind::Greedy) {
      if (auto partner = greedy_on_arrival(pool_, a, policy_.neighbor_rule, oracle_, choices_)) {
        Agent b = pool_.remove(*partner);
        finish_match(a, b, ev.time);
        return;
      }
    }
    pool_.add(a);
  }

  void on_criticality(const Event& ev) {
    if (!pool_.contains(ev.agent)) return;
    log(ev.time, LogKind::Critical, ev.agent);
    if (policy_.patient_family()) {
      attempt_or_remove(ev.agent, ev.time);
      return;
    }
    perish(ev.agent, ev.time);
  }

  // Patient-family match attempt: uniform partner, or the agent leaves unmatched.
  void attempt_or_remove(AgentId id, double t) {
    const Agent& agent = *pool_.find(id);
    const TickOutcome outcome = patient_alpha_on_tick(pool_, agent, oracle_, choices_);
    if (const auto* m = std::get_if<MatchWith>(&outcome)) {
      Agent a = pool_.remove(id);
      Agent b = pool_.remove(m->partner);
      finish_match(a, b, t);
    } else {
      perish(id, t);
    }
  }

  void perish(AgentId id, double t) {
    Agent a = pool_.remove(id);
    a.mark_perished(t);
    ++metrics_.perished;
    log(t, LogKind::Perish, id);
    depart(a, t);
  }

  // `a` initiated the match (newcomer or critical / ticking agent).
  void finish_match(Agent& a, Agent& b, double t) {
    a.mark_matched(b.id, t);
    b.mark_matched(a.id, t);
    log(t, LogKind::Match, a.id, b.id);
    for (Agent* x : {&a, &b}) {
      const double sojourn = t - x->arrival_time;
      ++metrics_.matched;
      metrics_.sojourns.push_back(sojourn);
      metrics_.sum_discounted_utility += std::exp(-params_.delta * sojourn);
      depart(*x, t);
    }
  }

  void depart(const Agent& a, double t) {
    if (options_.record_agents && !a.strategy) agents_[a.id] = a;
    if (a.strategy) {
      metrics_.probe_utilities.push_back(a.matched() ? std::exp(-params_.delta * (t - a.arrival_time)) : 0.0);
      ++probes_finished_;
      if (!probe_done()) push(t + options_.probe->gap, EventKind::Arrival, 0, true);
    }
  }

  const MarketParams& params_;
  const Policy& policy_;
  const RunOptions& options_;
  double alpha_;
  AcceptanceOracle oracle_;
  PoolState pool_;
  ArrivalProcess arrivals_;
  Rng clocks_;
  Rng choices_;
  Rng reports_;
  Rng probe_rng_;

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  AgentId next_id_ = 0;
  std::pair<double, double> pending_arrival_{};
  std::vector<double> snapshot_times_;
  std::size_t next_snapshot_ = 0;
  double last_time_ = 0.0;
  std::size_t probes_started_ = 0;
  std::size_t probes_finished_ = 0;
  std::vector<Agent> agents_;  // indexed by id
  RunMetrics metrics_;
};

}  // namespace

RunMetrics run(const MarketParams& params, const Policy& policy, const RunOptions& options) {
  params.validate();
  if (policy.patient_family() && !options.observe_critical)
    throw std::invalid_argument("policy '" + policy.name() + "' needs to observe critical agents");
  if (!(policy.alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  return Simulation(params, policy, options).run();
}

std::vector<std::pair<double, std::size_t>> snapshot_series(const RunMetrics& metrics) {
  std::vector<std::pair<double, std::size_t>> out;
  out.reserve(metrics.snapshots.size());
  for (const auto& s : metrics.snapshots) out.emplace_back(s.time, s.pool_size);
  return out;
}

}  // namespace dynmatch
