#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dynmatch/market.hpp"
#include "dynmatch/policies.hpp"
#include "dynmatch/rng.hpp"
#include "dynmatch/strategy.hpp"

namespace dynmatch {

enum class EventKind : std::uint8_t { Arrival, Criticality, AlphaTick, ReportTick };

struct Event {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Arrival;
  AgentId agent = 0;
  bool probe = false;  // arrival of a tagged (strategic) agent

  // Min-heap order on (time, seq).
  friend bool operator>(const Event& a, const Event& b) noexcept {
    return a.time > b.time || (a.time == b.time && a.seq > b.seq);
  }
};

/// Poisson arrivals at rate m with Exp(lambda) lifetimes, drawn from dedicated
/// streams so that every policy run on the same seed sees the same agents.
class ArrivalProcess {
public:
  explicit ArrivalProcess(const MarketParams& params);

  // (arrival time, criticality time) of the next agent.
  std::pair<double, double> next();

private:
  double m_;
  double lambda_;
  double clock_ = 0.0;
  Rng arrivals_;
  Rng lifetimes_;
};

/// The acceptance oracle a run with these params uses.
AcceptanceOracle make_oracle(const MarketParams& params);

/// All agents arriving in [0, T] for this seed, in arrival order with ids 0, 1, ...
/// Identical to the agents a simulation run without probes creates.
std::vector<Agent> sample_agents(const MarketParams& params);

enum class LogKind : std::uint8_t { Arrive, Critical, Tick, Report, Match, Perish };

struct LogRecord {
  double time = 0.0;
  LogKind kind = LogKind::Arrive;
  AgentId agent = 0;
  std::optional<AgentId> partner;

  friend bool operator==(const LogRecord&, const LogRecord&) = default;
};

std::string to_string(LogKind kind);

// One record per line: time<TAB>KIND<TAB>agent[<TAB>partner].
void write_event_log(std::ostream& out, const std::vector<LogRecord>& log);

struct Snapshot {
  double time = 0.0;
  std::size_t pool_size = 0;       // Z_t
  double potential_utility = 0.0;  // X_t
};

/// A stream of tagged agents injected one at a time into a running market:
/// the first at `start`, each later one `gap` after its predecessor departs.
/// Probe agents play `strategy`; everyone else reports truthfully.
struct Probe {
  double start = 0.0;
  std::size_t count = 1;
  double gap = 0.0;
  ReportStrategy strategy = ReportStrategy::truthful();
};

struct RunOptions {
  bool observe_critical = true;
  std::vector<double> snapshot_times;
  // When set, accumulate the time spent at each pool size after this time.
  std::optional<double> occupancy_after;
  bool record_events = false;
  bool record_agents = false;
  std::optional<Probe> probe;
};

struct RunMetrics {
  std::size_t arrived = 0;
  std::size_t matched = 0;  // agents, two per match
  std::size_t perished = 0;
  std::size_t in_pool_at_T = 0;
  double sum_discounted_utility = 0.0;
  double end_time = 0.0;  // T, or earlier when the probe finished first
  std::vector<double> sojourns;  // of matched agents
  std::vector<Snapshot> snapshots;
  std::vector<double> occupancy;  // occupancy[k] = time spent with Z = k
  std::vector<LogRecord> events;
  std::vector<Agent> agents;            // every non-probe agent with final status (record_agents)
  std::vector<double> probe_utilities;  // exp(-delta * sojourn) or 0, per probe agent

  double mean_sojourn() const;
  double mean_pool_size() const;  // time-average over the occupancy window
};

/// Runs one realization of the market on [0, T] under `policy`.
/// Deterministic for fixed (params, policy, options).
RunMetrics run(const MarketParams& params, const Policy& policy, const RunOptions& options = {});

/// (time, Z_t) pairs of the configured snapshot grid.
std::vector<std::pair<double, std::size_t>> snapshot_series(const RunMetrics& metrics);

}  // namespace dynmatch
