#include "dynmatch/policies.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "dynmatch/matching.hpp"

namespace dynmatch {

namespace {

// Acceptable pool members of `agent`, in pool order.
std::vector<AgentId> neighbors(const PoolState& pool, const Agent& agent, const AcceptanceOracle& oracle) {
  std::vector<AgentId> out;
  for (AgentId other : pool.members()) {
    if (other != agent.id && oracle.query_unchecked(agent.id, other)) out.push_back(other);
  }
  return out;
}

}  // namespace

std::string Policy::name() const {
  switch (kind) {
    case PolicyKind::Greedy:
      return neighbor_rule == NeighborRule::EarliestArrival ? "greedy_fifo" : "greedy";
    case PolicyKind::Patient:
      return "patient";
    case PolicyKind::PatientAlpha:
      return "patient_alpha";
    case PolicyKind::NoMatch:
      return "no_match";
    case PolicyKind::Mechanism:
      return "mechanism";
  }
  return "unknown";
}

Policy Policy::parse(const std::string& name, double alpha) {
  if (name == "greedy") return greedy(NeighborRule::UniformRandom);
  if (name == "greedy_fifo") return greedy(NeighborRule::EarliestArrival);
  if (name == "patient") return patient();
  if (name == "patient_alpha") return patient_alpha(alpha);
  if (name == "no_match") return no_match_policy();
  if (name == "mechanism") return mechanism(alpha);
  throw std::invalid_argument("unknown policy '" + name + "'");
}

Policy no_match_policy() { return {PolicyKind::NoMatch, NeighborRule::UniformRandom, kInfinity}; }

std::string to_string(NeighborRule rule) {
  return rule == NeighborRule::EarliestArrival ? "earliest_arrival" : "uniform";
}

NeighborRule parse_neighbor_rule(const std::string& text) {
  if (text == "uniform" || text == "uniform_random") return NeighborRule::UniformRandom;
  if (text == "earliest_arrival" || text == "fifo") return NeighborRule::EarliestArrival;
  throw std::invalid_argument("unknown neighbor rule '" + text + "'");
}

std::optional<AgentId> greedy_on_arrival(const PoolState& pool, const Agent& newcomer, NeighborRule rule,
                                         const AcceptanceOracle& oracle, Rng& rng) {
  const auto acceptable = neighbors(pool, newcomer, oracle);
  if (acceptable.empty()) return std::nullopt;
  if (rule == NeighborRule::EarliestArrival) return *std::min_element(acceptable.begin(), acceptable.end());
  return acceptable[rng.index(acceptable.size())];
}

std::optional<AgentId> patient_on_critical(const PoolState& pool, const Agent& critical,
                                           const AcceptanceOracle& oracle, Rng& rng) {
  const auto acceptable = neighbors(pool, critical, oracle);
  if (acceptable.empty()) return std::nullopt;
  return acceptable[rng.index(acceptable.size())];
}

TickOutcome patient_alpha_on_tick(const PoolState& pool, const Agent& agent, const AcceptanceOracle& oracle,
                                  Rng& rng) {
  if (auto partner = patient_on_critical(pool, agent, oracle, rng)) return MatchWith{*partner};
  return RemoveAgent{};
}

std::vector<std::vector<int>> feasibility_graph(std::span<const Agent> agents, const AcceptanceOracle& oracle) {
  const std::size_t n = agents.size();
  std::vector<std::size_t> by_arrival(n);
  std::iota(by_arrival.begin(), by_arrival.end(), std::size_t{0});
  std::sort(by_arrival.begin(), by_arrival.end(), [&](std::size_t a, std::size_t b) {
    return agents[a].arrival_time < agents[b].arrival_time ||
           (agents[a].arrival_time == agents[b].arrival_time && agents[a].id < agents[b].id);
  });

  std::vector<std::vector<int>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Agent& a = agents[by_arrival[i]];
    // Later arrivals overlap a iff they arrive before a becomes critical.
    for (std::size_t j = i + 1; j < n; ++j) {
      const Agent& b = agents[by_arrival[j]];
      if (b.arrival_time >= a.criticality_time) break;
      if (a.id != b.id && oracle.query_unchecked(a.id, b.id)) {
        adj[by_arrival[i]].push_back(static_cast<int>(by_arrival[j]));
        adj[by_arrival[j]].push_back(static_cast<int>(by_arrival[i]));
      }
    }
  }
  return adj;
}

std::vector<MatchedPair> omniscient_matching(std::span<const Agent> agents, const AcceptanceOracle& oracle) {
  const auto mate = maximum_matching(feasibility_graph(agents, oracle));
  std::vector<MatchedPair> pairs;
  for (std::size_t v = 0; v < mate.size(); ++v) {
    if (mate[v] > static_cast<int>(v)) pairs.emplace_back(agents[v].id, agents[static_cast<std::size_t>(mate[v])].id);
  }
  return pairs;
}

}  // namespace dynmatch
