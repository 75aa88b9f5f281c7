#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dynmatch/market.hpp"
#include "dynmatch/pool.hpp"
#include "dynmatch/rng.hpp"

namespace dynmatch {

enum class PolicyKind { Greedy, Patient, PatientAlpha, NoMatch, Mechanism };

// How Greedy picks among several acceptable pool members.
enum class NeighborRule { UniformRandom, EarliestArrival };

/// An online matching policy. Greedy acts on arrivals only; the Patient family
/// (Patient, PatientAlpha, Mechanism) acts only on criticality, clock ticks and
/// criticality reports. Patient is PatientAlpha with alpha = +inf.
struct Policy {
  PolicyKind kind = PolicyKind::Greedy;
  NeighborRule neighbor_rule = NeighborRule::UniformRandom;
  double alpha = kInfinity;

  static Policy greedy(NeighborRule rule = NeighborRule::UniformRandom) { return {PolicyKind::Greedy, rule, kInfinity}; }
  static Policy patient() { return {PolicyKind::Patient, NeighborRule::UniformRandom, kInfinity}; }
  static Policy patient_alpha(double alpha) { return {PolicyKind::PatientAlpha, NeighborRule::UniformRandom, alpha}; }
  static Policy mechanism(double alpha) { return {PolicyKind::Mechanism, NeighborRule::UniformRandom, alpha}; }

  bool patient_family() const noexcept {
    return kind == PolicyKind::Patient || kind == PolicyKind::PatientAlpha || kind == PolicyKind::Mechanism;
  }
  // Clock mean actually in force (Patient ignores alpha).
  double effective_alpha() const noexcept { return kind == PolicyKind::Patient ? kInfinity : alpha; }

  std::string name() const;
  // Accepts greedy, greedy_fifo, patient, patient_alpha, no_match, mechanism.
  static Policy parse(const std::string& name, double alpha = kInfinity);
};

/// Policy that never matches anyone.
Policy no_match_policy();

std::string to_string(NeighborRule rule);
NeighborRule parse_neighbor_rule(const std::string& text);

/// Greedy decision for a newcomer who is not yet in the pool: one acceptable
/// pool member chosen by the rule, or nothing.
std::optional<AgentId> greedy_on_arrival(const PoolState& pool, const Agent& newcomer, NeighborRule rule,
                                         const AcceptanceOracle& oracle, Rng& rng);

/// Patient decision for a critical pool member: a uniformly random acceptable
/// partner, or nothing (the agent perishes).
std::optional<AgentId> patient_on_critical(const PoolState& pool, const Agent& critical,
                                           const AcceptanceOracle& oracle, Rng& rng);

struct MatchWith {
  AgentId partner;
};
struct RemoveAgent {};
using TickOutcome = std::variant<MatchWith, RemoveAgent>;

/// Patient(alpha) decision on a clock tick, criticality or report: match
/// uniformly, or remove the agent for good when she has no acceptable partner.
TickOutcome patient_alpha_on_tick(const PoolState& pool, const Agent& agent, const AcceptanceOracle& oracle, Rng& rng);

using MatchedPair = std::pair<AgentId, AgentId>;

/// Adjacency of the realizable acceptable-pair graph over `agents`: i ~ j iff
/// the oracle accepts (id_i, id_j) and the presence intervals
/// [arrival, criticality) overlap. Indices refer to positions in `agents`.
std::vector<std::vector<int>> feasibility_graph(std::span<const Agent> agents, const AcceptanceOracle& oracle);

/// Omniscient benchmark: a maximum-cardinality matching of the feasibility graph.
std::vector<MatchedPair> omniscient_matching(std::span<const Agent> agents, const AcceptanceOracle& oracle);

}  // namespace dynmatch
