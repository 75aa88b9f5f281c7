#pragma once

#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "dynmatch/market.hpp"

namespace dynmatch {

/// The agents currently waiting in the market, plus the running potential
/// utility X_t = sum over pool members of exp(-delta (t - arrival)).
/// X_t is decayed exactly between events instead of rescanning the pool.
class PoolState {
public:
  explicit PoolState(double delta = 0.0) : delta_(delta) {}

  // Decays X up to time t. Times must be non-decreasing.
  void advance(double t);

  void add(const Agent& agent);
  // Removes and returns the agent; throws std::out_of_range if absent.
  Agent remove(AgentId id);

  const Agent* find(AgentId id) const;
  bool contains(AgentId id) const { return index_.count(id) != 0; }

  // Pool members in a deterministic (insertion / swap-remove) order.
  std::span<const AgentId> members() const noexcept { return order_; }
  std::size_t size() const noexcept { return order_.size(); }
  bool empty() const noexcept { return order_.empty(); }

  double potential_utility() const noexcept { return x_; }
  double now() const noexcept { return now_; }

private:
  struct Slot {
    Agent agent;
    std::size_t pos;
  };

  double delta_;
  double now_ = 0.0;
  double x_ = 0.0;
  std::vector<AgentId> order_;
  std::unordered_map<AgentId, Slot> index_;
};

}  // namespace dynmatch
