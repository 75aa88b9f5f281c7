#include "dynmatch/pool.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dynmatch {

void PoolState::advance(double t) {
  if (t < now_) throw std::logic_error("pool time moved backwards");
  if (delta_ > 0.0 && t > now_) x_ *= std::exp(-delta_ * (t - now_));
  now_ = t;
}

void PoolState::add(const Agent& agent) {
  if (!agent.in_pool()) throw std::logic_error("only InPool agents can enter the pool");
  auto [it, inserted] = index_.try_emplace(agent.id, Slot{agent, order_.size()});
  if (!inserted) throw std::logic_error("agent " + std::to_string(agent.id) + " is already in the pool");
  order_.push_back(agent.id);
  x_ += delta_ > 0.0 ? std::exp(-delta_ * (now_ - agent.arrival_time)) : 1.0;
}

Agent PoolState::remove(AgentId id) {
  auto it = index_.find(id);
  if (it == index_.end()) throw std::out_of_range("agent " + std::to_string(id) + " is not in the pool");
  Agent agent = it->second.agent;
  const std::size_t pos = it->second.pos;
  const AgentId last = order_.back();
  order_[pos] = last;
  index_[last].pos = pos;
  order_.pop_back();
  index_.erase(it);

  if (delta_ > 0.0) {
    // Rounding drift only; keep 0 <= X <= Z.
    x_ -= std::exp(-delta_ * (now_ - agent.arrival_time));
    x_ = std::clamp(x_, 0.0, static_cast<double>(order_.size()));
  } else {
    x_ -= 1.0;
  }
  return agent;
}

const Agent* PoolState::find(AgentId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &it->second.agent;
}

}  // namespace dynmatch
