#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <variant>

#include "dynmatch/rng.hpp"

namespace dynmatch {

using AgentId = std::uint64_t;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// One market scenario: arrival rate m, acceptable-partner density d,
/// criticality rate lambda, discount rate delta, horizon T and the
/// Patient(alpha) clock mean alpha (+inf disables the clock).
struct MarketParams {
  double m = 1.0;
  double d = 0.0;
  double lambda = 1.0;
  double delta = 0.0;
  double horizon = 1.0;
  double alpha = kInfinity;
  std::uint64_t seed = 0;

  double acceptance_probability() const noexcept { return m > 0.0 ? d / m : 0.0; }

  // Effective departure rate of a Patient(alpha) agent: 1/alpha + 1.
  double alpha_bar() const noexcept { return effective_alpha_bar(alpha); }

  static double effective_alpha_bar(double alpha) noexcept {
    if (std::isinf(alpha)) return 1.0;
    if (alpha == 0.0) return kInfinity;
    return 1.0 / alpha + 1.0;
  }

  // Throws std::invalid_argument on the first violated invariant.
  void validate() const;
};

/// Rescales an (m, d, lambda) market onto the equivalent (m/lambda, d/lambda, 1)
/// market: time is stretched by lambda, delta and alpha follow the time change.
MarketParams scale_market(const MarketParams& params);

/// Inverse of scale_market for a given original lambda.
MarketParams unscale_market(const MarketParams& scaled, double lambda);

struct InPool {};
struct Matched {
  AgentId partner;
  double time;
};
struct Perished {
  double time;
};
using AgentStatus = std::variant<InPool, Matched, Perished>;

struct Agent {
  AgentId id = 0;
  double arrival_time = 0.0;
  double criticality_time = 0.0;
  AgentStatus status = InPool{};
  // Index into the run's strategy table; empty for ordinary truthful agents.
  std::optional<std::size_t> strategy;

  bool in_pool() const noexcept { return std::holds_alternative<InPool>(status); }
  bool matched() const noexcept { return std::holds_alternative<Matched>(status); }
  bool perished() const noexcept { return std::holds_alternative<Perished>(status); }

  // Departure time for agents that left the pool.
  std::optional<double> departure_time() const noexcept;

  // One-way transitions; throw std::logic_error if the agent already left.
  void mark_matched(AgentId partner, double time);
  void mark_perished(double time);
};

/// Lazily-evaluated Erdos-Renyi acceptance graph: each unordered pair is
/// acceptable with probability d/m, decided by hashing (seed, min, max).
class AcceptanceOracle {
public:
  AcceptanceOracle(std::uint64_t seed, double p);

  bool query(AgentId a, AgentId b) const;
  // Same as query() without the self-edge check; a != b is the caller's job.
  bool query_unchecked(AgentId a, AgentId b) const noexcept {
    const AgentId lo = a < b ? a : b;
    const AgentId hi = a < b ? b : a;
    const std::uint64_t h = mix64(mix64(seed_ ^ mix64(lo)) + hi);
    return (h >> 11) < threshold_;
  }

  double probability() const noexcept { return p_; }
  std::uint64_t seed() const noexcept { return seed_; }

private:
  std::uint64_t seed_;
  double p_;
  std::uint64_t threshold_;  // accept iff top-53-bit variate < threshold_
};

}  // namespace dynmatch
