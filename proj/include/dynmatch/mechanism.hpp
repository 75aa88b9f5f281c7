#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dynmatch/market.hpp"
#include "dynmatch/stats.hpp"
#include "dynmatch/strategy.hpp"

namespace dynmatch {

/// Stationary probability that a reporting agent finds no acceptable partner:
/// (1-d/m)^k* with the Patient-chain root k* when alpha = inf, and
/// alpha_bar (1-d/m)^(m/alpha_bar) for a finite clock mean alpha.
double beta(double m, double d, double alpha);

/// Empirical mixing time (epsilon = 0.1) of the pool under Mechanism(alpha)
/// with everyone truthful, via the equivalent (m/alpha_bar, d/alpha_bar) Patient chain.
double mechanism_mixing_time(const MarketParams& params, std::uint64_t seed = 1);

struct ProbeOptions {
  double warmup = -1.0;       // < 0: three times the mixing time
  double mixing_time = -1.0;  // < 0: computed with mechanism_mixing_time()
  std::size_t replications = 20;
  std::size_t probes_per_replication = 200;
  double gap = 0.5;  // idle time between one tagged agent leaving and the next arriving
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

struct UtilityEstimate {
  std::string strategy;
  Estimate utility;  // CI over replication means
  std::size_t probes = 0;
  double warmup = 0.0;
  std::optional<std::string> warning;
};

/// Warms a Mechanism(alpha) market with truthful agents, then injects tagged
/// agents playing `strategy` one after another and averages their discounted
/// utility. Replication r uses the same market seed for every strategy.
UtilityEstimate utility_under_strategy(const MarketParams& params, const ReportStrategy& strategy,
                                       const ProbeOptions& options);

struct DeviationResult {
  UtilityEstimate estimate;
  double epsilon_point = 0.0;         // (1 - u_truthful) / (1 - u_dev) - 1
  double epsilon_conservative = 0.0;  // same with the CI ends least favourable to truthfulness
};

struct DeviationReport {
  MarketParams params;
  double beta = 0.0;
  bool within_hypothesis = true;  // delta <= beta
  UtilityEstimate truthful;
  std::vector<DeviationResult> deviations;
  double epsilon_star = 0.0;  // max conservative epsilon over deviations
  double tolerance = 0.0;
  bool passed = false;
  std::vector<std::string> warnings;
};

/// Checks 1 - E[u_truthful] <= (1 + eps)(1 - E[u_dev]) for each deviation when
/// everyone else is truthful, and reports the smallest eps that covers all of them.
DeviationReport epsilon_nash_check(const MarketParams& params, std::span<const ReportStrategy> deviations,
                                   const ProbeOptions& options, double tolerance);

std::string to_json(const DeviationReport& report, int indent = 2);

}  // namespace dynmatch
