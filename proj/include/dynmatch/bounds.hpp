#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynmatch/market.hpp"
#include "dynmatch/sim.hpp"
#include "dynmatch/stats.hpp"

namespace dynmatch {

/// Raised when a bound is evaluated outside the hypothesis it was proved under.
class HypothesisViolation : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Loss: perished / (m T). Agents still waiting at T count neither way.
Estimate loss_estimate(std::span<const RunMetrics> runs, const MarketParams& params);
// Welfare: sum of exp(-delta * sojourn) over matched agents, divided by m T.
Estimate welfare_estimate(std::span<const RunMetrics> runs, const MarketParams& params);

double run_loss(const RunMetrics& run, const MarketParams& params);
double run_welfare(const RunMetrics& run, const MarketParams& params);

// Closed-form leading terms. Finite-m and finite-T corrections are not included;
// callers compare with an explicit slack.

/// 1 / (2d + 1 + d^2/m): no online algorithm without departure information does
/// better. Requires m > 10d.
double bound_opt_lower(double m, double d);
/// exp(-d - d^2/m) / (d + 1 + d^2/m): lower bound on the omniscient loss. Requires m > 10d.
double bound_omn_lower(double m, double d);
/// log(2) / d: Greedy loss upper bound. Requires d > 0.
double bound_greedy_upper(double d);
/// max over z in [1/2, 1] of z exp(-z d): Patient loss upper bound.
double bound_patient_upper(double d);
/// The Patient bound with d replaced by d / (1/alpha + 1).
double bound_patient_alpha_upper(double d, double alpha);
/// 1 - 1/(2d + 1 + d^2/m): Greedy welfare upper bound.
double bound_welfare_greedy_upper(double m, double d);
/// (2 / (delta + 2)) (1 - exp(-d/2)): Patient welfare lower bound.
double bound_welfare_patient_lower(double d, double delta);
/// (d + 1) exp(-d/2): bound on loss(Patient) / loss(Greedy). Requires d >= 2.
double ratio_patient_greedy(double d);
/// (d + 1) exp(-d / (2 alpha_bar)): bound on loss(Patient(alpha)) / loss(Greedy). Requires d >= 2.
double ratio_patient_alpha_greedy(double d, double alpha);

struct BoundReport {
  std::string name;
  double value = 0.0;
  double m = 0.0;
  double d = 0.0;
  double delta = 0.0;
  double alpha = kInfinity;
  double horizon = 0.0;
  std::string anchor;  // closed form that was evaluated
  std::string status = "ok";
};

/// Every bound at the given parameters, plus the count-scaled (x m T) rows.
/// Hypothesis violations produce a NaN value and a status message.
std::vector<BoundReport> bound_table(const MarketParams& params);

}  // namespace dynmatch
