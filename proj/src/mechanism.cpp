#include "dynmatch/mechanism.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "dynmatch/chain.hpp"
#include "dynmatch/sim.hpp"

namespace dynmatch {

double beta(double m, double d, double alpha) {
  if (!(m > 0.0) || !(d >= 0.0) || d > m) throw std::invalid_argument("beta: need 0 <= d <= m");
  if (!(alpha >= 0.0)) throw std::invalid_argument("beta: alpha must be >= 0");
  const double q = 1.0 - d / m;
  if (std::isinf(alpha)) return std::pow(q, kstar_patient(m, d));
  const double alpha_bar = MarketParams::effective_alpha_bar(alpha);
  if (std::isinf(alpha_bar)) return kInfinity;
  return alpha_bar * std::pow(q, m / alpha_bar);
}

double mechanism_mixing_time(const MarketParams& params, std::uint64_t seed) {
  const MarketParams unit = scale_market(params);
  const double alpha_bar = unit.alpha_bar();
  if (std::isinf(alpha_bar)) return 0.0;  // everyone leaves on arrival; the pool is always empty
  ChainSpec spec{ChainKind::Patient, unit.m / alpha_bar, unit.d / alpha_bar, 0};
  const auto pi = stationary_patient(spec);
  MixingOptions opt;
  opt.epsilon = 0.1;
  opt.replications = 4000;
  opt.seed = seed;
  const auto est = estimate_mixing(spec, pi, opt);
  // Chain time runs alpha_bar times faster than market time at unit lambda.
  return est.time / alpha_bar / params.lambda;
}

UtilityEstimate utility_under_strategy(const MarketParams& params, const ReportStrategy& strategy,
                                       const ProbeOptions& options) {
  params.validate();
  if (options.replications < 2) throw std::invalid_argument("utility_under_strategy: need at least two replications");
  if (options.probes_per_replication == 0) throw std::invalid_argument("utility_under_strategy: need probes");
  if (!(options.gap >= 0.0)) throw std::invalid_argument("utility_under_strategy: gap must be >= 0");

  UtilityEstimate out;
  out.strategy = strategy.label();
  const double mixing =
      options.mixing_time >= 0.0 ? options.mixing_time : mechanism_mixing_time(params, options.seed);
  out.warmup = options.warmup >= 0.0 ? options.warmup : 3.0 * mixing;
  if (out.warmup < mixing) {
    out.warning = "warmup " + std::to_string(out.warmup) + " is below the estimated mixing time " +
                  std::to_string(mixing);
  }

  const Policy policy = Policy::mechanism(params.alpha);
  std::vector<double> means(options.replications, 0.0);
  std::vector<std::size_t> counts(options.replications, 0);
  parallel_for(options.replications, options.jobs, [&](std::size_t r) {
    MarketParams p = params;
    p.seed = derive_seed(options.seed, {r});
    p.horizon = std::numeric_limits<double>::max();
    RunOptions ro;
    ro.probe = Probe{out.warmup, options.probes_per_replication, options.gap, strategy};
    const RunMetrics metrics = run(p, policy, ro);
    double s = 0.0;
    for (double u : metrics.probe_utilities) s += u;
    counts[r] = metrics.probe_utilities.size();
    means[r] = counts[r] ? s / static_cast<double>(counts[r]) : 0.0;
  });
  for (auto c : counts) out.probes += c;
  out.utility = mean_ci(means);
  return out;
}

DeviationReport epsilon_nash_check(const MarketParams& params, std::span<const ReportStrategy> deviations,
                                   const ProbeOptions& options, double tolerance) {
  if (deviations.empty()) throw std::invalid_argument("epsilon_nash_check: deviation set is empty");
  DeviationReport report;
  report.params = params;
  report.tolerance = tolerance;
  report.beta = beta(params.m, params.d, params.alpha);
  report.within_hypothesis = params.delta <= report.beta;
  if (!report.within_hypothesis) report.warnings.push_back("delta > beta: outside the truthfulness hypothesis");

  // Resolve the warmup once so that every strategy sees the same markets.
  ProbeOptions shared = options;
  if (shared.mixing_time < 0.0) shared.mixing_time = mechanism_mixing_time(params, options.seed);
  if (shared.warmup < 0.0) shared.warmup = 3.0 * shared.mixing_time;

  report.truthful = utility_under_strategy(params, ReportStrategy::truthful(), shared);
  if (report.truthful.warning) report.warnings.push_back(*report.truthful.warning);
  const double c_truth = 1.0 - report.truthful.utility.mean;
  const double c_truth_hi = 1.0 - report.truthful.utility.lo;

  report.epsilon_star = -kInfinity;
  for (const auto& dev : deviations) {
    DeviationResult res;
    if (dev.is_truthful()) {
      res.estimate = report.truthful;
      res.epsilon_point = 0.0;
      res.epsilon_conservative = 0.0;
    } else {
      res.estimate = utility_under_strategy(params, dev, shared);
      const double c_dev = 1.0 - res.estimate.utility.mean;
      const double c_dev_lo = 1.0 - res.estimate.utility.hi;
      res.epsilon_point = c_dev > 0.0 ? c_truth / c_dev - 1.0 : kInfinity;
      res.epsilon_conservative = c_dev_lo > 0.0 ? c_truth_hi / c_dev_lo - 1.0 : kInfinity;
    }
    report.epsilon_star = std::max(report.epsilon_star, res.epsilon_conservative);
    report.deviations.push_back(std::move(res));
  }
  report.passed = report.epsilon_star <= tolerance;
  return report;
}

namespace {

nlohmann::json estimate_json(const UtilityEstimate& e) {
  nlohmann::json j;
  j["strategy"] = e.strategy;
  j["mean"] = e.utility.mean;
  j["ci95"] = {e.utility.lo, e.utility.hi};
  j["complement"] = 1.0 - e.utility.mean;
  j["probes"] = e.probes;
  j["warmup"] = e.warmup;
  if (e.warning) j["warning"] = *e.warning;
  return j;
}

// JSON has no infinity; encode it as a string.
nlohmann::json number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  return x;
}

}  // namespace

std::string to_json(const DeviationReport& report, int indent) {
  nlohmann::json j;
  j["m"] = report.params.m;
  j["d"] = report.params.d;
  j["lambda"] = report.params.lambda;
  j["delta"] = report.params.delta;
  j["alpha"] = number(report.params.alpha);
  j["beta"] = number(report.beta);
  j["within_hypothesis"] = report.within_hypothesis;
  j["truthful"] = estimate_json(report.truthful);
  j["deviations"] = nlohmann::json::array();
  for (const auto& d : report.deviations) {
    auto row = estimate_json(d.estimate);
    row["epsilon_point"] = number(d.epsilon_point);
    row["epsilon_conservative"] = number(d.epsilon_conservative);
    j["deviations"].push_back(row);
  }
  j["epsilon_star"] = number(report.epsilon_star);
  j["tolerance"] = number(report.tolerance);
  j["passed"] = report.passed;
  j["warnings"] = report.warnings;
  return j.dump(indent);
}

}  // namespace dynmatch
