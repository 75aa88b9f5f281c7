#include "dynmatch/bounds.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace dynmatch {

double run_loss(const RunMetrics& run, const MarketParams& params) {
  return static_cast<double>(run.perished) / (params.m * params.horizon);
}

double run_welfare(const RunMetrics& run, const MarketParams& params) {
  return run.sum_discounted_utility / (params.m * params.horizon);
}

namespace {

Estimate per_run(std::span<const RunMetrics> runs, const MarketParams& params,
                 double (*f)(const RunMetrics&, const MarketParams&)) {
  if (runs.empty()) throw std::invalid_argument("estimates need at least one run");
  std::vector<double> xs;
  xs.reserve(runs.size());
  for (const auto& r : runs) xs.push_back(f(r, params));
  return mean_ci(xs);
}

void require_thin(double m, double d) {
  if (!(m > 10.0 * d)) throw HypothesisViolation("bound requires m > 10d");
}

}  // namespace

Estimate loss_estimate(std::span<const RunMetrics> runs, const MarketParams& params) {
  return per_run(runs, params, &run_loss);
}

Estimate welfare_estimate(std::span<const RunMetrics> runs, const MarketParams& params) {
  return per_run(runs, params, &run_welfare);
}

double bound_opt_lower(double m, double d) {
  require_thin(m, d);
  return 1.0 / (2.0 * d + 1.0 + d * d / m);
}

double bound_omn_lower(double m, double d) {
  require_thin(m, d);
  return std::exp(-d - d * d / m) / (d + 1.0 + d * d / m);
}

double bound_greedy_upper(double d) {
  if (!(d > 0.0)) throw HypothesisViolation("Greedy loss bound requires d > 0");
  return std::numbers::ln2 / d;
}

double bound_patient_upper(double d) {
  if (!(d >= 0.0)) throw std::invalid_argument("d must be >= 0");
  // z exp(-z d) peaks at z = 1/d; clamp the maximizer to [1/2, 1].
  double z = 1.0;
  if (d >= 2.0) {
    z = 0.5;
  } else if (d >= 1.0) {
    z = 1.0 / d;
  }
  return z * std::exp(-z * d);
}

double bound_patient_alpha_upper(double d, double alpha) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  const double alpha_bar = MarketParams::effective_alpha_bar(alpha);
  return bound_patient_upper(std::isinf(alpha_bar) ? 0.0 : d / alpha_bar);
}

double bound_welfare_greedy_upper(double m, double d) { return 1.0 - 1.0 / (2.0 * d + 1.0 + d * d / m); }

double bound_welfare_patient_lower(double d, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("delta must be >= 0");
  return 2.0 / (delta + 2.0) * (1.0 - std::exp(-d / 2.0));
}

double ratio_patient_greedy(double d) {
  if (!(d >= 2.0)) throw HypothesisViolation("loss ratio bound requires d >= 2");
  return (d + 1.0) * std::exp(-d / 2.0);
}

double ratio_patient_alpha_greedy(double d, double alpha) {
  if (!(d >= 2.0)) throw HypothesisViolation("loss ratio bound requires d >= 2");
  const double alpha_bar = MarketParams::effective_alpha_bar(alpha);
  return (d + 1.0) * std::exp(-d / (2.0 * alpha_bar));
}

std::vector<BoundReport> bound_table(const MarketParams& params) {
  const double m = params.m;
  const double d = params.d;
  const double mt = params.m * params.horizon;
  std::vector<BoundReport> rows;
  auto add = [&](std::string name, std::string anchor, const std::function<double()>& eval, double scale = 1.0) {
    BoundReport r;
    r.name = std::move(name);
    r.anchor = std::move(anchor);
    r.m = m;
    r.d = d;
    r.delta = params.delta;
    r.alpha = params.alpha;
    r.horizon = params.horizon;
    try {
      r.value = eval() * scale;
    } catch (const std::domain_error& e) {
      r.value = std::numeric_limits<double>::quiet_NaN();
      r.status = std::string("hypothesis violated: ") + e.what();
    }
    rows.push_back(std::move(r));
  };

  add("opt_lower", "1/(2d+1+d^2/m)", [&] { return bound_opt_lower(m, d); });
  add("omn_lower", "exp(-d-d^2/m)/(d+1+d^2/m)", [&] { return bound_omn_lower(m, d); });
  add("greedy_upper", "log(2)/d", [&] { return bound_greedy_upper(d); });
  add("patient_upper", "max_{z in [1/2,1]} z*exp(-z*d)", [&] { return bound_patient_upper(d); });
  add("patient_alpha_upper", "max_{z in [1/2,1]} z*exp(-z*d/alpha_bar), alpha_bar=1/alpha+1",
      [&] { return bound_patient_alpha_upper(d, params.alpha); });
  add("welfare_greedy_upper", "1-1/(2d+1+d^2/m)", [&] { return bound_welfare_greedy_upper(m, d); });
  add("welfare_patient_lower", "(2/(delta+2))*(1-exp(-d/2))",
      [&] { return bound_welfare_patient_lower(d, params.delta); });
  add("ratio_patient_greedy", "(d+1)*exp(-d/2)", [&] { return ratio_patient_greedy(d); });
  add("ratio_patient_alpha_greedy", "(d+1)*exp(-d/(2*alpha_bar))",
      [&] { return ratio_patient_alpha_greedy(d, params.alpha); });
  add("opt_lower_x_mT", "mT/(2d+1+d^2/m)", [&] { return bound_opt_lower(m, d); }, mt);
  add("omn_lower_x_mT", "mT*exp(-d-d^2/m)/(d+1+d^2/m)", [&] { return bound_omn_lower(m, d); }, mt);
  add("greedy_upper_x_mT", "mT*log(2)/d", [&] { return bound_greedy_upper(d); }, mt);
  add("patient_upper_x_mT", "mT*max_{z in [1/2,1]} z*exp(-z*d)", [&] { return bound_patient_upper(d); }, mt);
  return rows;
}

}  // namespace dynmatch
