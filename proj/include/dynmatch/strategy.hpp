#pragma once

#include <string>
#include <vector>

#include "dynmatch/rng.hpp"

namespace dynmatch {

/// Criticality-reporting strategy of one agent: a piecewise-constant false-report
/// rate c(t) over time since arrival. Piece i covers [starts[i], starts[i+1]) and
/// the last piece extends to infinity. ReportAtArrival is the atom that reports
/// immediately on entry. A true criticality is always reported at once.
class ReportStrategy {
public:
  static ReportStrategy truthful();
  static ReportStrategy report_at_arrival();
  static ReportStrategy constant(double rate);
  static ReportStrategy piecewise(std::vector<double> starts, std::vector<double> rates);

  // Parses "truthful", "arrival", "rate:<c>" or "piecewise:<t0>:<c0>,<t1>:<c1>,...".
  static ReportStrategy parse(const std::string& text);

  bool is_truthful() const noexcept;
  bool reports_at_arrival() const noexcept { return at_arrival_; }
  const std::vector<double>& starts() const noexcept { return starts_; }
  const std::vector<double>& rates() const noexcept { return rates_; }

  double rate_at(double since_arrival) const noexcept;

  // Delay after arrival of the first false report (+inf if it never fires),
  // sampled exactly by running one exponential clock per piece.
  double sample_report_delay(Rng& rng) const;

  std::string label() const;

private:
  ReportStrategy(std::vector<double> starts, std::vector<double> rates, bool at_arrival);

  std::vector<double> starts_;
  std::vector<double> rates_;
  bool at_arrival_ = false;
};

}  // namespace dynmatch
