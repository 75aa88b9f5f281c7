#include "dynmatch/strategy.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dynmatch {

namespace {

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("bad number in strategy: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("bad number in strategy: '" + s + "'");
  return v;
}

}  // namespace

ReportStrategy::ReportStrategy(std::vector<double> starts, std::vector<double> rates, bool at_arrival)
    : starts_(std::move(starts)), rates_(std::move(rates)), at_arrival_(at_arrival) {}

ReportStrategy ReportStrategy::truthful() { return ReportStrategy({0.0}, {0.0}, false); }

ReportStrategy ReportStrategy::report_at_arrival() { return ReportStrategy({0.0}, {0.0}, true); }

ReportStrategy ReportStrategy::constant(double rate) { return piecewise({0.0}, {rate}); }

ReportStrategy ReportStrategy::piecewise(std::vector<double> starts, std::vector<double> rates) {
  if (starts.empty() || starts.size() != rates.size())
    throw std::invalid_argument("piecewise strategy needs matching, non-empty breakpoints and rates");
  if (starts.front() != 0.0) throw std::invalid_argument("piecewise strategy must start at time 0");
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] >= 0.0) || !std::isfinite(rates[i]))
      throw std::invalid_argument("report rates must be finite and non-negative");
    if (i > 0 && !(starts[i] > starts[i - 1])) throw std::invalid_argument("breakpoints must be increasing");
  }
  return ReportStrategy(std::move(starts), std::move(rates), false);
}

ReportStrategy ReportStrategy::parse(const std::string& text) {
  if (text == "truthful") return truthful();
  if (text == "arrival") return report_at_arrival();
  if (text.rfind("rate:", 0) == 0) return constant(parse_double(text.substr(5)));
  if (text.rfind("piecewise:", 0) == 0) {
    std::vector<double> starts;
    std::vector<double> rates;
    std::stringstream ss(text.substr(10));
    std::string piece;
    while (std::getline(ss, piece, ',')) {
      const auto colon = piece.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("piecewise piece needs start:rate, got '" + piece + "'");
      starts.push_back(parse_double(piece.substr(0, colon)));
      rates.push_back(parse_double(piece.substr(colon + 1)));
    }
    return piecewise(std::move(starts), std::move(rates));
  }
  throw std::invalid_argument("unknown report strategy '" + text + "'");
}

bool ReportStrategy::is_truthful() const noexcept {
  if (at_arrival_) return false;
  for (double r : rates_)
    if (r != 0.0) return false;
  return true;
}

double ReportStrategy::rate_at(double since_arrival) const noexcept {
  if (at_arrival_) return std::numeric_limits<double>::infinity();
  double r = rates_.front();
  for (std::size_t i = 0; i < starts_.size() && starts_[i] <= since_arrival; ++i) r = rates_[i];
  return r;
}

double ReportStrategy::sample_report_delay(Rng& rng) const {
  if (at_arrival_) return 0.0;
  for (std::size_t i = 0; i < starts_.size(); ++i) {
    const double lo = starts_[i];
    const double hi = i + 1 < starts_.size() ? starts_[i + 1] : std::numeric_limits<double>::infinity();
    if (rates_[i] <= 0.0) continue;
    const double t = lo + rng.exponential(rates_[i]);
    if (t < hi) return t;
  }
  return std::numeric_limits<double>::infinity();
}

std::string ReportStrategy::label() const {
  if (at_arrival_) return "arrival";
  if (is_truthful()) return "truthful";
  std::ostringstream os;
  if (starts_.size() == 1) {
    os << "rate:" << rates_.front();
    return os.str();
  }
  os << "piecewise:";
  for (std::size_t i = 0; i < starts_.size(); ++i) os << (i ? "," : "") << starts_[i] << ':' << rates_[i];
  return os.str();
}

}  // namespace dynmatch
