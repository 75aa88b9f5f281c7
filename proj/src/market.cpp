#include "dynmatch/market.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dynmatch {

void MarketParams::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid market parameter: " + what); };
  if (!(m >= 1.0) || !std::isfinite(m)) fail("m must be finite and >= 1");
  if (!(d >= 0.0) || d > m) fail("d must satisfy 0 <= d <= m");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail("lambda must be finite and > 0");
  if (!(delta >= 0.0)) fail("delta must be >= 0");
  if (!(horizon > 0.0)) fail("horizon T must be > 0");
  if (!(alpha >= 0.0)) fail("alpha must be >= 0");
}

MarketParams scale_market(const MarketParams& params) {
  if (!(params.lambda > 0.0)) throw std::invalid_argument("scale_market: lambda must be > 0");
  const double l = params.lambda;
  MarketParams out = params;
  out.m = params.m / l;
  out.d = params.d / l;
  out.lambda = 1.0;
  out.horizon = params.horizon * l;
  out.delta = params.delta / l;
  out.alpha = params.alpha * l;
  return out;
}

MarketParams unscale_market(const MarketParams& scaled, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("unscale_market: lambda must be > 0");
  MarketParams out = scaled;
  out.m = scaled.m * lambda;
  out.d = scaled.d * lambda;
  out.lambda = scaled.lambda * lambda;
  out.horizon = scaled.horizon / lambda;
  out.delta = scaled.delta * lambda;
  out.alpha = scaled.alpha / lambda;
  return out;
}

std::optional<double> Agent::departure_time() const noexcept {
  if (const auto* mt = std::get_if<Matched>(&status)) return mt->time;
  if (const auto* p = std::get_if<Perished>(&status)) return p->time;
  return std::nullopt;
}

void Agent::mark_matched(AgentId partner, double time) {
  if (!in_pool()) throw std::logic_error("agent " + std::to_string(id) + " already left the pool");
  status = Matched{partner, time};
}

void Agent::mark_perished(double time) {
  if (!in_pool()) throw std::logic_error("agent " + std::to_string(id) + " already left the pool");
  status = Perished{time};
}

AcceptanceOracle::AcceptanceOracle(std::uint64_t seed, double p) : seed_(seed), p_(p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("acceptance probability must lie in [0, 1]");
  // p * 2^53 is exact for the representable p; p == 1 accepts everything.
  threshold_ = p >= 1.0 ? (std::uint64_t{1} << 53) : static_cast<std::uint64_t>(std::ldexp(p, 53));
}

bool AcceptanceOracle::query(AgentId a, AgentId b) const {
  if (a == b) throw std::invalid_argument("acceptance query on a self-edge (agent " + std::to_string(a) + ")");
  return query_unchecked(a, b);
}

}  // namespace dynmatch
