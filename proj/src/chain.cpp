#include "dynmatch/chain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dynmatch/rng.hpp"
#include "dynmatch/stats.hpp"

namespace dynmatch {

std::size_t ChainSpec::cap() const {
  return truncation != 0 ? truncation : static_cast<std::size_t>(std::ceil(3.0 * m));
}

void ChainSpec::validate() const {
  if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("chain: m must be finite and > 0");
  if (!(d >= 0.0) || d > m) throw std::invalid_argument("chain: d must satisfy 0 <= d <= m");
  if (static_cast<double>(cap()) < 3.0 * m) throw std::invalid_argument("chain: truncation must be at least 3m");
}

const char* to_string(ChainKind kind) { return kind == ChainKind::Greedy ? "greedy" : "patient"; }

GreedyRates greedy_rates(std::size_t k, double m, double d) {
  const double qk = std::pow(1.0 - d / m, static_cast<double>(k));
  return {m * qk, static_cast<double>(k) + m * (1.0 - qk)};
}

PatientRates patient_rates(std::size_t k, double m, double d) {
  if (k == 0) return {m, 0.0, 0.0};
  const double kk = static_cast<double>(k);
  const double q = std::pow(1.0 - d / m, kk - 1.0);
  return {m, kk * q, kk * (1.0 - q)};
}

std::size_t StationaryDist::argmax() const {
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

double StationaryDist::mean() const {
  return expectation([](std::size_t k) { return static_cast<double>(k); });
}

double StationaryDist::mass_between(double lo, double hi) const {
  double s = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double x = static_cast<double>(k);
    if (x >= lo && x <= hi) s += probs[k];
  }
  return s;
}

double StationaryDist::expectation(const std::function<double(std::size_t)>& f) const {
  double s = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k)
    if (probs[k] > 0.0) s += probs[k] * f(k);
  return s;
}

namespace {

void normalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  if (!(s > 0.0) || !std::isfinite(s)) throw std::runtime_error("stationary solve produced no mass");
  for (double& x : v) x /= s;
}

double greedy_residual(const std::vector<double>& pi, double m, double d) {
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < pi.size(); ++k) {
    const double flow_up = pi[k] * greedy_rates(k, m, d).up;
    const double flow_down = pi[k + 1] * greedy_rates(k + 1, m, d).down;
    worst = std::max(worst, std::abs(flow_up - flow_down));
  }
  return worst;
}

// Cut between {0..k} and {k+1..N}: m pi(k) = (k+1) pi(k+1) + down2(k+2) pi(k+2),
// plus global balance at every state, with the up move blocked at N.
double patient_residual(const std::vector<double>& pi, double m, double d) {
  const std::size_t n = pi.size() - 1;
  auto at = [&](std::size_t k) { return k <= n ? pi[k] : 0.0; };
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lhs = m * pi[k];
    const double rhs = static_cast<double>(k + 1) * at(k + 1) + patient_rates(k + 2, m, d).down2 * at(k + 2);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  for (std::size_t j = 0; j <= n; ++j) {
    const double up_j = j < n ? m : 0.0;
    double inflow = (j > 0 ? m * pi[j - 1] : 0.0);
    inflow += patient_rates(j + 1, m, d).down1 * at(j + 1);
    inflow += patient_rates(j + 2, m, d).down2 * at(j + 2);
    const double outflow = pi[j] * (up_j + static_cast<double>(j));
    worst = std::max(worst, std::abs(inflow - outflow));
  }
  return worst;
}

// Back-substitution of the cut equations from the reflecting cap downwards.
// Every term is non-negative, so there is no cancellation.
std::vector<double> solve_patient_cuts(std::size_t n, double m, double d) {
  std::vector<double> x(n + 2, 0.0);
  x[n] = 1.0;
  constexpr double kRescaleAbove = 1e250;
  for (std::size_t i = n; i-- > 0;) {
    const double k = static_cast<double>(i);
    x[i] = ((k + 1.0) * x[i + 1] + patient_rates(i + 2, m, d).down2 * x[i + 2]) / m;
    if (x[i] > kRescaleAbove) {
      for (std::size_t j = i; j < x.size(); ++j) x[j] /= kRescaleAbove;
    }
  }
  x.resize(n + 1);
  return x;
}

template <class F>
double bisect_decreasing(F f, double lo, double hi) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  const double fhi = f(hi);
  if (fhi == 0.0) return hi;
  if (!(flo > 0.0 && fhi < 0.0)) throw std::domain_error("root is not bracketed");
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (fm > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

StationaryDist stationary_greedy(const ChainSpec& spec) {
  spec.validate();
  if (spec.kind != ChainKind::Greedy) throw std::invalid_argument("stationary_greedy needs a Greedy chain");
  const std::size_t n = spec.cap();
  const double m = spec.m;
  const double d = spec.d;

  // log pi(k) = sum_{j<=k} log up(j-1) - log down(j)
  std::vector<double> logp(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    const double up = greedy_rates(k - 1, m, d).up;
    const double down = greedy_rates(k, m, d).down;
    logp[k] = up > 0.0 ? logp[k - 1] + std::log(up) - std::log(down) : -std::numeric_limits<double>::infinity();
  }
  const double top = *std::max_element(logp.begin(), logp.end());
  StationaryDist out;
  out.probs.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) out.probs[k] = std::exp(logp[k] - top);
  normalize(out.probs);
  out.residual = greedy_residual(out.probs, m, d);
  out.kstar = d > 0.0 ? kstar_greedy(m, d) : m;
  return out;
}

StationaryDist stationary_patient(const ChainSpec& spec) {
  spec.validate();
  if (spec.kind != ChainKind::Patient) throw std::invalid_argument("stationary_patient needs a Patient chain");
  std::size_t n = spec.cap();
  StationaryDist out;
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      out.probs = solve_patient_cuts(n, spec.m, spec.d);
      normalize(out.probs);
      break;
    } catch (const std::runtime_error&) {
      if (attempt == 1) throw;
      n *= 2;
    }
  }
  out.residual = patient_residual(out.probs, spec.m, spec.d);
  out.kstar = kstar_patient(spec.m, spec.d);
  return out;
}

StationaryDist stationary(const ChainSpec& spec) {
  return spec.kind == ChainKind::Greedy ? stationary_greedy(spec) : stationary_patient(spec);
}

double kstar_greedy(double m, double d) {
  if (!(d > 0.0)) throw std::domain_error("kstar_greedy: no root for d = 0");
  if (d > m) throw std::invalid_argument("kstar_greedy: d must not exceed m");
  const double q = 1.0 - d / m;
  auto f = [&](double x) {
    const double qx = std::pow(q, x);
    return m * qx - (x + m * (1.0 - qx));
  };
  return bisect_decreasing(f, 0.0, m);
}

double kstar_patient(double m, double d) {
  if (!(d >= 0.0) || d > m) throw std::invalid_argument("kstar_patient: need 0 <= d <= m");
  const double q = 1.0 - d / m;
  auto f = [&](double x) { return m - (x + 1.0) - (x + 2.0) * (1.0 - std::pow(q, x + 1.0)); };
  return bisect_decreasing(f, std::max(m / 2.0 - 2.0, 0.0), m - 1.0);
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  auto check = [](std::span<const double> v, const char* name) {
    double s = 0.0;
    for (double x : v) {
      if (!(x >= 0.0)) throw std::invalid_argument(std::string("tv_distance: negative entry in ") + name);
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument(std::string("tv_distance: ") + name + " is not normalized");
  };
  check(p, "p");
  check(q, "q");
  const std::size_t n = std::max(p.size(), q.size());
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = k < p.size() ? p[k] : 0.0;
    const double b = k < q.size() ? q[k] : 0.0;
    s += std::abs(a - b);
  }
  return s;
}

double mixing_time_bound(const ChainSpec& spec, double epsilon) {
  if (spec.kind == ChainKind::Greedy) {
    if (!(spec.d > 0.0)) return std::numeric_limits<double>::infinity();
    return 2.0 * std::log(spec.m / spec.d) * std::log(2.0 / epsilon);
  }
  return 8.0 * std::log(spec.m) * std::log(4.0 / epsilon);
}

namespace {

// One step of the jump chain; total jump rate is m + z for both chains.
struct JumpChain {
  ChainKind kind;
  double m;
  double q;  // 1 - d/m

  std::size_t step(std::size_t z, Rng& rng) const {
    const double k = static_cast<double>(z);
    double u = rng.uniform() * (m + k);
    if (kind == ChainKind::Greedy) {
      const double up = m * std::pow(q, k);
      return u < up ? z + 1 : z - 1;
    }
    if (u < m) return z + 1;
    u -= m;
    const double perish = k * std::pow(q, k - 1.0);
    return (u < perish || z == 1) ? z - 1 : z - 2;
  }
};

}  // namespace

MixingEstimate estimate_mixing(const ChainSpec& spec, const StationaryDist& pi, const MixingOptions& options) {
  spec.validate();
  if (options.replications == 0) throw std::invalid_argument("estimate_mixing: need at least one replication");
  if (!(options.grid_step > 0.0)) throw std::invalid_argument("estimate_mixing: grid step must be > 0");

  MixingEstimate est;
  est.replications = options.replications;
  est.bound = mixing_time_bound(spec, options.epsilon);
  double max_time = options.max_time;
  if (!(max_time > 0.0)) max_time = std::isfinite(est.bound) ? 2.0 * est.bound : 50.0;

  const double r = static_cast<double>(options.replications);
  for (double p : pi.probs) est.noise_floor += std::sqrt(2.0 * p * (1.0 - p) / (std::numbers::pi * r));

  const JumpChain chain{spec.kind, spec.m, 1.0 - spec.d / spec.m};
  const std::size_t states = pi.probs.size();
  const auto grid_points = static_cast<std::size_t>(std::floor(max_time / options.grid_step)) + 1;

  // Pool size of every replication at the last grid time of the previous stage.
  std::vector<std::size_t> z(options.replications, 0);

  std::size_t stage_begin = 0;
  std::size_t stage_len = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(1.0 / options.grid_step)));
  std::uint64_t stage_id = 0;
  while (stage_begin < grid_points) {
    const std::size_t stage_end = std::min(grid_points, stage_begin + stage_len);
    const std::size_t width = stage_end - stage_begin;
    const unsigned jobs = std::max(1u, options.jobs);
    const std::size_t chunks = std::min<std::size_t>(jobs * 4, options.replications);
    std::vector<std::vector<std::uint32_t>> counts(chunks, std::vector<std::uint32_t>(width * (states + 1), 0));

    parallel_for(chunks, jobs, [&](std::size_t c) {
      auto& local = counts[c];
      const std::size_t lo = c * options.replications / chunks;
      const std::size_t hi = (c + 1) * options.replications / chunks;
      for (std::size_t rep = lo; rep < hi; ++rep) {
        Rng rng(derive_seed(options.seed, {rep, stage_id}));
        std::size_t state = z[rep];
        // Holding times are memoryless, so each stage restarts the clock at
        // the previous stage's last grid time with a fresh stream.
        const double resume = stage_begin == 0 ? 0.0 : static_cast<double>(stage_begin - 1) * options.grid_step;
        double t_next = resume + rng.exponential(chain.m + static_cast<double>(state));
        for (std::size_t g = stage_begin; g < stage_end; ++g) {
          const double t = static_cast<double>(g) * options.grid_step;
          while (t_next <= t) {
            state = chain.step(state, rng);
            t_next += rng.exponential(chain.m + static_cast<double>(state));
          }
          // States past the cap are pooled in the overflow slot.
          ++local[(g - stage_begin) * (states + 1) + std::min(state, states)];
        }
        z[rep] = state;
      }
    });

    for (std::size_t g = stage_begin; g < stage_end; ++g) {
      const double t = static_cast<double>(g) * options.grid_step;
      double tv = 0.0;
      for (std::size_t k = 0; k <= states; ++k) {
        std::uint64_t n = 0;
        for (const auto& local : counts) n += local[(g - stage_begin) * (states + 1) + k];
        const double emp = static_cast<double>(n) / r;
        tv += std::abs(emp - (k < states ? pi.probs[k] : 0.0));
      }
      est.curve.emplace_back(t, tv);
      est.final_tv = tv;
      est.time = t;
      if (tv <= options.epsilon) {
        est.mixed = true;
        return est;
      }
    }
    stage_begin = stage_end;
    stage_len *= 2;
    ++stage_id;
  }
  return est;
}

}  // namespace dynmatch
