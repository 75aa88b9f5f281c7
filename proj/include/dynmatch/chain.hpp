#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace dynmatch {

// Pool-size Markov chains of the Greedy and Patient policies (criticality rate 1;
// scale a market with scale_market() first when lambda != 1).
enum class ChainKind { Greedy, Patient };

struct ChainSpec {
  ChainKind kind = ChainKind::Greedy;
  double m = 1.0;
  double d = 0.0;
  std::size_t truncation = 0;  // state cap N; 0 means ceil(3m)

  std::size_t cap() const;
  // Throws std::invalid_argument on bad (m, d) or a cap below 3m.
  void validate() const;
};

const char* to_string(ChainKind kind);

struct GreedyRates {
  double up = 0.0;
  double down = 0.0;
};

struct PatientRates {
  double up = 0.0;
  double down1 = 0.0;  // critical agent perishes
  double down2 = 0.0;  // critical agent is matched
};

GreedyRates greedy_rates(std::size_t k, double m, double d);
PatientRates patient_rates(std::size_t k, double m, double d);

/// Truncated stationary distribution over {0..N} with a solver certificate.
struct StationaryDist {
  std::vector<double> probs;
  double residual = 0.0;  // max absolute balance-equation violation
  double kstar = 0.0;     // root of the rate-balance function

  std::size_t argmax() const;
  double mean() const;
  // Probability mass of states k with lo <= k <= hi.
  double mass_between(double lo, double hi) const;
  double expectation(const std::function<double(std::size_t)>& f) const;
};

StationaryDist stationary_greedy(const ChainSpec& spec);
StationaryDist stationary_patient(const ChainSpec& spec);
StationaryDist stationary(const ChainSpec& spec);

/// Root of m(1-d/m)^x - x - m(1 - (1-d/m)^x); requires 0 < d <= m.
double kstar_greedy(double m, double d);
/// Root of m - (x+1) - (x+2)(1 - (1-d/m)^(x+1)) on [m/2 - 2, m - 1].
double kstar_patient(double m, double d);

/// L1 distance sum_k |p(k) - q(k)| (range [0, 2]; no factor 1/2). The shorter
/// vector is zero-padded. Throws std::invalid_argument for unnormalized input.
double tv_distance(std::span<const double> p, std::span<const double> q);

struct MixingOptions {
  double epsilon = 0.1;
  std::size_t replications = 10000;
  double grid_step = 0.05;
  double max_time = 0.0;  // 0 means twice the analytic mixing bound
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

struct MixingEstimate {
  bool mixed = false;
  double time = 0.0;         // first grid time with TV <= epsilon
  double final_tv = 0.0;     // TV at `time`, or at the last grid time when not mixed
  double noise_floor = 0.0;  // expected TV of an R-sample empirical law of pi itself
  double bound = 0.0;        // analytic mixing-time upper bound
  std::size_t replications = 0;
  std::vector<std::pair<double, double>> curve;  // (t, TV(z_t, pi)) up to `time`
};

/// Analytic upper bound on the mixing time: 2 log(m/d) log(2/eps) for the
/// Greedy chain, 8 log(m) log(4/eps) for the Patient chain.
double mixing_time_bound(const ChainSpec& spec, double epsilon);

/// Empirical mixing time: simulates the jump chain from Z_0 = 0 and tracks the
/// law z_t on a time grid until it is within epsilon of `pi`.
MixingEstimate estimate_mixing(const ChainSpec& spec, const StationaryDist& pi, const MixingOptions& options);

}  // namespace dynmatch
