// Acceptance suite: one PASS/FAIL line per criterion. Desk-scale market is
// m = 200, d = 8, lambda = 1, T = 100 with 200 replications unless noted.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dynmatch/bounds.hpp"
#include "dynmatch/chain.hpp"
#include "dynmatch/matching.hpp"
#include "dynmatch/mechanism.hpp"
#include "dynmatch/policies.hpp"
#include "dynmatch/sim.hpp"
#include "dynmatch/stats.hpp"

using namespace dynmatch;

namespace {

constexpr double kM = 200.0;
constexpr double kD = 8.0;
constexpr double kT = 100.0;
constexpr std::size_t kReps = 200;
constexpr double kBurnIn = 30.0;

unsigned g_jobs = 1;
int g_failures = 0;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << (ok ? "" : "[violated] ") << what << "; ";
  }
};

void report(int id, const std::string& title, const std::function<void(Verdict&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail << "exception: " << e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!v.pass) ++g_failures;
  std::printf("%s criterion %2d: %s | %s(%.1fs)\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), v.detail.str().c_str(),
              secs);
  std::fflush(stdout);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(5);
  os << x;
  return os.str();
}

std::string fmt(const Estimate& e) { return fmt(e.mean) + " [" + fmt(e.lo) + ", " + fmt(e.hi) + "]"; }

MarketParams desk(std::uint64_t seed) {
  MarketParams p;
  p.m = kM;
  p.d = kD;
  p.horizon = kT;
  p.seed = seed;
  return p;
}

std::uint64_t rep_seed(std::uint64_t stream, std::size_t r) { return derive_seed(0xacce55ULL, {stream, r}); }

std::vector<RunMetrics> replicate(const MarketParams& base, const Policy& policy, std::size_t reps,
                                  std::uint64_t stream, const RunOptions& options = {}) {
  std::vector<RunMetrics> out(reps);
  parallel_for(reps, g_jobs, [&](std::size_t r) {
    MarketParams p = base;
    p.seed = rep_seed(stream, r);
    out[r] = run(p, policy, options);
    out[r].sojourns.clear();
  });
  return out;
}

std::vector<double> pooled_histogram(const std::vector<RunMetrics>& runs) {
  std::vector<double> h;
  double total = 0.0;
  for (const auto& r : runs) {
    if (h.size() < r.occupancy.size()) h.resize(r.occupancy.size(), 0.0);
    for (std::size_t k = 0; k < r.occupancy.size(); ++k) {
      h[k] += r.occupancy[k];
      total += r.occupancy[k];
    }
  }
  for (double& x : h) x /= total;
  return h;
}

// Half-width of the CI of a - c*b for independent estimates.
double combined_half_width(const Estimate& a, const Estimate& b, double c) {
  return std::hypot(a.half_width(), c * b.half_width());
}

struct DeskRuns {
  std::vector<RunMetrics> greedy;
  std::vector<RunMetrics> patient;
  std::vector<RunMetrics> patient_alpha;
  Estimate loss_greedy;
  Estimate loss_patient;
  Estimate loss_patient_alpha;
};

DeskRuns desk_runs() {
  DeskRuns d;
  RunOptions ro;
  ro.occupancy_after = kBurnIn;
  const auto base = desk(0);
  // Common seeds across policies (stream 1) keep the comparisons paired.
  d.greedy = replicate(base, Policy::greedy(), kReps, 1, ro);
  d.patient = replicate(base, Policy::patient(), kReps, 1, ro);
  d.patient_alpha = replicate(base, Policy::patient_alpha(1.0), kReps, 1, ro);
  d.loss_greedy = loss_estimate(d.greedy, base);
  d.loss_patient = loss_estimate(d.patient, base);
  d.loss_patient_alpha = loss_estimate(d.patient_alpha, base);
  return d;
}

// Exhaustive maximum matching over the remaining-vertex bitmask.
int brute_force_max_matching(const std::vector<std::vector<bool>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> memo(std::size_t{1} << n, -1);
  std::function<int(unsigned)> best = [&](unsigned avail) -> int {
    if (avail == 0) return 0;
    int& slot = memo[avail];
    if (slot >= 0) return slot;
    const int v = __builtin_ctz(avail);
    const unsigned rest = avail & ~(1u << v);
    int r = best(rest);
    for (int u = 0; u < n; ++u)
      if ((rest & (1u << u)) && adj[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)])
        r = std::max(r, 1 + best(rest & ~(1u << u)));
    return slot = r;
  };
  return best((1u << n) - 1u);
}

}  // namespace

int main() {
  g_jobs = default_jobs();
  std::printf("acceptance suite: m=%g d=%g T=%g replications=%zu threads=%u\n", kM, kD, kT, kReps, g_jobs);

  report(1, "conservation and determinism", [](Verdict& v) {
    const std::vector<Policy> policies{Policy::greedy(), Policy::greedy(NeighborRule::EarliestArrival),
                                       Policy::patient(), Policy::patient_alpha(1.0), Policy::patient_alpha(0.0),
                                       no_match_policy(), Policy::mechanism(kInfinity)};
    std::size_t runs = 0, broken = 0, drift = 0;
    RunOptions ro;
    ro.record_events = true;
    for (const auto& policy : policies) {
      std::vector<int> bad(40, 0);
      parallel_for(40, g_jobs, [&](std::size_t s) {
        const auto p = desk(rep_seed(2, s));
        const auto a = run(p, policy, ro);
        const auto b = run(p, policy, ro);
        if (a.arrived != a.matched + a.perished + a.in_pool_at_T) bad[s] |= 1;
        if (a.events != b.events || a.perished != b.perished || a.matched != b.matched ||
            a.sum_discounted_utility != b.sum_discounted_utility)
          bad[s] |= 2;
      });
      for (int b : bad) {
        ++runs;
        broken += (b & 1) != 0;
        drift += (b & 2) != 0;
      }
    }
    v.require(broken == 0, std::to_string(runs) + " runs over 7 policies, " + std::to_string(broken) +
                               " violate arrived = matched + perished + in_pool_at_T");
    v.require(drift == 0, std::to_string(drift) + " reruns differ from the first run");
  });

  report(2, "no-match pool fills like (1 - e^-t) m at m = 100", [](Verdict& v) {
    MarketParams base;
    base.m = 100;
    base.d = 0;
    base.horizon = 2.0;
    RunOptions ro;
    ro.snapshot_times = {0.5, 1.0, 2.0};
    const auto runs = replicate(base, no_match_policy(), kReps, 20, ro);
    for (std::size_t i = 0; i < ro.snapshot_times.size(); ++i) {
      std::vector<double> z;
      for (const auto& r : runs) z.push_back(static_cast<double>(r.snapshots.at(i).pool_size));
      const auto e = mean_ci(z);
      const double t = ro.snapshot_times[i];
      const double expected = (1.0 - std::exp(-t)) * base.m;
      v.require(std::abs(e.mean - expected) <= 3.0 * e.std_error,
                "t=" + fmt(t) + ": mean Z " + fmt(e.mean) + " vs " + fmt(expected) + " (3 se = " +
                    fmt(3.0 * e.std_error) + ")");
    }
  });

  const auto desk_start = std::chrono::steady_clock::now();
  const DeskRuns runs = desk_runs();
  std::printf("(desk runs: %.1fs)\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - desk_start).count());

  report(3, "Greedy stationary argmax, loss and pool histogram", [&](Verdict& v) {
    const auto pi = stationary(ChainSpec{ChainKind::Greedy, kM, kD, 0});
    const double lo = kM / (2.0 * kD + 1.0);
    const double hi = std::numbers::ln2 * kM / kD;
    v.require(pi.argmax() >= lo && pi.argmax() <= hi,
              "argmax " + std::to_string(pi.argmax()) + " in [" + fmt(lo) + ", " + fmt(hi) + "]");
    const double cap = bound_greedy_upper(kD) + 0.01;
    v.require(runs.loss_greedy.mean <= cap, "loss " + fmt(runs.loss_greedy) + " <= " + fmt(cap));
    const double tv = tv_distance(pooled_histogram(runs.greedy), pi.probs);
    v.require(tv <= 0.05, "histogram TV " + fmt(tv) + " <= 0.05");
  });

  report(4, "Patient stationary argmax, loss and pool histogram", [&](Verdict& v) {
    const auto pi = stationary(ChainSpec{ChainKind::Patient, kM, kD, 0});
    v.require(pi.argmax() >= 98 && pi.argmax() <= 199, "argmax " + std::to_string(pi.argmax()) + " in [98, 199]");
    const double cap = bound_patient_upper(kD) + 0.01;
    v.require(runs.loss_patient.mean <= cap, "loss " + fmt(runs.loss_patient) + " <= " + fmt(cap));
    const double tv = tv_distance(pooled_histogram(runs.patient), pi.probs);
    v.require(tv <= 0.05, "histogram TV " + fmt(tv) + " <= 0.05");
  });

  report(5, "loss(Patient) <= (d+1) e^(-d/2) loss(Greedy)", [&](Verdict& v) {
    const double c = ratio_patient_greedy(kD);
    const double slack = combined_half_width(runs.loss_patient, runs.loss_greedy, c);
    const double rhs = c * runs.loss_greedy.mean + slack;
    v.require(runs.loss_patient.mean <= rhs, "Patient " + fmt(runs.loss_patient.mean) + " <= " + fmt(c) + " * " +
                                                 fmt(runs.loss_greedy.mean) + " + " + fmt(slack) + " = " + fmt(rhs));
  });

  report(6, "Patient(alpha = 1) loss bounds", [&](Verdict& v) {
    const double cap = bound_patient_alpha_upper(kD, 1.0) + 0.01;
    v.require(runs.loss_patient_alpha.mean <= cap, "loss " + fmt(runs.loss_patient_alpha) + " <= " + fmt(cap));
    const double c = ratio_patient_alpha_greedy(kD, 1.0);
    const double rhs = c * runs.loss_greedy.mean + combined_half_width(runs.loss_patient_alpha, runs.loss_greedy, c);
    v.require(runs.loss_patient_alpha.mean <= rhs,
              "ratio: " + fmt(runs.loss_patient_alpha.mean) + " <= " + fmt(c) + " * loss(Greedy) + CI = " + fmt(rhs));
  });

  report(7, "omniscient matching dominates online policies per seed", [&](Verdict& v) {
    constexpr std::size_t seeds = 100;
    std::vector<int> dominated(seeds, 1);
    std::vector<double> omn_loss(seeds, 0.0);
    // Same seeds (stream 1) as the desk runs, so the online counts are reused.
    parallel_for(seeds, g_jobs, [&](std::size_t s) {
      const auto p = desk(rep_seed(1, s));
      const auto agents = sample_agents(p);
      const auto pairs = omniscient_matching(agents, make_oracle(p));
      const std::size_t omn = pairs.size() * 2;
      for (const auto* set : {&runs.greedy, &runs.patient, &runs.patient_alpha})
        if ((*set)[s].matched > omn) dominated[s] = 0;
      // Unmatched agents who became critical before T perished.
      std::vector<bool> matched(agents.size(), false);
      for (auto [a, b] : pairs) matched[a] = matched[b] = true;
      std::size_t perished = 0;
      for (const auto& a : agents)
        if (!matched[a.id] && a.criticality_time <= p.horizon) ++perished;
      omn_loss[s] = static_cast<double>(perished) / (p.m * p.horizon);
    });
    const auto ok = static_cast<std::size_t>(std::count(dominated.begin(), dominated.end(), 1));
    v.require(ok == seeds, std::to_string(ok) + "/" + std::to_string(seeds) +
                               " seeds with |OMN| >= matched(Greedy, Patient, Patient(1))");
    const auto e = mean_ci(omn_loss);
    const double lb = bound_omn_lower(kM, kD);
    v.require(e.hi >= lb, "loss(OMN) " + fmt(e) + " >= " + fmt(lb) + " within CI");
  });

  report(8, "loss(Greedy) >= OPT lower bound", [&](Verdict& v) {
    const double lb = bound_opt_lower(kM, kD);
    v.require(runs.loss_greedy.mean >= lb - runs.loss_greedy.half_width(),
              "loss " + fmt(runs.loss_greedy) + " >= " + fmt(lb) + " - CI");
  });

  report(9, "blossom equals exhaustive enumeration on 500 small instances", [](Verdict& v) {
    Rng rng(0xb105);
    int mismatches = 0;
    for (int inst = 0; inst < 500; ++inst) {
      const std::size_t n = 1 + rng.index(12);
      std::vector<Agent> agents(n);
      for (std::size_t i = 0; i < n; ++i) {
        agents[i].id = i;
        agents[i].arrival_time = 3.0 * rng.uniform();
        agents[i].criticality_time = agents[i].arrival_time + rng.exponential(1.0);
      }
      const AcceptanceOracle oracle(rng.next(), 0.2 + 0.7 * rng.uniform());
      std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
          if (a == b) continue;
          const bool overlap = agents[a].arrival_time < agents[b].criticality_time &&
                               agents[b].arrival_time < agents[a].criticality_time;
          adj[a][b] = overlap && oracle.query(a, b);
        }
      const auto pairs = omniscient_matching(agents, oracle);
      if (static_cast<int>(pairs.size()) != brute_force_max_matching(adj)) ++mismatches;
    }
    v.require(mismatches == 0, std::to_string(500 - mismatches) + "/500 instances agree");
  });

  report(10, "empirical mixing times within the analytic bounds", [](Verdict& v) {
    for (ChainKind kind : {ChainKind::Greedy, ChainKind::Patient}) {
      const ChainSpec spec{kind, kM, kD, 0};
      MixingOptions opt;
      opt.epsilon = 0.1;
      opt.replications = 10000;
      opt.seed = 10;
      opt.jobs = g_jobs;
      const auto est = estimate_mixing(spec, stationary(spec), opt);
      v.require(est.mixed && est.time <= est.bound, std::string(to_string(kind)) + " tau = " + fmt(est.time) +
                                                        " <= " + fmt(est.bound) + " (noise floor " +
                                                        fmt(est.noise_floor) + ")");
    }
  });

  report(11, "rescaled market gives the same Patient loss", [](Verdict& v) {
    MarketParams fast;
    fast.m = 300;
    fast.d = 9;
    fast.lambda = 3;
    fast.horizon = 30;
    const MarketParams unit = scale_market(fast);
    const auto a = loss_estimate(replicate(fast, Policy::patient(), kReps, 11), fast);
    const auto b = loss_estimate(replicate(unit, Policy::patient(), kReps, 12), unit);
    v.require(a.lo <= b.hi && b.lo <= a.hi, "(300, 9, 3, 30): " + fmt(a) + " vs (" + fmt(unit.m) + ", " +
                                                fmt(unit.d) + ", 1, " + fmt(unit.horizon) + "): " + fmt(b));
  });

  report(12, "welfare at delta = 0.05, d = 10 and the alpha sweep", [](Verdict& v) {
    MarketParams base;
    base.m = kM;
    base.d = 10;
    base.delta = 0.05;
    base.horizon = kT;
    const auto w_patient = welfare_estimate(replicate(base, Policy::patient(), kReps, 13), base);
    const auto w_greedy = welfare_estimate(replicate(base, Policy::greedy(), kReps, 13), base);
    const double lb = bound_welfare_patient_lower(base.d, base.delta) - 0.02;
    const double ub = bound_welfare_greedy_upper(base.m, base.d);
    v.require(w_patient.mean >= lb, "W(Patient) " + fmt(w_patient) + " >= " + fmt(lb));
    v.require(w_greedy.mean <= ub, "W(Greedy) " + fmt(w_greedy) + " <= " + fmt(ub));
    bool some = false;
    std::string sweep;
    for (double alpha : {0.0, 0.25, 0.5, 1.0, 2.0, kInfinity}) {
      auto p = base;
      p.alpha = alpha;
      const auto w = welfare_estimate(replicate(p, Policy::patient_alpha(alpha), kReps / 2, 13), p);
      const bool beats = w.mean >= w_greedy.mean - std::hypot(w.half_width(), w_greedy.half_width());
      some = some || beats;
      sweep += "a=" + fmt(alpha) + ":" + fmt(w.mean) + (beats ? "* " : " ");
    }
    v.require(some, "some alpha with W(Patient(alpha)) >= W(Greedy) - CI [" + sweep + "]");
  });

  report(13, "truthful reporting is an epsilon-Nash equilibrium with epsilon* <= 0.5", [](Verdict& v) {
    std::size_t identical = 0;
    constexpr std::size_t seeds = 20;
    std::vector<int> same(seeds, 0);
    parallel_for(seeds, g_jobs, [&](std::size_t s) {
      RunOptions ro;
      ro.record_events = true;
      const auto p = desk(rep_seed(14, s));
      same[s] = run(p, Policy::mechanism(kInfinity), ro).events == run(p, Policy::patient(), ro).events;
    });
    identical = static_cast<std::size_t>(std::count(same.begin(), same.end(), 1));
    v.require(identical == seeds, std::to_string(identical) + "/" + std::to_string(seeds) +
                                      " seeds with truthful Mechanism trace == Patient trace");

    const auto p = desk(0);
    const std::vector<ReportStrategy> deviations{ReportStrategy::constant(0.5), ReportStrategy::constant(1.0),
                                                 ReportStrategy::constant(2.0), ReportStrategy::report_at_arrival()};
    ProbeOptions opt;
    opt.replications = 40;
    opt.probes_per_replication = 400;
    opt.seed = 13;
    opt.jobs = g_jobs;
    const auto rep = epsilon_nash_check(p, deviations, opt, 0.5);
    std::string devs;
    for (const auto& d : rep.deviations)
      devs += d.estimate.strategy + ":" + fmt(1.0 - d.estimate.utility.mean) + "/" + fmt(d.epsilon_conservative) + " ";
    v.require(rep.within_hypothesis, "delta = 0 <= beta = " + fmt(rep.beta));
    const double floor = 2.0 * (1.0 - rep.beta) / (2.0 - rep.beta);
    v.detail << "info: truthful u = " << fmt(rep.truthful.utility) << " vs 2(1-beta)/(2-beta) = " << fmt(floor) << "; ";
    v.require(rep.passed, "epsilon* = " + fmt(rep.epsilon_star) + " <= 0.5 (truthful 1-u = " +
                              fmt(1.0 - rep.truthful.utility.mean) + "; strategy:1-u/eps " + devs + ")");
  });

  report(14, "headline numbers from the closed forms", [](Verdict& v) {
    const double mt = 1000.0 * 1000.0;
    const double patient = bound_patient_upper(20) * mt;
    const double opt = bound_opt_lower(1000, 20) * mt;
    v.require(std::abs(patient - 22.7) < 0.05 && patient <= 23.0, "Patient upper x mT = " + fmt(patient) + " <= 23");
    v.require(std::abs(opt - 24155) < 1.0 && opt >= 23800.0, "OPT lower x mT = " + fmt(opt) + " >= 23800");
  });

  std::printf("%s: %d criteria failed\n", g_failures == 0 ? "ALL PASS" : "FAILURES", g_failures);
  return g_failures == 0 ? 0 : 1;
}
