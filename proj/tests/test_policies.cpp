#include <doctest.h>

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "dynmatch/policies.hpp"
#include "dynmatch/pool.hpp"

using namespace dynmatch;

namespace {

Agent make_agent(AgentId id, double arrival, double crit) {
  Agent a;
  a.id = id;
  a.arrival_time = arrival;
  a.criticality_time = crit;
  return a;
}

// A seed whose p = 1/2 oracle realizes exactly the edges s1-b1, s2-b1, s1-b2
// over ids s1=0, b1=1, s2=2, b2=3.
std::uint64_t two_by_two_seed() {
  for (std::uint64_t s = 0;; ++s) {
    AcceptanceOracle o(s, 0.5);
    if (o.query(0, 1) && o.query(2, 1) && o.query(0, 3) && !o.query(0, 2) && !o.query(1, 3) && !o.query(2, 3))
      return s;
  }
}

}  // namespace

TEST_CASE("pool bookkeeping and potential utility") {
  PoolState pool(0.5);
  pool.add(make_agent(1, 0.0, 10.0));
  pool.advance(2.0);
  pool.add(make_agent(2, 2.0, 10.0));
  CHECK(pool.size() == 2);
  CHECK(pool.potential_utility() == doctest::Approx(std::exp(-1.0) + 1.0));
  pool.advance(4.0);
  const Agent a = pool.remove(1);
  CHECK(a.id == 1);
  CHECK(pool.potential_utility() == doctest::Approx(std::exp(-1.0)));
  CHECK_FALSE(pool.contains(1));
  CHECK_THROWS_AS(pool.remove(1), std::out_of_range);

  PoolState flat(0.0);
  for (AgentId i = 0; i < 10; ++i) {
    flat.advance(static_cast<double>(i));
    flat.add(make_agent(i, static_cast<double>(i), 100.0));
  }
  flat.advance(50.0);
  CHECK(flat.potential_utility() == doctest::Approx(10.0));
}

TEST_CASE("greedy on arrival: trivial cases") {
  Rng rng(1);
  PoolState pool;
  AcceptanceOracle all(1, 1.0), none(1, 0.0);
  const Agent newcomer = make_agent(5, 1.0, 2.0);
  CHECK_FALSE(greedy_on_arrival(pool, newcomer, NeighborRule::UniformRandom, all, rng));
  pool.add(make_agent(3, 0.0, 2.0));
  CHECK(greedy_on_arrival(pool, newcomer, NeighborRule::UniformRandom, all, rng) == AgentId{3});
  CHECK_FALSE(greedy_on_arrival(pool, newcomer, NeighborRule::UniformRandom, none, rng));
  pool.add(make_agent(1, 0.5, 2.0));
  CHECK(greedy_on_arrival(pool, newcomer, NeighborRule::EarliestArrival, all, rng) == AgentId{1});
}

TEST_CASE("greedy commits early and loses to the omniscient matching") {
  const AcceptanceOracle oracle(two_by_two_seed(), 0.5);
  Rng rng(2);
  const std::array<Agent, 4> agents{make_agent(0, 0.0, 10.0), make_agent(1, 1.0, 10.0), make_agent(2, 2.0, 10.0),
                                    make_agent(3, 3.0, 10.0)};
  PoolState pool;
  std::size_t matched = 0;
  for (const auto& a : agents) {
    if (auto partner = greedy_on_arrival(pool, a, NeighborRule::UniformRandom, oracle, rng)) {
      if (a.id == 1) CHECK(*partner == 0);
      pool.remove(*partner);
      matched += 2;
    } else {
      pool.add(a);
    }
  }
  CHECK(matched == 2);
  const auto omn = omniscient_matching(agents, oracle);
  CHECK(omn.size() * 2 == 4);
}

TEST_CASE("feasibility requires overlapping presence") {
  AcceptanceOracle all(1, 1.0);
  const std::array<Agent, 3> agents{make_agent(0, 0.0, 1.0), make_agent(1, 1.0, 2.0), make_agent(2, 1.5, 3.0)};
  const auto g = feasibility_graph(agents, all);
  CHECK(g[0].empty());  // agent 1 arrives exactly when agent 0 leaves
  CHECK(g[1] == std::vector<int>{2});
  CHECK(omniscient_matching(agents, all).size() == 1);
}

TEST_CASE("patient on critical") {
  Rng rng(4);
  AcceptanceOracle all(1, 1.0), none(1, 0.0);
  PoolState pool;
  const Agent c = make_agent(0, 0.0, 1.0);
  pool.add(c);
  CHECK_FALSE(patient_on_critical(pool, c, all, rng));  // never matched with herself
  pool.add(make_agent(7, 0.1, 5.0));
  CHECK(patient_on_critical(pool, c, all, rng) == AgentId{7});
  CHECK_FALSE(patient_on_critical(pool, c, none, rng));
  CHECK(std::holds_alternative<RemoveAgent>(patient_alpha_on_tick(pool, c, none, rng)));
  const auto hit = patient_alpha_on_tick(pool, c, all, rng);
  REQUIRE(std::holds_alternative<MatchWith>(hit));
  CHECK(std::get<MatchWith>(hit).partner == 7);
}

TEST_CASE("patient chooses uniformly among three acceptable partners") {
  AcceptanceOracle all(1, 1.0);
  PoolState pool;
  const Agent c = make_agent(0, 0.0, 1.0);
  pool.add(c);
  for (AgentId i = 1; i <= 3; ++i) pool.add(make_agent(i, 0.1, 5.0));
  Rng rng(31337);
  std::array<int, 4> counts{};
  const int n = 300000;
  for (int i = 0; i < n; ++i) ++counts[*patient_on_critical(pool, c, all, rng)];
  for (int k = 1; k <= 3; ++k) CHECK(std::abs(counts[k] / static_cast<double>(n) - 1.0 / 3.0) <= 0.005);
}

TEST_CASE("policy names round-trip") {
  for (const char* n : {"greedy", "greedy_fifo", "patient", "patient_alpha", "no_match", "mechanism"})
    CHECK(Policy::parse(n, 1.0).name() == n);
  CHECK_THROWS_AS(Policy::parse("bogus"), std::invalid_argument);
  CHECK(std::isinf(Policy::patient().effective_alpha()));
  CHECK(Policy::patient_alpha(2.0).effective_alpha() == 2.0);
  CHECK(parse_neighbor_rule("fifo") == NeighborRule::EarliestArrival);
  CHECK_THROWS(parse_neighbor_rule("x"));
}
