#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dynmatch/chain.hpp"
#include "dynmatch/market.hpp"
#include "dynmatch/policies.hpp"
#include "dynmatch/sim.hpp"
#include "dynmatch/stats.hpp"

namespace dynmatch {

struct SweepAxis {
  std::string field;  // m, d, lambda, delta, T, alpha
  std::vector<double> values;
};

/// Everything one CLI invocation needs. Loaded from an INI-style file with
/// [market], [run], [sweep], [output], [stationary], [mixing] and [mechanism]
/// sections, or from JSON with the same nesting.
struct ExperimentConfig {
  MarketParams market;
  std::vector<std::string> policies{"patient"};
  NeighborRule neighbor_rule = NeighborRule::UniformRandom;
  std::size_t replications = 10;
  std::uint64_t base_seed = 1;
  std::vector<double> snapshot_grid;
  double warmup = 0.0;  // burn-in before pool-size histograms are collected
  std::vector<SweepAxis> sweep;
  std::size_t max_cells = 10000;

  std::filesystem::path out_dir = "out";
  bool event_log = false;
  unsigned jobs = 1;

  std::vector<ChainKind> chains{ChainKind::Greedy, ChainKind::Patient};
  std::filesystem::path compare_histogram;  // stationary: TV against this histogram CSV

  double epsilon = 0.1;
  std::size_t mixing_replications = 10000;
  double grid_step = 0.05;
  double max_time = 0.0;

  std::vector<std::string> deviations{"rate:0.5", "rate:1", "rate:2", "arrival"};
  std::size_t mechanism_replications = 20;
  std::size_t probes_per_replication = 200;
  double probe_gap = 0.5;
  double mechanism_warmup = -1.0;
  double tolerance = 0.5;
};

ExperimentConfig parse_config(const std::string& text, bool json);
// Format chosen by extension (.json) or by a leading '{'.
ExperimentConfig load_config(const std::filesystem::path& path);

/// One point of the sweep cross-product (policy counts as an axis).
struct Cell {
  std::size_t id = 0;
  MarketParams params;
  Policy policy;
  std::vector<std::size_t> index;  // position along each axis, policy last
};

std::vector<Cell> expand_cells(const ExperimentConfig& config);

/// Seed of one run: hash of the base seed, the cell's axis indices and the replication.
std::uint64_t run_seed(std::uint64_t base, const std::vector<std::size_t>& cell_index, std::size_t replication);

struct RunRow {
  std::size_t run_id = 0;
  std::size_t cell = 0;
  std::uint64_t seed = 0;
  MarketParams params;
  std::string policy;
  std::size_t arrived = 0;
  std::size_t matched = 0;
  std::size_t perished = 0;
  std::size_t in_pool_at_T = 0;
  double loss = 0.0;
  double welfare = 0.0;
  double mean_sojourn = 0.0;
};

struct CellSummary {
  Cell cell;
  Estimate loss;
  Estimate welfare;
  double mean_pool_size = 0.0;
  double mean_arrived = 0.0;
  double mean_matched = 0.0;  // agents
  double mean_perished = 0.0;
  std::vector<double> pool_histogram;  // time-weighted after warmup, normalized
};

struct SimulationOutput {
  std::vector<RunRow> rows;
  std::vector<CellSummary> cells;
  std::string summary_json;
};

/// Runs every (cell, replication) and writes runs.csv and summary.json (plus
/// snapshots.csv, pool_histogram.csv and event logs when configured).
SimulationOutput cmd_simulate(const ExperimentConfig& config, std::ostream& log);
void cmd_stationary(const ExperimentConfig& config, std::ostream& log);
void cmd_bounds(const ExperimentConfig& config, std::ostream& log);
void cmd_mixing(const ExperimentConfig& config, std::ostream& log);
void cmd_mechanism(const ExperimentConfig& config, std::ostream& log);

void write_runs_csv(std::ostream& out, const std::vector<RunRow>& rows);

// (state, probability) CSV with a one-line header.
void write_distribution_csv(std::ostream& out, const std::vector<double>& probs);
std::vector<double> read_distribution_csv(const std::filesystem::path& path);

std::string format_number(double x);

}  // namespace dynmatch
