#include "dynmatch/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/json_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "dynmatch/bounds.hpp"
#include "dynmatch/mechanism.hpp"

namespace dynmatch {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: '" + key + "' is not a number: '" + raw + "'");
  }
  if (used != s.size()) throw std::invalid_argument("config: '" + key + "' is not a number: '" + raw + "'");
  return v;
}

std::uint64_t to_count(const std::string& key, const std::string& raw) {
  const double v = to_double(key, raw);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19)
    throw std::invalid_argument("config: '" + key + "' must be a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("config: '" + key + "' must be a boolean");
}

// A list is either a comma-separated string or (JSON) an array of values.
std::vector<std::string> to_list(const pt::ptree& node) {
  std::vector<std::string> out;
  if (!node.empty()) {
    for (const auto& [k, child] : node) out.push_back(trim(child.data()));
    return out;
  }
  std::stringstream ss(node.data());
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const pt::ptree& node) {
  std::vector<double> out;
  for (const auto& s : to_list(node)) out.push_back(to_double(key, s));
  return out;
}

ChainKind parse_chain(const std::string& s) {
  if (s == "greedy") return ChainKind::Greedy;
  if (s == "patient") return ChainKind::Patient;
  throw std::invalid_argument("config: unknown chain '" + s + "'");
}

double& market_field(MarketParams& p, const std::string& field) {
  if (field == "m") return p.m;
  if (field == "d") return p.d;
  if (field == "lambda") return p.lambda;
  if (field == "delta") return p.delta;
  if (field == "T" || field == "horizon") return p.horizon;
  if (field == "alpha") return p.alpha;
  throw std::invalid_argument("config: unknown market field '" + field + "'");
}

ExperimentConfig from_tree(const pt::ptree& root) {
  ExperimentConfig c;
  auto section = [&](const std::string& name) -> const pt::ptree* {
    auto it = root.find(name);
    return it == root.not_found() ? nullptr : &it->second;
  };
  auto each = [&](const std::string& name, auto&& fn) {
    if (const auto* s = section(name))
      for (const auto& [key, node] : *s) fn(key, node);
  };

  each("market", [&](const std::string& key, const pt::ptree& node) {
    market_field(c.market, key) = to_double(key, node.data());
  });
  each("run", [&](const std::string& key, const pt::ptree& node) {
    const std::string& v = node.data();
    if (key == "policy" || key == "policies") {
      c.policies = to_list(node);
    } else if (key == "neighbor_rule") {
      c.neighbor_rule = parse_neighbor_rule(trim(v));
    } else if (key == "replications") {
      c.replications = to_count(key, v);
    } else if (key == "base_seed" || key == "seed") {
      c.base_seed = to_count(key, v);
    } else if (key == "snapshot_grid") {
      c.snapshot_grid = to_doubles(key, node);
    } else if (key == "warmup") {
      c.warmup = to_double(key, v);
    } else if (key == "jobs") {
      c.jobs = static_cast<unsigned>(to_count(key, v));
    } else {
      throw std::invalid_argument("config: unknown key run." + key);
    }
  });
  each("sweep", [&](const std::string& key, const pt::ptree& node) {
    if (key == "max_cells") {
      c.max_cells = to_count(key, node.data());
      return;
    }
    MarketParams probe;
    (void)market_field(probe, key);
    c.sweep.push_back(SweepAxis{key, to_doubles(key, node)});
  });
  each("output", [&](const std::string& key, const pt::ptree& node) {
    if (key == "dir") {
      c.out_dir = trim(node.data());
    } else if (key == "event_log") {
      c.event_log = to_bool(key, node.data());
    } else {
      throw std::invalid_argument("config: unknown key output." + key);
    }
  });
  each("stationary", [&](const std::string& key, const pt::ptree& node) {
    if (key == "chains") {
      c.chains.clear();
      for (const auto& s : to_list(node)) c.chains.push_back(parse_chain(s));
    } else if (key == "compare_histogram") {
      c.compare_histogram = trim(node.data());
    } else {
      throw std::invalid_argument("config: unknown key stationary." + key);
    }
  });
  each("mixing", [&](const std::string& key, const pt::ptree& node) {
    const std::string& v = node.data();
    if (key == "epsilon") {
      c.epsilon = to_double(key, v);
    } else if (key == "replications") {
      c.mixing_replications = to_count(key, v);
    } else if (key == "grid_step") {
      c.grid_step = to_double(key, v);
    } else if (key == "max_time") {
      c.max_time = to_double(key, v);
    } else if (key == "chains") {
      c.chains.clear();
      for (const auto& s : to_list(node)) c.chains.push_back(parse_chain(s));
    } else {
      throw std::invalid_argument("config: unknown key mixing." + key);
    }
  });
  each("mechanism", [&](const std::string& key, const pt::ptree& node) {
    const std::string& v = node.data();
    if (key == "deviations") {
      c.deviations = to_list(node);
    } else if (key == "replications") {
      c.mechanism_replications = to_count(key, v);
    } else if (key == "probes_per_replication") {
      c.probes_per_replication = to_count(key, v);
    } else if (key == "gap") {
      c.probe_gap = to_double(key, v);
    } else if (key == "warmup") {
      c.mechanism_warmup = to_double(key, v);
    } else if (key == "tolerance") {
      c.tolerance = to_double(key, v);
    } else {
      throw std::invalid_argument("config: unknown key mechanism." + key);
    }
  });
  for (const auto& [name, node] : root) {
    static const std::unordered_set<std::string> known{"market", "run", "sweep", "output",
                                                       "stationary", "mixing", "mechanism"};
    if (!known.count(name)) throw std::invalid_argument("config: unknown section [" + name + "]");
  }
  for (const auto& p : c.policies) (void)Policy::parse(p);
  return c;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

json number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  return x;
}

json estimate_json(const Estimate& e) {
  return json{{"mean", e.mean}, {"ci95", {e.lo, e.hi}}, {"std_error", e.std_error}, {"n", e.n}};
}

json params_json(const MarketParams& p) {
  return json{{"m", p.m},         {"d", p.d},     {"lambda", p.lambda}, {"delta", p.delta},
              {"T", p.horizon},   {"alpha", number(p.alpha)}};
}

// Bounds that speak to a policy's simulated loss, evaluated on the unit-lambda market.
json bound_comparisons(const CellSummary& s) {
  const MarketParams unit = scale_market(s.cell.params);
  json out = json::object();
  auto add = [&](const std::string& name, auto&& eval, bool upper) {
    try {
      const double b = eval();
      const bool ok = upper ? s.loss.lo <= b : s.loss.hi >= b;
      out[name] = json{{"value", b}, {"kind", upper ? "upper" : "lower"}, {"consistent", ok}};
    } catch (const std::domain_error& e) {
      out[name] = json{{"status", std::string("hypothesis violated: ") + e.what()}};
    }
  };
  switch (s.cell.policy.kind) {
    case PolicyKind::Greedy:
      add("greedy_upper", [&] { return bound_greedy_upper(unit.d); }, true);
      add("opt_lower", [&] { return bound_opt_lower(unit.m, unit.d); }, false);
      break;
    case PolicyKind::Patient:
      add("patient_upper", [&] { return bound_patient_upper(unit.d); }, true);
      add("omn_lower", [&] { return bound_omn_lower(unit.m, unit.d); }, false);
      break;
    case PolicyKind::PatientAlpha:
    case PolicyKind::Mechanism:
      add("patient_alpha_upper", [&] { return bound_patient_alpha_upper(unit.d, s.cell.policy.alpha); }, true);
      add("omn_lower", [&] { return bound_omn_lower(unit.m, unit.d); }, false);
      break;
    case PolicyKind::NoMatch:
      break;
  }
  return out;
}

// Groups cells that differ only in policy / alpha and records which Patient(alpha)
// cells reach Greedy's welfare.
json welfare_comparison(const std::vector<CellSummary>& cells) {
  std::map<std::vector<double>, std::vector<const CellSummary*>> groups;
  for (const auto& c : cells) {
    const auto& p = c.cell.params;
    groups[{p.m, p.d, p.lambda, p.delta, p.horizon}].push_back(&c);
  }
  json out = json::array();
  for (const auto& [key, members] : groups) {
    const CellSummary* greedy = nullptr;
    for (const auto* c : members)
      if (c->cell.policy.kind == PolicyKind::Greedy) greedy = c;
    if (!greedy) continue;
    json g{{"m", key[0]}, {"d", key[1]}, {"lambda", key[2]}, {"delta", key[3]}, {"T", key[4]},
           {"greedy_welfare", estimate_json(greedy->welfare)}};
    json alphas = json::array();
    bool any = false;
    double best = -1.0;
    json best_alpha;
    for (const auto* c : members) {
      if (!c->cell.policy.patient_family()) continue;
      const double a = c->cell.policy.effective_alpha();
      const bool beats = c->welfare.mean >= greedy->welfare.mean - (c->welfare.half_width() + greedy->welfare.half_width());
      any = any || beats;
      if (c->welfare.mean > best) {
        best = c->welfare.mean;
        best_alpha = number(a);
      }
      alphas.push_back(json{{"policy", c->cell.policy.name()},
                            {"alpha", number(a)},
                            {"welfare", estimate_json(c->welfare)},
                            {"at_least_greedy_within_ci", beats}});
    }
    g["patient_family"] = alphas;
    g["best_alpha"] = best_alpha;
    g["some_alpha_at_least_greedy"] = any;
    out.push_back(g);
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, bool json_format) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    if (json_format) {
      pt::read_json(in, tree);
    } else {
      pt::read_ini(in, tree);
    }
  } catch (const pt::file_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return from_tree(tree);
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  const bool is_json = path.extension() == ".json" || (first != std::string::npos && text[first] == '{');
  return parse_config(text, is_json);
}

std::vector<Cell> expand_cells(const ExperimentConfig& config) {
  if (config.policies.empty()) throw std::invalid_argument("config: no policy given");
  std::size_t total = config.policies.size();
  for (const auto& axis : config.sweep) {
    if (axis.values.empty()) throw std::invalid_argument("config: sweep axis '" + axis.field + "' is empty");
    total *= axis.values.size();
    if (total > config.max_cells)
      throw std::invalid_argument("config: sweep has more than max_cells = " + std::to_string(config.max_cells) + " cells");
  }
  std::vector<Cell> cells;
  cells.reserve(total);
  std::vector<std::size_t> idx(config.sweep.size() + 1, 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rest = n;
    for (std::size_t a = idx.size(); a-- > 0;) {
      const std::size_t len = a < config.sweep.size() ? config.sweep[a].values.size() : config.policies.size();
      idx[a] = rest % len;
      rest /= len;
    }
    Cell c;
    c.id = n;
    c.index = idx;
    c.params = config.market;
    for (std::size_t a = 0; a < config.sweep.size(); ++a)
      market_field(c.params, config.sweep[a].field) = config.sweep[a].values[idx[a]];
    c.params.validate();
    c.policy = Policy::parse(config.policies[idx.back()], c.params.alpha);
    c.policy.neighbor_rule = c.policy.kind == PolicyKind::Greedy ? config.neighbor_rule : c.policy.neighbor_rule;
    if (c.policy.kind == PolicyKind::Greedy && config.policies[idx.back()] == "greedy_fifo")
      c.policy.neighbor_rule = NeighborRule::EarliestArrival;
    cells.push_back(std::move(c));
  }
  return cells;
}

std::uint64_t run_seed(std::uint64_t base, const std::vector<std::size_t>& cell_index, std::size_t replication) {
  std::uint64_t h = derive_seed(base, {0x5eedULL, cell_index.size()});
  for (auto i : cell_index) h = derive_seed(h, {i});
  return derive_seed(h, {replication});
}

void write_runs_csv(std::ostream& out, const std::vector<RunRow>& rows) {
  out << "run_id,seed,m,d,lambda,delta,alpha,policy,arrived,matched,perished,in_pool_at_T,loss,welfare,mean_sojourn\n";
  for (const auto& r : rows) {
    out << r.run_id << ',' << r.seed << ',' << format_number(r.params.m) << ',' << format_number(r.params.d) << ','
        << format_number(r.params.lambda) << ',' << format_number(r.params.delta) << ','
        << format_number(r.params.alpha) << ',' << r.policy << ',' << r.arrived << ',' << r.matched << ','
        << r.perished << ',' << r.in_pool_at_T << ',' << format_number(r.loss) << ',' << format_number(r.welfare)
        << ',' << format_number(r.mean_sojourn) << '\n';
  }
}

void write_distribution_csv(std::ostream& out, const std::vector<double>& probs) {
  out << "state,probability\n";
  for (std::size_t k = 0; k < probs.size(); ++k) out << k << ',' << format_number(probs[k]) << '\n';
}

std::vector<double> read_distribution_csv(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  std::getline(f, line);  // header
  std::vector<double> probs;
  while (std::getline(f, line)) {
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("bad distribution row: " + line);
    const auto k = to_count("state", line.substr(0, comma));
    if (probs.size() <= k) probs.resize(k + 1, 0.0);
    probs[k] = to_double("probability", line.substr(comma + 1));
  }
  return probs;
}

SimulationOutput cmd_simulate(const ExperimentConfig& config, std::ostream& log) {
  if (config.replications == 0) throw std::invalid_argument("config: replications must be >= 1");
  const auto cells = expand_cells(config);

  std::unordered_set<std::uint64_t> seen;
  std::vector<std::uint64_t> seeds;
  for (const auto& c : cells) {
    for (std::size_t r = 0; r < config.replications; ++r) {
      const auto s = run_seed(config.base_seed, c.index, r);
      if (!seen.insert(s).second) throw std::runtime_error("derived seed collision; change base_seed");
      seeds.push_back(s);
    }
  }
  ensure_dir(config.out_dir);

  const std::size_t total = seeds.size();
  std::vector<RunMetrics> metrics(total);
  std::vector<RunRow> rows(total);
  std::mutex log_mutex;
  parallel_for(total, config.jobs, [&](std::size_t i) {
    const Cell& cell = cells[i / config.replications];
    MarketParams p = cell.params;
    p.seed = seeds[i];
    RunOptions ro;
    ro.observe_critical = true;
    ro.snapshot_times = config.snapshot_grid;
    ro.record_events = config.event_log;
    if (config.warmup < p.horizon) ro.occupancy_after = config.warmup;
    RunMetrics m = run(p, cell.policy, ro);

    RunRow& row = rows[i];
    row.run_id = i;
    row.cell = cell.id;
    row.seed = p.seed;
    row.params = p;
    row.policy = cell.policy.name();
    row.arrived = m.arrived;
    row.matched = m.matched;
    row.perished = m.perished;
    row.in_pool_at_T = m.in_pool_at_T;
    row.loss = run_loss(m, p);
    row.welfare = run_welfare(m, p);
    row.mean_sojourn = m.mean_sojourn();

    if (config.event_log) {
      std::lock_guard lock(log_mutex);
      auto f = open_out(config.out_dir / ("events_" + std::to_string(i) + ".log"));
      write_event_log(f, m.events);
      m.events.clear();
    }
    m.sojourns.clear();
    m.sojourns.shrink_to_fit();
    metrics[i] = std::move(m);
  });

  SimulationOutput out;
  out.rows = rows;
  for (const auto& cell : cells) {
    CellSummary s;
    s.cell = cell;
    const auto first = metrics.begin() + static_cast<std::ptrdiff_t>(cell.id * config.replications);
    std::span<const RunMetrics> runs(&*first, config.replications);
    s.loss = loss_estimate(runs, cell.params);
    s.welfare = welfare_estimate(runs, cell.params);
    for (const auto& r : runs) {
      s.mean_arrived += static_cast<double>(r.arrived);
      s.mean_matched += static_cast<double>(r.matched);
      s.mean_perished += static_cast<double>(r.perished);
    }
    const double n = static_cast<double>(runs.size());
    s.mean_arrived /= n;
    s.mean_matched /= n;
    s.mean_perished /= n;
    std::vector<double> hist;
    double weight = 0.0;
    for (const auto& r : runs) {
      if (hist.size() < r.occupancy.size()) hist.resize(r.occupancy.size(), 0.0);
      for (std::size_t k = 0; k < r.occupancy.size(); ++k) {
        hist[k] += r.occupancy[k];
        weight += r.occupancy[k];
      }
    }
    if (weight > 0.0) {
      double mean = 0.0;
      for (std::size_t k = 0; k < hist.size(); ++k) {
        hist[k] /= weight;
        mean += hist[k] * static_cast<double>(k);
      }
      s.mean_pool_size = mean;
    }
    s.pool_histogram = std::move(hist);
    out.cells.push_back(std::move(s));
  }

  {
    auto f = open_out(config.out_dir / "runs.csv");
    write_runs_csv(f, rows);
  }
  if (!config.snapshot_grid.empty()) {
    auto f = open_out(config.out_dir / "snapshots.csv");
    f << "run_id,time,pool_size,potential_utility\n";
    for (std::size_t i = 0; i < total; ++i)
      for (const auto& snap : metrics[i].snapshots)
        f << i << ',' << format_number(snap.time) << ',' << snap.pool_size << ','
          << format_number(snap.potential_utility) << '\n';
  }
  {
    auto f = open_out(config.out_dir / "pool_histogram.csv");
    f << "cell,state,probability\n";
    for (const auto& s : out.cells)
      for (std::size_t k = 0; k < s.pool_histogram.size(); ++k)
        f << s.cell.id << ',' << k << ',' << format_number(s.pool_histogram[k]) << '\n';
  }
  // A single cell also gets a plain (state, probability) histogram for `stationary`.
  if (out.cells.size() == 1) {
    auto f = open_out(config.out_dir / "pool_distribution.csv");
    write_distribution_csv(f, out.cells.front().pool_histogram);
  }

  json summary;
  summary["replications"] = config.replications;
  summary["base_seed"] = config.base_seed;
  summary["warmup"] = config.warmup;
  summary["cells"] = json::array();
  for (const auto& s : out.cells) {
    summary["cells"].push_back(json{{"cell", s.cell.id},
                                    {"policy", s.cell.policy.name()},
                                    {"neighbor_rule", to_string(s.cell.policy.neighbor_rule)},
                                    {"params", params_json(s.cell.params)},
                                    {"loss", estimate_json(s.loss)},
                                    {"welfare", estimate_json(s.welfare)},
                                    {"mean_pool_size", s.mean_pool_size},
                                    {"mean_arrived", s.mean_arrived},
                                    {"mean_matched", s.mean_matched},
                                    {"mean_perished", s.mean_perished},
                                    {"loss_x_mT", s.loss.mean * s.cell.params.m * s.cell.params.horizon},
                                    {"bounds", bound_comparisons(s)}});
  }
  summary["welfare_comparison"] = welfare_comparison(out.cells);
  out.summary_json = summary.dump(2);
  {
    auto f = open_out(config.out_dir / "summary.json");
    f << out.summary_json << '\n';
  }

  for (const auto& s : out.cells) {
    log << "cell " << s.cell.id << " " << s.cell.policy.name() << " m=" << s.cell.params.m << " d=" << s.cell.params.d
        << " delta=" << s.cell.params.delta << " alpha=" << format_number(s.cell.params.alpha)
        << "  loss=" << s.loss.mean << " [" << s.loss.lo << ", " << s.loss.hi << "]"
        << "  welfare=" << s.welfare.mean << " [" << s.welfare.lo << ", " << s.welfare.hi << "]\n";
  }
  return out;
}

void cmd_stationary(const ExperimentConfig& config, std::ostream& log) {
  ensure_dir(config.out_dir);
  const MarketParams unit = scale_market(config.market);
  std::vector<double> histogram;
  if (!config.compare_histogram.empty()) histogram = read_distribution_csv(config.compare_histogram);

  json report = json::array();
  for (ChainKind kind : config.chains) {
    ChainSpec spec{kind, unit.m, unit.d, 0};
    const StationaryDist pi = stationary(spec);
    {
      auto f = open_out(config.out_dir / (std::string("stationary_") + to_string(kind) + ".csv"));
      write_distribution_csv(f, pi.probs);
    }
    const double width = kind == ChainKind::Greedy ? (unit.d > 0 ? std::sqrt(2.0 * unit.m / unit.d) : kInfinity)
                                                   : std::sqrt(4.0 * unit.m);
    json conc = json::array();
    for (int sigma = 1; sigma <= 3; ++sigma) {
      conc.push_back(json{{"sigma", sigma},
                          {"half_width", number(sigma * width)},
                          {"mass", pi.mass_between(pi.kstar - sigma * width, pi.kstar + sigma * width)}});
    }
    json row{{"chain", to_string(kind)}, {"m", unit.m},           {"d", unit.d},
             {"truncation", spec.cap()}, {"kstar", pi.kstar},     {"argmax", pi.argmax()},
             {"mean", pi.mean()},        {"residual", pi.residual}, {"concentration", conc}};
    log << to_string(kind) << ": kstar=" << pi.kstar << " argmax=" << pi.argmax() << " mean=" << pi.mean()
        << " residual=" << pi.residual << '\n';
    if (!histogram.empty()) {
      double s = 0.0;
      for (double x : histogram) s += x;
      std::vector<double> h = histogram;
      for (double& x : h) x /= s;
      const double tv = tv_distance(h, pi.probs);
      row["histogram_tv"] = tv;
      log << "  TV(histogram, pi) = " << tv << '\n';
    }
    report.push_back(row);
  }
  auto f = open_out(config.out_dir / "stationary_report.json");
  f << report.dump(2) << '\n';
}

void cmd_bounds(const ExperimentConfig& config, std::ostream& log) {
  ensure_dir(config.out_dir);
  const auto rows = bound_table(scale_market(config.market));
  auto csv = open_out(config.out_dir / "bounds.csv");
  csv << "name,value,m,d,delta,alpha,T,anchor,status\n";
  json j = json::array();
  for (const auto& r : rows) {
    csv << r.name << ',' << format_number(r.value) << ',' << format_number(r.m) << ',' << format_number(r.d) << ','
        << format_number(r.delta) << ',' << format_number(r.alpha) << ',' << format_number(r.horizon) << ",\""
        << r.anchor << "\"," << r.status << '\n';
    j.push_back(json{{"name", r.name},   {"value", number(r.value)}, {"m", r.m},
                     {"d", r.d},         {"delta", r.delta},         {"alpha", number(r.alpha)},
                     {"T", r.horizon},   {"anchor", r.anchor},       {"status", r.status}});
    log << std::left << std::setw(28) << r.name << ' ' << std::setw(14) << format_number(r.value) << ' '
        << r.status << '\n';
  }
  auto jf = open_out(config.out_dir / "bounds.json");
  jf << j.dump(2) << '\n';
}

void cmd_mixing(const ExperimentConfig& config, std::ostream& log) {
  ensure_dir(config.out_dir);
  const MarketParams unit = scale_market(config.market);
  auto csv = open_out(config.out_dir / "mixing.csv");
  csv << "chain,m,d,epsilon,replications,mixing_time,bound,final_tv,noise_floor,mixed\n";
  for (ChainKind kind : config.chains) {
    ChainSpec spec{kind, unit.m, unit.d, 0};
    const auto pi = stationary(spec);
    MixingOptions opt;
    opt.epsilon = config.epsilon;
    opt.replications = config.mixing_replications;
    opt.grid_step = config.grid_step;
    opt.max_time = config.max_time;
    opt.seed = config.base_seed;
    opt.jobs = config.jobs;
    const auto est = estimate_mixing(spec, pi, opt);
    csv << to_string(kind) << ',' << format_number(unit.m) << ',' << format_number(unit.d) << ','
        << format_number(config.epsilon) << ',' << est.replications << ',' << format_number(est.time) << ','
        << format_number(est.bound) << ',' << format_number(est.final_tv) << ',' << format_number(est.noise_floor)
        << ',' << (est.mixed ? "true" : "false") << '\n';
    auto curve = open_out(config.out_dir / (std::string("mixing_curve_") + to_string(kind) + ".csv"));
    curve << "time,tv\n";
    for (const auto& [t, tv] : est.curve) curve << format_number(t) << ',' << format_number(tv) << '\n';
    log << to_string(kind) << ": " << (est.mixed ? "mixed" : "NOT mixed") << " at t=" << est.time
        << " (bound " << est.bound << ", TV " << est.final_tv << ", noise floor " << est.noise_floor << ")\n";
  }
}

void cmd_mechanism(const ExperimentConfig& config, std::ostream& log) {
  ensure_dir(config.out_dir);
  std::vector<ReportStrategy> deviations;
  for (const auto& s : config.deviations) deviations.push_back(ReportStrategy::parse(s));
  ProbeOptions opt;
  opt.warmup = config.mechanism_warmup;
  opt.replications = config.mechanism_replications;
  opt.probes_per_replication = config.probes_per_replication;
  opt.gap = config.probe_gap;
  opt.seed = config.base_seed;
  opt.jobs = config.jobs;
  const auto report = epsilon_nash_check(config.market, deviations, opt, config.tolerance);
  auto f = open_out(config.out_dir / "mechanism.json");
  f << to_json(report) << '\n';
  log << "beta=" << report.beta << (report.within_hypothesis ? "" : " (delta > beta: out of hypothesis)") << '\n';
  log << "truthful: u=" << report.truthful.utility.mean << " [" << report.truthful.utility.lo << ", "
      << report.truthful.utility.hi << "]\n";
  for (const auto& d : report.deviations) {
    log << d.estimate.strategy << ": u=" << d.estimate.utility.mean << " [" << d.estimate.utility.lo << ", "
        << d.estimate.utility.hi << "] eps=" << d.epsilon_point << " eps_conservative=" << d.epsilon_conservative
        << '\n';
  }
  log << "epsilon*=" << report.epsilon_star << " tolerance=" << report.tolerance << ' '
      << (report.passed ? "PASS" : "FAIL") << '\n';
}

}  // namespace dynmatch
