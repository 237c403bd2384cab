#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include "fbr/mapgen.hpp"
#include "fbr/simulator.hpp"

namespace fbr {

/// A map given either as a file path or as generator parameters.
struct MapSource {
  std::string label;
  std::string path;  // empty for generated maps
  MapStyle style = MapStyle::Ring;
  double size_m2 = 1600.0;
  int rooms = 12;
  std::uint64_t seed = 0;

  OccupancyGrid load() const {
    if (path.empty()) return generate_map(style, size_m2, rooms, seed);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open map file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_map(text);
  }
};

/// `gen:<style>:<size_m2>:<rooms>:<seed>` or a file path.
inline MapSource parse_map_source(const std::string& s) {
  MapSource m;
  if (s.rfind("gen:", 0) == 0) {
    std::vector<std::string> parts;
    std::size_t start = 4;
    while (true) {
      const std::size_t end = s.find(':', start);
      parts.push_back(s.substr(start, end == std::string::npos ? std::string::npos : end - start));
      if (end == std::string::npos) break;
      start = end + 1;
    }
    if (parts.size() != 4) throw ConfigError("generated map must be gen:<style>:<size_m2>:<rooms>:<seed>");
    try {
      m.style = parse_map_style(parts[0]);
      m.size_m2 = std::stod(parts[1]);
      m.rooms = std::stoi(parts[2]);
      m.seed = std::stoull(parts[3]);
    } catch (const std::logic_error&) {
      throw ConfigError("bad generated map '" + s + "'");
    }
    m.label = parts[0] + "-" + parts[1] + "-" + parts[2] + "-" + parts[3];
  } else {
    m.path = s;
    m.label = std::filesystem::path(s).stem().string();
  }
  return m;
}

struct ExperimentSpec {
  std::vector<MapSource> maps;
  std::vector<int> team_sizes;
  std::vector<Strategy> strategies;
  int runs_per_cell = 10;
  std::uint64_t base_seed = 0;
  SimConfig config;  // team_size, strategy and seed are overwritten per run
  unsigned threads = 1;
};

/// Line-oriented `key=value`; `map=`, `m=` and `strategy=` may repeat. `#` starts a comment.
inline ExperimentSpec parse_experiment_spec(std::string_view text) {
  ExperimentSpec spec;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "map") spec.maps.push_back(parse_map_source(value));
      else if (key == "m") spec.team_sizes.push_back(std::stoi(value));
      else if (key == "strategy") spec.strategies.push_back(parse_strategy(value));
      else if (key == "runs") spec.runs_per_cell = std::stoi(value);
      else if (key == "base_seed") spec.base_seed = std::stoull(value);
      else if (key == "threads") spec.threads = static_cast<unsigned>(std::stoul(value));
      else if (key == "alpha") spec.config.alpha = std::stod(value);
      else if (key == "comm_range") spec.config.comm_range = std::stod(value);
      else if (key == "speed") spec.config.speed = std::stod(value);
      else if (key == "lidar_range") spec.config.lidar_range = std::stod(value);
      else if (key == "n_beams") spec.config.n_beams = std::stoi(value);
      else if (key == "decay_seconds") spec.config.decay_seconds = std::stod(value);
      else if (key == "pose_interval") spec.config.pose_interval = std::stod(value);
      else if (key == "chunk_size") spec.config.chunk_size = std::stoul(value);
      else if (key == "min_frontier_cells") spec.config.min_frontier_cells = std::stoi(value);
      else if (key == "tick") spec.config.tick = std::stod(value);
      else if (key == "time_limit") spec.config.time_limit = std::stod(value);
      else if (key == "formation_spacing") spec.config.formation_spacing = std::stod(value);
      else throw ParseError(line_no, "unknown key '" + key + "'");
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const ConfigError*>(&e)) throw;
      throw ParseError(line_no, "bad value for '" + key + "'");
    }
  }
  if (spec.maps.empty()) throw ConfigError("spec lists no map");
  if (spec.team_sizes.empty()) throw ConfigError("spec lists no team size (m=)");
  if (spec.strategies.empty()) spec.strategies = {Strategy::FBE, Strategy::FBR};
  if (spec.runs_per_cell < 1) throw ConfigError("runs must be >= 1");
  return spec;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of run `r` in cell (map, m): base_seed + fnv1a("<label>/<m>") + r, modulo 2^64.
/// Strategies share seeds, so FBE and FBR runs start from identical spawns.
inline std::uint64_t run_seed(std::uint64_t base_seed, const std::string& map_label, int m, int r) {
  return base_seed + fnv1a(map_label + "/" + std::to_string(m)) + static_cast<std::uint64_t>(r);
}

struct RunRecord {
  std::string map;
  int m = 0;
  Strategy strategy = Strategy::FBR;
  std::uint64_t seed = 0;
  RunResult result;
};

struct SummaryRow {
  std::string map;
  int m = 0;
  Strategy strategy = Strategy::FBR;
  int runs = 0;
  int successes = 0;
  int faults = 0;
  double R = 0.0;
  std::optional<double> mean_t;
  std::optional<double> sigma_t;
  std::optional<double> mean_area_m2;
  std::optional<double> delta_t;
};

struct BatchResult {
  std::vector<RunRecord> runs;
  std::vector<SummaryRow> summary;
};

inline std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Sample standard deviation; zero for a single value.
inline std::optional<double> stddev_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  if (v.size() == 1) return 0.0;
  const double mu = *mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

/// Relative rendezvous-time gain of FBR over FBE; positive when FBR is faster.
inline std::optional<double> delta_t(std::optional<double> mean_t_fbr, std::optional<double> mean_t_fbe) {
  if (!mean_t_fbr || !mean_t_fbe || *mean_t_fbr <= 0.0) return std::nullopt;
  return *mean_t_fbe / *mean_t_fbr - 1.0;
}

inline SummaryRow summarize_cell(const std::vector<const RunRecord*>& cell) {
  SummaryRow row;
  if (cell.empty()) return row;
  row.map = cell.front()->map;
  row.m = cell.front()->m;
  row.strategy = cell.front()->strategy;
  row.runs = static_cast<int>(cell.size());
  std::vector<double> ts, areas;
  for (const RunRecord* r : cell) {
    if (r->result.terminated_by == Termination::Fault) ++row.faults;
    if (!r->result.success) continue;
    ++row.successes;
    ts.push_back(r->result.t_rendezvous);
    areas.push_back(r->result.area_union_m2);
  }
  row.R = static_cast<double>(row.successes) / static_cast<double>(row.runs);
  row.mean_t = mean_of(ts);
  row.sigma_t = stddev_of(ts);
  row.mean_area_m2 = mean_of(areas);
  return row;
}

/// One summary row per (map, m, strategy) in run order; FBR rows carry delta_t against the matching FBE row.
inline std::vector<SummaryRow> summarize(const std::vector<RunRecord>& runs) {
  std::vector<std::tuple<std::string, int, Strategy>> keys;
  std::map<std::tuple<std::string, int, Strategy>, std::vector<const RunRecord*>> cells;
  for (const auto& r : runs) {
    auto key = std::make_tuple(r.map, r.m, r.strategy);
    if (!cells.count(key)) keys.push_back(key);
    cells[key].push_back(&r);
  }
  std::vector<SummaryRow> rows;
  for (const auto& key : keys) rows.push_back(summarize_cell(cells[key]));
  for (auto& row : rows) {
    if (row.strategy != Strategy::FBR) continue;
    for (const auto& other : rows)
      if (other.strategy == Strategy::FBE && other.map == row.map && other.m == row.m)
        row.delta_t = delta_t(row.mean_t, other.mean_t);
  }
  return rows;
}

/// Executes every (map, m, strategy, run) cell. Output order is independent of thread count.
inline BatchResult run_batch(const ExperimentSpec& spec) {
  std::vector<OccupancyGrid> grids;
  for (const auto& m : spec.maps) grids.push_back(m.load());

  struct Job {
    std::size_t map;
    int m;
    Strategy strategy;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t mi = 0; mi < spec.maps.size(); ++mi)
    for (int m : spec.team_sizes)
      for (Strategy s : spec.strategies)
        for (int r = 0; r < spec.runs_per_cell; ++r)
          jobs.push_back({mi, m, s, run_seed(spec.base_seed, spec.maps[mi].label, m, r)});

  BatchResult out;
  out.runs.resize(jobs.size());
  auto work = [&](std::size_t i) {
    const Job& j = jobs[i];
    SimConfig cfg = spec.config;
    cfg.team_size = j.m;
    cfg.strategy = j.strategy;
    cfg.seed = j.seed;
    out.runs[i] = RunRecord{spec.maps[j.map].label, j.m, j.strategy, j.seed, run(grids[j.map], cfg)};
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(spec.threads, static_cast<unsigned>(jobs.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) work(i);
      });
  }
  out.summary = summarize(out.runs);
  return out;
}

/// Mean max|C| across runs, sampled every `step_s` seconds (step-function hold) up to `horizon_s`.
inline std::vector<std::pair<double, double>> summarize_progression(const std::vector<const RunResult*>& results,
                                                                     double horizon_s, double step_s = 10.0) {
  if (results.empty()) throw std::invalid_argument("summarize_progression: no results");
  std::vector<std::pair<double, double>> curve;
  for (double t = 0.0; t <= horizon_s + 1e-9; t += step_s) {
    double sum = 0.0;
    for (const RunResult* r : results) {
      std::size_t v = r->max_cluster_series.empty() ? 1 : r->max_cluster_series.front().size;
      for (const auto& s : r->max_cluster_series)
        if (s.time <= t + 1e-9) v = s.size;
      sum += static_cast<double>(v);
    }
    curve.emplace_back(t, sum / static_cast<double>(results.size()));
  }
  return curve;
}

namespace csv {

inline std::string num(double v, int decimals) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string num(const std::optional<double>& v, int decimals) { return v ? num(*v, decimals) : ""; }

}  // namespace csv

inline std::string runs_csv(const std::vector<RunRecord>& runs) {
  int max_m = 0;
  for (const auto& r : runs) max_m = std::max(max_m, r.m);
  std::ostringstream out;
  out << "map,m,strategy,seed,success,t_s,fallback_excluded_s";
  for (int i = 1; i <= max_m; ++i) out << ",t" << i << "_s";
  out << ",area_union_m2,area_intersection_m2,total_distance_m,terminated_by\n";
  for (const auto& r : runs) {
    const RunResult& res = r.result;
    out << r.map << ',' << r.m << ',' << to_string(r.strategy) << ',' << r.seed << ',' << (res.success ? 1 : 0)
        << ',' << csv::num(res.t_rendezvous, 3) << ',' << csv::num(res.fallback_time_excluded, 3);
    for (int i = 0; i < max_m; ++i)
      out << ',' << (static_cast<std::size_t>(i) < res.t_partial.size() ? csv::num(res.t_partial[static_cast<std::size_t>(i)], 3) : "");
    out << ',' << csv::num(res.area_union_m2, 3) << ',' << csv::num(res.area_intersection_m2, 3) << ','
        << csv::num(res.total_distance(), 3) << ',' << to_string(res.terminated_by) << '\n';
  }
  return out.str();
}

inline std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "map,m,strategy,runs,R,mean_t_s,sigma_t_s,mean_area_m2,delta_t,faults\n";
  for (const auto& r : rows) {
    out << r.map << ',' << r.m << ',' << to_string(r.strategy) << ',' << r.runs << ',' << csv::num(r.R, 6) << ','
        << csv::num(r.mean_t, 6) << ',' << csv::num(r.sigma_t, 6) << ',' << csv::num(r.mean_area_m2, 6) << ','
        << csv::num(r.delta_t, 6) << ',' << r.faults << '\n';
  }
  return out.str();
}

inline std::string progression_csv(const std::vector<RunRecord>& runs, double step_s = 10.0) {
  std::ostringstream out;
  out << "map,m,strategy,time_s,mean_max_cluster\n";
  std::vector<std::tuple<std::string, int, Strategy>> keys;
  std::map<std::tuple<std::string, int, Strategy>, std::vector<const RunResult*>> cells;
  double horizon = 0.0;
  for (const auto& r : runs) {
    auto key = std::make_tuple(r.map, r.m, r.strategy);
    if (!cells.count(key)) keys.push_back(key);
    cells[key].push_back(&r.result);
    horizon = std::max(horizon, r.result.sim_time - r.result.fallback_time_excluded);
  }
  for (const auto& key : keys) {
    for (const auto& [t, v] : summarize_progression(cells[key], horizon, step_s))
      out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << to_string(std::get<2>(key)) << ','
          << csv::num(t, 1) << ',' << csv::num(v, 6) << '\n';
  }
  return out.str();
}

}  // namespace fbr
