// Command-line driver: single runs, batch experiments and map generation.

#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "fbr/fbr.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

void print_run(const fbr::RunResult& r, const fbr::SimConfig& cfg) {
  using fbr::csv::num;
  std::cout << "strategy: " << fbr::to_string(cfg.strategy) << '\n'
            << "robots: " << cfg.team_size << '\n'
            << "seed: " << cfg.seed << '\n'
            << "success: " << (r.success ? "true" : "false") << '\n'
            << "terminated_by: " << fbr::to_string(r.terminated_by) << '\n'
            << "t_s: " << num(r.t_rendezvous, 3) << '\n'
            << "sim_time_s: " << num(r.sim_time, 3) << '\n'
            << "fallback_excluded_s: " << num(r.fallback_time_excluded, 3) << '\n';
  for (std::size_t i = 0; i < r.t_partial.size(); ++i)
    std::cout << "t" << i + 1 << "_s: " << num(r.t_partial[i], 3) << '\n';
  std::cout << "area_union_m2: " << num(r.area_union_m2, 3) << '\n'
            << "area_intersection_m2: " << num(r.area_intersection_m2, 3) << '\n'
            << "total_distance_m: " << num(r.total_distance(), 3) << '\n';
  if (!r.fault.empty()) std::cout << "fault: " << r.fault << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frontier-based multi-robot rendezvous simulator"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "Simulate one run and print its metrics");
  std::string map_arg;
  fbr::SimConfig cfg;
  std::string strategy = "fbr";
  run_cmd->add_option("--map", map_arg, "Map file, or gen:<style>:<size_m2>:<rooms>:<seed>")->required();
  run_cmd->add_option("--robots", cfg.team_size, "Team size m")->required()->check(CLI::PositiveNumber);
  run_cmd->add_option("--strategy", strategy, "fbe or fbr")->check(CLI::IsMember({"fbe", "fbr"}));
  run_cmd->add_option("--seed", cfg.seed, "Spawn seed");
  run_cmd->add_option("--alpha", cfg.alpha, "Frontier score weight in [0,1]");
  run_cmd->add_option("--comm-range", cfg.comm_range, "Communication range d (m)");
  run_cmd->add_option("--decay-seconds", cfg.decay_seconds, "Information decay time T (s)");
  run_cmd->add_option("--tick", cfg.tick, "Simulation tick (s)");
  run_cmd->add_option("--time-limit", cfg.time_limit, "Time limit (s)");
  std::string trajectory_out;
  run_cmd->add_option("--trajectory", trajectory_out, "Write per-tick robot poses to this CSV file");

  // batch
  auto* batch_cmd = app.add_subcommand("batch", "Run an experiment spec and write CSV results");
  std::string spec_path, out_dir;
  unsigned threads = 0;
  batch_cmd->add_option("--spec", spec_path, "Experiment spec file")->required()->check(CLI::ExistingFile);
  batch_cmd->add_option("--out", out_dir, "Output directory")->required();
  batch_cmd->add_option("--threads", threads, "Worker threads (overrides the spec file)");

  // genmap
  auto* gen_cmd = app.add_subcommand("genmap", "Generate a procedural indoor map");
  std::string style = "ring", out_file;
  double size_m2 = 1600.0;
  int rooms = 12;
  std::uint64_t map_seed = 0;
  gen_cmd->add_option("--style", style, "ring, office or campus")->check(CLI::IsMember({"ring", "office", "campus"}));
  gen_cmd->add_option("--size", size_m2, "Area in square meters")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--rooms", rooms, "Room count")->check(CLI::NonNegativeNumber);
  gen_cmd->add_option("--seed", map_seed, "Generator seed");
  gen_cmd->add_option("--out", out_file, "Output map file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      cfg.strategy = fbr::parse_strategy(strategy);
      const fbr::OccupancyGrid grid = fbr::parse_map_source(map_arg).load();
      if (trajectory_out.empty()) {
        print_run(fbr::run(grid, cfg), cfg);
      } else {
        std::ofstream traj(trajectory_out);
        if (!traj) throw std::runtime_error("cannot write '" + trajectory_out + "'");
        traj << "time_s,robot,x,y,leader,mode\n";
        fbr::Simulation sim(grid, cfg);
        auto dump = [&] {
          for (const auto& cl : sim.clusters())
            for (fbr::RobotId id : cl.core.members) {
              const auto& r = sim.robots()[static_cast<std::size_t>(id)];
              traj << fbr::csv::num(sim.now(), 1) << ',' << id << ',' << fbr::csv::num(r.pose.x, 3) << ','
                   << fbr::csv::num(r.pose.y, 3) << ',' << cl.core.leader << ',' << static_cast<int>(r.mode) << '\n';
            }
        };
        dump();
        fbr::RunResult result;
        try {
          while (!sim.finished()) {
            sim.step();
            dump();
          }
          result = sim.result();
        } catch (const fbr::SimulationFault& e) {
          result = sim.result();
          result.success = false;
          result.terminated_by = fbr::Termination::Fault;
          result.fault = e.what();
        }
        print_run(result, cfg);
      }
    } else if (*batch_cmd) {
      fbr::ExperimentSpec spec = fbr::parse_experiment_spec(read_file(spec_path));
      if (threads > 0) spec.threads = threads;
      const auto start = std::chrono::steady_clock::now();
      const fbr::BatchResult res = fbr::run_batch(spec);
      const std::filesystem::path dir(out_dir);
      std::filesystem::create_directories(dir);
      write_file(dir / "runs.csv", fbr::runs_csv(res.runs));
      write_file(dir / "summary.csv", fbr::summary_csv(res.summary));
      write_file(dir / "progression.csv", fbr::progression_csv(res.runs));
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::cout << fbr::summary_csv(res.summary);
      std::cerr << res.runs.size() << " runs in " << fbr::csv::num(secs, 1) << " s\n";
    } else if (*gen_cmd) {
      const auto grid = fbr::generate_map(fbr::parse_map_style(style), size_m2, rooms, map_seed);
      write_file(out_file, fbr::save_map(grid));
      std::cout << "wrote " << out_file << " (" << grid.width() << "x" << grid.height() << " cells, "
                << grid.free_count() << " free)\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
