#pragma once

#include <random>

#include "fbr/team.hpp"

namespace fbr {

enum class Strategy : std::uint8_t { FBE, FBR };

inline const char* to_string(Strategy s) { return s == Strategy::FBE ? "fbe" : "fbr"; }

inline Strategy parse_strategy(std::string_view s) {
  if (s == "fbe" || s == "FBE") return Strategy::FBE;
  if (s == "fbr" || s == "FBR") return Strategy::FBR;
  throw ConfigError("unknown strategy '" + std::string(s) + "'");
}

struct SimConfig {
  int team_size = 3;
  Strategy strategy = Strategy::FBR;
  double comm_range = 2.7;
  double speed = 0.3;
  double lidar_range = 10.0;
  int n_beams = 360;
  double alpha = 0.25;
  double decay_seconds = 300.0;
  double pose_interval = 2.0;
  std::size_t chunk_size = 9;
  int min_frontier_cells = 3;
  double tick = 0.5;
  std::uint64_t seed = 0;
  double time_limit = 7200.0;
  // follower spacing along the leader's path; 0 selects comm_range / 2
  double formation_spacing = 0.0;
  double range_noise = 0.0;

  double spacing() const { return formation_spacing > 0.0 ? formation_spacing : comm_range / 2.0; }

  void validate() const {
    if (team_size < 1) throw ConfigError("team size must be >= 1");
    check_alpha(alpha);
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be > 0");
    };
    positive(comm_range, "comm_range");
    positive(speed, "speed");
    positive(lidar_range, "lidar_range");
    positive(decay_seconds, "decay_seconds");
    positive(pose_interval, "pose_interval");
    positive(tick, "tick");
    positive(time_limit, "time_limit");
    if (n_beams < 1) throw ConfigError("n_beams must be >= 1");
    if (chunk_size < 1) throw ConfigError("chunk_size must be >= 1");
    if (min_frontier_cells < 1) throw ConfigError("min_frontier_cells must be >= 1");
    if (tick > pose_interval) throw ConfigError("tick must not exceed pose_interval");
    if (formation_spacing < 0.0) throw ConfigError("formation_spacing must be >= 0");
    if (range_noise < 0.0) throw ConfigError("range_noise must be >= 0");
  }
};

class SpawnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimulationFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Role : std::uint8_t { Leader, Follower };
// Parked: fallback location reached (or unreachable), waiting for teammates.
enum class Mode : std::uint8_t { Idle, Navigating, Fallback, Parked };
enum class Termination : std::uint8_t { Rendezvous, FrontiersExhausted, TimeLimit, Fault };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Rendezvous: return "rendezvous";
    case Termination::FrontiersExhausted: return "frontiers_exhausted";
    case Termination::TimeLimit: return "time_limit";
    case Termination::Fault: return "fault";
  }
  return "?";
}

struct RobotState {
  RobotId id = 0;
  Pose pose;
  Role role = Role::Leader;
  Mode mode = Mode::Idle;
  double odometer = 0.0;
};

struct ClusterSample {
  double time = 0.0;
  std::size_t size = 0;
};

struct RunResult {
  bool success = false;
  double t_rendezvous = 0.0;
  std::vector<double> t_partial;  // t_1..t_m; NaN where never reached
  std::vector<ClusterSample> max_cluster_series;
  double area_union_m2 = 0.0;
  double area_intersection_m2 = 0.0;
  std::vector<double> odometer;
  double fallback_time_excluded = 0.0;
  Termination terminated_by = Termination::TimeLimit;
  double sim_time = 0.0;
  std::vector<Pose> final_poses;
  Partition final_clusters;
  std::string fault;

  double total_distance() const { return std::accumulate(odometer.begin(), odometer.end(), 0.0); }
};

/// Draws `team_size` distinct Free cells such that no two start in communication.
inline std::vector<Pose> spawn(const OccupancyGrid& grid, const SimConfig& config) {
  config.validate();
  std::vector<Cell> free_cells;
  for (std::size_t i = 0; i < grid.shape().size(); ++i) {
    const Cell c = grid.shape().cell_at(i);
    if (grid.at(c) == Terrain::Free) free_cells.push_back(c);
  }
  const auto m = static_cast<std::size_t>(config.team_size);
  if (free_cells.size() < m) throw SpawnError("not enough free cells for the team");

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, free_cells.size() - 1);
  std::uniform_real_distribution<double> heading(0.0, 2.0 * std::numbers::pi);
  std::vector<Pose> poses;
  const std::size_t max_attempts = 10 * m * m;
  std::size_t attempts = 0;
  while (poses.size() < m) {
    if (attempts++ >= max_attempts) throw SpawnError("could not place the team after " + std::to_string(max_attempts) + " attempts");
    Pose p = grid.shape().center_of(free_cells[pick(rng)]);
    p.heading = wrap_angle(heading(rng));
    bool ok = true;
    for (const Pose& q : poses) {
      if (grid.shape().cell_of(p) == grid.shape().cell_of(q) ||
          (distance(p, q) <= config.comm_range && line_of_sight(grid, p, q))) {
        ok = false;
        break;
      }
    }
    if (ok) poses.push_back(p);
  }
  return poses;
}

/// Free cell of the ground truth nearest to the centroid of all Free cells.
inline Cell fallback_cell(const OccupancyGrid& grid) {
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  const GridShape& shape = grid.shape();
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (grid.at(shape.cell_at(i)) != Terrain::Free) continue;
    const Cell c = shape.cell_at(i);
    sx += c.x;
    sy += c.y;
    ++n;
  }
  if (n == 0) throw SpawnError("map has no free cells");
  const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
  Cell best{};
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < shape.size(); ++i) {
    const Cell c = shape.cell_at(i);
    if (grid.at(c) != Terrain::Free) continue;
    const double d = (c.x - mx) * (c.x - mx) + (c.y - my) * (c.y - my);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

/// Per-step observations for property checks.
struct StepEvents {
  struct Appended {
    RobotId leader;
    TracePose pose;
  };
  struct Decayed {
    RobotId leader;
    DecayEvent event;
  };
  struct Selected {
    RobotId leader;
    FrontierKind kind;
    FrontierId id;
  };
  std::vector<Appended> appended;
  std::vector<Decayed> decayed;
  std::vector<Selected> selected;
  std::vector<MergeEvent> merges;
};

/// One closed-loop run. Single-threaded and deterministic for a given (grid, config).
class Simulation {
 public:
  struct Navigation {
    Mode mode = Mode::Idle;
    std::vector<Cell> path;
    std::size_t next_waypoint = 0;
    FrontierKind target_kind = FrontierKind::Real;
    FrontierId target_id = 0;
    Cell target;
  };

  struct ClusterState {
    Cluster core;
    Navigation nav;
    double next_pose_time = 0.0;
    std::vector<Cell> reached_targets;  // real-frontier goals already visited
  };

  Simulation(const OccupancyGrid& grid, SimConfig config)
      : grid_(&grid), config_(std::move(config)), rng_(config_.seed ^ 0x5DEECE66DULL) {
    config_.validate();
    const auto poses = spawn(grid, config_);
    fallback_ = fallback_cell(grid);
    robots_.resize(poses.size());
    history_.resize(poses.size());
    for (std::size_t i = 0; i < poses.size(); ++i) {
      robots_[i] = RobotState{static_cast<RobotId>(i), poses[i], Role::Leader, Mode::Idle, 0.0};
      history_[i].points.push_back(poses[i]);
      ClusterState cs;
      cs.core = make_singleton(static_cast<RobotId>(i), grid.shape(), config_.comm_range, config_.chunk_size);
      clusters_.push_back(std::move(cs));
    }
    t_partial_.assign(poses.size(), std::numeric_limits<double>::quiet_NaN());
    record_cluster_size();
    check_termination();
  }

  double now() const { return now_; }
  bool finished() const { return finished_; }
  const std::vector<RobotState>& robots() const { return robots_; }
  const std::vector<ClusterState>& clusters() const { return clusters_; }
  const StepEvents& last_events() const { return events_; }
  const SimConfig& config() const { return config_; }
  Cell fallback_target() const { return fallback_; }

  Partition partition() const {
    Partition p;
    for (const auto& c : clusters_) p.push_back(c.core.members);
    return p;
  }

  std::vector<Pose> poses() const {
    std::vector<Pose> out;
    for (const auto& r : robots_) out.push_back(r.pose);
    return out;
  }

  void step() {
    if (finished_) return;
    events_ = {};
    const double dt = config_.tick;
    bool any_fallback = false;
    for (auto& cs : clusters_) {
      update_cluster(cs);
      if (cs.nav.mode == Mode::Fallback) any_fallback = true;
      advance(cs, dt);
    }
    for (const auto& r : robots_)
      if (!grid_->is_free(grid_->shape().cell_of(r.pose)))
        throw SimulationFault("robot " + std::to_string(r.id) + " entered an obstacle cell");
    if (any_fallback) fallback_excluded_ += dt;
    now_ += dt;
    fire_merges();
    record_cluster_size();
    check_termination();
  }

  RunResult result() const {
    RunResult r;
    r.success = termination_ == Termination::Rendezvous;
    r.terminated_by = termination_;
    r.t_rendezvous = r.success ? now_ - fallback_excluded_ : std::numeric_limits<double>::quiet_NaN();
    r.t_partial = t_partial_;
    r.max_cluster_series = series_;
    r.fallback_time_excluded = fallback_excluded_;
    r.sim_time = now_;
    for (const auto& rb : robots_) {
      r.odometer.push_back(rb.odometer);
      r.final_poses.push_back(rb.pose);
    }
    r.final_clusters = partition();
    const GridShape& shape = grid_->shape();
    std::size_t uni = 0, inter = 0;
    for (std::size_t i = 0; i < shape.size(); ++i) {
      bool any = false, all = true;
      for (const auto& c : clusters_) {
        const bool k = c.core.map.at(i) != Knowledge::Unknown;
        any = any || k;
        all = all && k;
      }
      uni += any;
      inter += all;
    }
    r.area_union_m2 = static_cast<double>(uni) * shape.cell_area();
    r.area_intersection_m2 = static_cast<double>(inter) * shape.cell_area();
    return r;
  }

 private:
  struct History {
    std::deque<Pose> points;
    double length = 0.0;
  };

  void push_history(RobotId id, const Pose& p) {
    History& h = history_[static_cast<std::size_t>(id)];
    const double seg = distance(h.points.back(), p);
    if (seg <= 0.0) return;
    h.points.push_back(p);
    h.length += seg;
    const double keep = config_.spacing() * static_cast<double>(robots_.size()) + 1.0;
    while (h.points.size() > 2 && h.length - distance(h.points[0], h.points[1]) >= keep) {
      h.length -= distance(h.points[0], h.points[1]);
      h.points.pop_front();
    }
  }

  RobotState& robot(RobotId id) { return robots_[static_cast<std::size_t>(id)]; }

  void update_cluster(ClusterState& cs) {
    Cluster& cl = cs.core;
    RobotState& leader = robot(cl.leader);
    const LidarOptions lidar{config_.lidar_range, config_.n_beams, config_.range_noise};
    integrate_scan(cl.map, simulate_lidar(*grid_, leader.pose, lidar, rng_));

    if (now_ + 1e-9 >= cs.next_pose_time) {
      cl.trace.append_pose(leader.pose, now_);
      events_.appended.push_back({cl.leader, cl.trace.poses().back()});
      cs.next_pose_time += config_.pose_interval;
    }

    if (config_.strategy == Strategy::FBR) {
      for (auto& ev : decay_step(cl.trace, cl.map, now_, config_.decay_seconds, ids_)) {
        cl.frontiers.virtual_.insert(cl.frontiers.virtual_.end(), ev.new_virtual_frontiers.begin(),
                                     ev.new_virtual_frontiers.end());
        events_.decayed.push_back({cl.leader, std::move(ev)});
      }
      // re-covered regions are no longer forgotten
      std::erase_if(cl.frontiers.virtual_, [&](const Frontier& f) { return cl.trace.covers(f.target); });
    }

    Navigation& nav = cs.nav;
    if (nav.mode == Mode::Navigating) {
      bool valid = true;
      if (nav.target_kind == FrontierKind::Real) {
        valid = cl.map.is_frontier_cell(nav.target);
      } else {
        valid = std::any_of(cl.frontiers.virtual_.begin(), cl.frontiers.virtual_.end(),
                            [&](const Frontier& f) { return f.id == nav.target_id; });
      }
      if (!valid) nav = Navigation{};
    }
    if (nav.mode == Mode::Idle) choose_target(cs);
    leader.mode = nav.mode;
  }

  void choose_target(ClusterState& cs) {
    Cluster& cl = cs.core;
    RobotState& leader = robot(cl.leader);
    const Cell here = grid_->shape().cell_of(leader.pose);
    cl.frontiers.real = extract_frontiers(cl.map, config_.min_frontier_cells, ids_);
    auto skip = [&](const Frontier& f) {
      return f.kind == FrontierKind::Real &&
             std::find(cs.reached_targets.begin(), cs.reached_targets.end(), f.target) != cs.reached_targets.end();
    };
    const auto sel = select_frontier(cl.frontiers, here, cl.map, config_.alpha, skip);
    if (sel) {
      auto path = plan_path(cl.map, here, sel->frontier.target);
      if (!path) throw SimulationFault("selected frontier has no path");
      cs.nav = Navigation{Mode::Navigating, std::move(path->waypoints), 0, sel->frontier.kind, sel->frontier.id,
                          sel->frontier.target};
      events_.selected.push_back({cl.leader, sel->frontier.kind, sel->frontier.id});
      return;
    }
    if (config_.strategy == Strategy::FBE) {
      auto path = here == fallback_ ? std::nullopt : plan_path(cl.map, here, fallback_);
      if (path) {
        cs.nav = Navigation{Mode::Fallback, std::move(path->waypoints), 0, FrontierKind::Real, 0, fallback_};
      } else {
        cs.nav = Navigation{};
        cs.nav.mode = Mode::Parked;
      }
    }
  }

  void advance(ClusterState& cs, double dt) {
    Cluster& cl = cs.core;
    RobotState& leader = robot(cl.leader);
    Navigation& nav = cs.nav;
    if (nav.mode == Mode::Navigating || nav.mode == Mode::Fallback) {
      double budget = config_.speed * dt;
      const GridShape& shape = grid_->shape();
      while (budget > 0.0 && nav.next_waypoint < nav.path.size()) {
        const Pose goal = shape.center_of(nav.path[nav.next_waypoint]);
        const double gap = distance(leader.pose, goal);
        if (gap <= budget) {
          budget -= gap;
          leader.odometer += gap;
          if (gap > 0.0) leader.pose.heading = wrap_angle(std::atan2(goal.y - leader.pose.y, goal.x - leader.pose.x));
          leader.pose.x = goal.x;
          leader.pose.y = goal.y;
          ++nav.next_waypoint;
          push_history(cl.leader, leader.pose);
        } else {
          const double f = budget / gap;
          leader.pose.heading = wrap_angle(std::atan2(goal.y - leader.pose.y, goal.x - leader.pose.x));
          leader.pose.x += (goal.x - leader.pose.x) * f;
          leader.pose.y += (goal.y - leader.pose.y) * f;
          leader.odometer += budget;
          budget = 0.0;
          push_history(cl.leader, leader.pose);
        }
      }
      if (nav.next_waypoint >= nav.path.size()) {
        if (nav.mode == Mode::Fallback) {
          nav = Navigation{};
          nav.mode = Mode::Parked;
        } else {
          if (nav.target_kind == FrontierKind::Virtual) {
            std::erase_if(cl.frontiers.virtual_, [&](const Frontier& f) { return f.id == nav.target_id; });
          } else {
            cs.reached_targets.push_back(nav.target);
          }
          nav = Navigation{};
        }
      }
    }
    leader.mode = nav.mode;
    place_followers(cl);
  }

  void place_followers(const Cluster& cl) {
    if (cl.members.size() < 2) return;
    const History& h = history_[static_cast<std::size_t>(cl.leader)];
    const std::vector<Pose> hist(h.points.begin(), h.points.end());
    const auto targets = formation_targets(hist, cl.members.size() - 1, config_.spacing());
    // each follower must stay in contact with the one ahead; around corners pull it forward
    // along the path (a follower on its predecessor's spot is trivially in contact)
    const double step = grid_->resolution();
    Pose ahead = robot(cl.leader).pose;
    double ahead_arc = 0.0;
    std::size_t j = 0;
    for (RobotId id : cl.members) {
      if (id == cl.leader) continue;
      Pose target = targets[j];
      double arc = static_cast<double>(j + 1) * config_.spacing();
      auto in_contact = [&](const Pose& p) {
        return distance(p, ahead) <= config_.comm_range && line_of_sight(*grid_, p, ahead);
      };
      while (!in_contact(target)) {
        arc -= step;
        if (arc <= ahead_arc) {
          arc = ahead_arc;
          target = ahead;
          break;
        }
        target = formation_targets(hist, 1, arc).front();
      }
      ahead = target;
      ahead_arc = arc;
      RobotState& f = robot(id);
      f.odometer += distance(f.pose, target);
      f.pose = target;
      f.role = Role::Follower;
      f.mode = Mode::Idle;
      ++j;
    }
  }

  void fire_merges() {
    const CommGraph graph = build_comm_graph(poses(), *grid_, config_.comm_range);
    const Partition current = partition();
    ClusterUpdate up = update_clusters(current, graph);
    if (up.merges.empty()) return;
    std::vector<ClusterState> next;
    for (std::size_t k = 0; k < up.clusters.size(); ++k) {
      const auto& src = up.origin[k];
      if (src.size() == 1) {
        next.push_back(std::move(clusters_[src[0]]));
        continue;
      }
      Cluster merged = clusters_[src[0]].core;
      for (std::size_t s = 1; s < src.size(); ++s)
        merged = on_merge(merged, clusters_[src[s]].core, config_.min_frontier_cells, ids_);
      ClusterState cs;
      cs.core = std::move(merged);
      // the new leader keeps its own pose cadence
      for (std::size_t s : src)
        if (clusters_[s].core.leader == cs.core.leader) {
          cs.next_pose_time = clusters_[s].next_pose_time;
          cs.reached_targets = clusters_[s].reached_targets;
        }
      for (RobotId id : cs.core.members) {
        RobotState& r = robot(id);
        r.role = id == cs.core.leader ? Role::Leader : Role::Follower;
        r.mode = Mode::Idle;
      }
      next.push_back(std::move(cs));
    }
    clusters_ = std::move(next);
    events_.merges = std::move(up.merges);
  }

  void record_cluster_size() {
    std::size_t best = 0;
    for (const auto& c : clusters_) best = std::max(best, c.core.members.size());
    const double t = now_ - fallback_excluded_;
    if (series_.empty() || series_.back().size != best) series_.push_back({t, best});
    for (std::size_t i = 0; i < best; ++i)
      if (std::isnan(t_partial_[i])) t_partial_[i] = t;
  }

  void check_termination() {
    if (clusters_.size() == 1) {
      finished_ = true;
      termination_ = Termination::Rendezvous;
      return;
    }
    if (config_.strategy == Strategy::FBE &&
        std::all_of(clusters_.begin(), clusters_.end(), [](const ClusterState& c) { return c.nav.mode == Mode::Parked; })) {
      finished_ = true;
      termination_ = Termination::FrontiersExhausted;
      return;
    }
    if (now_ + 1e-9 >= config_.time_limit) {
      finished_ = true;
      termination_ = Termination::TimeLimit;
    }
  }

  const OccupancyGrid* grid_;
  SimConfig config_;
  std::mt19937_64 rng_;
  Cell fallback_;
  std::vector<RobotState> robots_;
  std::vector<History> history_;
  std::vector<ClusterState> clusters_;
  FrontierIds ids_;
  double now_ = 0.0;
  double fallback_excluded_ = 0.0;
  std::vector<double> t_partial_;
  std::vector<ClusterSample> series_;
  bool finished_ = false;
  Termination termination_ = Termination::TimeLimit;
  StepEvents events_;
};

/// Steps a fresh simulation to completion. Simulation faults are reported, not thrown.
inline RunResult run(const OccupancyGrid& grid, const SimConfig& config) {
  Simulation sim(grid, config);
  try {
    while (!sim.finished()) sim.step();
  } catch (const SimulationFault& e) {
    RunResult r = sim.result();
    r.success = false;
    r.terminated_by = Termination::Fault;
    r.t_rendezvous = std::numeric_limits<double>::quiet_NaN();
    r.fault = e.what();
    return r;
  }
  return sim.result();
}

}  // namespace fbr
