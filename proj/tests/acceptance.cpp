// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cstdio>
#include <iostream>

#include "solo.hpp"

using namespace fbr;

namespace {

int failures = 0;

void report(int n, bool ok, const std::string& what, const std::string& detail) {
  std::printf("criterion %d: %s  %s  [%s]\n", n, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

const SummaryRow* row(const std::vector<SummaryRow>& rows, int m, Strategy s) {
  for (const auto& r : rows)
    if (r.m == m && r.strategy == s) return &r;
  return nullptr;
}

std::string opt(const std::optional<double>& v, int d = 3) { return v ? csv::num(*v, d) : "n/a"; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// criterion 5 pieces; each returns the number of mismatches
int frontier_oracle_cases() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 50), minc(1, 4);
  int bad = 0;
  for (int i = 0; i < 200; ++i) {
    const auto k = oracle::random_known(rng, dim(rng), dim(rng), 0.35, 0.15);
    const int mc = minc(rng);
    std::vector<oracle::OracleFrontier> got;
    for (const auto& f : extract_frontiers(k, mc)) got.push_back({f.cells, f.target});
    std::sort(got.begin(), got.end(), [](const auto& a, const auto& b) { return a.cells < b.cells; });
    if (got != oracle::frontiers(k, mc)) ++bad;
  }
  return bad;
}

int cluster_oracle_cases() {
  std::mt19937_64 rng(2025);
  std::uniform_int_distribution<int> n_dist(1, 16);
  int bad = 0;
  for (int i = 0; i < 200; ++i) {
    const int n = n_dist(rng);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Partition current;
    for (int r : perm) {
      if (current.empty() || std::bernoulli_distribution(0.6)(rng)) current.push_back({});
      current.back().push_back(r);
    }
    normalize(current);
    CommGraph g(static_cast<std::size_t>(n));
    std::vector<std::pair<int, int>> edges;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (std::bernoulli_distribution(0.12)(rng)) {
          g.add_edge(a, b);
          edges.emplace_back(a, b);
        }
    if (update_clusters(current, g).clusters != oracle::cluster_components(current, edges)) ++bad;
  }
  return bad;
}

int planner_oracle_cases() {
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<int> dim(1, 30);
  int bad = 0;
  for (int i = 0; i < 200; ++i) {
    const auto k = oracle::random_known(rng, dim(rng), dim(rng), 0.1, 0.25);
    std::uniform_int_distribution<std::size_t> pick(0, k.shape().size() - 1);
    const Cell a = k.shape().cell_at(pick(rng)), b = k.shape().cell_at(pick(rng));
    const double want = oracle::shortest_length(k.shape(), [&](Cell c) { return k.is_free(c); }, a, b);
    const auto got = plan_path(k, a, b);
    if (std::isinf(want) != !got.has_value()) ++bad;
    else if (got && std::abs(got->length - want) > 1e-9) ++bad;
  }
  return bad;
}

}  // namespace

int main() {
  const auto t_start = std::chrono::steady_clock::now();
  const std::string map = "gen:ring:1600:12:0";

  // criteria 1-4 and 8 share one batch
  ExperimentSpec spec;
  spec.maps = {parse_map_source(map)};
  spec.team_sizes = {3, 8};
  spec.strategies = {Strategy::FBE, Strategy::FBR};
  spec.runs_per_cell = 10;
  const auto t0 = std::chrono::steady_clock::now();
  const BatchResult batch = run_batch(spec);
  const double batch_s = seconds_since(t0);
  std::printf("batch: %s, m in {3,8}, 10 runs per strategy, %zu runs in %.1f s\n", map.c_str(), batch.runs.size(),
              batch_s);
  std::fputs(summary_csv(batch.summary).c_str(), stdout);

  const auto* fbe3 = row(batch.summary, 3, Strategy::FBE);
  const auto* fbr3 = row(batch.summary, 3, Strategy::FBR);
  const auto* fbe8 = row(batch.summary, 8, Strategy::FBE);
  const auto* fbr8 = row(batch.summary, 8, Strategy::FBR);

  {
    const bool ok = fbr3->R == 1.0 && fbr3->R >= fbe3->R && fbr3->delta_t && *fbr3->delta_t > 0.0 && batch_s < 300.0;
    report(1, ok, "m=3: R(FBR)=1, R(FBR)>=R(FBE), delta_t>0",
           "R_fbr=" + csv::num(fbr3->R, 2) + " R_fbe=" + csv::num(fbe3->R, 2) + " delta_t=" + opt(fbr3->delta_t) +
               " wall=" + csv::num(batch_s, 1) + "s");
  }
  {
    const bool ok = fbr3->delta_t && fbr8->delta_t && *fbr3->delta_t > *fbr8->delta_t;
    report(2, ok, "delta_t(m=3) > delta_t(m=8)", "m3=" + opt(fbr3->delta_t) + " m8=" + opt(fbr8->delta_t));
  }
  {
    bool ok = true;
    std::string detail;
    for (const auto& [e, r] : {std::pair{fbe3, fbr3}, std::pair{fbe8, fbr8}}) {
      const bool cell_ok = e->mean_area_m2 && r->mean_area_m2 &&
                           std::abs(*r->mean_area_m2 - *e->mean_area_m2) <= 0.15 * *e->mean_area_m2;
      ok = ok && cell_ok;
      detail += "m" + std::to_string(r->m) + ": fbr=" + opt(r->mean_area_m2, 1) + " fbe=" + opt(e->mean_area_m2, 1) + " ";
    }
    report(3, ok, "FBR mean explored area within 15% of FBE", detail);
  }
  {
    int fbr_runs = 0, fbr_ok = 0;
    for (const auto& rec : batch.runs) {
      if (rec.strategy != Strategy::FBR) continue;
      ++fbr_runs;
      if (rec.result.success && rec.result.t_rendezvous < spec.config.time_limit) ++fbr_ok;
    }
    report(4, fbr_ok == fbr_runs, "every FBR run succeeds before the time limit",
           std::to_string(fbr_ok) + "/" + std::to_string(fbr_runs));
  }
  {
    const auto t5 = std::chrono::steady_clock::now();
    const int f = frontier_oracle_cases(), c = cluster_oracle_cases(), p = planner_oracle_cases();
    int conservation_bad = 0;
    std::size_t events = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const auto g = generate_map(MapStyle::Ring, 400, 6, seed % 10);
      const auto out = solo::conservation_run(g, seed, 60.0, 600.0);
      if (!out.ok) {
        ++conservation_bad;
        std::printf("  conservation seed %llu: %s\n", static_cast<unsigned long long>(seed), out.failure.c_str());
      }
      events += out.events;
    }
    report(5, f == 0 && c == 0 && p == 0 && conservation_bad == 0 && events > 0, "oracle equivalence suite",
           "frontier " + std::to_string(200 - f) + "/200, clusters " + std::to_string(200 - c) + "/200, plan_path " +
               std::to_string(200 - p) + "/200, conservation " + std::to_string(50 - conservation_bad) + "/50 (" +
               std::to_string(events) + " decay events), " + csv::num(seconds_since(t5), 1) + "s");
  }
  {
    const double s = frontier_score(8.0, 4.0, 0.25);
    const std::string d = csv::num(delta_t(1623.13, 2691.64), 2);
    report(6, s == -1.0 && d == "0.66", "score(1/4, 8, 4) == -1.0 and delta_t rounds to 0.66",
           "score=" + csv::num(s, 17) + " delta_t=" + d);
  }
  {
    ExperimentSpec small;
    small.maps = {parse_map_source("gen:ring:400:6:0")};
    small.team_sizes = {3};
    small.strategies = {Strategy::FBE, Strategy::FBR};
    small.runs_per_cell = 3;
    auto csvs = [&] {
      const auto b = run_batch(small);
      return runs_csv(b.runs) + summary_csv(b.summary) + progression_csv(b.runs);
    };
    const std::string a = csvs(), b = csvs();
    report(7, a == b && !a.empty(), "byte-identical CSV across two executions", std::to_string(a.size()) + " bytes");
  }
  {
    int checked = 0, connected = 0;
    const auto grid = spec.maps[0].load();
    for (const auto& rec : batch.runs) {
      if (!rec.result.success) continue;
      ++checked;
      const auto& poses = rec.result.final_poses;
      if (oracle::graph_connected(poses.size(), build_comm_graph(poses, grid, spec.config.comm_range).edges()))
        ++connected;
    }
    report(8, checked > 0 && connected == checked, "final comm graph connected in every successful run",
           std::to_string(connected) + "/" + std::to_string(checked));
  }

  std::printf("total %.1f s, %d criteria failed\n", seconds_since(t_start), failures);
  return failures == 0 ? 0 : 1;
}
