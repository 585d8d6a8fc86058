#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "vantrust/metrics.hpp"
#include "vantrust/simulation.hpp"

namespace vantrust {

/// Factorial sweep: algorithms x entry intensities x attack intensities x
/// replications. Every cell derives its own seed from the base seed and the
/// cell coordinates, so any row can be reproduced in isolation.
struct ExperimentPlan {
  std::vector<int> algorithms = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<double> qs = {0.02, 0.06, 0.10, 0.14};
  std::vector<double> qfs = {0.02, 0.04, 0.06, 0.08};
  int replications = 20;
  uint64_t base_seed = 1;
  ScenarioConfig base;
  int threads = 0;  // 0: hardware concurrency
};

inline uint64_t cell_seed(uint64_t base, int algorithm, double q, double qf, int replication) {
  uint64_t s = seed_combine(base, static_cast<uint64_t>(algorithm));
  s = seed_combine(s, q);
  s = seed_combine(s, qf);
  return seed_combine(s, static_cast<uint64_t>(replication));
}

inline std::vector<ScenarioConfig> plan_cells(const ExperimentPlan& plan) {
  if (plan.replications < 1) throw std::invalid_argument("replications must be >= 1");
  std::vector<ScenarioConfig> cells;
  cells.reserve(plan.algorithms.size() * plan.qs.size() * plan.qfs.size() *
                static_cast<size_t>(plan.replications));
  for (int alg : plan.algorithms) {
    algorithm_ruleset(alg);  // validates the id
    for (double q : plan.qs) {
      if (q < 0 || q > 1) throw std::invalid_argument("q must be in [0, 1]");
      for (double qf : plan.qfs) {
        if (qf < 0 || qf > 1) throw std::invalid_argument("qF must be in [0, 1]");
        for (int rep = 0; rep < plan.replications; ++rep) {
          ScenarioConfig cfg = plan.base;
          cfg.algorithm = alg;
          cfg.sim.q = q;
          cfg.attack.qf = qf;
          cfg.seed = cell_seed(plan.base_seed, alg, q, qf, rep);
          cells.push_back(cfg);
        }
      }
    }
  }
  return cells;
}

// Runs every cell and returns results in cell order regardless of the
// number of worker threads, so output files never depend on scheduling.
inline std::vector<RunResult> run_experiment(const GridTopology& topo, const ExperimentPlan& plan,
                                             std::function<void(size_t, size_t)> progress = {}) {
  const std::vector<ScenarioConfig> cells = plan_cells(plan);
  std::vector<RunResult> results(cells.size());
  unsigned workers = plan.threads > 0 ? static_cast<unsigned>(plan.threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cells.size()));

  std::atomic<size_t> next{0};
  std::atomic<size_t> finished{0};
  std::mutex progress_mu;
  auto work = [&]() {
    for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
      results[i] = run_single(topo, cells[i]);
      size_t done = finished.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mu);
        progress(done, cells.size());
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& th : pool) th.join();
  }
  return results;
}

// --- CSV output ------------------------------------------------------------

inline void write_results_csv(std::ostream& out, const std::vector<RunResult>& results) {
  out << results_csv_header() << '\n';
  for (const RunResult& r : results) out << results_csv_row(r) << '\n';
}

inline void write_file_or_throw(const std::string& path,
                                const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  body(out);
  out.flush();
  if (!out) {
    out.close();
    std::remove(path.c_str());
    throw std::runtime_error("failed while writing output file: " + path);
  }
}

struct AggregateRow {
  int algorithm = 0;
  double q = 0;
  double qf = 0;
  int runs = 0;
  double mean_total_delay_s = 0;
  double mean_delay_s = 0;
  double pct_malicious_detected = 0;
  double pct_true_recognized = 0;
  double mean_vehicles = 0;
};

// Seed-averaged rows, ordered by first appearance of each (alg, q, qF) cell.
inline std::vector<AggregateRow> aggregate_results(const std::vector<RunResult>& results) {
  std::vector<AggregateRow> rows;
  std::map<std::tuple<int, double, double>, size_t> index;
  for (const RunResult& r : results) {
    auto key = std::make_tuple(r.algorithm, r.q, r.qf);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, rows.size()).first;
      AggregateRow row;
      row.algorithm = r.algorithm;
      row.q = r.q;
      row.qf = r.qf;
      rows.push_back(row);
    }
    AggregateRow& row = rows[it->second];
    ++row.runs;
    row.mean_total_delay_s += static_cast<double>(r.total_delay_s);
    row.mean_delay_s += r.mean_delay_s;
    row.pct_malicious_detected += r.pct_malicious_detected;
    row.pct_true_recognized += r.pct_true_recognized;
    row.mean_vehicles += static_cast<double>(r.vehicles);
  }
  for (AggregateRow& row : rows) {
    const double n = row.runs;
    row.mean_total_delay_s /= n;
    row.mean_delay_s /= n;
    row.pct_malicious_detected /= n;
    row.pct_true_recognized /= n;
    row.mean_vehicles /= n;
  }
  return rows;
}

inline void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "algorithm,q,qF,runs,mean_total_delay_s,mean_delay_s,pct_malicious_detected,"
         "pct_true_recognized,mean_vehicles\n";
  char buf[224];
  for (const AggregateRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.6g,%.6g,%d,%.3f,%.3f,%.3f,%.3f,%.3f\n", r.algorithm,
                  r.q, r.qf, r.runs, r.mean_total_delay_s, r.mean_delay_s,
                  r.pct_malicious_detected, r.pct_true_recognized, r.mean_vehicles);
    out << buf;
  }
}

// --- summary tables --------------------------------------------------------

// Detection accuracy by algorithm and attack intensity, averaged over entry
// intensities and seeds. Attack-free rows are excluded.
inline std::string detection_table_csv(const std::vector<RunResult>& results) {
  std::map<std::pair<int, double>, std::tuple<double, double, int>> acc;
  for (const RunResult& r : results) {
    if (r.qf <= 0) continue;
    auto& [mal, tru, n] = acc[{r.algorithm, r.qf}];
    mal += r.pct_malicious_detected;
    tru += r.pct_true_recognized;
    ++n;
  }
  std::string out = "algorithm,qF,pct_malicious_detected,pct_true_recognized\n";
  char buf[128];
  for (const auto& [key, val] : acc) {
    const auto& [mal, tru, n] = val;
    std::snprintf(buf, sizeof buf, "%d,%.6g,%.3f,%.3f\n", key.first, key.second, mal / n, tru / n);
    out += buf;
  }
  return out;
}

// Delay by algorithm under attack, plus an attack-free reference row when
// the results contain qF = 0 cells.
inline std::string delay_table_csv(const std::vector<RunResult>& results) {
  std::map<int, std::tuple<double, double, int>> acc;
  std::tuple<double, double, int> baseline{0, 0, 0};
  for (const RunResult& r : results) {
    if (r.qf <= 0) {
      std::get<0>(baseline) += static_cast<double>(r.total_delay_s);
      std::get<1>(baseline) += r.mean_delay_s;
      ++std::get<2>(baseline);
      continue;
    }
    auto& [tot, mean, n] = acc[r.algorithm];
    tot += static_cast<double>(r.total_delay_s);
    mean += r.mean_delay_s;
    ++n;
  }
  std::string out = "scenario,mean_total_delay_s,mean_delay_s\n";
  char buf[128];
  for (const auto& [alg, val] : acc) {
    const auto& [tot, mean, n] = val;
    std::snprintf(buf, sizeof buf, "alg%d,%.3f,%.3f\n", alg, tot / n, mean / n);
    out += buf;
  }
  if (std::get<2>(baseline) > 0) {
    const auto& [tot, mean, n] = baseline;
    std::snprintf(buf, sizeof buf, "no_attack,%.3f,%.3f\n", tot / n, mean / n);
    out += buf;
  }
  return out;
}

// Delay by entry intensity, attack intensity and algorithm.
inline std::string delay_grid_table_csv(const std::vector<RunResult>& results) {
  std::map<std::tuple<double, double, int>, std::pair<double, int>> acc;
  for (const RunResult& r : results) {
    auto& [mean, n] = acc[{r.q, r.qf, r.algorithm}];
    mean += r.mean_delay_s;
    ++n;
  }
  std::string out = "q,qF,algorithm,mean_delay_s\n";
  char buf[128];
  for (const auto& [key, val] : acc) {
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%d,%.3f\n", std::get<0>(key), std::get<1>(key),
                  std::get<2>(key), val.first / val.second);
    out += buf;
  }
  return out;
}

// --- saturation flow measurement -------------------------------------------

/// Discharge rate of a standing queue at the first stop line of road 0 with
/// an all-green downstream, averaged over seeds: crossings of the stop line
/// during the first window_s green ticks, scaled to vehicles per hour.
inline double measure_saturation_flow(const GridTopology& topo, int runs = 200, double p = 0.15,
                                      int queue_len = 10, int red_settle_s = 5, int window_s = 20,
                                      uint64_t base_seed = 977) {
  const int stop = GridTopology::stop_cell_of_ordinal(0);
  SignalColours green_all, red_first;
  for (int aid = 0; aid < kApproachCount; ++aid) {
    const Approach& a = topo.approach(aid);
    if (topo.road(a.road).axis == Axis::Horizontal) {
      green_all.set_green(aid);
      if (!(a.road == 0 && a.ordinal == 0)) red_first.set_green(aid);
    }
  }
  SimParams prm;
  prm.p = p;
  prm.q = 0;
  uint64_t crossings = 0;
  for (int run = 0; run < runs; ++run) {
    NetworkState state(topo);
    for (int k = 0; k < queue_len; ++k) state.add_vehicle(0, stop - k, 0);
    RandomStream rng(seed_combine(base_seed, static_cast<uint64_t>(run)));
    for (int t = 0; t < red_settle_s; ++t) ca_step(topo, state, red_first, prm, rng);
    for (int t = 0; t < window_s; ++t) {
      std::vector<uint64_t> upstream;
      for (const Vehicle& veh : state.vehicles())
        if (veh.cell <= stop) upstream.push_back(veh.id);
      ca_step(topo, state, green_all, prm, rng);
      for (const Vehicle& veh : state.vehicles())
        for (uint64_t id : upstream)
          if (veh.id == id && veh.cell > stop) ++crossings;
    }
  }
  return static_cast<double>(crossings) / (static_cast<double>(runs) * window_s) * 3600.0;
}

}  // namespace vantrust
