// End-to-end acceptance gate. Prints exactly one PASS/FAIL line per
// criterion with the measured numbers; informational lines start with '#'.
// Exit code is the number of failed criteria. Thresholds are pinned here.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "oracles.hpp"
#include "vantrust/vantrust.hpp"

using namespace vantrust;

namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return std::string(buf);
}

std::chrono::steady_clock::time_point now_clock() { return std::chrono::steady_clock::now(); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(now_clock() - t0).count();
}

struct Gate {
  int failures = 0;
  void line(int id, bool ok, const std::string& detail) {
    std::printf("C%d %s: %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
};

template <typename Get>
double mean_of(const std::vector<RunResult>& rs, Get get) {
  if (rs.empty()) return 0.0;
  double s = 0;
  for (const RunResult& r : rs) s += static_cast<double>(get(r));
  return s / static_cast<double>(rs.size());
}

// --- criterion 1: property suite --------------------------------------------

// Collision freedom, conservation, kinematic bounds, lane order and red
// compliance over 10^4 heavy-traffic ticks under a live controller.
bool ca_invariants_ok(const GridTopology& topo, std::string& why) {
  NetworkState state(topo);
  SimParams prm;
  prm.q = 0.30;
  SignalBank bank(topo, ControllerParams{});
  RandomStream traffic(0xCA5CADE), pressure_rng(0xBADCAB);
  std::map<uint64_t, std::pair<int, int>> prev;  // id -> (lane, cell)

  for (int t = 0; t < 10000; ++t) {
    std::array<double, kApproachCount> pressure{};
    for (double& p : pressure) p = pressure_rng.uniform(0.0, 8.0);
    const SignalColours colours = bank.step(pressure);
    ca_step(topo, state, colours, prm, traffic);
    spawn_vehicles(topo, state, prm.q, traffic);

    if (state.entered() != state.departed() + state.vehicles().size()) {
      why = fmt("conservation broke at tick %d", t);
      return false;
    }

    std::set<int> slots;
    std::array<int, kRoadCount> last_cell;
    last_cell.fill(kRoadCells);
    std::map<uint64_t, std::pair<int, int>> next;
    for (const Vehicle& veh : state.vehicles()) {
      if (veh.cell < 0 || veh.cell >= kRoadCells || veh.v < 0 || veh.v > prm.v_max) {
        why = fmt("vehicle %llu out of bounds at tick %d",
                  static_cast<unsigned long long>(veh.id), t);
        return false;
      }
      const int slot = GridTopology::is_crossing_cell(veh.cell)
                           ? kRoadCount * kRoadCells +
                                 topo.road(veh.lane).intersection[veh.cell / kCellsPerLink]
                           : veh.lane * kRoadCells + veh.cell;
      if (!slots.insert(slot).second) {
        why = fmt("two vehicles share a cell at tick %d", t);
        return false;
      }
      if (!state.occupied(veh.lane, veh.cell)) {
        why = fmt("occupancy index lost vehicle %llu at tick %d",
                  static_cast<unsigned long long>(veh.id), t);
        return false;
      }
      // ids ascend with entry time, so within a lane cells must strictly fall
      if (veh.cell >= last_cell[veh.lane]) {
        why = fmt("overtake on lane %d at tick %d", static_cast<int>(veh.lane), t);
        return false;
      }
      last_cell[veh.lane] = veh.cell;

      auto it = prev.find(veh.id);
      if (it == prev.end()) {
        if (veh.cell != 0) {
          why = fmt("vehicle %llu appeared mid-road at tick %d",
                    static_cast<unsigned long long>(veh.id), t);
          return false;
        }
      } else {
        if (veh.cell - it->second.second != veh.v) {
          why = fmt("displacement != velocity for vehicle %llu at tick %d",
                    static_cast<unsigned long long>(veh.id), t);
          return false;
        }
        const int m = GridTopology::governing_ordinal_cell(it->second.second);
        if (m < kCrossingsPerRoad && !colours.green(topo.approach_id(veh.lane, m)) &&
            veh.cell > GridTopology::stop_cell_of_ordinal(m)) {
          why = fmt("red stop line crossed on lane %d at tick %d", static_cast<int>(veh.lane), t);
          return false;
        }
      }
      next.emplace(veh.id, std::make_pair(static_cast<int>(veh.lane), static_cast<int>(veh.cell)));
    }
    prev.swap(next);
  }
  return true;
}

// Never dual green, all-red gaps of exactly intergreen_s, green runs of at
// least min_green_s and every approach served within max_red_s, under 10^4
// random pressure ticks.
bool signal_invariants_ok(const GridTopology& topo, std::string& why) {
  (void)topo;
  ControllerParams prm;
  SignalBank bank(topo, prm);
  RandomStream rng(0x51C9A7);
  std::array<int, kApproachCount> red_run{}, green_run{};
  std::array<int, kIntersectionCount> allred_run{};

  for (int t = 0; t < 10000; ++t) {
    std::array<double, kApproachCount> pressure{};
    for (double& p : pressure) p = rng.uniform(0.0, 10.0);
    const SignalColours c = bank.step(pressure);

    for (int inter = 0; inter < kIntersectionCount; ++inter) {
      const bool gh = c.green(2 * inter), gv = c.green(2 * inter + 1);
      if (gh && gv) {
        why = fmt("dual green at intersection %d tick %d", inter, t);
        return false;
      }
      if (!gh && !gv) {
        ++allred_run[inter];
      } else if (allred_run[inter] != 0) {
        if (allred_run[inter] != prm.intergreen_s) {
          why = fmt("all-red gap of %d s at intersection %d tick %d", allred_run[inter], inter, t);
          return false;
        }
        allred_run[inter] = 0;
      }
    }
    for (int aid = 0; aid < kApproachCount; ++aid) {
      if (c.green(aid)) {
        red_run[aid] = 0;
        ++green_run[aid];
      } else {
        if (green_run[aid] != 0 && green_run[aid] < prm.min_green_s) {
          why = fmt("green run of %d s on approach %d tick %d", green_run[aid], aid, t);
          return false;
        }
        green_run[aid] = 0;
        if (++red_run[aid] > prm.max_red_s) {
          why = fmt("approach %d red for %d s at tick %d", aid, red_run[aid], t);
          return false;
        }
      }
    }
  }
  return true;
}

// Closed-loop consistency across algorithms and attack settings: acceptance
// flags partition the batch, trust stays clamped, reports stay on the road,
// controllers never show dual green, the scoreboard matches the flags.
bool closed_loop_ok(const GridTopology& topo, std::string& why, int& configs) {
  struct LoopConfig {
    int alg;
    double q, qf, noise;
    bool per_node, collusion;
    uint64_t seed;
  };
  std::vector<LoopConfig> list;
  for (int alg = 0; alg <= 9; ++alg)
    list.push_back({alg, 0.10, 0.06, -1, false, false, 7000u + static_cast<uint64_t>(alg)});
  list.push_back({9, 0.10, 0.06, -1, true, false, 7100});
  list.push_back({9, 0.14, 0.08, -1, false, true, 7101});
  list.push_back({9, 0.10, 0.04, 0.0, false, false, 7102});
  list.push_back({9, 0.14, 0.00, -1, false, false, 7103});
  list.push_back({0, 0.02, 0.08, -1, false, false, 7104});
  list.push_back({6, 0.06, 0.02, -1, true, true, 7105});
  list.push_back({2, 0.14, 0.08, 0.0, false, false, 7106});

  for (const LoopConfig& lc : list) {
    ScenarioConfig cfg;
    cfg.algorithm = lc.alg;
    cfg.sim.q = lc.q;
    cfg.attack.qf = lc.qf;
    cfg.noise_m = lc.noise;
    cfg.per_node = lc.per_node;
    cfg.attack.collusion = lc.collusion;
    cfg.seed = lc.seed;
    validate_scenario(cfg);
    const bool filtering = algorithm_ruleset(lc.alg).filtering;

    Simulation sim(topo, cfg);
    ClassificationCounts shadow;
    while (!sim.done()) {
      sim.tick();
      const uint32_t t = sim.now() - 1;
      const ReportBatch& batch = sim.last_batch();
      const ReportBatch& kept = sim.last_filtered();
      const std::vector<bool>& acc = sim.last_accepted();
      if (acc.size() != batch.size()) {
        why = fmt("alg %d: acceptance flag count mismatch at tick %u", lc.alg, t);
        return false;
      }
      size_t j = 0;
      for (size_t i = 0; i < batch.size(); ++i) {
        const VehicleReport& rep = batch[i];
        if (rep.tick != t || rep.lane >= kRoadCount || rep.x < 0 || rep.x > kRoadMeters ||
            rep.v < 0) {
          why = fmt("alg %d: malformed report at tick %u", lc.alg, t);
          return false;
        }
        const double trust = sim.report_trust(rep);
        if (trust < cfg.det.t_min - 1e-9 || trust > cfg.det.t_max + 1e-9) {
          why = fmt("alg %d: trust %.6f escaped the clamp at tick %u", lc.alg, trust, t);
          return false;
        }
        const bool expect = !filtering || trust > 0;
        if (acc[i] != expect) {
          why = fmt("alg %d: acceptance disagrees with trust at tick %u", lc.alg, t);
          return false;
        }
        if (acc[i]) {
          if (j >= kept.size() || !(kept[j] == rep)) {
            why = fmt("alg %d: filtered batch is not an ordered subset at tick %u", lc.alg, t);
            return false;
          }
          ++j;
        }
        shadow.add(is_sybil_id(rep.sender), acc[i]);
      }
      if (j != kept.size()) {
        why = fmt("alg %d: filtered batch has extra entries at tick %u", lc.alg, t);
        return false;
      }
      if (lc.alg == 0 && kept.size() != batch.size()) {
        why = fmt("alg 0 dropped a report at tick %u", t);
        return false;
      }
      const SignalColours c = sim.last_colours();
      for (int inter = 0; inter < kIntersectionCount; ++inter) {
        if (c.green(2 * inter) && c.green(2 * inter + 1)) {
          why = fmt("alg %d: dual green at intersection %d tick %u", lc.alg, inter, t);
          return false;
        }
      }
    }
    const RunResult r = sim.result();
    const ClassificationCounts& counts = sim.counts();
    if (counts.true_total != shadow.true_total || counts.true_accepted != shadow.true_accepted ||
        counts.sybil_total != shadow.sybil_total ||
        counts.sybil_rejected != shadow.sybil_rejected) {
      why = fmt("alg %d: scoreboard disagrees with acceptance flags", lc.alg);
      return false;
    }
    if (r.vehicles != sim.state().entered() || r.pct_true_recognized < 0 ||
        r.pct_true_recognized > 100 || r.pct_malicious_detected < 0 ||
        r.pct_malicious_detected > 100) {
      why = fmt("alg %d: malformed run result", lc.alg);
      return false;
    }
    ++configs;
  }
  return true;
}

// Expected-velocity model: both min branches plus the zero clamp.
bool expected_velocity_ok(std::string& why) {
  DetectionParams det;
  struct Case {
    double h, want;
  };
  const Case cases[] = {
      {27.5, 10.0},   // headway branch: (27.5 - 7.5) / 2
      {100.0, 15.0},  // free-flow branch
      {37.5, 15.0},   // branch boundary
      {3.0, 0.0},     // clamped at zero
      {7.5, 0.0},     // exactly the standstill gap
  };
  for (const Case& c : cases) {
    if (expected_velocity(c.h, det) != c.want) {
      why = fmt("expected_velocity(%.1f) != %.1f", c.h, c.want);
      return false;
    }
  }
  if (std::abs(velocity_rule_delta(10.0, 10.4, det) - 0.2) > 1e-12 ||
      std::abs(velocity_rule_delta(10.0, 5.0, det) + 5.0 / 15.0 * det.beta) > 1e-12) {
    why = "velocity_rule_delta branch values differ";
    return false;
  }
  return true;
}

}  // namespace

int main() {
  GridTopology topo;
  Gate gate;
  const auto wall0 = now_clock();

  // C1: property suite
  try {
    std::string why;
    int configs = 0;
    bool ok = ca_invariants_ok(topo, why) && signal_invariants_ok(topo, why) &&
              closed_loop_ok(topo, why, configs) && expected_velocity_ok(why);
    testing::OracleSuiteStats st;
    if (ok) {
      st = testing::run_oracle_suite(topo, 100, 424242);
      if (!st.ok()) {
        ok = false;
        why = st.failure;
      } else if (st.traces != 100 || st.deltas < 1000) {
        ok = false;
        why = fmt("oracle suite coverage too thin: %d traces, %llu deltas", st.traces,
                  static_cast<unsigned long long>(st.deltas));
      } else if (st.fired_plus[0] != 0) {
        ok = false;
        why = "order rule produced a reward";
      } else {
        for (int r = 0; r < kRuleCount && ok; ++r) {
          if (st.fired_minus[r] == 0 || (r > 0 && st.fired_plus[r] == 0)) {
            ok = false;
            why = fmt("oracle suite never exercised rule %d in both directions", r);
          }
        }
      }
    }
    gate.line(1, ok,
              ok ? fmt("ca 10000 ticks, signals 10000 ticks, closed loop %d configs, "
                       "oracle %d traces with %llu matched deltas, velocity model branches",
                       configs, st.traces, static_cast<unsigned long long>(st.deltas))
                 : why);
  } catch (const std::exception& e) {
    gate.line(1, false, fmt("exception: %s", e.what()));
  }

  // C2: ground-truth immunity, no attack and no noise
  try {
    uint64_t accepted = 0, total = 0;
    double min_pct = 100.0;
    for (int rep = 0; rep < 20; ++rep) {
      ScenarioConfig cfg;
      cfg.algorithm = 9;
      cfg.sim.q = 0.10;
      cfg.attack.qf = 0.0;
      cfg.noise_m = 0.0;
      cfg.seed = cell_seed(1, 9, 0.10, 0.0, rep);
      const RunResult r = run_single(topo, cfg);
      accepted += r.counts.true_accepted;
      total += r.counts.true_total;
      min_pct = std::min(min_pct, r.pct_true_recognized);
    }
    const double pct = total == 0 ? 100.0 : 100.0 * static_cast<double>(accepted) / static_cast<double>(total);
    gate.line(2, pct >= 99.0,
              fmt("true reports accepted %.3f%% pooled over 20 seeds (worst run %.3f%%), "
                  "threshold 99%%",
                  pct, min_pct));
  } catch (const std::exception& e) {
    gate.line(2, false, fmt("exception: %s", e.what()));
  }

  // grids shared by C3..C7; computed lazily so one failure cannot mask others
  std::vector<RunResult> res9, res0, resb, res1, res2, res3;
  auto grid_for = [&](int alg, bool attack_free) {
    ExperimentPlan plan;
    plan.algorithms = {alg};
    if (attack_free) plan.qfs = {0.0};
    const auto t0 = now_clock();
    std::vector<RunResult> res = run_experiment(topo, plan);
    std::printf("# grid alg %d%s: %zu runs in %.1f s\n", alg, attack_free ? " (no attack)" : "",
                res.size(), seconds_since(t0));
    std::fflush(stdout);
    return res;
  };

  // C3: detection accuracy and throughput of the full default grid slice
  double wall9 = 0;
  try {
    const auto t0 = now_clock();
    {
      ExperimentPlan plan;
      plan.algorithms = {9};
      res9 = run_experiment(topo, plan);
    }
    wall9 = seconds_since(t0);
    const double mal = mean_of(res9, [](const RunResult& r) { return r.pct_malicious_detected; });
    const double tru = mean_of(res9, [](const RunResult& r) { return r.pct_true_recognized; });
    const bool ok = res9.size() == 320 && mal >= 85.0 && tru >= 90.0 && wall9 < 600.0;
    gate.line(3, ok,
              fmt("malicious detection %.2f%% (>= 85), true recognition %.2f%% (>= 90), "
                  "%zu runs in %.1f s (< 600)",
                  mal, tru, res9.size(), wall9));
  } catch (const std::exception& e) {
    gate.line(3, false, fmt("exception: %s", e.what()));
  }

  // C4: delay never worse than the unfiltered controller, near no-attack level
  try {
    if (res0.empty()) res0 = grid_for(0, false);
    if (resb.empty()) resb = grid_for(0, true);
    std::map<std::pair<double, double>, std::pair<double, int>> cell9, cell0;
    for (const RunResult& r : res9) {
      auto& [sum, n] = cell9[{r.q, r.qf}];
      sum += r.mean_delay_s;
      ++n;
    }
    for (const RunResult& r : res0) {
      auto& [sum, n] = cell0[{r.q, r.qf}];
      sum += r.mean_delay_s;
      ++n;
    }
    int cells = 0, worse = 0;
    double worst_gap = -1e9;
    for (const auto& [key, val] : cell9) {
      const auto it = cell0.find(key);
      if (it == cell0.end()) continue;
      const double d9 = val.first / val.second;
      const double d0 = it->second.first / it->second.second;
      ++cells;
      worst_gap = std::max(worst_gap, d9 - d0);
      if (d9 > d0) ++worse;
    }
    const double grid9 = mean_of(res9, [](const RunResult& r) { return r.mean_delay_s; });
    const double base = mean_of(resb, [](const RunResult& r) { return r.mean_delay_s; });
    const bool ok = cells == 16 && worse == 0 && grid9 <= 1.15 * base;
    gate.line(4, ok,
              fmt("filtered delay beats unfiltered in %d/%d cells (worst gap %+.3f s), "
                  "grid mean %.3f s vs no-attack bound %.3f s",
                  cells - worse, cells, worst_gap, grid9, 1.15 * base));
  } catch (const std::exception& e) {
    gate.line(4, false, fmt("exception: %s", e.what()));
  }

  // C5: single-rule orderings
  try {
    if (res0.empty()) res0 = grid_for(0, false);
    if (res1.empty()) res1 = grid_for(1, false);
    if (res2.empty()) res2 = grid_for(2, false);
    if (res3.empty()) res3 = grid_for(3, false);
    // per-run total delay averaged over the grid, the quantity the delay
    // comparison chart aggregates
    const double d0 = mean_of(res0, [](const RunResult& r) { return r.total_delay_s; });
    const double d1 = mean_of(res1, [](const RunResult& r) { return r.total_delay_s; });
    const double d3 = mean_of(res3, [](const RunResult& r) { return r.total_delay_s; });
    const double det1 = mean_of(res1, [](const RunResult& r) { return r.pct_malicious_detected; });
    const double det2 = mean_of(res2, [](const RunResult& r) { return r.pct_malicious_detected; });
    const double det3 = mean_of(res3, [](const RunResult& r) { return r.pct_malicious_detected; });
    const double dev1 = std::abs(d1 - d0) / d0, dev3 = std::abs(d3 - d0) / d0;
    const bool ok = dev1 <= 0.10 && dev3 <= 0.10 && det2 > det1 && det2 > det3;
    gate.line(5, ok,
              fmt("total delay deviation from unfiltered: order %.1f%%, signals %.1f%% "
                  "(<= 10%%); witness detection %.2f%% > order %.2f%% and > signals %.2f%%",
                  100 * dev1, 100 * dev3, det2, det1, det3));
  } catch (const std::exception& e) {
    gate.line(5, false, fmt("exception: %s", e.what()));
  }

  // C6: calibration of discharge rate and grid load
  try {
    if (res9.empty()) {
      ExperimentPlan plan;
      plan.algorithms = {9};
      res9 = run_experiment(topo, plan);
    }
    const double flow = measure_saturation_flow(topo, 300);
    const double veh = mean_of(res9, [](const RunResult& r) { return r.vehicles; });
    const bool ok = flow >= 1530.0 && flow <= 1870.0 && veh >= 326.4 && veh <= 441.6;
    gate.line(6, ok,
              fmt("saturation flow %.0f veh/h (1700 +- 10%%), mean vehicles per run %.1f "
                  "(384 +- 15%%)",
                  flow, veh));
  } catch (const std::exception& e) {
    gate.line(6, false, fmt("exception: %s", e.what()));
  }

  // C7: byte-identical reruns of sampled rows
  try {
    if (res9.empty() || res0.empty() || res2.empty()) throw std::runtime_error("grids missing");
    ExperimentPlan plan;
    plan.algorithms = {9};
    const std::vector<ScenarioConfig> cells9 = plan_cells(plan);
    plan.algorithms = {0};
    const std::vector<ScenarioConfig> cells0 = plan_cells(plan);
    plan.algorithms = {2};
    const std::vector<ScenarioConfig> cells2 = plan_cells(plan);
    const std::array<std::pair<const std::vector<RunResult>*, const std::vector<ScenarioConfig>*>,
                     3>
        sources{{{&res9, &cells9}, {&res0, &cells0}, {&res2, &cells2}}};
    const std::array<size_t, 3> picks{17, 303, 158};
    bool ok = true;
    std::string why;
    for (size_t s = 0; s < sources.size() && ok; ++s) {
      const size_t i = picks[s];
      const std::string want = results_csv_row((*sources[s].first)[i]);
      const std::string got = results_csv_row(run_single(topo, (*sources[s].second)[i]));
      if (want != got) {
        ok = false;
        why = fmt("rerun of cell %zu differs: %s vs %s", i, got.c_str(), want.c_str());
      }
    }
    gate.line(7, ok, ok ? "3 sampled rows rerun byte-identical from their seeds" : why);
  } catch (const std::exception& e) {
    gate.line(7, false, fmt("exception: %s", e.what()));
  }

  std::printf("%d/7 criteria passed, total wall %.1f s\n", 7 - gate.failures,
              seconds_since(wall0));
  return gate.failures;
}
