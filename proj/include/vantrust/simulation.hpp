#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "vantrust/metrics.hpp"
#include "vantrust/report.hpp"
#include "vantrust/rng.hpp"
#include "vantrust/signal.hpp"
#include "vantrust/sybil.hpp"
#include "vantrust/topology.hpp"
#include "vantrust/traffic.hpp"
#include "vantrust/trust.hpp"

namespace vantrust {

struct ScenarioConfig {
  SimParams sim;
  ControllerParams sig;
  DetectionParams det;
  AttackConfig attack;
  double noise_m = -1;    // negative: default to det.eps_x / 2
  bool per_node = false;  // independent trust ledger per intersection
  int algorithm = 9;
  uint64_t seed = 1;
};

/// Closed loop over one tick: reports (true + Sybil) -> trust update ->
/// filtering -> signal decision -> vehicle movement -> arrivals. The
/// controllers only ever see accepted reports; the scoreboard compares
/// acceptance against the ground-truth sender class.
class Simulation {
 public:
  Simulation(const GridTopology& topo, const ScenarioConfig& cfg)
      : topo_(&topo),
        cfg_(cfg),
        state_(topo),
        swarm_(cfg.attack),
        bank_(topo, cfg.sig),
        traffic_rng_(seed_combine(cfg.seed, uint64_t{0x74726166666963})),
        attack_rng_(seed_combine(cfg.seed, uint64_t{0x61747461636b})) {
    noise_ = cfg.noise_m >= 0 ? cfg.noise_m : cfg.det.eps_x / 2.0;
    const AlgorithmSpec spec = algorithm_ruleset(cfg.algorithm);
    if (cfg.per_node) {
      engines_.reserve(kIntersectionCount);
      for (int node = 0; node < kIntersectionCount; ++node)
        engines_.emplace_back(topo, cfg.det, spec.rule_mask, spec.filtering, node);
    } else {
      engines_.emplace_back(topo, cfg.det, spec.rule_mask, spec.filtering);
    }
  }

  void tick() {
    batch_ = generate_reports(*topo_, state_, tick_, cfg_.det.r, noise_, traffic_rng_);
    swarm_.append_reports(*topo_, tick_, cfg_.det.r, batch_, attack_rng_);

    for (TrustEngine& engine : engines_) engine.update(batch_, tick_, bank_.history());

    // Acceptance per report, judged by the ledger of the control node whose
    // stop line governs the claimed position. One engine means one ledger.
    accepted_.assign(batch_.size(), false);
    filtered_.clear();
    for (size_t i = 0; i < batch_.size(); ++i) {
      const TrustEngine& engine = engine_for(batch_[i]);
      const bool ok = !engine.filtering_enabled() || engine.trusted(batch_[i].sender);
      accepted_[i] = ok;
      if (ok) filtered_.push_back(batch_[i]);
      counts_.add(is_sybil_id(batch_[i].sender), ok);
    }

    colours_ = bank_.step(approach_pressures(*topo_, filtered_, cfg_.sig));

    if (on_reports) on_reports(batch_);
    if (on_colours) on_colours(tick_, colours_);
    if (on_trust) on_trust(tick_, batch_);

    ca_step(*topo_, state_, colours_, cfg_.sim, traffic_rng_);
    spawn_vehicles(*topo_, state_, cfg_.sim.q, traffic_rng_);
    ++tick_;
  }

  bool done() const { return tick_ >= cfg_.sim.duration_s; }

  void run_to_end() {
    while (!done()) tick();
  }

  RunResult result() const {
    RunResult r;
    r.algorithm = cfg_.algorithm;
    r.q = cfg_.sim.q;
    r.qf = cfg_.attack.qf;
    r.seed = cfg_.seed;
    r.total_delay_s = stop_delay_total(state_);
    r.vehicles = state_.entered();
    r.mean_delay_s = r.vehicles == 0 ? 0.0
                                     : static_cast<double>(r.total_delay_s) / static_cast<double>(r.vehicles);
    r.pct_malicious_detected = counts_.pct_malicious_detected();
    r.pct_true_recognized = counts_.pct_true_recognized();
    r.counts = counts_;
    return r;
  }

  const TrustEngine& engine_for(const VehicleReport& rep) const {
    if (engines_.size() == 1) return engines_[0];
    int m = GridTopology::governing_ordinal_m(rep.x);
    if (m >= kCrossingsPerRoad) m = kCrossingsPerRoad - 1;
    return engines_[topo_->approach(topo_->approach_id(rep.lane, m)).intersection];
  }

  double report_trust(const VehicleReport& rep) const { return engine_for(rep).trust(rep.sender); }

  uint32_t now() const { return tick_; }
  const GridTopology& topology() const { return *topo_; }
  const ScenarioConfig& config() const { return cfg_; }
  const NetworkState& state() const { return state_; }
  NetworkState& state_mut() { return state_; }
  const SignalBank& bank() const { return bank_; }
  const SybilSwarm& swarm() const { return swarm_; }
  const TrustEngine& engine(int node = 0) const { return engines_[engines_.size() == 1 ? 0 : node]; }
  const ReportBatch& last_batch() const { return batch_; }
  const ReportBatch& last_filtered() const { return filtered_; }
  const std::vector<bool>& last_accepted() const { return accepted_; }
  SignalColours last_colours() const { return colours_; }
  const ClassificationCounts& counts() const { return counts_; }

  // optional per-tick sinks, called after the control decision
  std::function<void(const ReportBatch&)> on_reports;
  std::function<void(uint32_t, SignalColours)> on_colours;
  std::function<void(uint32_t, const ReportBatch&)> on_trust;

 private:
  const GridTopology* topo_;
  ScenarioConfig cfg_;
  NetworkState state_;
  SybilSwarm swarm_;
  SignalBank bank_;
  RandomStream traffic_rng_;
  RandomStream attack_rng_;
  std::vector<TrustEngine> engines_;
  double noise_ = 0;
  uint32_t tick_ = 0;
  ReportBatch batch_;
  ReportBatch filtered_;
  std::vector<bool> accepted_;
  SignalColours colours_;
  ClassificationCounts counts_;
};

inline RunResult run_single(const GridTopology& topo, const ScenarioConfig& cfg) {
  Simulation sim(topo, cfg);
  sim.run_to_end();
  return sim.result();
}

}  // namespace vantrust
