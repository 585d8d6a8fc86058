#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vantrust/report.hpp"
#include "vantrust/signal.hpp"
#include "vantrust/topology.hpp"

namespace vantrust {

struct DetectionParams {
  double alpha = 1.0;     // reward/penalty quantum for the discrete rules
  double beta = 0.2;      // weight of the velocity-consistency rule
  double eps_x = 7.5;     // position tolerance, m
  double eps_v = 1.5;     // velocity tolerance, m/s
  int delta_s = 2;        // observation window, ticks
  double r = 50.0;        // sensing / witness range, m
  double v_f = 15.0;      // free-flow speed, m/s
  double h_min = 7.5;     // standstill headway, m
  double tau = 2.0;       // desired time headway, s
  double t0 = 1.0;        // initial trust
  double t_min = -10.0;   // trust clamp
  double t_max = 10.0;
};

enum RuleBits : uint8_t {
  kRuleOrder = 1,      // overtaking within a single lane
  kRuleSignals = 2,    // reaction to red/green at stop lines
  kRuleVelocity = 4,   // speed consistent with headway
  kRuleNeighbour = 8,  // corroboration by witnesses in range
  kRuleAll = kRuleOrder | kRuleSignals | kRuleVelocity | kRuleNeighbour,
};
inline constexpr int kRuleCount = 4;

struct RuleDelta {
  uint64_t id = 0;
  double delta = 0;
};

// Headway-limited expected velocity, floored at zero.
inline double expected_velocity(double headway_m, const DetectionParams& prm) {
  double v = std::min(prm.v_f, (headway_m - prm.h_min) / prm.tau);
  return std::max(0.0, v);
}

// Trust increment of the velocity-consistency rule.
inline double velocity_rule_delta(double v_expected, double v_reported,
                                  const DetectionParams& prm) {
  double diff = std::abs(v_expected - v_reported);
  double u = diff < prm.eps_v ? 1.0 : -(diff / prm.v_f);
  return u * prm.beta;
}

/// Per-sender scalar trust ledger updated once per tick from the report
/// batch. Rules read the trust values and report histories as they stood
/// before the tick; all increments are summed and applied atomically, then
/// clamped to [t_min, t_max]. Senders with trust <= 0 are classified
/// malicious and their reports are dropped by filter(). A non-negative
/// node_scope restricts the signal-related rules to the stop lines of that
/// intersection, for ledgers maintained independently per control node.
class TrustEngine {
 public:
  TrustEngine(const GridTopology& topo, DetectionParams prm, uint8_t rule_mask,
              bool filtering_enabled, int node_scope = -1)
      : topo_(&topo), prm_(prm), mask_(rule_mask), filtering_(filtering_enabled),
        node_scope_(node_scope) {}

  void update(const ReportBatch& batch, uint32_t tick, const SignalHistory& signals) {
    for (auto& log : log_) log.clear();
    if (mask_ == 0) return;  // detection disabled: trust stays at t0

    const size_t n = batch.size();
    const int64_t t = static_cast<int64_t>(tick);
    track_of_.assign(n, nullptr);
    trusted_pre_.assign(n, false);
    window_ok_.assign(n, false);
    win_x0_.assign(n, 0.0);
    delta_sum_.assign(n, 0.0);

    for (size_t i = 0; i < n; ++i) {
      const VehicleReport& rep = batch[i];
      Track& tr = track(rep.sender);
      tr.append(t, rep.lane, rep.x);
      track_of_[i] = &tr;
      trusted_pre_[i] = tr.trust > 0;
      window_ok_[i] = window_complete(tr, t, rep.lane);
      if (window_ok_[i]) win_x0_[i] = tr.at(t - prm_.delta_s)->x;
    }

    if (mask_ & kRuleOrder) rule_vehicle_order(batch);
    if (mask_ & kRuleSignals) rule_signal_reaction(batch, t, signals);
    if (mask_ & kRuleVelocity) rule_velocity(batch, t, signals);
    if (mask_ & kRuleNeighbour) rule_neighbour(batch);

    for (size_t i = 0; i < n; ++i) {
      Track& tr = *track_of_[i];
      tr.trust = std::clamp(tr.trust + delta_sum_[i], prm_.t_min, prm_.t_max);
    }
  }

  // Order-preserving subset of reports whose senders are currently trusted.
  ReportBatch filter(const ReportBatch& batch) const {
    if (!filtering_) return batch;
    ReportBatch out;
    out.reserve(batch.size());
    for (const VehicleReport& rep : batch)
      if (trust(rep.sender) > 0) out.push_back(rep);
    return out;
  }

  double trust(uint64_t id) const {
    auto it = tracks_.find(id);
    return it != tracks_.end() ? it->second.trust : prm_.t0;
  }
  bool trusted(uint64_t id) const { return trust(id) > 0; }

  // Increments produced by the latest update, indexed by RuleBits position.
  const std::vector<RuleDelta>& last_rule_deltas(int rule_index) const { return log_[rule_index]; }

  std::vector<std::pair<uint64_t, double>> snapshot() const {
    std::vector<std::pair<uint64_t, double>> out;
    out.reserve(tracks_.size());
    for (const auto& [id, tr] : tracks_) out.emplace_back(id, tr.trust);
    std::sort(out.begin(), out.end());
    return out;
  }

  const DetectionParams& params() const { return prm_; }
  uint8_t rule_mask() const { return mask_; }
  bool filtering_enabled() const { return filtering_; }

  // Test hook: pin a sender's trust directly.
  void set_trust(uint64_t id, double value) { track(id).trust = value; }

 private:
  struct Track {
    struct Entry {
      int64_t tick = -1;
      uint8_t lane = 0;
      double x = 0;
    };
    double trust = 0;
    // quarter of int64 min: "never rewarded", yet t - last cannot overflow
    int64_t last_signal_reward = std::numeric_limits<int64_t>::min() / 4;
    std::vector<Entry> ring;  // indexed tick % (delta_s + 1)

    void append(int64_t t, uint8_t lane, double x) {
      Entry& e = ring[static_cast<size_t>(t) % ring.size()];
      e.tick = t;
      e.lane = lane;
      e.x = x;
    }
    const Entry* at(int64_t t) const {
      if (t < 0) return nullptr;
      const Entry& e = ring[static_cast<size_t>(t) % ring.size()];
      return e.tick == t ? &e : nullptr;
    }
  };

  Track& track(uint64_t id) {
    auto [it, fresh] = tracks_.try_emplace(id);
    if (fresh) {
      it->second.trust = prm_.t0;
      it->second.ring.resize(static_cast<size_t>(prm_.delta_s) + 1);
    }
    return it->second;
  }

  // History present for every tick of [t - delta_s, t] and lane-constant.
  bool window_complete(const Track& tr, int64_t t, uint8_t lane) const {
    for (int64_t tt = t - prm_.delta_s; tt <= t; ++tt) {
      const Track::Entry* e = tr.at(tt);
      if (e == nullptr || e->lane != lane) return false;
    }
    return true;
  }

  bool visible(int approach) const {
    return node_scope_ < 0 || topo_->approach(approach).intersection == node_scope_;
  }

  void emit(int rule_index, const ReportBatch& batch, size_t i, double delta) {
    delta_sum_[i] += delta;
    log_[rule_index].push_back({batch[i].sender, delta});
  }

  // Overtaking manoeuvres are impossible in a single lane, so an inverted
  // order across the window convicts at least one of the pair: the
  // non-trusted party if trust separates them, both otherwise.
  void rule_vehicle_order(const ReportBatch& batch) {
    std::array<std::vector<uint32_t>, kRoadCount> by_lane;
    for (uint32_t i = 0; i < batch.size(); ++i)
      if (window_ok_[i]) by_lane[batch[i].lane].push_back(i);
    for (const auto& lane : by_lane) {
      for (size_t a = 0; a + 1 < lane.size(); ++a) {
        for (size_t b = a + 1; b < lane.size(); ++b) {
          const uint32_t ia = lane[a], ib = lane[b];
          const double now = batch[ia].x - batch[ib].x;
          const double before = win_x0_[ia] - win_x0_[ib];
          const bool inverted = (now > prm_.eps_x && before < -prm_.eps_x) ||
                                (-now > prm_.eps_x && -before < -prm_.eps_x);
          if (!inverted) continue;
          if (trusted_pre_[ia] == trusted_pre_[ib]) {
            emit(0, batch, ia, -prm_.alpha);
            emit(0, batch, ib, -prm_.alpha);
          } else if (!trusted_pre_[ia]) {
            emit(0, batch, ia, -prm_.alpha);
          } else {
            emit(0, batch, ib, -prm_.alpha);
          }
        }
      }
    }
  }

  // Movement across a stop line is judged against the colours that governed
  // the window's ticks: crossing on red or standing through green earns a
  // penalty, the consistent counterparts earn a reward at most once per
  // disjoint window.
  void rule_signal_reaction(const ReportBatch& batch, int64_t t, const SignalHistory& signals) {
    const int d = prm_.delta_s;
    if (t < d || !signals.has(static_cast<uint32_t>(t - 1))) return;
    for (size_t i = 0; i < batch.size(); ++i) {
      if (!window_ok_[i]) continue;
      const VehicleReport& rep = batch[i];
      const Track& tr = *track_of_[i];
      for (int m = 0; m < kCrossingsPerRoad; ++m) {
        const int aid = topo_->approach_id(rep.lane, m);
        if (!visible(aid)) continue;
        bool all_red = true, all_green = true;
        for (int64_t tt = t - d; tt <= t - 1; ++tt) {
          const bool g = signals.green(aid, static_cast<uint32_t>(tt));
          all_red &= !g;
          all_green &= g;
        }
        if (!all_red && !all_green) continue;
        const double h = GridTopology::stop_line_m_of_ordinal(m);
        const bool crossed = h - win_x0_[i] > prm_.eps_x && h - rep.x < -prm_.eps_x;
        bool stayed = true;
        for (int64_t tt = t - d; tt <= t && stayed; ++tt)
          stayed = std::abs(h - tr.at(tt)->x) < prm_.eps_x;
        if ((all_red && crossed) || (all_green && stayed)) emit(1, batch, i, -prm_.alpha);
        if ((all_green && crossed) || (all_red && stayed)) reward_signal(batch, i, t);
      }
    }
  }

  void reward_signal(const ReportBatch& batch, size_t i, int64_t t) {
    Track& tr = *track_of_[i];
    if (t - tr.last_signal_reward < prm_.delta_s) return;
    tr.last_signal_reward = t;
    emit(1, batch, i, prm_.alpha);
  }

  // Reported speed is compared with the expected speed for the headway to
  // the nearest constraint ahead: a trusted leader on the same lane or a red
  // stop line, whichever is closer. No constraint in sight means free flow.
  void rule_velocity(const ReportBatch& batch, int64_t t, const SignalHistory& signals) {
    std::array<std::vector<double>, kRoadCount> trusted_x;
    for (size_t j = 0; j < batch.size(); ++j)
      if (trusted_pre_[j]) trusted_x[batch[j].lane].push_back(batch[j].x);
    for (auto& xs : trusted_x) std::sort(xs.begin(), xs.end());

    const bool have_colours = t >= 1 && signals.has(static_cast<uint32_t>(t - 1));
    for (size_t i = 0; i < batch.size(); ++i) {
      const VehicleReport& rep = batch[i];
      double headway = std::numeric_limits<double>::infinity();
      const std::vector<double>& xs = trusted_x[rep.lane];
      auto it = std::upper_bound(xs.begin(), xs.end(), rep.x);
      if (it != xs.end()) headway = *it - rep.x;
      if (have_colours) {
        for (int m = GridTopology::governing_ordinal_m(rep.x); m < kCrossingsPerRoad; ++m) {
          const int aid = topo_->approach_id(rep.lane, m);
          if (!visible(aid)) continue;
          if (!signals.green(aid, static_cast<uint32_t>(t - 1))) {
            headway = std::min(headway, GridTopology::stop_line_m_of_ordinal(m) - rep.x);
            break;
          }
        }
      }
      const double v_hat = expected_velocity(headway, prm_);
      emit(2, batch, i, velocity_rule_delta(v_hat, rep.v, prm_));
    }
  }

  // Each trusted witness within range votes on whether its sensed neighbour
  // set corroborates the sender's claimed position; the majority moves trust
  // by one alpha, ties move nothing.
  void rule_neighbour(const ReportBatch& batch) {
    const size_t n = batch.size();
    claims_.resize(n);
    for (size_t i = 0; i < n; ++i) claims_[i] = topo_->pos2d(batch[i].lane, batch[i].x);
    votes_plus_.assign(n, 0);
    votes_minus_.assign(n, 0);

    auto confirm = [&](size_t subject, size_t witness) {
      for (const NeighbourObs& nb : batch[witness].neighbours)
        if (dist2d(claims_[subject], topo_->pos2d(nb.lane, nb.x)) <= prm_.eps_x) return true;
      return false;
    };
    auto vote_pair = [&](size_t a, size_t b) {
      if (trusted_pre_[b]) ++(confirm(a, b) ? votes_plus_ : votes_minus_)[a];
      if (trusted_pre_[a]) ++(confirm(b, a) ? votes_plus_ : votes_minus_)[b];
    };

    std::array<std::vector<uint32_t>, kRoadCount> by_lane;
    for (uint32_t i = 0; i < n; ++i) by_lane[batch[i].lane].push_back(i);
    for (auto& lane : by_lane)
      std::sort(lane.begin(), lane.end(),
                [&](uint32_t a, uint32_t b) { return batch[a].x < batch[b].x; });

    // same-lane pairs by sliding window: collinear claims, planar distance
    // equals the coordinate difference
    for (const auto& lane : by_lane) {
      for (size_t a = 0; a < lane.size(); ++a) {
        for (size_t b = a + 1; b < lane.size(); ++b) {
          if (batch[lane[b]].x - batch[lane[a]].x > prm_.r) break;
          vote_pair(lane[a], lane[b]);
        }
      }
    }
    // cross-road pairs exist only near crossings; the coarse margin absorbs
    // the frame mismatch before the exact planar check
    const double margin = prm_.r + 20.0;
    std::array<std::vector<uint32_t>, kIntersectionCount> region_h, region_v;
    for (uint32_t i = 0; i < n; ++i) {
      const Road& road = topo_->road(batch[i].lane);
      for (int m = 0; m < kCrossingsPerRoad; ++m) {
        const double cc = GridTopology::crossing_cell_of_ordinal(m) * kCellMeters;
        if (std::abs(batch[i].x - cc) > margin) continue;
        const int inter = road.intersection[m];
        (road.axis == Axis::Horizontal ? region_h : region_v)[inter].push_back(i);
      }
    }
    for (int inter = 0; inter < kIntersectionCount; ++inter) {
      for (uint32_t a : region_h[inter]) {
        for (uint32_t b : region_v[inter]) {
          if (dist2d(claims_[a], claims_[b]) <= prm_.r) vote_pair(a, b);
        }
      }
    }

    for (size_t i = 0; i < n; ++i) {
      if (votes_plus_[i] > votes_minus_[i]) emit(3, batch, i, prm_.alpha);
      else if (votes_minus_[i] > votes_plus_[i]) emit(3, batch, i, -prm_.alpha);
    }
  }

  const GridTopology* topo_;
  DetectionParams prm_;
  uint8_t mask_;
  bool filtering_;
  int node_scope_;
  std::unordered_map<uint64_t, Track> tracks_;
  std::array<std::vector<RuleDelta>, kRuleCount> log_;

  // per-update scratch, indexed like the batch
  std::vector<Track*> track_of_;
  std::vector<bool> trusted_pre_;
  std::vector<bool> window_ok_;
  std::vector<double> win_x0_;
  std::vector<double> delta_sum_;
  std::vector<Vec2> claims_;
  std::vector<int> votes_plus_, votes_minus_;
};

/// Rule sets selectable from the command line. 0 disables filtering
/// entirely; 1..8 enable single rules and pairs; 9 enables everything.
struct AlgorithmSpec {
  uint8_t rule_mask = 0;
  bool filtering = false;
};

inline AlgorithmSpec algorithm_ruleset(int algorithm) {
  switch (algorithm) {
    case 0: return {0, false};
    case 1: return {kRuleOrder, true};
    case 2: return {kRuleNeighbour, true};
    case 3: return {kRuleSignals, true};
    case 4: return {kRuleVelocity, true};
    case 5: return {kRuleOrder | kRuleSignals, true};
    case 6: return {kRuleSignals | kRuleNeighbour, true};
    case 7: return {kRuleOrder | kRuleVelocity, true};
    case 8: return {kRuleVelocity | kRuleNeighbour, true};
    case 9: return {kRuleAll, true};
    default: throw std::invalid_argument("algorithm must be in 0..9");
  }
}

// trust CSV row, shared by the live simulation sink and offline replay
inline std::string trust_csv_header() { return "t,vehicle_id,trust,classified_malicious"; }

inline std::string trust_csv_row(uint32_t tick, uint64_t id, double trust) {
  char buf[96];
  int len = std::snprintf(buf, sizeof buf, "%u,%llu,%.10g,%d", tick,
                          static_cast<unsigned long long>(id), trust, trust <= 0 ? 1 : 0);
  return std::string(buf, static_cast<size_t>(len));
}

}  // namespace vantrust
