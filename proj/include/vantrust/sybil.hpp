#pragma once

#include <cstdint>
#include <vector>

#include "vantrust/report.hpp"
#include "vantrust/rng.hpp"
#include "vantrust/topology.hpp"

namespace vantrust {

struct AttackConfig {
  double qf = 0.0;          // per-lane per-tick ghost spawn probability
  bool collusion = false;   // ghosts list each other as sensed neighbours
  double v_min = 0.0;       // ghost velocity range, m/s
  double v_max = 15.0;
  int max_age_s = 120;      // ghosts despawn after this many reports
};

// Ghost sender ids live in their own range so ground truth can tell them
// apart; nothing on the control side ever inspects this bit.
inline constexpr uint64_t kSybilIdBit = 1ULL << 63;
inline constexpr bool is_sybil_id(uint64_t id) { return (id & kSybilIdBit) != 0; }

/// Sybil ghost streams. Each ghost claims a fixed lane, a uniform random
/// start position and a constant velocity; it reports once per tick until it
/// runs off the lane end or hits the age cap. Spawn draws are consumed in
/// lane order every tick. Ghosts sense nothing, so their neighbour sets stay
/// empty unless collusion is on, in which case each ghost corroborates every
/// other ghost claimed within distance r.
class SybilSwarm {
 public:
  explicit SybilSwarm(AttackConfig cfg) : cfg_(cfg) {}

  // Advance, cull, spawn, then append one report per live ghost.
  void append_reports(const GridTopology& topo, uint32_t tick, double r_m, ReportBatch& batch,
                      RandomStream& rng) {
    std::erase_if(live_, [&](const Ghost& g) {
      uint32_t age = tick - g.born_tick;
      return age >= static_cast<uint32_t>(cfg_.max_age_s) || claim_x(g, tick) > kRoadMeters;
    });
    for (int lane = 0; lane < kRoadCount; ++lane) {
      bool spawn = rng.bernoulli(cfg_.qf);
      if (!spawn) continue;
      Ghost g;
      g.id = kSybilIdBit | next_id_++;
      g.lane = static_cast<uint8_t>(lane);
      g.x0 = quantize_mm(rng.uniform(0.0, kRoadMeters));
      g.v = quantize_mm(rng.uniform(cfg_.v_min, cfg_.v_max));
      g.born_tick = tick;
      live_.push_back(g);
    }
    size_t first = batch.size();
    for (const Ghost& g : live_) {
      VehicleReport rep;
      rep.sender = g.id;
      rep.tick = tick;
      rep.lane = g.lane;
      rep.x = quantize_mm(claim_x(g, tick));
      rep.v = g.v;
      batch.push_back(std::move(rep));
    }
    if (cfg_.collusion) {
      for (size_t i = first; i < batch.size(); ++i) {
        Vec2 pi = topo.pos2d(batch[i].lane, batch[i].x);
        for (size_t j = first; j < batch.size(); ++j) {
          if (i == j) continue;
          if (dist2d(pi, topo.pos2d(batch[j].lane, batch[j].x)) <= r_m)
            batch[i].neighbours.push_back({batch[j].x, batch[j].lane});
        }
      }
    }
  }

  size_t live_count() const { return live_.size(); }
  const AttackConfig& config() const { return cfg_; }

 private:
  struct Ghost {
    uint64_t id = 0;
    uint8_t lane = 0;
    double x0 = 0;
    double v = 0;
    uint32_t born_tick = 0;
  };

  static double claim_x(const Ghost& g, uint32_t tick) {
    return g.x0 + g.v * static_cast<double>(tick - g.born_tick);
  }

  AttackConfig cfg_;
  std::vector<Ghost> live_;  // spawn order; culling preserves it
  uint64_t next_id_ = 1;
};

}  // namespace vantrust
