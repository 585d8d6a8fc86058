#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vantrust/report.hpp"
#include "vantrust/topology.hpp"

namespace vantrust {

struct ControllerParams {
  int min_green_s = 10;
  int intergreen_s = 5;
  int max_red_s = 115;
  double pressure_horizon_m = 150.0;
  double stopped_weight = 2.0;
  double hysteresis = 1.0;
  double stopped_speed_m_s = 0.5;
};

enum class Phase : uint8_t { GreenWest, GreenSouth, Intergreen };

/// Self-organizing two-phase controller for one intersection. One axis is
/// green at a time; every switch passes through an all-red intergreen of
/// exactly intergreen_s ticks.
class IntersectionController {
 public:
  // Decide the phase governing the current tick. Pressures are for the
  // horizontal and vertical approach; red/green clocks reflect ticks already
  // applied, so the decision never sees its own output.
  void decide(double pressure_h, double pressure_v, const ControllerParams& prm) {
    if (phase_ == Phase::Intergreen) {
      if (phase_age_ >= prm.intergreen_s) {
        phase_ = target_;
        phase_age_ = 0;
      }
      return;
    }
    if (phase_age_ < prm.min_green_s) return;
    const Axis cur = served_axis();
    const Axis opp = cur == Axis::Horizontal ? Axis::Vertical : Axis::Horizontal;
    const double p_cur = cur == Axis::Horizontal ? pressure_h : pressure_v;
    const double p_opp = cur == Axis::Horizontal ? pressure_v : pressure_h;
    const bool forced = red_time_[GridTopology::approach_axis_index(opp)] + prm.intergreen_s >= prm.max_red_s;
    if (forced || p_opp > p_cur + prm.hysteresis) {
      target_ = opp == Axis::Horizontal ? Phase::GreenWest : Phase::GreenSouth;
      phase_ = Phase::Intergreen;
      phase_age_ = 0;
    }
  }

  bool green(Axis axis) const {
    return phase_ == (axis == Axis::Horizontal ? Phase::GreenWest : Phase::GreenSouth);
  }

  // Advance the phase age and per-axis red clocks after the decided colours
  // have governed one tick.
  void tick_applied() {
    ++phase_age_;
    for (Axis axis : {Axis::Horizontal, Axis::Vertical}) {
      int& red = red_time_[GridTopology::approach_axis_index(axis)];
      red = green(axis) ? 0 : red + 1;
    }
  }

  Phase phase() const { return phase_; }
  int phase_age() const { return phase_age_; }
  int red_time(Axis axis) const { return red_time_[GridTopology::approach_axis_index(axis)]; }

  // Test hook: place the controller in a known state.
  void force_state(Phase phase, int age, int red_h, int red_v, Phase target = Phase::GreenWest) {
    phase_ = phase;
    phase_age_ = age;
    red_time_ = {red_h, red_v};
    target_ = target;
  }

 private:
  Axis served_axis() const { return phase_ == Phase::GreenWest ? Axis::Horizontal : Axis::Vertical; }

  Phase phase_ = Phase::GreenWest;
  Phase target_ = Phase::GreenWest;
  int phase_age_ = 0;
  std::array<int, 2> red_time_ = {0, 0};  // indexed by approach_axis_index
};

/// Colour history by tick; rules may only consult ticks whose colours have
/// already governed traffic, i.e. strictly before the tick being updated.
class SignalHistory {
 public:
  void push(SignalColours colours) { masks_.push_back(colours.green_mask); }
  bool has(uint32_t tick) const { return tick < masks_.size(); }
  bool green(int approach, uint32_t tick) const { return (masks_[tick] >> approach) & 1u; }
  uint32_t size() const { return static_cast<uint32_t>(masks_.size()); }

 private:
  std::vector<uint32_t> masks_;
};

// Pressure of every approach from one pass over accepted reports: weight
// stopped_weight for reports slower than stopped_speed_m_s, 1 otherwise,
// summed over reports within pressure_horizon_m upstream of the stop line.
inline std::array<double, kApproachCount> approach_pressures(const GridTopology& topo,
                                                             const ReportBatch& accepted,
                                                             const ControllerParams& prm) {
  std::array<double, kApproachCount> pressure{};
  for (const VehicleReport& rep : accepted) {
    int m = GridTopology::governing_ordinal_m(rep.x);
    if (m >= kCrossingsPerRoad) continue;
    double headway = GridTopology::stop_line_m_of_ordinal(m) - rep.x;
    if (headway > prm.pressure_horizon_m) continue;
    double w = rep.v < prm.stopped_speed_m_s ? prm.stopped_weight : 1.0;
    pressure[topo.approach_id(rep.lane, m)] += w;
  }
  return pressure;
}

inline double compute_pressure(const GridTopology& topo, const ReportBatch& accepted,
                               int approach, const ControllerParams& prm) {
  return approach_pressures(topo, accepted, prm)[approach];
}

/// The sixteen controllers plus the colour history they have produced.
class SignalBank {
 public:
  explicit SignalBank(const GridTopology& topo, ControllerParams prm = {}) : topo_(&topo), prm_(prm) {}

  // One control step: decide all phases from the given pressures, return the
  // colours governing this tick, record them, and advance the clocks.
  SignalColours step(const std::array<double, kApproachCount>& pressure) {
    SignalColours colours;
    for (int id = 0; id < kIntersectionCount; ++id) {
      IntersectionController& c = ctrl_[id];
      c.decide(pressure[GridTopology::approach_id_of(id, Axis::Horizontal)],
               pressure[GridTopology::approach_id_of(id, Axis::Vertical)], prm_);
      if (c.green(Axis::Horizontal)) colours.set_green(GridTopology::approach_id_of(id, Axis::Horizontal));
      if (c.green(Axis::Vertical)) colours.set_green(GridTopology::approach_id_of(id, Axis::Vertical));
    }
    history_.push(colours);
    for (IntersectionController& c : ctrl_) c.tick_applied();
    return colours;
  }

  const IntersectionController& controller(int intersection) const { return ctrl_[intersection]; }
  IntersectionController& controller_mut(int intersection) { return ctrl_[intersection]; }
  const SignalHistory& history() const { return history_; }
  const ControllerParams& params() const { return prm_; }

 private:
  const GridTopology* topo_;
  ControllerParams prm_;
  std::array<IntersectionController, kIntersectionCount> ctrl_{};
  SignalHistory history_;
};

}  // namespace vantrust
