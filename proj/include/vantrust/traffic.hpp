#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cstdint>
#include <vector>

#include "vantrust/rng.hpp"
#include "vantrust/topology.hpp"

namespace vantrust {

struct Vehicle {
  uint64_t id = 0;
  uint8_t lane = 0;        // road id; vehicles never change lanes
  int16_t cell = 0;
  int8_t v = 0;            // cells per tick
  uint32_t stop_delay_s = 0;
};

struct SimParams {
  double p = 0.15;          // randomization probability
  double q = 0.10;          // per-lane per-tick entry probability
  int v_max = 2;            // cells per tick (15 m/s)
  uint32_t duration_s = 600;
};

/// Vehicles plus a cell occupancy index. Crossing cells are shared between
/// the two roads of an intersection, so their occupancy lives in one slot
/// keyed by intersection id; all other cells are keyed by (road, cell).
class NetworkState {
 public:
  explicit NetworkState(const GridTopology& topo) : topo_(&topo) {
    for (auto& road : occ_) road.fill(0);
    crossing_occ_.fill(0);
  }

  bool occupied(int road, int cell) const {
    if (cell < 0 || cell >= kRoadCells) return false;
    if (GridTopology::is_crossing_cell(cell))
      return crossing_occ_[topo_->road(road).intersection[cell / kCellsPerLink]] != 0;
    return occ_[road][cell] != 0;
  }

  uint64_t add_vehicle(int road, int cell, int v) {
    assert(!occupied(road, cell));
    Vehicle veh;
    veh.id = next_id_++;
    veh.lane = static_cast<uint8_t>(road);
    veh.cell = static_cast<int16_t>(cell);
    veh.v = static_cast<int8_t>(v);
    vehicles_.push_back(veh);
    occupy(road, cell);
    ++entered_;
    return veh.id;
  }

  const std::vector<Vehicle>& vehicles() const { return vehicles_; }
  std::vector<Vehicle>& vehicles_mut() { return vehicles_; }

  void occupy(int road, int cell) {
    assert(!occupied(road, cell));
    if (GridTopology::is_crossing_cell(cell))
      crossing_occ_[topo_->road(road).intersection[cell / kCellsPerLink]] = 1;
    else
      occ_[road][cell] = 1;
  }

  void vacate(int road, int cell) {
    if (GridTopology::is_crossing_cell(cell))
      crossing_occ_[topo_->road(road).intersection[cell / kCellsPerLink]] = 0;
    else
      occ_[road][cell] = 0;
  }

  void note_departure(uint32_t stop_delay_s) {
    ++departed_;
    departed_delay_s_ += stop_delay_s;
  }

  uint64_t entered() const { return entered_; }
  uint64_t departed() const { return departed_; }
  uint64_t departed_delay_s() const { return departed_delay_s_; }
  const GridTopology& topology() const { return *topo_; }

 private:
  const GridTopology* topo_;
  std::vector<Vehicle> vehicles_;  // ascending id; order is never permuted
  std::array<std::array<uint8_t, kRoadCells>, kRoadCount> occ_{};
  std::array<uint8_t, kIntersectionCount> crossing_occ_{};
  uint64_t next_id_ = 1;
  uint64_t entered_ = 0;
  uint64_t departed_ = 0;
  uint64_t departed_delay_s_ = 0;
};

// Total stop delay accrued so far, departed vehicles included.
inline uint64_t stop_delay_total(const NetworkState& state) {
  uint64_t total = state.departed_delay_s();
  for (const Vehicle& veh : state.vehicles()) total += veh.stop_delay_s;
  return total;
}

/// One 1 s step of the stochastic cellular automaton, parallel semantics:
/// accelerate, brake to the gap and to a red stop line, randomize, move.
/// Gaps and clamps read the occupancy frozen at tick start; a red approach
/// never lets a vehicle advance past its stop cell. Vehicles leaving the
/// downstream boundary are removed; v = 0 after the move accrues 1 s of
/// stop delay. Randomization draws are consumed in vehicle order for every
/// vehicle, so the stream layout depends only on the vehicle count.
inline void ca_step(const GridTopology& topo, NetworkState& state, SignalColours colours,
                    const SimParams& prm, RandomStream& rng) {
  std::vector<Vehicle>& vs = state.vehicles_mut();
  const size_t n = vs.size();
  static thread_local std::vector<int8_t> nv;
  nv.assign(n, 0);

  for (size_t i = 0; i < n; ++i) {
    const Vehicle& veh = vs[i];
    int v = std::min<int>(veh.v + 1, prm.v_max);
    int advance = 0;
    for (int d = 1; d <= v; ++d) {
      int c = veh.cell + d;
      if (c < kRoadCells && state.occupied(veh.lane, c)) break;
      advance = d;
    }
    v = advance;
    int m = GridTopology::governing_ordinal_cell(veh.cell);
    if (m < kCrossingsPerRoad && !colours.green(topo.approach_id(veh.lane, m)))
      v = std::min(v, GridTopology::stop_cell_of_ordinal(m) - veh.cell);
    if (rng.bernoulli(prm.p)) v = std::max(v - 1, 0);
    nv[i] = static_cast<int8_t>(v);
  }

  bool any_departed = false;
  for (size_t i = 0; i < n; ++i) {
    Vehicle& veh = vs[i];
    veh.v = nv[i];
    if (veh.v > 0) {
      state.vacate(veh.lane, veh.cell);
      veh.cell = static_cast<int16_t>(veh.cell + veh.v);
      if (veh.cell >= kRoadCells) {
        state.note_departure(veh.stop_delay_s);
        veh.lane = 0xff;  // departed marker, erased below
        any_departed = true;
        continue;
      }
      state.occupy(veh.lane, veh.cell);
    } else {
      ++veh.stop_delay_s;
    }
  }
  if (any_departed)
    std::erase_if(vs, [](const Vehicle& veh) { return veh.lane == 0xff; });
}

// Entry draws are consumed in lane order every tick; an occupied entry cell
// swallows the arrival.
inline void spawn_vehicles(const GridTopology& topo, NetworkState& state, double q,
                           RandomStream& rng) {
  (void)topo;
  for (int lane = 0; lane < kRoadCount; ++lane) {
    bool arrival = rng.bernoulli(q);
    if (arrival && !state.occupied(lane, 0)) state.add_vehicle(lane, 0, 2);
  }
}

}  // namespace vantrust
