#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "vantrust/rng.hpp"
#include "vantrust/topology.hpp"
#include "vantrust/traffic.hpp"

namespace vantrust {

struct NeighbourObs {
  double x = 0;
  uint8_t lane = 0;
  bool operator==(const NeighbourObs&) const = default;
};

struct VehicleReport {
  uint64_t sender = 0;
  uint32_t tick = 0;
  uint8_t lane = 0;
  double x = 0;   // meters along the lane
  double v = 0;   // m/s
  std::vector<NeighbourObs> neighbours;
  bool operator==(const VehicleReport&) const = default;
};

using ReportBatch = std::vector<VehicleReport>;

// Reported values are quantized to 1 mm so that the text trace written with
// three decimals parses back to the exact same doubles.
inline double quantize_mm(double v) {
  return static_cast<double>(std::llround(v * 1000.0)) / 1000.0;
}

/// One report per vehicle per tick: own longitudinal position and speed plus
/// the sensed positions of neighbours within planar distance r_m. Sensing
/// looks at ground truth; every reported coordinate gets fresh uniform noise
/// on [-noise_m, +noise_m], truncated to the lane. Draw order is pinned:
/// vehicles ascending by id, own position first, then neighbours ascending
/// by id.
inline ReportBatch generate_reports(const GridTopology& topo, const NetworkState& state,
                                    uint32_t tick, double r_m, double noise_m,
                                    RandomStream& rng) {
  const std::vector<Vehicle>& vs = state.vehicles();
  ReportBatch batch;
  batch.reserve(vs.size());

  // per-lane vehicle indexes ordered by cell, for neighbour candidate lookup
  std::array<std::vector<uint32_t>, kRoadCount> lane_idx;
  for (uint32_t i = 0; i < vs.size(); ++i) lane_idx[vs[i].lane].push_back(i);
  for (auto& idx : lane_idx)
    std::sort(idx.begin(), idx.end(),
              [&](uint32_t a, uint32_t b) { return vs[a].cell < vs[b].cell; });

  auto noisy = [&](double x) {
    double jitter = noise_m > 0 ? rng.uniform(-noise_m, noise_m) : 0.0;
    return quantize_mm(std::clamp(x + jitter, 0.0, kRoadMeters));
  };

  const int reach_cells = static_cast<int>(std::ceil(r_m / kCellMeters));
  std::vector<uint32_t> candidates;
  for (uint32_t i = 0; i < vs.size(); ++i) {
    const Vehicle& me = vs[i];
    const double x_true = me.cell * kCellMeters;
    const Vec2 my_pos = topo.pos2d(me.lane, x_true);

    candidates.clear();
    for (uint32_t j : lane_idx[me.lane]) {
      if (j == i) continue;
      if (std::abs(vs[j].cell - me.cell) <= reach_cells) candidates.push_back(j);
    }
    // cross-road candidates live near the crossings of my road; the coarse
    // margin absorbs the frame mismatch before the exact planar check
    for (int m = 0; m < kCrossingsPerRoad; ++m) {
      double cc = GridTopology::crossing_cell_of_ordinal(m) * kCellMeters;
      if (std::abs(x_true - cc) > r_m + 20.0) continue;
      int inter = topo.road(me.lane).intersection[m];
      const IntersectionInfo& info = topo.intersection(inter);
      int other = info.h_road == me.lane ? info.v_road : info.h_road;
      int other_ord = info.h_road == me.lane ? info.v_ordinal : info.h_ordinal;
      double other_cc = GridTopology::crossing_cell_of_ordinal(other_ord) * kCellMeters;
      for (uint32_t j : lane_idx[other]) {
        if (std::abs(vs[j].cell * kCellMeters - other_cc) <= r_m + 20.0) candidates.push_back(j);
      }
    }
    std::sort(candidates.begin(), candidates.end(),
              [&](uint32_t a, uint32_t b) { return vs[a].id < vs[b].id; });

    VehicleReport rep;
    rep.sender = me.id;
    rep.tick = tick;
    rep.lane = me.lane;
    rep.x = noisy(x_true);
    rep.v = quantize_mm(me.v * kCellMeters);
    for (uint32_t j : candidates) {
      const Vehicle& nb = vs[j];
      if (dist2d(my_pos, topo.pos2d(nb.lane, nb.cell * kCellMeters)) > r_m) continue;
      rep.neighbours.push_back({noisy(nb.cell * kCellMeters), nb.lane});
    }
    batch.push_back(std::move(rep));
  }
  return batch;
}

// --- line-oriented trace format -------------------------------------------
// tick sender lane x v k x_1 lane_1 ... x_k lane_k

inline std::string format_report_line(const VehicleReport& rep) {
  char buf[128];
  int len = std::snprintf(buf, sizeof buf, "%u %llu %u %.3f %.3f %zu", rep.tick,
                          static_cast<unsigned long long>(rep.sender), rep.lane, rep.x, rep.v,
                          rep.neighbours.size());
  std::string line(buf, static_cast<size_t>(len));
  for (const NeighbourObs& nb : rep.neighbours) {
    len = std::snprintf(buf, sizeof buf, " %.3f %u", nb.x, nb.lane);
    line.append(buf, static_cast<size_t>(len));
  }
  return line;
}

inline VehicleReport parse_report_line(const std::string& line) {
  VehicleReport rep;
  const char* p = line.c_str();
  char* end = nullptr;
  auto next_u64 = [&]() {
    unsigned long long v = std::strtoull(p, &end, 10);
    if (end == p) throw std::runtime_error("malformed report line: " + line);
    p = end;
    return static_cast<uint64_t>(v);
  };
  auto next_double = [&]() {
    double v = std::strtod(p, &end);
    if (end == p) throw std::runtime_error("malformed report line: " + line);
    p = end;
    return v;
  };
  rep.tick = static_cast<uint32_t>(next_u64());
  rep.sender = next_u64();
  rep.lane = static_cast<uint8_t>(next_u64());
  rep.x = next_double();
  rep.v = next_double();
  uint64_t k = next_u64();
  rep.neighbours.reserve(k);
  for (uint64_t i = 0; i < k; ++i) {
    NeighbourObs nb;
    nb.x = next_double();
    nb.lane = static_cast<uint8_t>(next_u64());
    rep.neighbours.push_back(nb);
  }
  return rep;
}

}  // namespace vantrust
