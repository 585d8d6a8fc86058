#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

namespace vantrust {

inline constexpr double kCellMeters = 7.5;
inline constexpr int kCellsPerLink = 40;
inline constexpr int kLinksPerRoad = 5;
inline constexpr int kRoadCells = kCellsPerLink * kLinksPerRoad;  // 200
inline constexpr double kRoadMeters = kRoadCells * kCellMeters;   // 1500
inline constexpr int kGridSide = 4;
inline constexpr int kRoadCount = 2 * kGridSide;                  // 8
inline constexpr int kIntersectionCount = kGridSide * kGridSide;  // 16
inline constexpr int kCrossingsPerRoad = kGridSide;
inline constexpr int kApproachCount = 2 * kIntersectionCount;     // 32

enum class Axis : uint8_t { Horizontal = 0, Vertical = 1 };

struct Vec2 {
  double x = 0;
  double y = 0;
};

/// Green bits per approach, bit index = GridTopology approach id.
struct SignalColours {
  uint32_t green_mask = 0;
  bool green(int approach) const { return (green_mask >> approach) & 1u; }
  void set_green(int approach) { green_mask |= 1u << approach; }
};

inline double dist2d(Vec2 a, Vec2 b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct Road {
  uint8_t id = 0;
  Axis axis = Axis::Horizontal;
  bool forward = true;      // east for horizontal, north for vertical
  double fixed_coord = 0;   // y for horizontal roads, x for vertical roads
  // intersection id met at crossing ordinal m (cells 39, 79, 119, 159)
  std::array<int, kCrossingsPerRoad> intersection = {};
};

struct Approach {
  uint8_t road = 0;
  uint8_t ordinal = 0;      // which crossing along the road, in travel order
  int stop_cell = 0;        // last cell upstream of the crossing cell
  double stop_line_m = 0;   // stop_cell * kCellMeters
  uint8_t intersection = 0;
};

struct IntersectionInfo {
  uint8_t h_road = 0;
  uint8_t v_road = 0;
  uint8_t h_ordinal = 0;    // crossing ordinal on the horizontal road
  uint8_t v_ordinal = 0;
};

/// 4x4 grid of one-way single-lane roads. Horizontal roads alternate
/// eastbound/westbound, vertical roads northbound/southbound. Every road is
/// one contiguous lane of kRoadCells cells; the cell at ordinal m*40+39 is
/// the conflict cell shared with the perpendicular road at that crossing.
class GridTopology {
 public:
  GridTopology() {
    for (int i = 0; i < kGridSide; ++i) {
      Road& h = roads_[i];
      h.id = static_cast<uint8_t>(i);
      h.axis = Axis::Horizontal;
      h.forward = (i % 2 == 0);
      h.fixed_coord = kSpacing * (i + 1);
      Road& v = roads_[kGridSide + i];
      v.id = static_cast<uint8_t>(kGridSide + i);
      v.axis = Axis::Vertical;
      v.forward = (i % 2 == 0);
      v.fixed_coord = kSpacing * (i + 1);
    }
    for (int i = 0; i < kGridSide; ++i) {
      for (int m = 0; m < kCrossingsPerRoad; ++m) {
        // ordinal m of a forward road meets perpendicular road m,
        // a backward road meets them in reverse order
        const Road& h = roads_[i];
        int j = h.forward ? m : kGridSide - 1 - m;
        roads_[i].intersection[m] = i * kGridSide + j;
        const Road& v = roads_[kGridSide + i];
        int k = v.forward ? m : kGridSide - 1 - m;
        roads_[kGridSide + i].intersection[m] = k * kGridSide + i;
      }
    }
    for (int id = 0; id < kIntersectionCount; ++id) {
      IntersectionInfo& info = inters_[id];
      info.h_road = static_cast<uint8_t>(id / kGridSide);
      info.v_road = static_cast<uint8_t>(kGridSide + id % kGridSide);
      for (int m = 0; m < kCrossingsPerRoad; ++m) {
        if (roads_[info.h_road].intersection[m] == id)
          info.h_ordinal = static_cast<uint8_t>(m);
        if (roads_[info.v_road].intersection[m] == id)
          info.v_ordinal = static_cast<uint8_t>(m);
      }
    }
    for (int road = 0; road < kRoadCount; ++road) {
      for (int m = 0; m < kCrossingsPerRoad; ++m) {
        int aid = approach_id(road, m);
        Approach& a = approaches_[aid];
        a.road = static_cast<uint8_t>(road);
        a.ordinal = static_cast<uint8_t>(m);
        a.stop_cell = stop_cell_of_ordinal(m);
        a.stop_line_m = a.stop_cell * kCellMeters;
        a.intersection = static_cast<uint8_t>(roads_[road].intersection[m]);
      }
    }
  }

  static constexpr int crossing_cell_of_ordinal(int m) { return m * kCellsPerLink + kCellsPerLink - 1; }
  static constexpr int stop_cell_of_ordinal(int m) { return crossing_cell_of_ordinal(m) - 1; }
  static constexpr double stop_line_m_of_ordinal(int m) { return stop_cell_of_ordinal(m) * kCellMeters; }

  static constexpr bool is_crossing_cell(int cell) {
    return cell % kCellsPerLink == kCellsPerLink - 1 && cell / kCellsPerLink < kCrossingsPerRoad;
  }

  // Crossing ordinal whose stop line governs a vehicle in this cell,
  // kCrossingsPerRoad when the cell is past the last stop line.
  static constexpr int governing_ordinal_cell(int cell) {
    for (int m = 0; m < kCrossingsPerRoad; ++m)
      if (cell <= stop_cell_of_ordinal(m)) return m;
    return kCrossingsPerRoad;
  }

  // Same, from a longitudinal position in meters.
  static constexpr int governing_ordinal_m(double x) {
    for (int m = 0; m < kCrossingsPerRoad; ++m)
      if (x <= stop_line_m_of_ordinal(m)) return m;
    return kCrossingsPerRoad;
  }

  static constexpr int approach_axis_index(Axis axis) { return axis == Axis::Horizontal ? 0 : 1; }

  int approach_id(int road, int ordinal) const {
    const Road& r = roads_[road];
    return roads_[road].intersection[ordinal] * 2 + approach_axis_index(r.axis);
  }

  static int approach_id_of(int intersection, Axis axis) {
    return intersection * 2 + approach_axis_index(axis);
  }

  const Road& road(int id) const { return roads_[id]; }
  const std::array<Road, kRoadCount>& roads() const { return roads_; }
  const Approach& approach(int aid) const { return approaches_[aid]; }
  const std::array<Approach, kApproachCount>& approaches() const { return approaches_; }
  const IntersectionInfo& intersection(int id) const { return inters_[id]; }

  // Planar position of longitudinal coordinate x (meters) on a road.
  Vec2 pos2d(int road_id, double x) const {
    const Road& r = roads_[road_id];
    double along = r.forward ? x : kRoadMeters - x;
    if (r.axis == Axis::Horizontal) return {along, r.fixed_coord};
    return {r.fixed_coord, along};
  }

  std::string adjacency_text() const {
    std::string out;
    char line[160];
    for (const Road& r : roads_) {
      std::snprintf(line, sizeof line, "road %d: %s %s, %s=%.0f m, %d cells\n",
                    r.id, r.axis == Axis::Horizontal ? "horizontal" : "vertical",
                    r.axis == Axis::Horizontal ? (r.forward ? "eastbound" : "westbound")
                                               : (r.forward ? "northbound" : "southbound"),
                    r.axis == Axis::Horizontal ? "y" : "x", r.fixed_coord, kRoadCells);
      out += line;
      for (int m = 0; m < kCrossingsPerRoad; ++m) {
        std::snprintf(line, sizeof line,
                      "  ordinal %d: stop cell %d (%.1f m), crossing cell %d, intersection %d, approach %d\n",
                      m, stop_cell_of_ordinal(m), stop_line_m_of_ordinal(m),
                      crossing_cell_of_ordinal(m), r.intersection[m], approach_id(r.id, m));
        out += line;
      }
    }
    for (int id = 0; id < kIntersectionCount; ++id) {
      const IntersectionInfo& info = inters_[id];
      std::snprintf(line, sizeof line,
                    "intersection %d: horizontal road %d (ordinal %d), vertical road %d (ordinal %d)\n",
                    id, info.h_road, info.h_ordinal, info.v_road, info.v_ordinal);
      out += line;
    }
    return out;
  }

 private:
  static constexpr double kSpacing = 300.0;
  std::array<Road, kRoadCount> roads_{};
  std::array<IntersectionInfo, kIntersectionCount> inters_{};
  std::array<Approach, kApproachCount> approaches_{};
};

}  // namespace vantrust
