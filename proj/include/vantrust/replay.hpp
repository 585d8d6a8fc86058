#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vantrust/report.hpp"
#include "vantrust/signal.hpp"
#include "vantrust/topology.hpp"
#include "vantrust/trust.hpp"

namespace vantrust {

// signal trace line: tick followed by one g/r character per approach id
inline std::string format_signal_line(uint32_t tick, SignalColours colours) {
  std::string line = std::to_string(tick);
  line += ' ';
  for (int aid = 0; aid < kApproachCount; ++aid) line += colours.green(aid) ? 'g' : 'r';
  return line;
}

inline std::pair<uint32_t, SignalColours> parse_signal_line(const std::string& line) {
  size_t pos = 0;
  unsigned long tick = std::stoul(line, &pos);
  while (pos < line.size() && line[pos] == ' ') ++pos;
  if (line.size() - pos < static_cast<size_t>(kApproachCount))
    throw std::runtime_error("malformed signal line: " + line);
  SignalColours colours;
  for (int aid = 0; aid < kApproachCount; ++aid) {
    char c = line[pos + static_cast<size_t>(aid)];
    if (c == 'g') colours.set_green(aid);
    else if (c != 'r') throw std::runtime_error("malformed signal line: " + line);
  }
  return {static_cast<uint32_t>(tick), colours};
}

inline bool blank_or_comment(const std::string& line) {
  for (char c : line) {
    if (c == '#') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

// Report batches indexed by tick. Lines may arrive in any tick order; order
// within a tick is preserved.
inline std::vector<ReportBatch> parse_report_trace(std::istream& in) {
  std::vector<ReportBatch> batches;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_or_comment(line)) continue;
    VehicleReport rep;
    try {
      rep = parse_report_line(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("report trace line " + std::to_string(line_no) + ": " + e.what());
    }
    if (rep.tick >= batches.size()) batches.resize(rep.tick + 1);
    batches[rep.tick].push_back(std::move(rep));
  }
  return batches;
}

inline std::vector<SignalColours> parse_signal_trace(std::istream& in) {
  std::vector<SignalColours> colours;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank_or_comment(line)) continue;
    try {
      auto [tick, c] = parse_signal_line(line);
      if (tick >= colours.size()) colours.resize(tick + 1);
      colours[tick] = c;
    } catch (const std::exception& e) {
      throw std::runtime_error("signal trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return colours;
}

/// Re-runs the trust engine over recorded report and signal traces and
/// writes one trust row per report, exactly as the live simulation's trust
/// sink would. Colours of a tick only become visible to the engine after
/// that tick's update, matching the live ordering.
inline void replay_trust(const GridTopology& topo, const DetectionParams& det, int algorithm,
                         const std::vector<ReportBatch>& batches,
                         const std::vector<SignalColours>& colours, std::ostream& out) {
  const AlgorithmSpec spec = algorithm_ruleset(algorithm);
  TrustEngine engine(topo, det, spec.rule_mask, spec.filtering);
  SignalHistory history;
  out << trust_csv_header() << '\n';
  const size_t ticks = std::max(batches.size(), colours.size());
  for (size_t t = 0; t < ticks; ++t) {
    if (t < batches.size()) {
      engine.update(batches[t], static_cast<uint32_t>(t), history);
      for (const VehicleReport& rep : batches[t])
        out << trust_csv_row(static_cast<uint32_t>(t), rep.sender, engine.trust(rep.sender)) << '\n';
    }
    if (t < colours.size()) history.push(colours[t]);
  }
}

}  // namespace vantrust
