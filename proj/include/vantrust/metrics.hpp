#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "vantrust/report.hpp"
#include "vantrust/sybil.hpp"

namespace vantrust {

/// Report-tick classification tallies. "Accepted" means the report survived
/// filtering and reached the controllers; ground truth for the sender comes
/// from the id range, which only the scoreboard inspects.
struct ClassificationCounts {
  uint64_t true_total = 0;
  uint64_t true_accepted = 0;
  uint64_t sybil_total = 0;
  uint64_t sybil_rejected = 0;

  void add(bool sybil, bool accepted) {
    if (sybil) {
      ++sybil_total;
      if (!accepted) ++sybil_rejected;
    } else {
      ++true_total;
      if (accepted) ++true_accepted;
    }
  }

  // Vacuously perfect when a class never occurs (attack-free or empty runs).
  double pct_malicious_detected() const {
    return sybil_total == 0 ? 100.0 : 100.0 * static_cast<double>(sybil_rejected) / static_cast<double>(sybil_total);
  }
  double pct_true_recognized() const {
    return true_total == 0 ? 100.0 : 100.0 * static_cast<double>(true_accepted) / static_cast<double>(true_total);
  }
};

// Tally one tick. `accepted` must be an order-preserving subset of `full`.
inline void accumulate(ClassificationCounts& counts, const ReportBatch& full,
                       const ReportBatch& accepted) {
  size_t j = 0;
  for (const VehicleReport& rep : full) {
    bool in = j < accepted.size() && accepted[j].sender == rep.sender;
    if (in) ++j;
    counts.add(is_sybil_id(rep.sender), in);
  }
}

struct RunResult {
  int algorithm = 0;
  double q = 0;
  double qf = 0;
  uint64_t seed = 0;
  uint64_t total_delay_s = 0;
  double mean_delay_s = 0;
  double pct_malicious_detected = 100.0;
  double pct_true_recognized = 100.0;
  uint64_t vehicles = 0;  // true vehicles that entered during the run
  ClassificationCounts counts;
};

inline std::string results_csv_header() {
  return "algorithm,q,qF,seed,total_delay_s,mean_delay_s,pct_malicious_detected,pct_true_recognized,vehicles";
}

inline std::string results_csv_row(const RunResult& r) {
  char buf[192];
  int len = std::snprintf(buf, sizeof buf, "%d,%.6g,%.6g,%llu,%llu,%.3f,%.3f,%.3f,%llu",
                          r.algorithm, r.q, r.qf, static_cast<unsigned long long>(r.seed),
                          static_cast<unsigned long long>(r.total_delay_s), r.mean_delay_s,
                          r.pct_malicious_detected, r.pct_true_recognized,
                          static_cast<unsigned long long>(r.vehicles));
  return std::string(buf, static_cast<size_t>(len));
}

}  // namespace vantrust
