#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "vantrust/experiment.hpp"
#include "vantrust/simulation.hpp"

namespace vantrust {

/// Flat key = value configuration. '#' starts a comment, blank lines are
/// ignored. Keys not recognized by the applier are a hard error so typos
/// cannot silently fall back to defaults.
class KeyValueConfig {
 public:
  static KeyValueConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    KeyValueConfig cfg;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      size_t hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      size_t eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key = value");
      std::string key = trim(trimmed.substr(0, eq));
      std::string value = trim(trimmed.substr(eq + 1));
      if (key.empty() || value.empty())
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected key = value");
      cfg.kv_[key] = value;
    }
    return cfg;
  }

  // command-line override, "key=value"
  void set_assignment(const std::string& assignment) {
    size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= assignment.size())
      throw std::runtime_error("expected key=value, got: " + assignment);
    kv_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  void apply(ScenarioConfig& cfg) const {
    number(cfg.sim.p, "sim.p");
    number(cfg.sim.q, "sim.q");
    number(cfg.sim.v_max, "sim.v_max");
    number(cfg.sim.duration_s, "sim.duration_s");
    number(cfg.noise_m, "vanet.noise_m");
    number(cfg.sig.min_green_s, "sig.min_green_s");
    number(cfg.sig.intergreen_s, "sig.intergreen_s");
    number(cfg.sig.max_red_s, "sig.max_red_s");
    number(cfg.sig.pressure_horizon_m, "sig.pressure_horizon_m");
    number(cfg.sig.stopped_weight, "sig.stopped_weight");
    number(cfg.sig.hysteresis, "sig.hysteresis");
    number(cfg.sig.stopped_speed_m_s, "sig.stopped_speed_m_s");
    number(cfg.det.alpha, "det.alpha");
    number(cfg.det.beta, "det.beta");
    number(cfg.det.eps_x, "det.eps_x");
    number(cfg.det.eps_v, "det.eps_v");
    number(cfg.det.delta_s, "det.delta_s");
    number(cfg.det.r, "det.r");
    number(cfg.det.v_f, "det.v_f");
    number(cfg.det.h_min, "det.h_min");
    number(cfg.det.tau, "det.tau");
    number(cfg.det.t0, "det.t0");
    number(cfg.det.t_min, "det.t_min");
    number(cfg.det.t_max, "det.t_max");
    boolean(cfg.per_node, "det.per_node");
    number(cfg.algorithm, "run.algorithm");
    number(cfg.seed, "run.seed");
    number(cfg.attack.qf, "attack.qf");
    boolean(cfg.attack.collusion, "attack.collusion");
    number(cfg.attack.v_min, "attack.v_min");
    number(cfg.attack.v_max, "attack.v_max");
    number(cfg.attack.max_age_s, "attack.max_age_s");
  }

  void apply(ExperimentPlan& plan) const {
    apply(plan.base);
    int_list(plan.algorithms, "plan.algorithms");
    double_list(plan.qs, "plan.q");
    double_list(plan.qfs, "plan.qf");
    number(plan.replications, "plan.replications");
    number(plan.base_seed, "plan.base_seed");
    number(plan.threads, "plan.threads");
  }

  // Call after every apply(); leftover keys are typos or stale settings.
  void reject_unconsumed() const {
    for (const auto& [key, value] : kv_)
      if (consumed_.count(key) == 0) throw std::runtime_error("unknown config key: " + key);
  }

 private:
  static std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  const std::string* find(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return nullptr;
    consumed_.insert(key);
    return &it->second;
  }

  static double parse_double(const std::string& value, const std::string& key) {
    try {
      size_t pos = 0;
      double v = std::stod(value, &pos);
      if (pos != value.size()) throw std::invalid_argument(value);
      return v;
    } catch (const std::exception&) {
      throw std::runtime_error("config key " + key + ": not a number: " + value);
    }
  }

  template <typename T>
  void number(T& target, const std::string& key) const {
    const std::string* value = find(key);
    if (value == nullptr) return;
    double v = parse_double(*value, key);
    if constexpr (std::is_floating_point_v<T>) {
      target = static_cast<T>(v);
    } else {
      T t = static_cast<T>(v);
      if (static_cast<double>(t) != v)
        throw std::runtime_error("config key " + key + ": expected an integer: " + *value);
      target = t;
    }
  }

  void boolean(bool& target, const std::string& key) const {
    const std::string* value = find(key);
    if (value == nullptr) return;
    if (*value == "true" || *value == "1") target = true;
    else if (*value == "false" || *value == "0") target = false;
    else throw std::runtime_error("config key " + key + ": expected true/false: " + *value);
  }

  template <typename T>
  void list(std::vector<T>& target, const std::string& key) const {
    const std::string* value = find(key);
    if (value == nullptr) return;
    std::vector<T> items;
    std::stringstream ss(*value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      double v = parse_double(item, key);
      T t = static_cast<T>(v);
      if (static_cast<double>(t) != v)
        throw std::runtime_error("config key " + key + ": bad list item: " + item);
      items.push_back(t);
    }
    if (items.empty()) throw std::runtime_error("config key " + key + ": empty list");
    target = std::move(items);
  }

  void int_list(std::vector<int>& target, const std::string& key) const { list(target, key); }
  void double_list(std::vector<double>& target, const std::string& key) const { list(target, key); }

  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> consumed_;
};

// Range checks shared by the CLI and the harness; throws on the first
// violated constraint, naming it.
inline void validate_scenario(const ScenarioConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid configuration: ") + what);
  };
  require(cfg.sim.p >= 0 && cfg.sim.p <= 1, "sim.p must be in [0, 1]");
  require(cfg.sim.q >= 0 && cfg.sim.q <= 1, "sim.q must be in [0, 1]");
  require(cfg.sim.v_max >= 1, "sim.v_max must be >= 1");
  require(cfg.sim.duration_s >= 1, "sim.duration_s must be >= 1");
  require(cfg.det.alpha > 0, "det.alpha must be > 0");
  require(cfg.det.beta > 0, "det.beta must be > 0");
  require(cfg.det.delta_s >= 1, "det.delta_s must be >= 1");
  require(cfg.det.eps_x >= 0, "det.eps_x must be >= 0");
  require(cfg.det.eps_v >= 0, "det.eps_v must be >= 0");
  require(cfg.det.r > 0, "det.r must be > 0");
  require(cfg.det.v_f > 0, "det.v_f must be > 0");
  require(cfg.det.tau > 0, "det.tau must be > 0");
  require(cfg.det.t_min < cfg.det.t_max, "det.t_min must be < det.t_max");
  require(cfg.det.t0 > cfg.det.t_min && cfg.det.t0 <= cfg.det.t_max,
          "det.t0 must lie in (det.t_min, det.t_max]");
  require(cfg.sig.min_green_s >= 1, "sig.min_green_s must be >= 1");
  require(cfg.sig.intergreen_s >= 1, "sig.intergreen_s must be >= 1");
  require(cfg.sig.max_red_s > cfg.sig.min_green_s + cfg.sig.intergreen_s,
          "sig.max_red_s must exceed sig.min_green_s + sig.intergreen_s");
  require(cfg.sig.pressure_horizon_m >= 0, "sig.pressure_horizon_m must be >= 0");
  require(cfg.sig.stopped_weight >= 1, "sig.stopped_weight must be >= 1");
  require(cfg.sig.hysteresis >= 0, "sig.hysteresis must be >= 0");
  require(cfg.attack.qf >= 0 && cfg.attack.qf <= 1, "attack.qf must be in [0, 1]");
  require(cfg.attack.v_min >= 0 && cfg.attack.v_min <= cfg.attack.v_max,
          "attack velocity range must satisfy 0 <= v_min <= v_max");
  require(cfg.attack.max_age_s >= 1, "attack.max_age_s must be >= 1");
  algorithm_ruleset(cfg.algorithm);
}

}  // namespace vantrust
