// Command-line front end: sweep runner, trace replay, saturation
// calibration, result aggregation and topology inspection.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vantrust/vantrust.hpp"

namespace {

using namespace vantrust;

struct ConfigOpts {
  std::string config_path;
  std::vector<std::string> overrides;

  KeyValueConfig load() const {
    KeyValueConfig cfg;
    if (!config_path.empty()) cfg = KeyValueConfig::from_file(config_path);
    for (const std::string& assignment : overrides) cfg.set_assignment(assignment);
    return cfg;
  }
};

void add_config_opts(CLI::App* cmd, ConfigOpts& opts) {
  cmd->add_option("--config", opts.config_path, "flat key = value configuration file");
  cmd->add_option("--set", opts.overrides, "override one config key, e.g. --set det.beta=0.3")
      ->take_all();
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  return in;
}

int cmd_run(const ConfigOpts& cfg_opts, ExperimentPlan plan, const std::string& out_path,
            const std::string& aggregate_path, const std::string& trace_path,
            const std::string& signals_path, const std::string& trust_path, bool quiet) {
  const KeyValueConfig cfg = cfg_opts.load();
  cfg.apply(plan);
  cfg.reject_unconsumed();
  validate_scenario(plan.base);

  const GridTopology topo;
  const bool tracing = !trace_path.empty() || !signals_path.empty() || !trust_path.empty();
  std::vector<RunResult> results;

  if (tracing) {
    const std::vector<ScenarioConfig> cells = plan_cells(plan);
    if (cells.size() != 1)
      throw std::runtime_error("trace output requires a single-cell plan "
                               "(one algorithm, one q, one qF, one replication)");
    std::ofstream trace_out, signals_out, trust_out;
    Simulation sim(topo, cells[0]);
    if (!trace_path.empty()) {
      trace_out.open(trace_path, std::ios::binary);
      if (!trace_out) throw std::runtime_error("cannot open output file: " + trace_path);
      sim.on_reports = [&](const ReportBatch& batch) {
        for (const VehicleReport& rep : batch) trace_out << format_report_line(rep) << '\n';
      };
    }
    if (!signals_path.empty()) {
      signals_out.open(signals_path, std::ios::binary);
      if (!signals_out) throw std::runtime_error("cannot open output file: " + signals_path);
      sim.on_colours = [&](uint32_t tick, SignalColours colours) {
        signals_out << format_signal_line(tick, colours) << '\n';
      };
    }
    if (!trust_path.empty()) {
      trust_out.open(trust_path, std::ios::binary);
      if (!trust_out) throw std::runtime_error("cannot open output file: " + trust_path);
      trust_out << trust_csv_header() << '\n';
      sim.on_trust = [&](uint32_t tick, const ReportBatch& batch) {
        for (const VehicleReport& rep : batch)
          trust_out << trust_csv_row(tick, rep.sender, sim.report_trust(rep)) << '\n';
      };
    }
    sim.run_to_end();
    results.push_back(sim.result());
  } else {
    auto progress = [&](size_t done, size_t total) {
      if (!quiet && (done % 50 == 0 || done == total))
        std::fprintf(stderr, "\r%zu/%zu runs", done, total);
    };
    results = run_experiment(topo, plan, progress);
    if (!quiet) std::fprintf(stderr, "\n");
  }

  if (!out_path.empty()) {
    write_file_or_throw(out_path, [&](std::ostream& out) { write_results_csv(out, results); });
    if (!quiet) std::fprintf(stderr, "wrote %s (%zu rows)\n", out_path.c_str(), results.size());
  } else {
    write_results_csv(std::cout, results);
  }
  if (!aggregate_path.empty()) {
    const std::vector<AggregateRow> rows = aggregate_results(results);
    write_file_or_throw(aggregate_path,
                        [&](std::ostream& out) { write_aggregate_csv(out, rows); });
    if (!quiet) std::fprintf(stderr, "wrote %s (%zu rows)\n", aggregate_path.c_str(), rows.size());
  }
  return 0;
}

int cmd_replay(const ConfigOpts& cfg_opts, const std::string& trace_path,
               const std::string& signals_path, const std::string& out_path, int algorithm) {
  ScenarioConfig scenario;
  const KeyValueConfig cfg = cfg_opts.load();
  cfg.apply(scenario);
  cfg.reject_unconsumed();
  scenario.algorithm = algorithm;
  validate_scenario(scenario);

  std::ifstream trace_in = open_or_throw(trace_path);
  const std::vector<ReportBatch> batches = parse_report_trace(trace_in);
  std::vector<SignalColours> colours;
  if (!signals_path.empty()) {
    std::ifstream signals_in = open_or_throw(signals_path);
    colours = parse_signal_trace(signals_in);
  }

  const GridTopology topo;
  if (out_path.empty()) {
    replay_trust(topo, scenario.det, algorithm, batches, colours, std::cout);
  } else {
    write_file_or_throw(out_path, [&](std::ostream& out) {
      replay_trust(topo, scenario.det, algorithm, batches, colours, out);
    });
  }
  return 0;
}

int cmd_calibrate(int runs, double p, int queue, int window) {
  const GridTopology topo;
  const double flow = measure_saturation_flow(topo, runs, p, queue, 5, window);
  std::printf("saturation flow: %.1f veh/h (%d runs, p=%.3g, queue=%d, window=%d s)\n", flow,
              runs, p, queue, window);
  return 0;
}

int cmd_report(const std::string& in_path, const std::string& detection_path,
               const std::string& delay_path, const std::string& grid_path) {
  std::ifstream in = open_or_throw(in_path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty results file: " + in_path);
  if (line != results_csv_header())
    throw std::runtime_error("unexpected results header in " + in_path);
  std::vector<RunResult> results;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    RunResult r;
    unsigned long long seed = 0, total = 0, vehicles = 0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%llu,%llu,%lf,%lf,%lf,%llu", &r.algorithm, &r.q,
                    &r.qf, &seed, &total, &r.mean_delay_s, &r.pct_malicious_detected,
                    &r.pct_true_recognized, &vehicles) != 9)
      throw std::runtime_error(in_path + ":" + std::to_string(line_no) + ": malformed row");
    r.seed = seed;
    r.total_delay_s = total;
    r.vehicles = vehicles;
    results.push_back(r);
  }

  const std::string detection = detection_table_csv(results);
  const std::string delay = delay_table_csv(results);
  const std::string grid = delay_grid_table_csv(results);
  if (!detection_path.empty())
    write_file_or_throw(detection_path, [&](std::ostream& out) { out << detection; });
  if (!delay_path.empty())
    write_file_or_throw(delay_path, [&](std::ostream& out) { out << delay; });
  if (!grid_path.empty())
    write_file_or_throw(grid_path, [&](std::ostream& out) { out << grid; });

  std::printf("detection accuracy by algorithm and attack intensity:\n%s\n", detection.c_str());
  std::printf("delay by algorithm:\n%s\n", delay.c_str());
  if (!grid_path.empty()) std::printf("wrote per-cell delay table to %s\n", grid_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grid traffic simulation with trust-filtered VANET signal control"};
  app.require_subcommand(1);

  // run
  ConfigOpts run_cfg;
  ExperimentPlan plan;
  std::string out_path, aggregate_path, trace_path, signals_path, trust_path;
  bool quiet = false;
  CLI::App* run = app.add_subcommand("run", "run a simulation sweep and write per-run CSV rows");
  add_config_opts(run, run_cfg);
  run->add_option("--alg", plan.algorithms, "algorithm ids, subset of 0..9")->delimiter(',');
  run->add_option("--q", plan.qs, "vehicle entry probabilities per lane per second")->delimiter(',');
  run->add_option("--qf", plan.qfs, "Sybil spawn probabilities per lane per second")->delimiter(',');
  run->add_option("--seeds", plan.replications, "replications per cell");
  run->add_option("--base-seed", plan.base_seed, "base seed for deriving per-cell seeds");
  run->add_option("--duration", plan.base.sim.duration_s, "simulated seconds per run");
  run->add_option("--threads", plan.threads, "worker threads (0 = hardware)");
  run->add_option("--out", out_path, "per-run results CSV (stdout when omitted)");
  run->add_option("--aggregate-out", aggregate_path, "seed-averaged aggregate CSV");
  run->add_option("--trace-out", trace_path, "report trace (single-cell plans only)");
  run->add_option("--signals-out", signals_path, "signal trace (single-cell plans only)");
  run->add_option("--trust-out", trust_path, "per-report trust CSV (single-cell plans only)");
  run->add_flag("--quiet", quiet, "suppress progress output");

  // replay
  ConfigOpts replay_cfg;
  std::string replay_trace, replay_signals, replay_out;
  int replay_alg = 9;
  CLI::App* replay = app.add_subcommand(
      "replay", "re-run trust classification over a recorded report trace");
  add_config_opts(replay, replay_cfg);
  replay->add_option("--trace", replay_trace, "report trace file")->required();
  replay->add_option("--signals", replay_signals, "signal trace file");
  replay->add_option("--out", replay_out, "trust CSV output (stdout when omitted)");
  replay->add_option("--alg", replay_alg, "algorithm id, 0..9");

  // calibrate
  int cal_runs = 300, cal_queue = 10, cal_window = 20;
  double cal_p = 0.15;
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "measure the saturation flow of one stop line");
  calibrate->add_option("--runs", cal_runs, "number of measurement runs");
  calibrate->add_option("--p", cal_p, "randomization probability");
  calibrate->add_option("--queue", cal_queue, "queued vehicles at the stop line");
  calibrate->add_option("--window", cal_window, "green seconds counted");

  // report
  std::string report_in, report_detection, report_delay, report_grid;
  CLI::App* report = app.add_subcommand("report", "aggregate a results CSV into summary tables");
  report->add_option("--in", report_in, "per-run results CSV from `run`")->required();
  report->add_option("--detection-out", report_detection, "detection accuracy table");
  report->add_option("--delay-out", report_delay, "delay-by-algorithm table");
  report->add_option("--grid-out", report_grid, "delay table by q, qF and algorithm");

  // topology
  CLI::App* topology = app.add_subcommand("topology", "print the grid layout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(run_cfg, plan, out_path, aggregate_path, trace_path, signals_path,
                     trust_path, quiet);
    if (replay->parsed())
      return cmd_replay(replay_cfg, replay_trace, replay_signals, replay_out, replay_alg);
    if (calibrate->parsed()) return cmd_calibrate(cal_runs, cal_p, cal_queue, cal_window);
    if (report->parsed()) return cmd_report(report_in, report_detection, report_delay, report_grid);
    if (topology->parsed()) {
      std::cout << GridTopology().adjacency_text();
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
