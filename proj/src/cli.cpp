#include "heraldmc/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "heraldmc/analysis.hpp"
#include "heraldmc/config.hpp"
#include "heraldmc/errors.hpp"
#include "heraldmc/report.hpp"

namespace heraldmc::cli {

namespace fs = std::filesystem;

namespace {

struct RunOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  std::optional<std::string> model;
  std::optional<std::int64_t> pulses;
  std::optional<std::int64_t> seed;
  std::optional<std::int64_t> threads;
  bool log_trials = false;
};

struct CompareOptions {
  std::string dir_a;
  std::string dir_b;
  std::string out_dir = ".";
};

struct OracleOptions {
  double mu = 0.0;
  double eta_h = 1.0;
  double eta_ab = 1.0;
  int n_max = 25;
};

struct SweepOptions {
  std::string parameter;
  double from = 0.0;
  double to = 0.0;
  std::int64_t steps = 0;
  std::string config_path;
  std::string out_file = "sweep.csv";
  std::vector<std::string> overrides;
  std::optional<std::int64_t> pulses;
  std::optional<std::int64_t> seed;
};

struct WriteConfigOptions {
  std::string preset;
  std::string out_file;  // empty = stdout
};

experiment::ExperimentConfig load_config(const std::string& path,
                                         const std::vector<std::string>& overrides,
                                         const RunOptions* shortcuts) {
  config::Table table = config::parse_file(path);
  for (const auto& assignment : overrides) config::apply_override(table, assignment);
  if (shortcuts) {
    if (shortcuts->model) table.entries["run.model"] = *shortcuts->model;
    if (shortcuts->pulses) table.entries["run.pulses"] = *shortcuts->pulses;
    if (shortcuts->seed) table.entries["run.seed"] = *shortcuts->seed;
    if (shortcuts->threads) table.entries["run.threads"] = *shortcuts->threads;
  }
  return config::to_experiment(table);
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write " + path.string());
  out << text;
}

void write_json_file(const fs::path& path, const nlohmann::ordered_json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

class CsvSink : public experiment::TrialSink {
 public:
  explicit CsvSink(const fs::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw ModelError("cannot write " + path.string());
    report::write_trial_csv_header(out_);
  }
  void on_trial(const experiment::TrialRecord& record) override {
    report::write_trial_csv_row(out_, record);
  }

 private:
  std::ofstream out_;
};

class FanoutSink : public experiment::TrialSink {
 public:
  void add(experiment::TrialSink* sink) {
    if (sink) sinks_.push_back(sink);
  }
  bool empty() const { return sinks_.empty(); }
  void on_trial(const experiment::TrialRecord& record) override {
    for (auto* sink : sinks_) sink->on_trial(record);
  }

 private:
  std::vector<experiment::TrialSink*> sinks_;
};

bool ideal_ab_detectors(const experiment::ExperimentConfig& cfg) {
  return cfg.detector_a.efficiency == 1.0 && cfg.detector_b.efficiency == 1.0 &&
         cfg.detector_a.dark_count_prob == 0.0 && cfg.detector_b.dark_count_prob == 0.0;
}

int cmd_run(const RunOptions& opts) {
  const auto cfg = load_config(opts.config_path, opts.overrides, &opts);
  fs::create_directories(opts.out_dir);
  const fs::path out(opts.out_dir);

  std::optional<CsvSink> csv;
  if (opts.log_trials) csv.emplace(out / "trials.csv");
  analysis::EnergyAuditAccumulator audit_acc;
  const bool audit_possible = ideal_ab_detectors(cfg);

  FanoutSink fanout;
  if (csv) fanout.add(&*csv);
  if (audit_possible) fanout.add(&audit_acc);

  const auto counts = experiment::run(cfg, fanout.empty() ? nullptr : &fanout);

  write_json_file(out / "counts.json", report::counts_json(cfg, counts));

  std::optional<analysis::EnergyAudit> audit;
  std::string audit_reason = "detectors A/B are not ideal "
                             "(unit efficiency and zero dark counts required)";
  if (audit_possible) {
    audit = audit_acc.result();
    if (!audit) audit_reason = "no heralded single-pair trials in this run";
  }
  write_json_file(out / "audit.json", report::audit_json(audit, audit_reason));

  if (counts.r_h > 0.0) {
    const auto est = analysis::estimate(counts, cfg.separation().kind);
    write_json_file(out / "estimates.json", report::estimates_json(est));
    const std::string text = report::run_report_text(cfg, counts, est, audit);
    write_text_file(out / "report.txt", text);
    std::cout << text;
  } else {
    nlohmann::ordered_json j;
    j["separation"] = spacetime::to_string(cfg.separation().kind);
    j["r_h"] = 0.0;
    j["error"] = "no heralded trials";
    write_json_file(out / "estimates.json", j);
    const std::string text = "no heralded trials; estimators undefined\n";
    write_text_file(out / "report.txt", text);
    std::cout << text;
  }
  std::cout << "wrote " << (out / "counts.json").string() << ", estimates.json, audit.json, "
            << "report.txt" << (opts.log_trials ? ", trials.csv" : "") << '\n';
  return 0;
}

int cmd_compare(const CompareOptions& opts) {
  auto load_estimates = [](const std::string& dir) {
    const fs::path path = fs::path(dir) / "estimates.json";
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("malformed estimates file " + path.string() + ": " + e.what());
    }
    return report::estimates_from_json(j);
  };
  const auto est_a = load_estimates(opts.dir_a);
  const auto est_b = load_estimates(opts.dir_b);
  const auto rep = analysis::compare_runs(est_a, est_b);

  fs::create_directories(opts.out_dir);
  const fs::path out(opts.out_dir);
  write_json_file(out / "comparison.json",
                  report::comparison_json(rep, est_a, est_b, opts.dir_a, opts.dir_b));
  const std::string table =
      report::comparison_table_text(rep, est_a, est_b, opts.dir_a, opts.dir_b);
  write_text_file(out / "comparison.txt", table);
  std::cout << table;
  return 0;
}

int cmd_oracle(const OracleOptions& opts) {
  const auto result =
      analysis::accidental_triples_oracle(opts.mu, opts.eta_h, opts.eta_ab, opts.n_max);
  std::printf("p11_given_herald = %.12g\n", result.p11_given_herald);
  std::printf("truncation_bound = %.6g\n", result.truncation_bound);
  return 0;
}

int cmd_sweep(const SweepOptions& opts) {
  static const std::vector<std::string> kParams = {"mu", "efficiency", "distance", "delay",
                                                   "window"};
  if (std::find(kParams.begin(), kParams.end(), opts.parameter) == kParams.end())
    throw ConfigError("unknown sweep parameter '" + opts.parameter +
                      "' (expected mu | efficiency | distance | delay | window)");
  if (opts.steps < 1) throw ConfigError("sweep range is empty: steps must be >= 1");
  if (!(opts.from <= opts.to)) throw ConfigError("sweep range is empty: from must be <= to");

  RunOptions shortcuts;
  shortcuts.pulses = opts.pulses;
  shortcuts.seed = opts.seed;
  const auto base = load_config(opts.config_path, opts.overrides, &shortcuts);

  std::vector<double> values;
  for (std::int64_t i = 0; i < opts.steps; ++i) {
    values.push_back(opts.steps == 1
                         ? opts.from
                         : opts.from + (opts.to - opts.from) * static_cast<double>(i) /
                               static_cast<double>(opts.steps - 1));
  }

  std::vector<experiment::ExperimentConfig> configs;
  for (double v : values) {
    experiment::ExperimentConfig cfg = base;
    if (opts.parameter == "mu") {
      cfg.source.mean_pairs_per_pulse = v;
      cfg.source.pair_number = source::PairNumberMode::Poisson;
    } else if (opts.parameter == "efficiency") {
      cfg.detector_h.efficiency = v;
      cfg.detector_a.efficiency = v;
      cfg.detector_b.efficiency = v;
    } else if (opts.parameter == "distance") {
      cfg.detector_distance_ab_m = v;
    } else if (opts.parameter == "delay") {
      cfg.fiber_bs_to_b.length_m = cfg.fiber_bs_to_a.length_m + v;
    } else {
      cfg.coincidence_window_s = v;
    }
    try {
      cfg.validate();
    } catch (const ConfigError& e) {
      throw ConfigError("sweep value " + std::to_string(v) + ": " + e.what());
    }
    configs.push_back(std::move(cfg));
  }

  std::ofstream out(opts.out_file, std::ios::binary);
  if (!out) throw ModelError("cannot write " + opts.out_file);
  out << "parameter,value,separation,signaling_threshold_m,r_h,p_a,p_b,p11,p00,p10,p01,"
         "locality_ratio\n";
  char buf[64];
  auto num = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const auto& cfg = configs[i];
    const auto sc = cfg.separation();
    const auto counts = experiment::run(cfg);
    out << opts.parameter << ',' << num(values[i]) << ',' << spacetime::to_string(sc.kind)
        << ',' << num(sc.signaling_threshold_distance_m) << ',' << num(counts.r_h);
    if (counts.r_h > 0.0) {
      const auto est = analysis::estimate(counts, sc.kind);
      out << ',' << num(est.p_a) << ',' << num(est.p_b) << ',' << num(est.p11) << ','
          << num(est.p00) << ',' << num(est.p10) << ',' << num(est.p01) << ','
          << (est.locality_ratio ? num(*est.locality_ratio) : "");
    } else {
      out << ",,,,,,,";
    }
    out << '\n';
  }
  std::cout << "wrote " << opts.out_file << " (" << configs.size() << " rows)\n";
  return 0;
}

int cmd_write_config(const WriteConfigOptions& opts) {
  experiment::ExperimentConfig cfg;
  if (opts.preset == "spacelike")
    cfg = config::preset_spacelike();
  else if (opts.preset == "timelike")
    cfg = config::preset_timelike();
  else
    throw ConfigError("unknown preset '" + opts.preset + "' (expected spacelike | timelike)");
  const std::string text = config::write(config::from_experiment(cfg));
  if (opts.out_file.empty())
    std::cout << text;
  else
    write_text_file(opts.out_file, text);
  return 0;
}

}  // namespace

int run_main(int argc, const char* const* argv) {
  CLI::App app{"Monte Carlo simulator for heralded single-photon beam-splitter experiments"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "simulate one configuration and write reports");
  run->add_option("--config", run_opts.config_path, "config file (TOML)")->required();
  run->add_option("--out", run_opts.out_dir, "output directory (default: out)");
  run->add_option("--model", run_opts.model,
                  "override run.model (nonlocal_collapse | local_collapse | empty_wave | "
                  "many_worlds)");
  run->add_option("--pulses", run_opts.pulses, "override run.pulses");
  run->add_option("--seed", run_opts.seed, "override run.seed");
  run->add_option("--threads", run_opts.threads, "override run.threads (0 = auto)");
  run->add_option("--set", run_opts.overrides, "override any config key, e.g. "
                                               "--set source.mean_pairs_per_pulse=0.02");
  run->add_flag("--log-trials", run_opts.log_trials, "write trials.csv (one row per heralded "
                                                     "pulse, one per branch for many_worlds)");

  CompareOptions cmp_opts;
  auto* cmp = app.add_subcommand("compare", "compare the estimates of two run directories");
  cmp->add_option("dir_a", cmp_opts.dir_a, "first run directory")->required();
  cmp->add_option("dir_b", cmp_opts.dir_b, "second run directory")->required();
  cmp->add_option("--out", cmp_opts.out_dir, "output directory (default: .)");

  OracleOptions oracle_opts;
  auto* oracle = app.add_subcommand("oracle",
                                    "analytic accidental-triples prediction P(1,1|herald)");
  oracle->add_option("--mu", oracle_opts.mu, "mean pairs per pulse")->required();
  oracle->add_option("--eta-h", oracle_opts.eta_h, "herald detector efficiency (default 1)");
  oracle->add_option("--eta-ab", oracle_opts.eta_ab, "A/B detector efficiency (default 1)");
  oracle->add_option("--n-max", oracle_opts.n_max, "pair-number truncation (default 25)");

  SweepOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and write a CSV");
  sweep->add_option("--param", sweep_opts.parameter,
                    "mu | efficiency | distance | delay | window")->required();
  sweep->add_option("--from", sweep_opts.from, "first value")->required();
  sweep->add_option("--to", sweep_opts.to, "last value")->required();
  sweep->add_option("--steps", sweep_opts.steps, "number of values")->required();
  sweep->add_option("--config", sweep_opts.config_path, "base config file")->required();
  sweep->add_option("--out", sweep_opts.out_file, "output CSV (default: sweep.csv)");
  sweep->add_option("--pulses", sweep_opts.pulses, "override run.pulses");
  sweep->add_option("--seed", sweep_opts.seed, "override run.seed");
  sweep->add_option("--set", sweep_opts.overrides, "override any config key");

  WriteConfigOptions wc_opts;
  auto* wc = app.add_subcommand("write-config", "emit a shipped preset config");
  wc->add_option("--preset", wc_opts.preset, "spacelike | timelike")->required();
  wc->add_option("--out", wc_opts.out_file, "output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (cmp->parsed()) return cmd_compare(cmp_opts);
    if (oracle->parsed()) return cmd_oracle(oracle_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
    return cmd_write_config(wc_opts);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

int run_main(const std::vector<std::string>& args) {
  std::vector<std::string> argv_storage;
  argv_storage.reserve(args.size() + 1);
  argv_storage.push_back("heraldmc");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(argv_storage.size());
  for (const auto& arg : argv_storage) argv.push_back(arg.c_str());
  return run_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace heraldmc::cli
