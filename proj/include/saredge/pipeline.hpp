#pragma once

// Experiment orchestration behind the `saredge` CLI: configuration, batch
// simulation, per-simulation parameter sweeps and BDM reports.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "saredge/config.hpp"
#include "saredge/metrics.hpp"
#include "saredge/netpbm.hpp"
#include "saredge/speckle.hpp"
#include "saredge/strategies.hpp"

namespace saredge {

// ---------------------------------------------------------------------------
// Worker pool

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions are
/// collected and the one with the smallest index is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  auto body = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) body(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------------------
// Experiment description

enum class SweepMode { PerSimulation, Shared };

struct MethodSpec {
  DetectorConfig detector;
  FilterConfig filter;
  Strategy strategy;
  ParamGrid grid;

  std::string method_name() const {
    std::string name(to_string(detector.kind));
    if (emits_strength_map(detector.kind) && detector.tnorm != TNorm::Product) {
      name += "/" + std::string(to_string(detector.tnorm));
    }
    return name;
  }
  std::string strategy_name() const {
    switch (strategy.kind) {
      case StrategyKind::DB:
        return "DB";
      case StrategyKind::DAB:
        return "DAB";
      case StrategyKind::ADB:
        return "ADB";
    }
    return "?";
  }
  std::string channel_name() const {
    return strategy.kind == StrategyKind::DB ? std::string(to_string(strategy.channel)) : "all";
  }
  std::string filter_name() const { return std::string(to_string(filter.kind)); }

  /// File-name stem, e.g. "gravitational-fu_ADB_enhanced-lee_all".
  std::string slug() const {
    std::string s = method_name() + "_" + strategy_name() + "_" + filter_name() + "_" + channel_name();
    std::replace(s.begin(), s.end(), '/', '-');
    return s;
  }
};

struct ExperimentConfig {
  SimulationSpec simulation;
  std::vector<MethodSpec> methods;
  std::filesystem::path output_dir = "out";
  SweepMode sweep_mode = SweepMode::PerSimulation;
  BdmConfig metric;
  bool write_maps = true;
};

namespace detail {

inline std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

// Method keys fall back to the global key of the same name.
class MethodKeys {
 public:
  MethodKeys(const Config& cfg, std::string prefix) : cfg_(cfg), prefix_(std::move(prefix)) {}

  bool has(const std::string& key) const { return cfg_.has(scoped(key)) || cfg_.has(key); }
  std::string key_for(const std::string& key) const { return cfg_.has(scoped(key)) ? scoped(key) : key; }
  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? cfg_.get_string(key_for(key)) : fallback;
  }
  double get_double(const std::string& key, double fallback) const {
    return has(key) ? cfg_.get_double(key_for(key)) : fallback;
  }
  std::vector<std::string> get_list(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return {fallback};
    return cfg_.get_list(key_for(key));
  }
  std::string describe(const std::string& key) const { return cfg_.describe(key_for(key)); }

 private:
  std::string scoped(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

  const Config& cfg_;
  std::string prefix_;
};

template <typename Parse>
auto parse_value(const MethodKeys& keys, const std::string& key, const std::string& value, Parse&& parse) {
  try {
    return parse(value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(keys.describe(key) + ": " + e.what());
  }
}

inline std::vector<MethodSpec> parse_methods(const Config& cfg, const std::string& prefix, double looks) {
  MethodKeys keys(cfg, prefix);

  DetectorConfig base_detector;
  base_detector.tnorm = parse_value(keys, "tnorm", keys.get_string("tnorm", "product"),
                                    [](const std::string& s) { return parse_tnorm(s); });
  base_detector.canny.high_percentile = keys.get_double("canny.high_percentile", 90.0);
  base_detector.canny.low_ratio = keys.get_double("canny.low_ratio", 0.4);
  base_detector.canny.sigma = keys.get_double("sigma", 1.0);
  if (keys.has("scales")) {
    base_detector.multiscale.scales.clear();
    for (const auto& s : keys.get_list("scales", "")) {
      base_detector.multiscale.scales.push_back(parse_value(keys, "scales", s, [](const std::string& v) {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("bad scale '" + v + "'");
        return d;
      }));
    }
  }
  base_detector.multiscale.delta_sigma = keys.get_double("multiscale.delta_sigma", 0.25);
  base_detector.multiscale.percentile = keys.get_double("multiscale.percentile", 90.0);
  base_detector.multiscale.tracking_radius = keys.get_double("multiscale.tracking_radius", -1.0);

  FilterConfig base_filter;
  base_filter.window = static_cast<int>(keys.get_double("filter.window", 5));
  base_filter.damping = keys.get_double("filter.damping", 1.0);
  base_filter.looks = keys.get_double("filter.looks", looks);

  ParamGrid thresholds = default_threshold_grid();
  thresholds.min = keys.get_double("threshold.min", thresholds.min);
  thresholds.max = keys.get_double("threshold.max", thresholds.max);
  thresholds.step = keys.get_double("threshold.step", thresholds.step);
  ParamGrid sigmas = default_sigma_grid();
  sigmas.min = keys.get_double("sigma.min", sigmas.min);
  sigmas.max = keys.get_double("sigma.max", sigmas.max);
  sigmas.step = keys.get_double("sigma.step", sigmas.step);

  const auto detectors = keys.get_list("detector", "gravitational-fu");
  const auto filters = keys.get_list("filter", "none");
  const auto strategies = keys.get_list("strategy", "ADB");
  const std::string db_channel = keys.get_string("channel", "");
  const bool expanded = detectors.size() * filters.size() * strategies.size() > 1;

  std::vector<MethodSpec> out;
  for (const auto& d : detectors) {
    for (const auto& f : filters) {
      for (const auto& s : strategies) {
        MethodSpec m;
        m.detector = base_detector;
        m.detector.kind = parse_value(keys, "detector", d, [](const std::string& v) { return parse_detector_kind(v); });
        m.filter = base_filter;
        m.filter.kind = parse_value(keys, "filter", f, [](const std::string& v) { return parse_filter_kind(v); });
        m.strategy = parse_value(keys, "strategy", s, [&](const std::string& v) {
          if (v == "DB") {
            if (db_channel.empty()) throw std::invalid_argument("strategy DB needs a channel");
            return Strategy::db(parse_channel(db_channel));
          }
          return parse_strategy(v);
        });
        if (m.strategy.kind == StrategyKind::DAB && !emits_strength_map(m.detector.kind)) {
          if (expanded) continue;  // no DAB row for binary-output detectors
          throw ConfigError(keys.describe("strategy") + ": DAB is not defined for " + d);
        }
        switch (m.detector.kind) {
          case DetectorKind::Gravitational:
          case DetectorKind::GravitationalFu:
            m.grid = thresholds;
            break;
          case DetectorKind::Canny:
            m.grid = sigmas;
            break;
          case DetectorKind::Multiscale:
            m.grid = ParamGrid::single(m.detector.multiscale.percentile);
            break;
        }
        try {
          (void)m.grid.values();
          if (m.detector.kind == DetectorKind::Multiscale) m.detector.multiscale.validate();
        } catch (const std::invalid_argument& e) {
          throw ConfigError(cfg.source() + ": method '" + (prefix.empty() ? "default" : prefix) + "': " + e.what());
        }
        out.push_back(m);
      }
    }
  }
  return out;
}

}  // namespace detail

/// Builds an experiment from configuration keys. Unknown keys are rejected.
inline ExperimentConfig experiment_from_config(const Config& cfg) {
  ExperimentConfig exp;
  try {
    const PhantomKind kind = parse_phantom_kind(cfg.get_string("labelmap.kind", "nested-squares"));
    const int size = static_cast<int>(cfg.get_int("labelmap.size", 128));
    const int n_classes = static_cast<int>(cfg.get_int("labelmap.classes", 4));
    exp.simulation.labelmap = generate_phantom(kind, size, n_classes);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.source() + ": labelmap: " + e.what());
  }

  const double looks = cfg.get_double("looks", 4.0);
  std::vector<Channel> channels;
  if (cfg.has("channels")) {
    for (const auto& ch : cfg.get_list("channels")) {
      try {
        channels.push_back(parse_channel(ch));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(cfg.describe("channels") + ": " + e.what());
      }
    }
  }

  for (const auto& id : cfg.children("class")) {
    ClassModel model;
    try {
      model.class_id = std::stoi(id);
    } catch (const std::exception&) {
      throw ConfigError(cfg.source() + ": class id '" + id + "' is not an integer");
    }
    model.looks = looks;
    for (const auto& ch_name : cfg.children("class." + id + ".mean")) {
      const std::string key = "class." + id + ".mean." + ch_name;
      Channel ch;
      try {
        ch = parse_channel(ch_name);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(cfg.describe(key) + ": " + e.what());
      }
      model.mean_intensity[ch] = cfg.get_double(key);
    }
    exp.simulation.classes.push_back(model);
  }
  if (exp.simulation.classes.empty()) throw ConfigError(cfg.source() + ": no class.<id>.mean.<channel> keys");
  if (channels.empty()) {
    for (Channel ch : kAllChannels) {
      const bool everywhere = std::all_of(exp.simulation.classes.begin(), exp.simulation.classes.end(),
                                          [ch](const ClassModel& m) { return m.mean_intensity.count(ch); });
      if (everywhere) channels.push_back(ch);
    }
  }
  exp.simulation.channels = channels;
  exp.simulation.count = static_cast<int>(cfg.get_int("count", 20));
  exp.simulation.master_seed = cfg.has("master_seed") ? cfg.get_u64("master_seed") : 0;

  const std::string saturation = cfg.get_string("saturation", "auto");
  if (saturation == "auto") {
    exp.simulation.saturation = default_saturation(exp.simulation.classes);
  } else if (saturation == "wide") {
    exp.simulation.saturation = wide_saturation(exp.simulation.classes);
  } else {
    exp.simulation.saturation = cfg.get_double("saturation");
  }
  try {
    exp.simulation.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.source() + ": simulation: " + e.what());
  }

  exp.output_dir = cfg.get_string("output_dir", "out");
  const std::string mode = cfg.get_string("sweep.mode", "per-simulation");
  if (mode == "per-simulation") {
    exp.sweep_mode = SweepMode::PerSimulation;
  } else if (mode == "shared") {
    exp.sweep_mode = SweepMode::Shared;
  } else {
    throw ConfigError(cfg.describe("sweep.mode") + ": expected per-simulation or shared");
  }
  exp.metric.p = cfg.get_double("bdm.p", 2.0);
  exp.metric.frame_width = static_cast<int>(cfg.get_int("bdm.frame_width", 4));
  if (!(exp.metric.p >= 1.0)) throw ConfigError(cfg.describe("bdm.p") + ": p must be at least 1");
  const LabelMap& lm = exp.simulation.labelmap;
  if (exp.metric.frame_width < 0 || 2 * exp.metric.frame_width >= std::min(lm.width(), lm.height())) {
    throw ConfigError(cfg.source() + ": bdm.frame_width leaves no sites");
  }
  exp.write_maps = cfg.get_string("report.maps", "true") != "false";

  const auto method_ids = cfg.children("method");
  if (method_ids.empty()) {
    exp.methods = detail::parse_methods(cfg, "", looks);
  } else {
    for (const auto& id : method_ids) {
      auto ms = detail::parse_methods(cfg, "method." + id, looks);
      exp.methods.insert(exp.methods.end(), ms.begin(), ms.end());
    }
  }
  for (const auto& m : exp.methods) {
    if (m.strategy.kind == StrategyKind::DB &&
        std::find(channels.begin(), channels.end(), m.strategy.channel) == channels.end()) {
      throw ConfigError(cfg.source() + ": strategy " + m.strategy.label() + " names a channel that is not simulated");
    }
  }
  // Global method keys are only fallbacks once method.* sections exist; mark
  // them as read so they are not reported as unknown.
  for (const auto& key : {"detector", "filter", "strategy", "channel", "tnorm", "sigma", "scales",
                          "threshold.min", "threshold.max", "threshold.step", "sigma.min", "sigma.max",
                          "sigma.step", "filter.window", "filter.damping", "filter.looks",
                          "canny.high_percentile", "canny.low_ratio", "multiscale.delta_sigma",
                          "multiscale.percentile", "multiscale.tracking_radius"}) {
    if (cfg.has(key)) (void)cfg.get_string(key);
  }
  cfg.reject_unused();
  return exp;
}

inline ExperimentConfig load_experiment(const std::filesystem::path& path) {
  return experiment_from_config(Config::load(path));
}

// ---------------------------------------------------------------------------
// Running

struct RunOptions {
  int jobs = 1;
  bool verbose = false;
  std::ostream* log = &std::cerr;
};

/// Channels of one simulation as the detectors see them: gray amplitude
/// quantized to 8 bits, then normalized to (q + 1) / 256.
inline MultiChannelImage simulated_input(const SimulationSpec& spec, int sim_index) {
  MultiChannelImage mci;
  for (Channel ch : spec.channels) mci.set(ch, normalize(quantize(simulate_channel(spec, ch, sim_index))));
  return mci;
}

inline std::string sim_file_name(int sim_index, Channel ch) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "sim_%03d_%s.pgm", sim_index, std::string(to_string(ch)).c_str());
  return buf;
}

/// Writes labelmap.pgm, ground_truth.pbm and one PGM per (simulation,
/// channel) into the output directory. Returns the paths written.
inline std::vector<std::filesystem::path> cmd_simulate(const ExperimentConfig& exp, const RunOptions& opts = {}) {
  const SimulationSpec& spec = exp.simulation;
  std::filesystem::create_directories(exp.output_dir);
  std::vector<std::filesystem::path> written;
  written.push_back(exp.output_dir / "labelmap.pgm");
  write_pgm(labelmap_bytes(spec.labelmap), written.back());
  written.push_back(exp.output_dir / "ground_truth.pbm");
  write_pbm(ground_truth_edges(spec.labelmap), written.back());

  const std::size_t n_channels = spec.channels.size();
  const std::size_t units = static_cast<std::size_t>(spec.count) * n_channels;
  std::vector<std::filesystem::path> files(units);
  parallel_for(units, opts.jobs, [&](std::size_t u) {
    const int sim = static_cast<int>(u / n_channels);
    const Channel ch = spec.channels[u % n_channels];
    files[u] = exp.output_dir / sim_file_name(sim, ch);
    write_pgm(quantize(simulate_channel(spec, ch, sim)), files[u]);
  });
  if (opts.verbose && opts.log) *opts.log << "simulate: wrote " << units + 2 << " files to " << exp.output_dir << '\n';
  written.insert(written.end(), files.begin(), files.end());
  return written;
}

struct SimScore {
  int sim_index = 0;
  double param = 0.0;
  double bdm = 0.0;
};

struct BdmRow {
  std::string method;
  std::string strategy;
  std::string filter;
  std::string channel;
  double best_param = 0.0;
  double bdm_mean = 0.0;
  double bdm_std = 0.0;
  int n_sims = 0;

  auto key() const { return std::tie(method, strategy, filter, channel); }
};

struct BdmReport {
  std::vector<BdmRow> rows;
  std::vector<std::vector<SimScore>> per_sim;  // parallel to rows
};

inline constexpr const char* kReportHeader = "method,strategy,filter,channel,best_param,bdm_mean,bdm_std,n_sims";

/// Mean and sample standard deviation (n - 1 divisor; 0 for one sample).
inline std::pair<double, double> mean_and_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

inline std::string format_row_csv(const BdmRow& row) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.4f,%.2f,%.2f,%d", row.best_param, row.bdm_mean, row.bdm_std, row.n_sims);
  return row.method + "," + row.strategy + "," + row.filter + "," + row.channel + "," + buf;
}

inline std::string format_report_csv(const std::vector<BdmRow>& rows) {
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& row : rows) out += format_row_csv(row) + "\n";
  return out;
}

/// "18.24 (3.41)"
inline std::string format_mean_std(double mean, double std_dev) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f (%.2f)", mean, std_dev);
  return buf;
}

/// Fixed-width table; the first row with the least bdm_mean is marked '*'.
inline std::string format_summary(const std::vector<BdmRow>& rows) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].bdm_mean < rows[best].bdm_mean) best = i;
  }
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "  %-24s %-8s %-13s %-7s %10s  %s\n", "method", "strategy", "filter", "channel",
                "best_param", "BDM mean (std)");
  out << buf;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::snprintf(buf, sizeof buf, "%c %-24s %-8s %-13s %-7s %10.4f  %s  n=%d\n", i == best ? '*' : ' ',
                  r.method.c_str(), r.strategy.c_str(), r.filter.c_str(), r.channel.c_str(), r.best_param,
                  format_mean_std(r.bdm_mean, r.bdm_std).c_str(), r.n_sims);
    out << buf;
  }
  return out.str();
}

inline std::string map_file_name(const MethodSpec& m, int sim_index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_sim%03d.pbm", sim_index);
  return m.slug() + buf;
}

/// Sweeps every method on every simulation, averages BDM across
/// simulations, and writes report.csv, per_sim.csv, summary.txt,
/// ground_truth.pbm and maps/<method>_simNNN.pbm into the output directory.
inline BdmReport cmd_run(const ExperimentConfig& exp, const RunOptions& opts = {}) {
  const SimulationSpec& spec = exp.simulation;
  const BinaryImage truth = ground_truth_edges(spec.labelmap);
  const std::size_t n_methods = exp.methods.size();
  const std::size_t n_sims = static_cast<std::size_t>(spec.count);
  if (n_methods == 0) throw std::invalid_argument("experiment has no methods");

  struct Unit {
    std::vector<double> scores;  // per grid point
    std::vector<BinaryImage> maps;
  };
  std::vector<Unit> units(n_methods * n_sims);
  std::mutex log_mutex;

  parallel_for(units.size(), opts.jobs, [&](std::size_t u) {
    const MethodSpec& m = exp.methods[u / n_sims];
    const int sim = static_cast<int>(u % n_sims);
    try {
      const auto objective = make_objective(simulated_input(spec, sim), m.strategy, m.detector, m.filter);
      const auto grid = m.grid.values();
      Unit& unit = units[u];
      for (double p : grid) {
        unit.maps.push_back(objective(p));
        unit.scores.push_back(bdm_score(unit.maps.back(), truth, exp.metric));
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("method " + m.slug() + ", sim " + std::to_string(sim) + ": " + e.what());
    }
    if (opts.verbose && opts.log) {
      std::lock_guard<std::mutex> lock(log_mutex);
      *opts.log << "run: " << m.slug() << " sim " << sim << " done\n";
    }
  });

  BdmReport report;
  std::vector<std::tuple<std::size_t, std::vector<std::size_t>>> chosen;  // method, grid index per sim
  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    const MethodSpec& m = exp.methods[mi];
    const auto grid = m.grid.values();
    std::vector<std::size_t> picks(n_sims, 0);
    if (exp.sweep_mode == SweepMode::PerSimulation) {
      for (std::size_t s = 0; s < n_sims; ++s) {
        const auto& scores = units[mi * n_sims + s].scores;
        picks[s] = static_cast<std::size_t>(std::min_element(scores.begin(), scores.end()) - scores.begin());
      }
    } else {
      std::size_t best = 0;
      double best_mean = 0.0;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        double sum = 0.0;
        for (std::size_t s = 0; s < n_sims; ++s) sum += units[mi * n_sims + s].scores[g];
        const double mean = sum / static_cast<double>(n_sims);
        if (g == 0 || mean < best_mean) {
          best = g;
          best_mean = mean;
        }
      }
      std::fill(picks.begin(), picks.end(), best);
    }

    BdmRow row{m.method_name(), m.strategy_name(), m.filter_name(), m.channel_name(), 0.0, 0.0, 0.0,
               static_cast<int>(n_sims)};
    std::vector<SimScore> sims;
    std::vector<double> scores;
    std::vector<double> params;
    for (std::size_t s = 0; s < n_sims; ++s) {
      const double score = units[mi * n_sims + s].scores[picks[s]];
      sims.push_back({static_cast<int>(s), grid[picks[s]], score});
      scores.push_back(score);
      params.push_back(grid[picks[s]]);
    }
    std::tie(row.bdm_mean, row.bdm_std) = mean_and_std(scores);
    row.best_param = mean_and_std(params).first;
    report.rows.push_back(row);
    report.per_sim.push_back(sims);
    chosen.emplace_back(mi, picks);
  }

  // Deterministic row order.
  std::vector<std::size_t> order(report.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return report.rows[a].key() < report.rows[b].key(); });
  BdmReport sorted;
  for (std::size_t i : order) {
    sorted.rows.push_back(report.rows[i]);
    sorted.per_sim.push_back(report.per_sim[i]);
  }

  std::filesystem::create_directories(exp.output_dir);
  {
    std::ofstream csv(exp.output_dir / "report.csv", std::ios::binary | std::ios::trunc);
    csv << format_report_csv(sorted.rows);
    if (!csv) throw FormatError(FormatErrorKind::Io, "cannot write report.csv");
  }
  {
    std::ofstream per(exp.output_dir / "per_sim.csv", std::ios::binary | std::ios::trunc);
    per << "method,strategy,filter,channel,sim_index,param,bdm\n";
    char buf[96];
    for (std::size_t r = 0; r < sorted.rows.size(); ++r) {
      const auto& row = sorted.rows[r];
      for (const auto& s : sorted.per_sim[r]) {
        std::snprintf(buf, sizeof buf, "%d,%.4f,%.6f", s.sim_index, s.param, s.bdm);
        per << row.method << ',' << row.strategy << ',' << row.filter << ',' << row.channel << ',' << buf << '\n';
      }
    }
    if (!per) throw FormatError(FormatErrorKind::Io, "cannot write per_sim.csv");
  }
  {
    std::ofstream summary(exp.output_dir / "summary.txt", std::ios::binary | std::ios::trunc);
    summary << format_summary(sorted.rows);
  }
  write_pbm(truth, exp.output_dir / "ground_truth.pbm");
  if (exp.write_maps) {
    std::filesystem::create_directories(exp.output_dir / "maps");
    for (const auto& [mi, picks] : chosen) {
      for (std::size_t s = 0; s < n_sims; ++s) {
        write_pbm(units[mi * n_sims + s].maps[picks[s]],
                  exp.output_dir / "maps" / map_file_name(exp.methods[mi], static_cast<int>(s)));
      }
    }
  }
  return sorted;
}

// ---------------------------------------------------------------------------
// Merging reports

/// Report rows kept as text so merging never re-rounds values.
struct ReportLine {
  std::vector<std::string> fields;

  double bdm_mean() const { return std::stod(fields.at(5)); }
  auto key() const { return std::tie(fields[0], fields[1], fields[2], fields[3]); }
  friend bool operator==(const ReportLine& a, const ReportLine& b) { return a.fields == b.fields; }
  friend bool operator<(const ReportLine& a, const ReportLine& b) { return a.fields < b.fields; }
};

inline std::vector<ReportLine> read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatErrorKind::Io, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(FormatErrorKind::MalformedHeader, path.string() + ": empty report");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kReportHeader) {
    throw FormatError(FormatErrorKind::MalformedHeader, path.string() + ": schema mismatch, header '" + line + "'");
  }
  std::vector<ReportLine> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ReportLine row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.fields.push_back(cell);
    if (row.fields.size() != 8) {
      throw FormatError(FormatErrorKind::MalformedHeader,
                        path.string() + ":" + std::to_string(line_no) + ": expected 8 fields");
    }
    try {
      (void)row.bdm_mean();
    } catch (const std::exception&) {
      throw FormatError(FormatErrorKind::MalformedHeader,
                        path.string() + ":" + std::to_string(line_no) + ": bdm_mean is not a number");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct MergedReport {
  std::vector<ReportLine> rows;  // sorted, deduplicated
  std::size_t best = 0;          // first row with least bdm_mean
};

inline MergedReport merge_reports(const std::vector<std::filesystem::path>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("report needs at least one input file");
  MergedReport merged;
  for (const auto& p : inputs) {
    auto rows = read_report_csv(p);
    merged.rows.insert(merged.rows.end(), rows.begin(), rows.end());
  }
  std::sort(merged.rows.begin(), merged.rows.end(), [](const ReportLine& a, const ReportLine& b) {
    if (a.key() != b.key()) return a.key() < b.key();
    return a < b;
  });
  merged.rows.erase(std::unique(merged.rows.begin(), merged.rows.end()), merged.rows.end());
  for (std::size_t i = 1; i < merged.rows.size(); ++i) {
    if (merged.rows[i].bdm_mean() < merged.rows[merged.best].bdm_mean()) merged.best = i;
  }
  return merged;
}

inline std::string format_merged_csv(const MergedReport& merged) {
  std::string out = std::string(kReportHeader) + "\n";
  for (const auto& row : merged.rows) {
    std::string line;
    for (const auto& f : row.fields) line += (line.empty() ? "" : ",") + f;
    out += line + "\n";
  }
  return out;
}

inline std::string format_merged_summary(const MergedReport& merged) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "  %-24s %-8s %-13s %-7s %10s  %s\n", "method", "strategy", "filter", "channel",
                "best_param", "BDM mean (std)");
  out << buf;
  for (std::size_t i = 0; i < merged.rows.size(); ++i) {
    const auto& f = merged.rows[i].fields;
    const std::string bdm = f[5] + " (" + f[6] + ")";
    std::snprintf(buf, sizeof buf, "%c %-24s %-8s %-13s %-7s %10s  %s  n=%s\n", i == merged.best ? '*' : ' ',
                  f[0].c_str(), f[1].c_str(), f[2].c_str(), f[3].c_str(), f[4].c_str(), bdm.c_str(), f[7].c_str());
    out << buf;
  }
  return out.str();
}

/// Merges report files into `merged_csv` and returns the summary table.
inline std::string cmd_report(const std::vector<std::filesystem::path>& inputs,
                              const std::filesystem::path& merged_csv) {
  const MergedReport merged = merge_reports(inputs);
  if (merged_csv.has_parent_path()) std::filesystem::create_directories(merged_csv.parent_path());
  std::ofstream out(merged_csv, std::ios::binary | std::ios::trunc);
  out << format_merged_csv(merged);
  if (!out) throw FormatError(FormatErrorKind::Io, "cannot write " + merged_csv.string());
  return format_merged_summary(merged);
}

}  // namespace saredge
