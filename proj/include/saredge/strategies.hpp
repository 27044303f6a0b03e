#pragma once

// Detection / aggregation / binarization orderings over multi-channel
// amplitude images, plus the grid sweep used to pick per-image parameters.

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "saredge/detectors.hpp"
#include "saredge/filters.hpp"
#include "saredge/metrics.hpp"
#include "saredge/raster.hpp"

namespace saredge {

// ---------------------------------------------------------------------------
// Aggregation and binarization

inline GrayImage aggregate_mean(std::span<const GrayImage> images) {
  if (images.empty()) throw std::invalid_argument("aggregate_mean needs at least one image");
  const GrayImage& first = images.front();
  for (const auto& img : images) {
    if (!img.same_shape(first)) throw std::invalid_argument("aggregate_mean: dimension mismatch");
  }
  GrayImage out(first.width(), first.height(), 0.0);
  auto dst = out.pixels();
  for (const auto& img : images) {
    auto src = img.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  }
  const double n = static_cast<double>(images.size());
  for (double& v : dst) v /= n;
  return out;
}

/// Foreground where value >= t.
inline BinaryImage threshold(const EdgeStrengthMap& esm, double t) {
  BinaryImage out(esm.width(), esm.height());
  auto src = esm.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= t ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// Detector selection

enum class DetectorKind { Gravitational, GravitationalFu, Canny, Multiscale };

inline DetectorKind parse_detector_kind(std::string_view s) {
  if (s == "gravitational") return DetectorKind::Gravitational;
  if (s == "gravitational-fu") return DetectorKind::GravitationalFu;
  if (s == "canny") return DetectorKind::Canny;
  if (s == "multiscale") return DetectorKind::Multiscale;
  throw std::invalid_argument("unknown detector '" + std::string(s) +
                              "' (expected gravitational, gravitational-fu, canny or multiscale)");
}

inline std::string_view to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::Gravitational:
      return "gravitational";
    case DetectorKind::GravitationalFu:
      return "gravitational-fu";
    case DetectorKind::Canny:
      return "canny";
    case DetectorKind::Multiscale:
      return "multiscale";
  }
  return "?";
}

/// True for detectors producing a strength map that still needs binarizing.
inline bool emits_strength_map(DetectorKind kind) {
  return kind == DetectorKind::Gravitational || kind == DetectorKind::GravitationalFu;
}

struct DetectorConfig {
  DetectorKind kind = DetectorKind::GravitationalFu;
  TNorm tnorm = TNorm::Product;
  CannyConfig canny;
  MultiscaleConfig multiscale;
};

inline EdgeStrengthMap detect_strength(const GrayImage& img, const DetectorConfig& cfg) {
  if (!emits_strength_map(cfg.kind)) {
    throw std::invalid_argument(std::string(to_string(cfg.kind)) + " does not emit a strength map");
  }
  const auto hood = cfg.kind == DetectorKind::GravitationalFu ? Neighbourhood::Fu9x9
                                                               : Neighbourhood::Standard3x3;
  return gravitational_force_map(img, GravitationalConfig{cfg.tnorm, hood});
}

inline BinaryImage detect_binary(const GrayImage& img, const DetectorConfig& cfg) {
  switch (cfg.kind) {
    case DetectorKind::Canny:
      return canny(img, cfg.canny);
    case DetectorKind::Multiscale:
      return multiscale(img, cfg.multiscale);
    default:
      throw std::invalid_argument(std::string(to_string(cfg.kind)) + " needs a binarization threshold");
  }
}

// ---------------------------------------------------------------------------
// Strategies

enum class StrategyKind { DB, DAB, ADB };

struct Strategy {
  StrategyKind kind = StrategyKind::ADB;
  Channel channel = Channel::HH;  // DB only

  static Strategy db(Channel ch) { return {StrategyKind::DB, ch}; }
  static Strategy dab() { return {StrategyKind::DAB, Channel::HH}; }
  static Strategy adb() { return {StrategyKind::ADB, Channel::HH}; }

  /// "DB-HH", "DAB", "ADB"
  std::string label() const {
    switch (kind) {
      case StrategyKind::DB:
        return "DB-" + std::string(to_string(channel));
      case StrategyKind::DAB:
        return "DAB";
      case StrategyKind::ADB:
        return "ADB";
    }
    return "?";
  }
};

/// Accepts "DB-HH", "DB-HV", "DB-VV", "DAB", "ADB".
inline Strategy parse_strategy(std::string_view s) {
  if (s == "DAB") return Strategy::dab();
  if (s == "ADB") return Strategy::adb();
  if (s.size() == 5 && s.substr(0, 3) == "DB-") return Strategy::db(parse_channel(s.substr(3)));
  throw std::invalid_argument("unknown strategy '" + std::string(s) + "' (expected DB-<ch>, DAB or ADB)");
}

struct BinarizeConfig {
  double threshold = 0.10;
};

inline void check_strategy(const MultiChannelImage& mci, const Strategy& strategy,
                           const DetectorConfig& detector) {
  if (mci.empty()) throw std::invalid_argument("strategy input has no channels");
  if (strategy.kind == StrategyKind::DB && !mci.has(strategy.channel)) {
    throw std::invalid_argument("strategy " + strategy.label() + ": channel not present");
  }
  if (strategy.kind == StrategyKind::DAB && !emits_strength_map(detector.kind)) {
    throw std::invalid_argument("strategy DAB is not defined for " +
                                std::string(to_string(detector.kind)) +
                                ": its detection output is already binary");
  }
}

inline MultiChannelImage preprocess(const MultiChannelImage& mci, const FilterConfig& filter) {
  MultiChannelImage out;
  for (const auto& [ch, img] : mci) out.set(ch, filter_amplitude(img, filter));
  return out;
}

/// Gray image a strategy hands to the detector (DB and ADB).
inline GrayImage detector_input(const MultiChannelImage& prepared, const Strategy& strategy) {
  if (strategy.kind == StrategyKind::DB) return prepared.at(strategy.channel);
  std::vector<GrayImage> images;
  for (const auto& [ch, img] : prepared) images.push_back(img);
  return aggregate_mean(images);
}

/// Strength map reached before binarization (gravitational detectors).
inline EdgeStrengthMap strategy_strength(const MultiChannelImage& prepared, const Strategy& strategy,
                                         const DetectorConfig& detector) {
  if (strategy.kind != StrategyKind::DAB) return detect_strength(detector_input(prepared, strategy), detector);
  std::vector<GrayImage> maps;
  for (const auto& [ch, img] : prepared) maps.push_back(detect_strength(img, detector));
  return aggregate_mean(maps);
}

inline BinaryImage run_strategy(const MultiChannelImage& mci, const Strategy& strategy,
                                const DetectorConfig& detector, const FilterConfig& filter,
                                const BinarizeConfig& binarize) {
  check_strategy(mci, strategy, detector);
  const MultiChannelImage prepared = preprocess(mci, filter);
  if (emits_strength_map(detector.kind)) {
    return threshold(strategy_strength(prepared, strategy, detector), binarize.threshold);
  }
  return detect_binary(detector_input(prepared, strategy), detector);
}

/// Parameter -> edge map for one input, with the expensive stages done once.
/// The parameter is the threshold for gravitational detectors, sigma for
/// Canny, and ignored by the multiscale detector.
inline std::function<BinaryImage(double)> make_objective(const MultiChannelImage& mci,
                                                         const Strategy& strategy,
                                                         const DetectorConfig& detector,
                                                         const FilterConfig& filter) {
  check_strategy(mci, strategy, detector);
  MultiChannelImage prepared = preprocess(mci, filter);
  if (emits_strength_map(detector.kind)) {
    auto strength = std::make_shared<const EdgeStrengthMap>(strategy_strength(prepared, strategy, detector));
    return [strength](double t) { return threshold(*strength, t); };
  }
  auto input = std::make_shared<const GrayImage>(detector_input(prepared, strategy));
  if (detector.kind == DetectorKind::Canny) {
    return [input, detector](double sigma) {
      CannyConfig cfg = detector.canny;
      cfg.sigma = sigma;
      return canny(*input, cfg);
    };
  }
  auto edges = std::make_shared<const BinaryImage>(multiscale(*input, detector.multiscale));
  return [edges](double) { return *edges; };
}

// ---------------------------------------------------------------------------
// Sweeps

struct ParamGrid {
  double min = 0.05;
  double max = 0.15;
  double step = 0.01;

  static ParamGrid single(double value) { return {value, value, 1.0}; }

  /// min + i * step for i = 0.. while within max (1e-9 relative slack).
  std::vector<double> values() const {
    if (!(step > 0.0)) throw std::invalid_argument("sweep step must be positive");
    if (!(min <= max)) throw std::invalid_argument("sweep range has min > max");
    const auto n = static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = min + static_cast<double>(i) * step;
    return out;
  }
};

/// Threshold grid over [0.05, 0.15] in steps of 0.01.
inline ParamGrid default_threshold_grid() { return {0.05, 0.15, 0.01}; }
/// Canny sigma grid over [0.3, 1.5] in steps of 0.1.
inline ParamGrid default_sigma_grid() { return {0.3, 1.5, 0.1}; }

struct SweepResult {
  double param = 0.0;
  double score = 0.0;
};

/// First grid point of minimal score (ties go to the earlier, smaller value).
template <typename ScoreFn>
SweepResult argmin_over_grid(std::span<const double> grid, ScoreFn&& score) {
  if (grid.empty()) throw std::invalid_argument("sweep grid is empty");
  SweepResult best{grid.front(), score(grid.front())};
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double s = score(grid[i]);
    if (s < best.score) best = {grid[i], s};
  }
  return best;
}

/// Parameter on the grid whose edge map has the lowest BDM (x100) against gt.
template <typename Objective>
SweepResult sweep_best(Objective&& objective, const BinaryImage& gt, std::span<const double> grid,
                       const BdmConfig& metric = {}) {
  return argmin_over_grid(grid, [&](double param) { return bdm_score(objective(param), gt, metric); });
}

template <typename Objective>
SweepResult sweep_best(Objective&& objective, const BinaryImage& gt, const ParamGrid& grid,
                       const BdmConfig& metric = {}) {
  const auto values = grid.values();
  return sweep_best(std::forward<Objective>(objective), gt, std::span<const double>(values), metric);
}

}  // namespace saredge
