#pragma once

// Speckle-reduction filters. All windows are k x k (k odd) with edge
// replication at the borders.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "saredge/raster.hpp"

namespace saredge {

namespace detail {

inline void check_window(const GrayImage& img, int k) {
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("window size must be odd");
  if (k > std::min(img.width(), img.height())) {
    throw std::invalid_argument("window size exceeds image dimensions");
  }
}

// Calls fn(values) for the k x k window of every pixel, writing the result.
template <typename Fn>
GrayImage map_windows(const GrayImage& img, int k, Fn&& fn) {
  const int h = k / 2;
  GrayImage out(img.width(), img.height());
  std::vector<double> window(static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      std::size_t i = 0;
      for (int dr = -h; dr <= h; ++dr) {
        for (int dc = -h; dc <= h; ++dc) window[i++] = img.clamped(r + dr, c + dc);
      }
      out(r, c) = fn(window, img(r, c));
    }
  }
  return out;
}

// Mean accumulated as offsets from the centre value, so flat windows
// return the centre value exactly.
inline double window_mean(const std::vector<double>& w, double center) {
  double offset = 0.0;
  for (double v : w) offset += v - center;
  return center + offset / static_cast<double>(w.size());
}

}  // namespace detail

inline GrayImage boxcar(const GrayImage& img, int k) {
  detail::check_window(img, k);
  return detail::map_windows(img, k, [](const std::vector<double>& w, double center) {
    return detail::window_mean(w, center);
  });
}

inline GrayImage median_filter(const GrayImage& img, int k) {
  detail::check_window(img, k);
  return detail::map_windows(img, k, [](std::vector<double>& w, double) {
    auto mid = w.begin() + static_cast<std::ptrdiff_t>((w.size() - 1) / 2);
    std::nth_element(w.begin(), mid, w.end());
    return *mid;
  });
}

struct LeeParams {
  double looks = 4.0;
  int window = 5;
  double damping = 1.0;
};

/// Enhanced Lee filter (Lopes et al. 1990) on intensity data.
///
/// With local mean m and standard deviation s, Ci = s / m is compared with
/// Cu = 1/sqrt(L) and Cmax = sqrt(1 + 2/L):
///   Ci <= Cu         -> m
///   Cu < Ci < Cmax   -> W m + (1 - W) center,  W = exp(-K (Ci - Cu) / (Cmax - Ci))
///   Ci >= Cmax       -> center
inline GrayImage enhanced_lee(const GrayImage& img, const LeeParams& params) {
  if (!(params.looks > 0.0)) throw std::invalid_argument("Enhanced Lee: looks must be positive");
  if (!(params.damping > 0.0)) throw std::invalid_argument("Enhanced Lee: damping must be positive");
  detail::check_window(img, params.window);

  const double cu = 1.0 / std::sqrt(params.looks);
  const double cmax = std::sqrt(1.0 + 2.0 / params.looks);
  const double damping = params.damping;
  return detail::map_windows(img, params.window, [=](const std::vector<double>& w, double center) {
    const double n = static_cast<double>(w.size());
    const double mean = detail::window_mean(w, center);
    double var = 0.0;
    for (double v : w) var += (v - mean) * (v - mean);
    var /= n;
    const double ci = mean > 0.0 ? std::sqrt(var) / mean : 0.0;
    if (ci <= cu) return mean;
    if (ci >= cmax) return center;
    const double weight = std::exp(-damping * (ci - cu) / (cmax - ci));
    return weight * mean + (1.0 - weight) * center;
  });
}

enum class FilterKind { None, Boxcar, Median, EnhancedLee };

inline FilterKind parse_filter_kind(std::string_view s) {
  if (s == "none") return FilterKind::None;
  if (s == "boxcar") return FilterKind::Boxcar;
  if (s == "median") return FilterKind::Median;
  if (s == "enhanced-lee") return FilterKind::EnhancedLee;
  throw std::invalid_argument("unknown filter '" + std::string(s) +
                              "' (expected none, boxcar, median or enhanced-lee)");
}

inline std::string_view to_string(FilterKind kind) {
  switch (kind) {
    case FilterKind::None:
      return "none";
    case FilterKind::Boxcar:
      return "boxcar";
    case FilterKind::Median:
      return "median";
    case FilterKind::EnhancedLee:
      return "enhanced-lee";
  }
  return "?";
}

struct FilterConfig {
  FilterKind kind = FilterKind::None;
  int window = 5;
  double looks = 4.0;
  double damping = 1.0;
};

inline GrayImage apply_filter(const GrayImage& img, const FilterConfig& cfg) {
  switch (cfg.kind) {
    case FilterKind::None:
      return img;
    case FilterKind::Boxcar:
      return boxcar(img, cfg.window);
    case FilterKind::Median:
      return median_filter(img, cfg.window);
    case FilterKind::EnhancedLee:
      return enhanced_lee(img, LeeParams{cfg.looks, cfg.window, cfg.damping});
  }
  return img;
}

/// Filters an amplitude image in the intensity domain: square, filter, sqrt.
inline GrayImage filter_amplitude(const GrayImage& amplitude, const FilterConfig& cfg) {
  if (cfg.kind == FilterKind::None) return amplitude;
  GrayImage intensity = amplitude;
  for (double& v : intensity.pixels()) v = v * v;
  GrayImage filtered = apply_filter(intensity, cfg);
  for (double& v : filtered.pixels()) v = std::sqrt(std::max(v, 0.0));
  return filtered;
}

}  // namespace saredge
