#pragma once

// Baddeley's Delta Metric on binary edge maps, backed by an exact Euclidean
// distance transform (Felzenszwalb & Huttenlocher lower-envelope passes).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "saredge/raster.hpp"

namespace saredge {

struct DistanceTag;
using SquaredDistanceImage = Raster<std::int64_t, DistanceTag>;

/// Squared distances to the nearest foreground site. Sites of an image
/// without foreground hold kNoForeground.
struct DistanceMap {
  static constexpr std::int64_t kNoForeground = std::numeric_limits<std::int64_t>::max();

  SquaredDistanceImage squared;
  bool has_foreground = false;

  double distance(int row, int col) const {
    const std::int64_t s = squared(row, col);
    return s == kNoForeground ? std::numeric_limits<double>::infinity()
                              : std::sqrt(static_cast<double>(s));
  }
};

namespace detail {

// 1-D squared distance transform of samples f (kNoForeground = +inf).
inline void edt_1d(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& out,
                   std::vector<int>& hull, std::vector<double>& bounds) {
  const int n = static_cast<int>(f.size());
  hull.clear();
  bounds.clear();
  for (int q = 0; q < n; ++q) {
    if (f[static_cast<std::size_t>(q)] == DistanceMap::kNoForeground) continue;
    const double fq = static_cast<double>(f[static_cast<std::size_t>(q)]) + double(q) * q;
    auto intersection = [&](int v) {
      const double fv = static_cast<double>(f[static_cast<std::size_t>(v)]) + double(v) * v;
      return (fq - fv) / (2.0 * (q - v));
    };
    while (!hull.empty() && intersection(hull.back()) <= bounds.back()) {
      hull.pop_back();
      bounds.pop_back();
    }
    bounds.push_back(hull.empty() ? -std::numeric_limits<double>::infinity()
                                  : intersection(hull.back()));
    hull.push_back(q);
  }
  out.assign(static_cast<std::size_t>(n), DistanceMap::kNoForeground);
  if (hull.empty()) return;
  std::size_t k = 0;
  for (int q = 0; q < n; ++q) {
    while (k + 1 < hull.size() && bounds[k + 1] < q) ++k;
    const std::int64_t d = q - hull[k];
    out[static_cast<std::size_t>(q)] = d * d + f[static_cast<std::size_t>(hull[k])];
  }
}

}  // namespace detail

/// Exact Euclidean distance transform (squared distances are integers).
inline DistanceMap distance_transform(const BinaryImage& b) {
  const int w = b.width();
  const int h = b.height();
  DistanceMap map{SquaredDistanceImage(w, h, DistanceMap::kNoForeground), false};
  for (auto v : b.pixels()) {
    if (v) {
      map.has_foreground = true;
      break;
    }
  }
  if (!map.has_foreground) return map;

  std::vector<std::int64_t> f;
  std::vector<std::int64_t> d;
  std::vector<int> hull;
  std::vector<double> bounds;

  f.resize(static_cast<std::size_t>(h));
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) f[static_cast<std::size_t>(r)] = b(r, c) ? 0 : DistanceMap::kNoForeground;
    detail::edt_1d(f, d, hull, bounds);
    for (int r = 0; r < h; ++r) map.squared(r, c) = d[static_cast<std::size_t>(r)];
  }
  f.resize(static_cast<std::size_t>(w));
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) f[static_cast<std::size_t>(c)] = map.squared(r, c);
    detail::edt_1d(f, d, hull, bounds);
    for (int c = 0; c < w; ++c) map.squared(r, c) = d[static_cast<std::size_t>(c)];
  }
  return map;
}

struct BdmConfig {
  double p = 2.0;       // >= 1; +inf selects the sup norm
  int frame_width = 4;  // sites excluded at each border
};

/// Central sub-image left after discarding `frame` pixels at each border.
inline BinaryImage crop_frame(const BinaryImage& img, int frame) {
  const int w = img.width() - 2 * frame;
  const int h = img.height() - 2 * frame;
  if (frame < 0 || w <= 0 || h <= 0) throw std::invalid_argument("BDM: frame leaves no sites");
  BinaryImage out(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) out(r, c) = img(r + frame, c + frame);
  }
  return out;
}

/// Baddeley's Delta with w(t) = t, in [0,1].
///
/// The site set is the frame interior; both images are restricted to it.
/// Distances are divided by the diagonal of the site set, and an image with
/// no foreground is taken to be one diagonal away from every site.
inline double baddeley_delta(const BinaryImage& x, const BinaryImage& y, const BdmConfig& cfg = {}) {
  if (!x.same_shape(y)) throw std::invalid_argument("BDM: image dimensions differ");
  if (!(cfg.p >= 1.0)) throw std::invalid_argument("BDM: p must be at least 1");
  const BinaryImage xs = crop_frame(x, cfg.frame_width);
  const BinaryImage ys = crop_frame(y, cfg.frame_width);
  const double diag = std::hypot(xs.width() - 1, xs.height() - 1);
  if (diag == 0.0) return 0.0;

  const DistanceMap dx = distance_transform(xs);
  const DistanceMap dy = distance_transform(ys);
  auto site_distance = [diag](const DistanceMap& m, int r, int c) {
    return m.has_foreground ? m.distance(r, c) / diag : 1.0;
  };

  const bool sup = std::isinf(cfg.p);
  double acc = 0.0;
  for (int r = 0; r < xs.height(); ++r) {
    for (int c = 0; c < xs.width(); ++c) {
      const double diff = std::abs(site_distance(dx, r, c) - site_distance(dy, r, c));
      if (sup) {
        acc = std::max(acc, diff);
      } else {
        acc += std::pow(diff, cfg.p);
      }
    }
  }
  if (sup) return acc;
  return std::pow(acc / static_cast<double>(xs.size()), 1.0 / cfg.p);
}

/// BDM on the [0,100] reporting scale.
inline double bdm_score(const BinaryImage& detected, const BinaryImage& truth, const BdmConfig& cfg = {}) {
  return 100.0 * baddeley_delta(detected, truth, cfg);
}

}  // namespace saredge
