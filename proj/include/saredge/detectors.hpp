#pragma once

// Edge detectors: gravitational (3x3 and Fu 9x9 neighbourhoods), Canny, and
// the multiscale Sobel scale-space detector.

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "saredge/raster.hpp"

namespace saredge {

// ---------------------------------------------------------------------------
// T-norms

enum class TNorm { Product, Minimum, Lukasiewicz };

inline double apply_tnorm(TNorm kind, double a, double b) noexcept {
  switch (kind) {
    case TNorm::Product:
      return a * b;
    case TNorm::Minimum:
      return std::min(a, b);
    case TNorm::Lukasiewicz:
      return std::max(0.0, a + b - 1.0);
  }
  return 0.0;
}

inline TNorm parse_tnorm(std::string_view s) {
  if (s == "product") return TNorm::Product;
  if (s == "minimum" || s == "min") return TNorm::Minimum;
  if (s == "lukasiewicz") return TNorm::Lukasiewicz;
  throw std::invalid_argument("unknown tnorm '" + std::string(s) +
                              "' (expected product, minimum or lukasiewicz)");
}

inline std::string_view to_string(TNorm kind) {
  switch (kind) {
    case TNorm::Product:
      return "product";
    case TNorm::Minimum:
      return "minimum";
    case TNorm::Lukasiewicz:
      return "lukasiewicz";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// 3x3 windows

/// Row-major 3x3 cells; index (dr + 1) * 3 + (dc + 1).
using Window3 = std::array<double, 9>;

inline Window3 raw_window(const GrayImage& img, int row, int col) {
  Window3 w{};
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) w[(dr + 1) * 3 + (dc + 1)] = img.clamped(row + dr, col + dc);
  }
  return w;
}

/// Fu neighbourhood: the 9x9 patch around (row, col) split into nine 3x3
/// blocks; each cell is the mean of its block.
inline Window3 fu_window(const GrayImage& img, int row, int col) {
  Window3 w{};
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      double sum = 0.0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) sum += img.clamped(row + 3 * i + dr, col + 3 * j + dc);
      }
      w[(i + 1) * 3 + (j + 1)] = sum / 9.0;
    }
  }
  return w;
}

namespace detail {

// Means of every 3x3 block of the image padded by 4 on each side (edge
// replication). Block centred at padded (pr, pc) is stored at (pr, pc).
inline GrayImage padded_block_means(const GrayImage& img) {
  const int pad = 4;
  const int pw = img.width() + 2 * pad;
  const int ph = img.height() + 2 * pad;
  GrayImage padded(pw, ph);
  for (int r = 0; r < ph; ++r) {
    for (int c = 0; c < pw; ++c) padded(r, c) = img.clamped(r - pad, c - pad);
  }
  GrayImage means(pw, ph);
  for (int r = 1; r + 1 < ph; ++r) {
    for (int c = 1; c + 1 < pw; ++c) {
      double sum = 0.0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) sum += padded(r + dr, c + dc);
      }
      means(r, c) = sum / 9.0;
    }
  }
  return means;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Gravitational edge strength

enum class Neighbourhood { Standard3x3, Fu9x9 };

/// Largest resultant magnitude reachable with T-norm values in [0,1].
///
/// The resultant is linear in the eight T-norm values, so its norm peaks at
/// a vertex of [0,1]^8: one full side (three cells) plus the adjacent axial
/// cell, e.g. {W, NW, SW, N}, giving |(1 + 1/sqrt2, 1)| = sqrt(5/2 + sqrt2).
inline double gravitational_max_resultant() { return std::sqrt(2.5 + std::sqrt(2.0)); }

/// Normalization constant G mapping resultants into [0,1].
inline double gravitational_g() { return 1.0 / gravitational_max_resultant(); }

struct GravitationalConfig {
  TNorm tnorm = TNorm::Product;
  Neighbourhood neighbourhood = Neighbourhood::Standard3x3;
};

/// Unnormalized resultant vector (x along columns, y along rows) exerted on
/// the centre cell of a window by its eight neighbours.
template <typename TNormFn>
std::array<double, 2> gravitational_resultant(const Window3& w, TNormFn&& tnorm) {
  const double inv_diag3 = 1.0 / (2.0 * std::sqrt(2.0));  // 1/|r|^3 for |r| = sqrt2
  const double center = w[4];
  double fx = 0.0;
  double fy = 0.0;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      const double t = tnorm(center, w[(dr + 1) * 3 + (dc + 1)]);
      // t / |r|^2 * r / |r|
      const double scale = (dr != 0 && dc != 0) ? inv_diag3 : 1.0;
      fx += t * scale * dc;
      fy += t * scale * dr;
    }
  }
  return {fx, fy};
}

template <typename TNormFn>
EdgeStrengthMap gravitational_force_map(const GrayImage& img, Neighbourhood neighbourhood,
                                        TNormFn&& tnorm) {
  for (double v : img.pixels()) {
    if (!(v > 0.0) || v > 1.0) {
      throw std::invalid_argument("gravitational detector needs pixel masses in (0,1]");
    }
  }
  const double g = gravitational_g();
  EdgeStrengthMap out(img.width(), img.height());

  GrayImage blocks;
  if (neighbourhood == Neighbourhood::Fu9x9) blocks = detail::padded_block_means(img);

  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      Window3 w;
      if (neighbourhood == Neighbourhood::Fu9x9) {
        for (int i = -1; i <= 1; ++i) {
          for (int j = -1; j <= 1; ++j) w[(i + 1) * 3 + (j + 1)] = blocks(r + 4 + 3 * i, c + 4 + 3 * j);
        }
      } else {
        w = raw_window(img, r, c);
      }
      const auto [fx, fy] = gravitational_resultant(w, tnorm);
      out(r, c) = std::min(1.0, g * std::hypot(fx, fy));
    }
  }
  return out;
}

inline EdgeStrengthMap gravitational_force_map(const GrayImage& img, const GravitationalConfig& cfg) {
  const TNorm kind = cfg.tnorm;
  return gravitational_force_map(img, cfg.neighbourhood,
                                 [kind](double a, double b) { return apply_tnorm(kind, a, b); });
}

// ---------------------------------------------------------------------------
// Gradient machinery shared by Canny and the multiscale detector

/// Normalized Gaussian taps with radius ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

inline GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const auto k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  GrayImage tmp(img.width(), img.height());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[static_cast<std::size_t>(i + radius)] * img.clamped(r, c + i);
      tmp(r, c) = acc;
    }
  }
  GrayImage out(img.width(), img.height());
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[static_cast<std::size_t>(i + radius)] * tmp.clamped(r + i, c);
      out(r, c) = acc;
    }
  }
  return out;
}

struct Gradient {
  GrayImage gx;  // d/dcol
  GrayImage gy;  // d/drow
  GrayImage magnitude;
};

inline Gradient sobel(const GrayImage& img) {
  Gradient g{GrayImage(img.width(), img.height()), GrayImage(img.width(), img.height()),
             GrayImage(img.width(), img.height())};
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      auto p = [&](int dr, int dc) { return img.clamped(r + dr, c + dc); };
      const double gx = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
      const double gy = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
      g.gx(r, c) = gx;
      g.gy(r, c) = gy;
      g.magnitude(r, c) = std::hypot(gx, gy);
    }
  }
  return g;
}

/// Four-direction non-maximum suppression. A pixel survives when its
/// magnitude is strictly greater than the neighbour behind it along the
/// gradient and at least the one ahead, so plateaus of two keep one pixel.
inline GrayImage non_maximum_suppression(const Gradient& g) {
  const GrayImage& mag = g.magnitude;
  GrayImage out(mag.width(), mag.height(), 0.0);
  constexpr double kPi = 3.14159265358979323846;
  for (int r = 0; r < mag.height(); ++r) {
    for (int c = 0; c < mag.width(); ++c) {
      const double m = mag(r, c);
      if (m <= 0.0) continue;
      double angle = std::atan2(g.gy(r, c), g.gx(r, c)) * 180.0 / kPi;
      if (angle < 0.0) angle += 180.0;
      int dr = 0;
      int dc = 0;
      if (angle < 22.5 || angle >= 157.5) {
        dc = 1;
      } else if (angle < 67.5) {
        dr = 1;
        dc = 1;
      } else if (angle < 112.5) {
        dr = 1;
      } else {
        dr = 1;
        dc = -1;
      }
      const double behind = mag.contains(r - dr, c - dc) ? mag(r - dr, c - dc) : 0.0;
      const double ahead = mag.contains(r + dr, c + dc) ? mag(r + dr, c + dc) : 0.0;
      if (m > behind && m >= ahead) out(r, c) = m;
    }
  }
  return out;
}

/// Nearest-rank percentile of the strictly positive values; 0 when none.
inline double positive_percentile(const GrayImage& values, double percentile) {
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values.pixels()) {
    if (x > 0.0) v.push_back(x);
  }
  if (v.empty()) return 0.0;
  const double rank = std::ceil(percentile / 100.0 * static_cast<double>(v.size()));
  const std::size_t idx = static_cast<std::size_t>(
      std::clamp(rank - 1.0, 0.0, static_cast<double>(v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(idx), v.end());
  return v[idx];
}

// ---------------------------------------------------------------------------
// Canny

struct CannyConfig {
  double sigma = 1.0;
  double high_percentile = 90.0;
  double low_ratio = 0.4;
};

inline BinaryImage canny(const GrayImage& img, const CannyConfig& cfg) {
  if (!(cfg.sigma > 0.0)) throw std::invalid_argument("Canny sigma must be positive");
  if (!(cfg.high_percentile > 0.0 && cfg.high_percentile < 100.0)) {
    throw std::invalid_argument("Canny high_percentile must lie in (0,100)");
  }
  if (!(cfg.low_ratio > 0.0 && cfg.low_ratio < 1.0)) {
    throw std::invalid_argument("Canny low_ratio must lie in (0,1)");
  }
  const Gradient g = sobel(gaussian_blur(img, cfg.sigma));
  const GrayImage thin = non_maximum_suppression(g);

  BinaryImage out(img.width(), img.height(), 0);
  const double high = positive_percentile(g.magnitude, cfg.high_percentile);
  if (high <= 0.0) return out;
  const double low = cfg.low_ratio * high;

  std::deque<std::pair<int, int>> frontier;
  for (int r = 0; r < img.height(); ++r) {
    for (int c = 0; c < img.width(); ++c) {
      if (thin(r, c) > 0.0 && thin(r, c) >= high) {
        out(r, c) = 1;
        frontier.emplace_back(r, c);
      }
    }
  }
  while (!frontier.empty()) {
    const auto [r, c] = frontier.front();
    frontier.pop_front();
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        const int nr = r + dr;
        const int nc = c + dc;
        if (!out.contains(nr, nc) || out(nr, nc)) continue;
        if (thin(nr, nc) > 0.0 && thin(nr, nc) >= low) {
          out(nr, nc) = 1;
          frontier.emplace_back(nr, nc);
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multiscale Sobel with coarse-to-fine tracking

struct MultiscaleConfig {
  std::vector<double> scales = {0.50, 0.75, 1.00, 1.25, 1.50, 1.75, 2.00, 2.25,
                                2.50, 2.75, 3.00, 3.25, 3.50, 3.75, 4.00};
  double delta_sigma = 0.25;
  double percentile = 90.0;
  /// Negative selects ceil(2 * delta_sigma / 0.25).
  double tracking_radius = -1.0;

  double effective_radius() const {
    return tracking_radius >= 0.0 ? tracking_radius : std::ceil(2.0 * delta_sigma / 0.25);
  }

  void validate() const {
    if (scales.empty()) throw std::invalid_argument("multiscale: empty scale list");
    for (std::size_t i = 0; i < scales.size(); ++i) {
      if (!(scales[i] > 0.0)) throw std::invalid_argument("multiscale: scales must be positive");
      if (i > 0 && !(scales[i] > scales[i - 1])) {
        throw std::invalid_argument("multiscale: scales must be strictly increasing");
      }
    }
    if (!(delta_sigma > 0.0)) throw std::invalid_argument("multiscale: delta_sigma must be positive");
    if (!(percentile > 0.0 && percentile < 100.0)) {
      throw std::invalid_argument("multiscale: percentile must lie in (0,100)");
    }
  }
};

/// Thinned Sobel edges at one scale, binarized at the configured percentile
/// of the nonzero gradient magnitudes.
inline BinaryImage multiscale_level(const GrayImage& img, double sigma, double percentile) {
  const Gradient g = sobel(gaussian_blur(img, sigma));
  const GrayImage thin = non_maximum_suppression(g);
  const double cut = positive_percentile(g.magnitude, percentile);
  BinaryImage out(img.width(), img.height(), 0);
  if (cut <= 0.0) return out;
  auto src = thin.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] > 0.0 && src[i] >= cut) ? 1 : 0;
  return out;
}

/// Keeps the pixels of `fine` lying within `radius` (Euclidean) of a pixel
/// of `coarse`.
inline BinaryImage track_edges(const BinaryImage& fine, const BinaryImage& coarse, double radius) {
  const int reach = static_cast<int>(std::floor(radius));
  const double r2 = radius * radius;
  BinaryImage out(fine.width(), fine.height(), 0);
  for (int r = 0; r < fine.height(); ++r) {
    for (int c = 0; c < fine.width(); ++c) {
      if (!fine(r, c)) continue;
      bool linked = false;
      for (int dr = -reach; dr <= reach && !linked; ++dr) {
        for (int dc = -reach; dc <= reach && !linked; ++dc) {
          if (dr * dr + dc * dc > r2) continue;
          linked = coarse.contains(r + dr, c + dc) && coarse(r + dr, c + dc);
        }
      }
      out(r, c) = linked ? 1 : 0;
    }
  }
  return out;
}

inline BinaryImage multiscale(const GrayImage& img, const MultiscaleConfig& cfg) {
  cfg.validate();
  const double radius = cfg.effective_radius();
  BinaryImage surviving = multiscale_level(img, cfg.scales.back(), cfg.percentile);
  for (std::size_t i = cfg.scales.size() - 1; i-- > 0;) {
    surviving = track_edges(multiscale_level(img, cfg.scales[i], cfg.percentile), surviving, radius);
  }
  return surviving;
}

}  // namespace saredge
