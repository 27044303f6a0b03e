#pragma once

// Phantom mosaics and Monte-Carlo multi-look amplitude simulation.
//
// Each channel is modeled independently: the intensity of a pixel of class c
// is Gamma distributed with shape L and mean mu(c, channel), and the gray
// value is the amplitude sqrt(I) divided by a fixed saturation level.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "saredge/raster.hpp"

namespace saredge {

enum class PhantomKind { Strips, Checkerboard, NestedSquares };

inline PhantomKind parse_phantom_kind(std::string_view s) {
  if (s == "strips") return PhantomKind::Strips;
  if (s == "checkerboard") return PhantomKind::Checkerboard;
  if (s == "nested-squares") return PhantomKind::NestedSquares;
  throw std::invalid_argument("unknown labelmap kind '" + std::string(s) +
                              "' (expected strips, checkerboard or nested-squares)");
}

inline std::string_view to_string(PhantomKind kind) {
  switch (kind) {
    case PhantomKind::Strips:
      return "strips";
    case PhantomKind::Checkerboard:
      return "checkerboard";
    case PhantomKind::NestedSquares:
      return "nested-squares";
  }
  return "?";
}

/// Deterministic class layouts on a size x size grid.
///
///  - strips: horizontal bands, class = floor(row * n / size)
///  - checkerboard: tiles of side max(1, size / 8), class = (tile_row + tile_col) mod n
///  - nested-squares: concentric rings by distance to the border, n rings
inline LabelMap generate_phantom(PhantomKind kind, int size, int n_classes) {
  if (size < 16) throw std::invalid_argument("phantom size must be at least 16");
  if (n_classes < 2 || n_classes > 8) throw std::invalid_argument("phantom needs 2..8 classes");

  LabelMap map(size, size);
  const int tile = std::max(1, size / 8);
  const int half = (size + 1) / 2;
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      int label = 0;
      switch (kind) {
        case PhantomKind::Strips:
          label = r * n_classes / size;
          break;
        case PhantomKind::Checkerboard:
          label = (r / tile + c / tile) % n_classes;
          break;
        case PhantomKind::NestedSquares: {
          const int depth = std::min({r, c, size - 1 - r, size - 1 - c});
          label = std::min(n_classes - 1, depth * n_classes / half);
          break;
        }
      }
      map(r, c) = label;
    }
  }
  return map;
}

struct ClassModel {
  int class_id = 0;
  std::map<Channel, double> mean_intensity;  // linear intensity, > 0
  double looks = 4.0;
};

struct SimulationSpec {
  LabelMap labelmap;
  std::vector<ClassModel> classes;
  std::vector<Channel> channels;
  int count = 1;
  std::uint64_t master_seed = 0;
  double saturation = 1.0;  // amplitude mapped to gray 1.0

  const ClassModel& model(int class_id) const {
    for (const auto& m : classes) {
      if (m.class_id == class_id) return m;
    }
    throw std::invalid_argument("labelmap references class " + std::to_string(class_id) +
                                " with no class model");
  }

  void validate() const {
    if (labelmap.empty()) throw std::invalid_argument("simulation has no labelmap");
    if (count < 1) throw std::invalid_argument("simulation count must be at least 1");
    if (!(saturation > 0.0)) throw std::invalid_argument("saturation must be positive");
    if (channels.empty()) throw std::invalid_argument("simulation needs at least one channel");
    for (const auto& m : classes) {
      if (!(m.looks > 0.0)) {
        throw std::invalid_argument("class " + std::to_string(m.class_id) + ": looks must be positive");
      }
      for (Channel ch : channels) {
        auto it = m.mean_intensity.find(ch);
        if (it == m.mean_intensity.end()) {
          throw std::invalid_argument("class " + std::to_string(m.class_id) + ": missing mean for " +
                                      std::string(to_string(ch)));
        }
        if (!(it->second > 0.0)) {
          throw std::invalid_argument("class " + std::to_string(m.class_id) +
                                      ": mean intensity must be positive");
        }
      }
    }
    for (int label : labelmap.pixels()) (void)model(label);
  }
};

namespace detail {

inline double max_mean_intensity(const std::vector<ClassModel>& classes) {
  double max_mean = 0.0;
  for (const auto& m : classes) {
    for (const auto& [ch, mu] : m.mean_intensity) max_mean = std::max(max_mean, mu);
  }
  if (max_mean <= 0.0) throw std::invalid_argument("cannot derive saturation without class means");
  return max_mean;
}

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Default gray mapping: the mean amplitude of the brightest class maps to
/// about 0.89, so product T-norm strengths land in the usual [0.05, 0.15]
/// threshold band.
inline double default_saturation(const std::vector<ClassModel>& classes) {
  return std::sqrt(detail::max_mean_intensity(classes));
}

/// Conservative mapping mu_a + 3 mu_a / sqrt(L), with mu_a the square root
/// of the largest mean intensity and L the smallest look count. Keeps almost
/// all of the speckle tail below saturation.
inline double wide_saturation(const std::vector<ClassModel>& classes) {
  double min_looks = 0.0;
  for (const auto& m : classes) min_looks = (min_looks == 0.0) ? m.looks : std::min(min_looks, m.looks);
  if (min_looks <= 0.0) throw std::invalid_argument("cannot derive saturation without look counts");
  const double amplitude = std::sqrt(detail::max_mean_intensity(classes));
  return amplitude + 3.0 * amplitude / std::sqrt(min_looks);
}

/// Per-(sim_index, channel) generator seed. Each tuple element is folded in
/// with a golden-ratio increment followed by the splitmix64 finalizer.
inline std::uint64_t derive_seed(std::uint64_t master_seed, int sim_index, Channel channel) {
  constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t h = detail::mix64(master_seed + kGolden);
  h = detail::mix64(h ^ (static_cast<std::uint64_t>(sim_index) + 2 * kGolden));
  h = detail::mix64(h ^ (static_cast<std::uint64_t>(channel) + 3 * kGolden));
  return h;
}

/// Linear intensity realization for one channel of one simulation.
inline GrayImage simulate_intensity(const SimulationSpec& spec, Channel channel, int sim_index) {
  if (std::find(spec.channels.begin(), spec.channels.end(), channel) == spec.channels.end()) {
    throw std::invalid_argument("channel " + std::string(to_string(channel)) + " not in simulation");
  }
  if (sim_index < 0 || sim_index >= spec.count) throw std::out_of_range("sim_index out of range");

  std::map<int, std::gamma_distribution<double>> laws;
  for (int label : spec.labelmap.pixels()) {
    if (laws.count(label)) continue;
    const ClassModel& m = spec.model(label);
    auto it = m.mean_intensity.find(channel);
    if (it == m.mean_intensity.end()) {
      throw std::invalid_argument("class " + std::to_string(label) + " has no mean for channel " +
                                  std::string(to_string(channel)));
    }
    laws.emplace(label, std::gamma_distribution<double>(m.looks, it->second / m.looks));
  }

  std::mt19937_64 rng(derive_seed(spec.master_seed, sim_index, channel));
  const LabelMap& labels = spec.labelmap;
  GrayImage out(labels.width(), labels.height());
  auto src = labels.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = laws.at(src[i])(rng);
  return out;
}

/// Gray amplitude image min(sqrt(I) / saturation, 1).
inline GrayImage simulate_channel(const SimulationSpec& spec, Channel channel, int sim_index) {
  GrayImage img = simulate_intensity(spec, channel, sim_index);
  for (double& v : img.pixels()) v = std::min(std::sqrt(v) / spec.saturation, 1.0);
  return img;
}

/// Thin one-sided boundary: a pixel is an edge when its right or lower
/// neighbour carries a different label.
inline BinaryImage ground_truth_edges(const LabelMap& labels) {
  BinaryImage out(labels.width(), labels.height());
  for (int r = 0; r < labels.height(); ++r) {
    for (int c = 0; c < labels.width(); ++c) {
      const int here = labels(r, c);
      const bool right = c + 1 < labels.width() && labels(r, c + 1) != here;
      const bool down = r + 1 < labels.height() && labels(r + 1, c) != here;
      out(r, c) = (right || down) ? 1 : 0;
    }
  }
  return out;
}

/// Labelmap as a PGM-ready byte image (class id as gray value).
inline ByteImage labelmap_bytes(const LabelMap& labels) {
  ByteImage out(labels.width(), labels.height());
  auto src = labels.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (src[i] < 0 || src[i] > 255) throw std::invalid_argument("class id does not fit in a byte");
    dst[i] = static_cast<std::uint8_t>(src[i]);
  }
  return out;
}

inline LabelMap labelmap_from_bytes(const ByteImage& img) {
  LabelMap out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i];
  return out;
}

}  // namespace saredge
