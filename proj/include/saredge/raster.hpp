#pragma once

/// Core raster types for the saredge toolkit.
///
/// All images are row-major value types. Gray images carry doubles in [0,1];
/// 8-bit data only appears at file boundaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace saredge {

struct GrayTag;
struct ByteTag;
struct BinaryTag;
struct LabelTag;

/// Row-major raster. The tag keeps rasters that share a storage type
/// (bytes vs. binary masks) from converting into each other silently.
template <typename T, typename Tag>
class Raster {
 public:
  using value_type = T;

  Raster() = default;

  Raster(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
      throw std::invalid_argument("raster dimensions must be positive");
    }
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  Raster(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width <= 0 || height <= 0) {
      throw std::invalid_argument("raster dimensions must be positive");
    }
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw std::invalid_argument("raster data length does not match width x height");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int row, int col) { return data_[index(row, col)]; }
  const T& operator()(int row, int col) const { return data_[index(row, col)]; }

  /// Border access by edge replication.
  const T& clamped(int row, int col) const {
    row = std::clamp(row, 0, height_ - 1);
    col = std::clamp(col, 0, width_ - 1);
    return data_[index(row, col)];
  }

  bool contains(int row, int col) const noexcept {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }

  const std::vector<T>& data() const noexcept { return data_; }

  template <typename U, typename OtherTag>
  bool same_shape(const Raster<U, OtherTag>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Raster& a, const Raster& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using ByteImage = Raster<std::uint8_t, ByteTag>;
using GrayImage = Raster<double, GrayTag>;
/// Edge maps and ground truth. Stored as 0/1 bytes; nonzero is foreground.
using BinaryImage = Raster<std::uint8_t, BinaryTag>;
using LabelMap = Raster<int, LabelTag>;

/// Normalized gravitational or gradient magnitudes, values in [0,1].
using EdgeStrengthMap = GrayImage;

template <typename T, typename Tag>
std::size_t count_nonzero(const Raster<T, Tag>& img) {
  return static_cast<std::size_t>(
      std::count_if(img.pixels().begin(), img.pixels().end(), [](T v) { return v != T{}; }));
}

/// Gray-level normalization q' = (q + 1) / 256. Output is strictly positive.
inline GrayImage normalize(const ByteImage& img) {
  GrayImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = (static_cast<double>(src[i]) + 1.0) / 256.0;
  }
  return out;
}

namespace detail {

inline std::uint8_t to_byte(double v) {
  // std::lround rounds half away from zero.
  const long q = std::lround(v);
  return static_cast<std::uint8_t>(std::clamp(q, 0L, 255L));
}

}  // namespace detail

/// Maps [0,1] onto {0..255} by round(255 v), clamped.
inline ByteImage quantize(const GrayImage& img) {
  ByteImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = detail::to_byte(src[i] * 255.0);
  }
  return out;
}

/// Exact inverse of normalize: round(256 v - 1), clamped.
inline ByteImage denormalize(const GrayImage& img) {
  ByteImage out(img.width(), img.height());
  auto src = img.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = detail::to_byte(src[i] * 256.0 - 1.0);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Polarization channels

enum class Channel { HH, HV, VV };

inline constexpr Channel kAllChannels[] = {Channel::HH, Channel::HV, Channel::VV};

inline std::string_view to_string(Channel ch) {
  switch (ch) {
    case Channel::HH:
      return "HH";
    case Channel::HV:
      return "HV";
    case Channel::VV:
      return "VV";
  }
  return "?";
}

inline Channel parse_channel(std::string_view s) {
  if (s == "HH") return Channel::HH;
  if (s == "HV") return Channel::HV;
  if (s == "VV") return Channel::VV;
  throw std::invalid_argument("unknown channel '" + std::string(s) + "' (expected HH, HV or VV)");
}

/// One gray image per polarization channel, all of the same shape.
class MultiChannelImage {
 public:
  MultiChannelImage() = default;

  void set(Channel ch, GrayImage img) {
    if (!channels_.empty() && !channels_.begin()->second.same_shape(img)) {
      throw std::invalid_argument("channel " + std::string(to_string(ch)) +
                                  " does not match the shape of existing channels");
    }
    channels_.insert_or_assign(ch, std::move(img));
  }

  bool has(Channel ch) const { return channels_.count(ch) != 0; }

  const GrayImage& at(Channel ch) const {
    auto it = channels_.find(ch);
    if (it == channels_.end()) {
      throw std::out_of_range("channel " + std::string(to_string(ch)) + " not present");
    }
    return it->second;
  }

  std::size_t size() const { return channels_.size(); }
  bool empty() const { return channels_.empty(); }

  int width() const { return channels_.empty() ? 0 : channels_.begin()->second.width(); }
  int height() const { return channels_.empty() ? 0 : channels_.begin()->second.height(); }

  /// Channels in HH, HV, VV order.
  std::vector<Channel> channels() const {
    std::vector<Channel> out;
    for (const auto& [ch, img] : channels_) out.push_back(ch);
    return out;
  }

  auto begin() const { return channels_.begin(); }
  auto end() const { return channels_.end(); }

 private:
  std::map<Channel, GrayImage> channels_;
};

}  // namespace saredge
