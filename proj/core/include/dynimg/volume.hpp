#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dynimg {

/// A dense 2D plane of 32-bit intensities, row-major with x fastest.
class Plane2D {
 public:
  Plane2D() = default;
  /// Zero-filled plane.
  Plane2D(std::size_t width, std::size_t height);
  /// Throws DimensionMismatch if values.size() != width * height and
  /// NonFiniteValue on NaN/Inf.
  Plane2D(std::size_t width, std::size_t height, std::vector<float> values);

  static Plane2D filled(std::size_t width, std::size_t height, float value);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const float> values() const noexcept { return values_; }
  float at(std::size_t x, std::size_t y) const { return values_[y * width_ + x]; }
  float operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const Plane2D&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<float> values_;
};

/// Physical voxel size in millimetres.
struct Spacing {
  double x = 1.0;
  double y = 1.0;
  double z = 1.0;

  bool operator==(const Spacing&) const = default;
};

/// A stack of equally sized planes. Depth is the pooling axis; storage is
/// slice-major so each slice is one contiguous run of width * height voxels.
class Volume3D {
 public:
  Volume3D() = default;
  Volume3D(std::size_t width, std::size_t height, std::size_t depth, std::vector<float> voxels,
           std::optional<Spacing> spacing = std::nullopt);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t depth() const noexcept { return depth_; }
  std::size_t plane_size() const noexcept { return width_ * height_; }
  std::size_t voxel_count() const noexcept { return voxels_.size(); }

  std::span<const float> voxels() const noexcept { return voxels_; }
  const std::optional<Spacing>& spacing() const noexcept { return spacing_; }

  /// Slice t, 1-based. Throws IndexOutOfRange outside [1, depth].
  std::span<const float> slice(std::size_t t) const;

  float at(std::size_t x, std::size_t y, std::size_t z) const {
    return voxels_[(z * height_ + y) * width_ + x];
  }

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t depth_ = 0;
  std::vector<float> voxels_;
  std::optional<Spacing> spacing_;
};

enum class PoolMethod { ApproxRankPool, ExactRankPool, AvgPool, MaxPool };
enum class Normalization { None, MinMax01 };
enum class ChannelMode { Single, Replicate3, Segment3 };

std::string_view to_string(PoolMethod m) noexcept;
std::string_view to_string(Normalization n) noexcept;
std::string_view to_string(ChannelMode c) noexcept;

/// A pooled plane plus how it was produced.
struct DynamicImage {
  Plane2D plane;
  PoolMethod method = PoolMethod::ApproxRankPool;
  std::size_t depth_used = 0;
  Normalization normalization = Normalization::None;
  ChannelMode channel_mode = ChannelMode::Single;
  std::optional<std::string> warning;
};

/// Three-channel image, interleaved (x, y, channel) with channel fastest.
class MultiChannelImage {
 public:
  static constexpr std::size_t kChannels = 3;

  MultiChannelImage() = default;
  MultiChannelImage(std::size_t width, std::size_t height, std::vector<float> values);
  static MultiChannelImage from_planes(const Plane2D& c0, const Plane2D& c1, const Plane2D& c2);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t channels() const noexcept { return kChannels; }
  std::span<const float> values() const noexcept { return values_; }
  float at(std::size_t x, std::size_t y, std::size_t c) const {
    return values_[(y * width_ + x) * kChannels + c];
  }
  Plane2D channel(std::size_t c) const;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<float> values_;
};

/// Stacks planes into a volume; slice k of the result is slices[k] bit-exactly.
Volume3D volume_from_slices(std::span<const Plane2D> slices,
                            std::optional<Spacing> spacing = std::nullopt);

/// Copy of slice t (1-based).
Plane2D slice_view(const Volume3D& v, std::size_t t);

/// Slices first..last (1-based, inclusive) as a new volume.
Volume3D sub_volume(const Volume3D& v, std::size_t first, std::size_t last);

}  // namespace dynimg
