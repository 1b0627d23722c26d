#include "dynimg/volume.hpp"

#include <algorithm>
#include <cmath>

#include "dynimg/error.hpp"

namespace dynimg {

namespace {

void require_finite(std::span<const float> values, const char* what) {
  const auto bad = std::find_if(values.begin(), values.end(),
                                [](float v) { return !std::isfinite(v); });
  if (bad != values.end()) {
    throw Error(ErrorCode::NonFiniteValue,
                std::string(what) + " has a non-finite value at index " +
                    std::to_string(bad - values.begin()));
  }
}

}  // namespace

Plane2D::Plane2D(std::size_t width, std::size_t height)
    : width_(width), height_(height), values_(width * height, 0.0f) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::DimensionMismatch, "plane extents must be positive");
  }
}

Plane2D::Plane2D(std::size_t width, std::size_t height, std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::DimensionMismatch, "plane extents must be positive");
  }
  if (values_.size() != width * height) {
    throw Error(ErrorCode::DimensionMismatch,
                "plane expects " + std::to_string(width * height) + " values, got " +
                    std::to_string(values_.size()));
  }
  require_finite(values_, "plane");
}

Plane2D Plane2D::filled(std::size_t width, std::size_t height, float value) {
  return Plane2D(width, height, std::vector<float>(width * height, value));
}

Volume3D::Volume3D(std::size_t width, std::size_t height, std::size_t depth,
                   std::vector<float> voxels, std::optional<Spacing> spacing)
    : width_(width), height_(height), depth_(depth), voxels_(std::move(voxels)),
      spacing_(spacing) {
  if (width == 0 || height == 0 || depth == 0) {
    throw Error(ErrorCode::DimensionMismatch, "volume extents must be positive");
  }
  if (voxels_.size() != width * height * depth) {
    throw Error(ErrorCode::DimensionMismatch,
                "volume expects " + std::to_string(width * height * depth) + " voxels, got " +
                    std::to_string(voxels_.size()));
  }
  require_finite(voxels_, "volume");
}

std::span<const float> Volume3D::slice(std::size_t t) const {
  if (t < 1 || t > depth_) {
    throw Error(ErrorCode::IndexOutOfRange,
                "slice index " + std::to_string(t) + " outside [1, " + std::to_string(depth_) + "]");
  }
  return std::span<const float>(voxels_).subspan((t - 1) * plane_size(), plane_size());
}

std::string_view to_string(PoolMethod m) noexcept {
  switch (m) {
    case PoolMethod::ApproxRankPool: return "dynamic";
    case PoolMethod::ExactRankPool: return "exact";
    case PoolMethod::AvgPool: return "avg";
    case PoolMethod::MaxPool: return "max";
  }
  return "unknown";
}

std::string_view to_string(Normalization n) noexcept {
  return n == Normalization::MinMax01 ? "minmax01" : "none";
}

std::string_view to_string(ChannelMode c) noexcept {
  switch (c) {
    case ChannelMode::Single: return "single";
    case ChannelMode::Replicate3: return "replicate3";
    case ChannelMode::Segment3: return "segment3";
  }
  return "unknown";
}

MultiChannelImage::MultiChannelImage(std::size_t width, std::size_t height,
                                     std::vector<float> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width == 0 || height == 0 || values_.size() != width * height * kChannels) {
    throw Error(ErrorCode::DimensionMismatch, "three-channel image has inconsistent extents");
  }
  require_finite(values_, "image");
}

MultiChannelImage MultiChannelImage::from_planes(const Plane2D& c0, const Plane2D& c1,
                                                 const Plane2D& c2) {
  if (c0.width() != c1.width() || c0.width() != c2.width() || c0.height() != c1.height() ||
      c0.height() != c2.height()) {
    throw Error(ErrorCode::DimensionMismatch, "channel planes differ in size");
  }
  std::vector<float> values(c0.size() * kChannels);
  for (std::size_t i = 0; i < c0.size(); ++i) {
    values[i * kChannels + 0] = c0[i];
    values[i * kChannels + 1] = c1[i];
    values[i * kChannels + 2] = c2[i];
  }
  return MultiChannelImage(c0.width(), c0.height(), std::move(values));
}

Plane2D MultiChannelImage::channel(std::size_t c) const {
  if (c >= kChannels) {
    throw Error(ErrorCode::IndexOutOfRange, "channel index " + std::to_string(c));
  }
  std::vector<float> out(width_ * height_);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i * kChannels + c];
  return Plane2D(width_, height_, std::move(out));
}

Volume3D volume_from_slices(std::span<const Plane2D> slices, std::optional<Spacing> spacing) {
  if (slices.empty()) {
    throw Error(ErrorCode::EmptyInput, "no slices given");
  }
  const std::size_t w = slices.front().width();
  const std::size_t h = slices.front().height();
  std::vector<float> voxels;
  voxels.reserve(w * h * slices.size());
  for (std::size_t k = 0; k < slices.size(); ++k) {
    if (slices[k].width() != w || slices[k].height() != h) {
      throw Error(ErrorCode::DimensionMismatch,
                  "slice " + std::to_string(k + 1) + " is " + std::to_string(slices[k].width()) +
                      "x" + std::to_string(slices[k].height()) + ", expected " +
                      std::to_string(w) + "x" + std::to_string(h));
    }
    const auto vals = slices[k].values();
    voxels.insert(voxels.end(), vals.begin(), vals.end());
  }
  return Volume3D(w, h, slices.size(), std::move(voxels), spacing);
}

Plane2D slice_view(const Volume3D& v, std::size_t t) {
  const auto s = v.slice(t);
  return Plane2D(v.width(), v.height(), std::vector<float>(s.begin(), s.end()));
}

Volume3D sub_volume(const Volume3D& v, std::size_t first, std::size_t last) {
  if (first < 1 || last < first || last > v.depth()) {
    throw Error(ErrorCode::IndexOutOfRange, "slice range [" + std::to_string(first) + ", " +
                                                std::to_string(last) + "] outside [1, " +
                                                std::to_string(v.depth()) + "]");
  }
  const auto all = v.voxels();
  const auto part = all.subspan((first - 1) * v.plane_size(), (last - first + 1) * v.plane_size());
  return Volume3D(v.width(), v.height(), last - first + 1,
                  std::vector<float>(part.begin(), part.end()), v.spacing());
}

}  // namespace dynimg
