#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dynimg {

/// H x W x C activations, channel fastest: index (h * W + w) * C + c.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(std::size_t height, std::size_t width, std::size_t channels);
  FeatureMap(std::size_t height, std::size_t width, std::size_t channels,
             std::vector<double> values);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t positions() const noexcept { return height_ * width_; }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  double& at(std::size_t h, std::size_t w, std::size_t c) {
    return values_[(h * width_ + w) * channels_ + c];
  }
  double at(std::size_t h, std::size_t w, std::size_t c) const {
    return values_[(h * width_ + w) * channels_ + c];
  }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::size_t channels_ = 0;
  std::vector<double> values_;
};

/// A 1x1 convolution: the same affine map applied at every position.
/// weights is in_channels x out_channels, row-major.
struct PointwiseConv {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(std::size_t i, std::size_t o) { return weights[i * out_channels + o]; }
  double w(std::size_t i, std::size_t o) const { return weights[i * out_channels + o]; }
};

/// Four stacked 1x1 convolutions, C -> C/2 -> C/4 -> C/8 -> 1 (each >= 1).
struct AttentionParams {
  std::array<PointwiseConv, 4> layers;

  std::size_t input_channels() const noexcept { return layers[0].in_channels; }
};

std::array<std::size_t, 5> attention_widths(std::size_t channels);

/// Zero-initialised parameters with the standard widths for `channels`.
AttentionParams zero_attention_params(std::size_t channels);

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases from a
/// fixed-seed mt19937_64.
AttentionParams init_attention_params(std::size_t channels, std::uint64_t seed);

struct AttentionOutput {
  /// Softmax over all H*W positions, row-major (h * W + w).
  std::vector<double> mask;
  FeatureMap output;
};

/// ReLU after layers 1-3, spatial softmax after layer 4, output = input * mask.
/// Throws ChannelMismatch if the input channels do not match layer 1.
AttentionOutput attention_forward(const FeatureMap& input, const AttentionParams& params);

struct AttentionGradients {
  FeatureMap d_input;
  AttentionParams d_params;
};

/// Reverse-mode gradients of a scalar loss given dL/dO. ReLU has gradient 0
/// at exactly 0. Throws ShapeMismatch if `upstream` differs in shape from `input`.
AttentionGradients attention_backward(const FeatureMap& input, const AttentionParams& params,
                                      const FeatureMap& upstream);

inline constexpr double kBceEpsilon = 1e-7;

/// Binary cross-entropy of probability p against label l in {0, 1}; p is
/// clamped to [eps, 1 - eps]. Throws InvalidLabel otherwise.
double bce_loss(double p, int label);

}  // namespace dynimg
