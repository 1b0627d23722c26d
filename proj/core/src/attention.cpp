#include "dynimg/attention.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "dynimg/error.hpp"

namespace dynimg {

FeatureMap::FeatureMap(std::size_t height, std::size_t width, std::size_t channels)
    : height_(height), width_(width), channels_(channels),
      values_(height * width * channels, 0.0) {
  if (height == 0 || width == 0 || channels == 0) {
    throw Error(ErrorCode::ShapeMismatch, "feature map extents must be positive");
  }
}

FeatureMap::FeatureMap(std::size_t height, std::size_t width, std::size_t channels,
                       std::vector<double> values)
    : height_(height), width_(width), channels_(channels), values_(std::move(values)) {
  if (height == 0 || width == 0 || channels == 0 ||
      values_.size() != height * width * channels) {
    throw Error(ErrorCode::ShapeMismatch, "feature map value count does not match H*W*C");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "non-finite feature value");
  }
}

std::array<std::size_t, 5> attention_widths(std::size_t channels) {
  if (channels == 0) {
    throw Error(ErrorCode::ChannelMismatch, "attention input needs at least one channel");
  }
  return {channels, std::max<std::size_t>(channels / 2, 1), std::max<std::size_t>(channels / 4, 1),
          std::max<std::size_t>(channels / 8, 1), 1};
}

AttentionParams zero_attention_params(std::size_t channels) {
  const auto widths = attention_widths(channels);
  AttentionParams p;
  for (std::size_t k = 0; k < 4; ++k) {
    auto& layer = p.layers[k];
    layer.in_channels = widths[k];
    layer.out_channels = widths[k + 1];
    layer.weights.assign(layer.in_channels * layer.out_channels, 0.0);
    layer.bias.assign(layer.out_channels, 0.0);
  }
  return p;
}

AttentionParams init_attention_params(std::size_t channels, std::uint64_t seed) {
  AttentionParams p = zero_attention_params(channels);
  std::mt19937_64 rng(seed);
  for (auto& layer : p.layers) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in_channels));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& w : layer.weights) w = dist(rng);
    for (auto& b : layer.bias) b = dist(rng);
  }
  return p;
}

namespace {

// Pre-activations z_k and activations a_k for all positions, per layer.
// acts[0] is the input; acts[k] = relu(pre[k-1]) for k = 1..3.
struct ForwardCache {
  std::array<std::vector<double>, 4> acts;
  std::array<std::vector<double>, 4> pre;
  std::vector<double> mask;
};

void check_params(const AttentionParams& params) {
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& l = params.layers[k];
    if (l.weights.size() != l.in_channels * l.out_channels || l.bias.size() != l.out_channels) {
      throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(k + 1) + " is malformed");
    }
    if (k > 0 && l.in_channels != params.layers[k - 1].out_channels) {
      throw Error(ErrorCode::ChannelMismatch,
                  "layer " + std::to_string(k + 1) + " input width does not match layer " +
                      std::to_string(k));
    }
  }
  if (params.layers[3].out_channels != 1) {
    throw Error(ErrorCode::ChannelMismatch, "last layer must produce a single channel");
  }
}

std::vector<double> conv(const PointwiseConv& layer, const std::vector<double>& in,
                         std::size_t positions) {
  std::vector<double> out(positions * layer.out_channels);
  for (std::size_t p = 0; p < positions; ++p) {
    const double* x = in.data() + p * layer.in_channels;
    double* y = out.data() + p * layer.out_channels;
    for (std::size_t o = 0; o < layer.out_channels; ++o) y[o] = layer.bias[o];
    for (std::size_t i = 0; i < layer.in_channels; ++i) {
      const double xi = x[i];
      for (std::size_t o = 0; o < layer.out_channels; ++o) y[o] += xi * layer.w(i, o);
    }
  }
  return out;
}

ForwardCache run_forward(const FeatureMap& input, const AttentionParams& params) {
  check_params(params);
  if (input.channels() != params.input_channels()) {
    throw Error(ErrorCode::ChannelMismatch,
                "input has " + std::to_string(input.channels()) + " channels, layer 1 expects " +
                    std::to_string(params.input_channels()));
  }
  const std::size_t positions = input.positions();
  ForwardCache c;
  c.acts[0].assign(input.values().begin(), input.values().end());
  for (std::size_t k = 0; k < 4; ++k) {
    c.pre[k] = conv(params.layers[k], c.acts[k], positions);
    if (k < 3) {
      c.acts[k + 1] = c.pre[k];
      for (auto& x : c.acts[k + 1]) x = x > 0.0 ? x : 0.0;
    }
  }
  const auto& logits = c.pre[3];
  const double peak = *std::max_element(logits.begin(), logits.end());
  c.mask.resize(positions);
  double total = 0.0;
  for (std::size_t p = 0; p < positions; ++p) {
    c.mask[p] = std::exp(logits[p] - peak);
    total += c.mask[p];
  }
  for (auto& m : c.mask) m /= total;
  return c;
}

}  // namespace

AttentionOutput attention_forward(const FeatureMap& input, const AttentionParams& params) {
  ForwardCache c = run_forward(input, params);
  FeatureMap out(input.height(), input.width(), input.channels());
  const std::size_t C = input.channels();
  const auto in = input.values();
  auto o = out.values();
  for (std::size_t p = 0; p < input.positions(); ++p) {
    for (std::size_t ch = 0; ch < C; ++ch) o[p * C + ch] = in[p * C + ch] * c.mask[p];
  }
  return AttentionOutput{std::move(c.mask), std::move(out)};
}

AttentionGradients attention_backward(const FeatureMap& input, const AttentionParams& params,
                                      const FeatureMap& upstream) {
  if (upstream.height() != input.height() || upstream.width() != input.width() ||
      upstream.channels() != input.channels()) {
    throw Error(ErrorCode::ShapeMismatch, "upstream gradient shape differs from the input");
  }
  const ForwardCache c = run_forward(input, params);
  const std::size_t positions = input.positions();
  const std::size_t C = input.channels();
  const auto in = input.values();
  const auto up = upstream.values();

  AttentionGradients g{FeatureMap(input.height(), input.width(), C), params};
  for (auto& layer : g.d_params.layers) {
    std::fill(layer.weights.begin(), layer.weights.end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 0.0);
  }
  auto d_in = g.d_input.values();

  // O = A * S: direct path into A, and dL/dS per position.
  std::vector<double> d_mask(positions, 0.0);
  for (std::size_t p = 0; p < positions; ++p) {
    for (std::size_t ch = 0; ch < C; ++ch) {
      d_in[p * C + ch] = up[p * C + ch] * c.mask[p];
      d_mask[p] += up[p * C + ch] * in[p * C + ch];
    }
  }

  // softmax: dz_p = S_p (dS_p - sum_q S_q dS_q)
  double weighted = 0.0;
  for (std::size_t p = 0; p < positions; ++p) weighted += c.mask[p] * d_mask[p];
  std::vector<double> d_pre(positions);
  for (std::size_t p = 0; p < positions; ++p) d_pre[p] = c.mask[p] * (d_mask[p] - weighted);

  for (std::size_t k = 4; k-- > 0;) {
    const PointwiseConv& layer = params.layers[k];
    PointwiseConv& d_layer = g.d_params.layers[k];
    const std::vector<double>& x = c.acts[k];
    std::vector<double> d_x(positions * layer.in_channels, 0.0);
    for (std::size_t p = 0; p < positions; ++p) {
      const double* dz = d_pre.data() + p * layer.out_channels;
      const double* xp = x.data() + p * layer.in_channels;
      double* dxp = d_x.data() + p * layer.in_channels;
      for (std::size_t o = 0; o < layer.out_channels; ++o) d_layer.bias[o] += dz[o];
      for (std::size_t i = 0; i < layer.in_channels; ++i) {
        double acc = 0.0;
        for (std::size_t o = 0; o < layer.out_channels; ++o) {
          d_layer.w(i, o) += xp[i] * dz[o];
          acc += layer.w(i, o) * dz[o];
        }
        dxp[i] = acc;
      }
    }
    if (k == 0) {
      for (std::size_t i = 0; i < d_x.size(); ++i) d_in[i] += d_x[i];
    } else {
      // through the ReLU that produced acts[k]
      const std::vector<double>& z = c.pre[k - 1];
      for (std::size_t i = 0; i < d_x.size(); ++i) d_x[i] = z[i] > 0.0 ? d_x[i] : 0.0;
      d_pre = std::move(d_x);
    }
  }
  return g;
}

double bce_loss(double p, int label) {
  if (label != 0 && label != 1) {
    throw Error(ErrorCode::InvalidLabel, "label must be 0 or 1, got " + std::to_string(label));
  }
  if (std::isnan(p)) {
    throw Error(ErrorCode::InvalidArgument, "probability is NaN");
  }
  const double q = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
  return label == 1 ? -std::log(q) : -std::log1p(-q);
}

}  // namespace dynimg
