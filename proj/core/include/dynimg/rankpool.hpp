#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dynimg/volume.hpp"

namespace dynimg {

/// Frame weights for approximate rank pooling over `depth` slices.
///
/// alpha[t-1] = 2t - T - 1 weights the prefix mean of slices 1..t.
/// beta[tau-1] = sum_{t=tau}^{T} alpha[t-1] / t weights raw slice tau, so that
/// sum_t alpha_t * mean(1..t) == sum_tau beta_tau * slice_tau.
struct PoolCoefficients {
  std::size_t depth = 0;
  std::vector<std::int64_t> alpha;
  std::vector<double> beta;
};

/// Throws InvalidDepth for depth == 0.
PoolCoefficients pool_coefficients(std::size_t depth);

enum class PoolStrategy {
  /// All prefix means first (held in double), then the alpha-weighted sum.
  TwoPass,
  /// One sweep over raw slices with the beta weights.
  SinglePass,
};

/// Elementwise mean of slices 1..t for every t, accumulated in double.
std::vector<Plane2D> temporal_averages(const Volume3D& v);

/// Approximate rank pooling along depth. A depth-1 volume gives the zero plane
/// (alpha_1 = 0) with `warning` set.
DynamicImage approx_rank_pool(const Volume3D& v, PoolStrategy strategy = PoolStrategy::SinglePass);

DynamicImage avg_pool_depth(const Volume3D& v);
DynamicImage max_pool_depth(const Volume3D& v);

/// Maps [min, max] affinely onto [0, 1]; a constant plane maps to zeros.
DynamicImage normalize_min_max(const DynamicImage& img);
/// Joint min-max over all three channels.
MultiChannelImage normalize_min_max(const MultiChannelImage& img);

/// Splits [1, depth] into three contiguous segments; the first depth % 3
/// segments get one extra slice. Returns {first, last} 1-based pairs.
std::vector<std::pair<std::size_t, std::size_t>> segment_bounds(std::size_t depth);

/// Replicate3 copies `img` into every channel. Segment3 rank-pools the three
/// depth segments of `v` independently with `strategy` and stacks them.
/// Throws DimensionMismatch if `img` does not match `v`'s plane size and
/// InvalidDepth for Segment3 on depth < 3.
MultiChannelImage to_three_channel(const DynamicImage& img, const Volume3D& v, ChannelMode mode,
                                   PoolStrategy strategy = PoolStrategy::SinglePass);

}  // namespace dynimg
