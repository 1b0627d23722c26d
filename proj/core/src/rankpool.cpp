#include "dynimg/rankpool.hpp"

#include <algorithm>

#include "dynimg/error.hpp"

namespace dynimg {

namespace {

Plane2D round_plane(std::size_t w, std::size_t h, const std::vector<double>& acc) {
  std::vector<float> out(acc.size());
  std::transform(acc.begin(), acc.end(), out.begin(),
                 [](double x) { return static_cast<float>(x); });
  return Plane2D(w, h, std::move(out));
}

DynamicImage make_image(Plane2D plane, PoolMethod method, std::size_t depth) {
  DynamicImage img;
  img.plane = std::move(plane);
  img.method = method;
  img.depth_used = depth;
  return img;
}

}  // namespace

PoolCoefficients pool_coefficients(std::size_t depth) {
  if (depth == 0) {
    throw Error(ErrorCode::InvalidDepth, "depth must be at least 1");
  }
  PoolCoefficients c;
  c.depth = depth;
  c.alpha.resize(depth);
  c.beta.resize(depth);
  const auto T = static_cast<std::int64_t>(depth);
  for (std::int64_t t = 1; t <= T; ++t) {
    c.alpha[static_cast<std::size_t>(t - 1)] = 2 * t - T - 1;
  }
  // suffix sums of alpha_t / t
  double running = 0.0;
  for (std::size_t t = depth; t >= 1; --t) {
    running += static_cast<double>(c.alpha[t - 1]) / static_cast<double>(t);
    c.beta[t - 1] = running;
  }
  return c;
}

std::vector<Plane2D> temporal_averages(const Volume3D& v) {
  const std::size_t n = v.plane_size();
  std::vector<double> sum(n, 0.0);
  std::vector<Plane2D> out;
  out.reserve(v.depth());
  std::vector<float> mean(n);
  for (std::size_t t = 1; t <= v.depth(); ++t) {
    const auto s = v.slice(t);
    const double inv = 1.0 / static_cast<double>(t);
    for (std::size_t i = 0; i < n; ++i) {
      sum[i] += s[i];
      mean[i] = static_cast<float>(sum[i] * inv);
    }
    out.emplace_back(v.width(), v.height(), mean);
  }
  return out;
}

DynamicImage approx_rank_pool(const Volume3D& v, PoolStrategy strategy) {
  if (v.depth() == 0) {
    throw Error(ErrorCode::InvalidDepth, "volume has no slices");
  }
  const PoolCoefficients coef = pool_coefficients(v.depth());
  const std::size_t n = v.plane_size();
  std::vector<double> acc(n, 0.0);

  if (strategy == PoolStrategy::TwoPass) {
    // Pass 1 materialises every prefix mean; pass 2 applies alpha. The means
    // stay in double so both strategies round only once, at the end.
    std::vector<double> means(v.depth() * n);
    std::vector<double> sum(n, 0.0);
    for (std::size_t t = 1; t <= v.depth(); ++t) {
      const auto s = v.slice(t);
      const double inv = 1.0 / static_cast<double>(t);
      double* psi = means.data() + (t - 1) * n;
      for (std::size_t i = 0; i < n; ++i) {
        sum[i] += s[i];
        psi[i] = sum[i] * inv;
      }
    }
    for (std::size_t t = 0; t < v.depth(); ++t) {
      const double a = static_cast<double>(coef.alpha[t]);
      const double* psi = means.data() + t * n;
      for (std::size_t i = 0; i < n; ++i) acc[i] += a * psi[i];
    }
  } else {
    for (std::size_t t = 1; t <= v.depth(); ++t) {
      const double b = coef.beta[t - 1];
      const auto s = v.slice(t);
      for (std::size_t i = 0; i < n; ++i) acc[i] += b * s[i];
    }
  }

  DynamicImage img = make_image(round_plane(v.width(), v.height(), acc),
                                PoolMethod::ApproxRankPool, v.depth());
  if (v.depth() == 1) {
    img.warning = "depth-1 volume: rank pooling weight is zero, output is the zero plane";
  }
  return img;
}

DynamicImage avg_pool_depth(const Volume3D& v) {
  const std::size_t n = v.plane_size();
  std::vector<double> acc(n, 0.0);
  for (std::size_t t = 1; t <= v.depth(); ++t) {
    const auto s = v.slice(t);
    for (std::size_t i = 0; i < n; ++i) acc[i] += s[i];
  }
  const double inv = 1.0 / static_cast<double>(v.depth());
  for (auto& x : acc) x *= inv;
  return make_image(round_plane(v.width(), v.height(), acc), PoolMethod::AvgPool, v.depth());
}

DynamicImage max_pool_depth(const Volume3D& v) {
  const auto first = v.slice(1);
  std::vector<float> out(first.begin(), first.end());
  for (std::size_t t = 2; t <= v.depth(); ++t) {
    const auto s = v.slice(t);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], s[i]);
  }
  return make_image(Plane2D(v.width(), v.height(), std::move(out)), PoolMethod::MaxPool, v.depth());
}

namespace {

std::vector<float> min_max_map(std::span<const float> values) {
  std::vector<float> out(values.size(), 0.0f);
  if (values.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double range = static_cast<double>(*hi_it) - lo;
  if (range <= 0.0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double y = (static_cast<double>(values[i]) - lo) / range;
    out[i] = static_cast<float>(std::clamp(y, 0.0, 1.0));
  }
  return out;
}

}  // namespace

DynamicImage normalize_min_max(const DynamicImage& img) {
  DynamicImage out = img;
  out.plane = Plane2D(img.plane.width(), img.plane.height(), min_max_map(img.plane.values()));
  out.normalization = Normalization::MinMax01;
  return out;
}

MultiChannelImage normalize_min_max(const MultiChannelImage& img) {
  return MultiChannelImage(img.width(), img.height(), min_max_map(img.values()));
}

std::vector<std::pair<std::size_t, std::size_t>> segment_bounds(std::size_t depth) {
  if (depth < 3) {
    throw Error(ErrorCode::InvalidDepth,
                "three segments need depth >= 3, got " + std::to_string(depth));
  }
  const std::size_t base = depth / 3;
  const std::size_t extra = depth % 3;
  std::vector<std::pair<std::size_t, std::size_t>> bounds;
  std::size_t first = 1;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t len = base + (k < extra ? 1 : 0);
    bounds.emplace_back(first, first + len - 1);
    first += len;
  }
  return bounds;
}

MultiChannelImage to_three_channel(const DynamicImage& img, const Volume3D& v, ChannelMode mode,
                                   PoolStrategy strategy) {
  if (img.plane.width() != v.width() || img.plane.height() != v.height()) {
    throw Error(ErrorCode::DimensionMismatch, "image was not produced from this volume");
  }
  switch (mode) {
    case ChannelMode::Replicate3:
      return MultiChannelImage::from_planes(img.plane, img.plane, img.plane);
    case ChannelMode::Segment3: {
      const auto bounds = segment_bounds(v.depth());
      std::vector<Plane2D> planes;
      for (const auto& [first, last] : bounds) {
        planes.push_back(approx_rank_pool(sub_volume(v, first, last), strategy).plane);
      }
      return MultiChannelImage::from_planes(planes[0], planes[1], planes[2]);
    }
    case ChannelMode::Single:
      break;
  }
  throw Error(ErrorCode::InvalidArgument, "three-channel conversion needs Replicate3 or Segment3");
}

}  // namespace dynimg
