#include "dynimg/app/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <span>

#include "dynimg/error.hpp"

namespace dynimg::app {

namespace {

void fill_moments(std::span<const float> values, StatsReport& r) {
  if (values.empty()) {
    throw Error(ErrorCode::EmptyInput, "no samples");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  r.min = *lo;
  r.max = *hi;
  double sum = 0.0;
  for (float v : values) sum += v;
  const double n = static_cast<double>(values.size());
  r.mean = std::clamp(sum / n, r.min, r.max);
  double ss = 0.0;
  for (float v : values) ss += (v - r.mean) * (v - r.mean);
  r.stddev = std::sqrt(ss / n);

  std::array<std::size_t, 256> hist{};
  const double range = r.max - r.min;
  for (float v : values) {
    std::size_t bin = 0;
    if (range > 0.0) {
      const double u = (static_cast<double>(v) - r.min) / range;
      bin = std::min<std::size_t>(255, static_cast<std::size_t>(u * 256.0));
    }
    ++hist[bin];
  }
  double h = 0.0;
  for (std::size_t c : hist) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  r.entropy_bits = std::clamp(h, 0.0, 8.0);
}

// values indexed ((z * ny + y) * nx + x) * stride + channel
double gradient_energy(std::span<const float> values, std::size_t nx, std::size_t ny,
                       std::size_t nz, std::size_t stride) {
  double acc = 0.0;
  std::size_t count = 0;
  auto at = [&](std::size_t x, std::size_t y, std::size_t z, std::size_t c) {
    return static_cast<double>(values[((z * ny + y) * nx + x) * stride + c]);
  };
  for (std::size_t c = 0; c < stride; ++c) {
    for (std::size_t z = 0; z < nz; ++z) {
      for (std::size_t y = 0; y < ny; ++y) {
        for (std::size_t x = 0; x < nx; ++x) {
          const double v = at(x, y, z, c);
          if (x + 1 < nx) {
            const double d = at(x + 1, y, z, c) - v;
            acc += d * d;
            ++count;
          }
          if (y + 1 < ny) {
            const double d = at(x, y + 1, z, c) - v;
            acc += d * d;
            ++count;
          }
          if (z + 1 < nz) {
            const double d = at(x, y, z + 1, c) - v;
            acc += d * d;
            ++count;
          }
        }
      }
    }
  }
  return count == 0 ? 0.0 : acc / static_cast<double>(count);
}

}  // namespace

StatsReport compute_stats(const Raster& image) {
  StatsReport r;
  r.width = image.width;
  r.height = image.height;
  r.layers = image.channels;
  fill_moments(image.values, r);
  r.gradient_energy = gradient_energy(image.values, image.width, image.height, 1, image.channels);
  return r;
}

StatsReport compute_stats(const Volume3D& volume) {
  StatsReport r;
  r.width = volume.width();
  r.height = volume.height();
  r.layers = volume.depth();
  fill_moments(volume.voxels(), r);
  r.gradient_energy =
      gradient_energy(volume.voxels(), volume.width(), volume.height(), volume.depth(), 1);
  return r;
}

std::string stats_csv_row(const std::string& path, const StatsReport& r) {
  std::ostringstream os;
  os << path << ',' << r.width << ',' << r.height << ',' << r.layers << ','
     << std::setprecision(9) << r.min << ',' << r.max << ',' << r.mean << ',' << r.stddev << ','
     << r.gradient_energy << ',' << r.entropy_bits << ",ok";
  return os.str();
}

}  // namespace dynimg::app
