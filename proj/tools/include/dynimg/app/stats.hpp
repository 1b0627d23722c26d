#pragma once

#include <cstddef>
#include <string>

#include "dynimg/app/image_io.hpp"
#include "dynimg/volume.hpp"

namespace dynimg::app {

struct StatsReport {
  std::size_t width = 0;
  std::size_t height = 0;
  /// Channels for images, slices for volumes.
  std::size_t layers = 1;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  /// Population standard deviation.
  double stddev = 0.0;
  /// Mean squared forward difference along every spatial axis.
  double gradient_energy = 0.0;
  /// Shannon entropy in bits of the 256-bin histogram of min-max
  /// normalised values.
  double entropy_bits = 0.0;
};

/// Gradients are taken within each channel along x and y.
StatsReport compute_stats(const Raster& image);
/// Gradients are taken along x, y and z.
StatsReport compute_stats(const Volume3D& volume);

inline constexpr const char* kStatsCsvHeader =
    "path,width,height,layers,min,max,mean,std,gradient_energy,entropy_bits,status";

std::string stats_csv_row(const std::string& path, const StatsReport& r);

}  // namespace dynimg::app
