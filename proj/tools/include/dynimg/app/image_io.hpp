#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace dynimg::app {

/// Interleaved 2D raster with 1 or 3 channels, channel fastest.
struct Raster {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 1;
  std::vector<float> values;
};

/// Quantises values in [0, 1] to 8 or 16 bits (round half away from zero,
/// clamped) and writes grayscale or RGB PNG. Throws dynimg::Error.
void write_png(const std::filesystem::path& path, const Raster& normalized, int bit_depth);

/// Samples come back as raw integer levels (0..255 or 0..65535).
Raster read_png(const std::filesystem::path& path, int* bit_depth = nullptr);

/// Little-endian float32 samples plus `<path>.json` holding the shape.
void write_raw_f32(const std::filesystem::path& path, const Raster& raster);
Raster read_raw_f32(const std::filesystem::path& path);

std::filesystem::path raw_sidecar_path(const std::filesystem::path& path);

/// round(v * levels) with halves away from zero, clamped to [0, levels].
unsigned quantize(float v, unsigned levels) noexcept;

}  // namespace dynimg::app
