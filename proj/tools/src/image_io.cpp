#include "dynimg/app/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

#include <nlohmann/json.hpp>

#include "dynimg/error.hpp"

namespace dynimg::app {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void check_raster(const Raster& r) {
  if (r.width == 0 || r.height == 0 || (r.channels != 1 && r.channels != 3) ||
      r.values.size() != r.width * r.height * r.channels) {
    throw Error(ErrorCode::DimensionMismatch, "raster shape is inconsistent");
  }
}

}  // namespace

unsigned quantize(float v, unsigned levels) noexcept {
  if (!(v > 0.0f)) return 0;
  const double scaled = std::round(static_cast<double>(v) * levels);
  return scaled >= levels ? levels : static_cast<unsigned>(scaled);
}

void write_png(const std::filesystem::path& path, const Raster& normalized, int bit_depth) {
  check_raster(normalized);
  if (bit_depth != 8 && bit_depth != 16) {
    throw Error(ErrorCode::InvalidArgument, "PNG bit depth must be 8 or 16");
  }
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw Error(ErrorCode::IoError, "cannot create " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "libpng initialisation failed");
  }

  const std::size_t bytes_per_sample = bit_depth / 8;
  const std::size_t row_bytes = normalized.width * normalized.channels * bytes_per_sample;
  std::vector<png_byte> pixels(row_bytes * normalized.height);
  const unsigned levels = bit_depth == 8 ? 255u : 65535u;
  for (std::size_t i = 0; i < normalized.values.size(); ++i) {
    const unsigned q = quantize(normalized.values[i], levels);
    if (bit_depth == 8) {
      pixels[i] = static_cast<png_byte>(q);
    } else {
      // PNG stores 16-bit samples big-endian
      pixels[2 * i] = static_cast<png_byte>(q >> 8);
      pixels[2 * i + 1] = static_cast<png_byte>(q & 0xff);
    }
  }
  std::vector<png_bytep> rows(normalized.height);
  for (std::size_t y = 0; y < normalized.height; ++y) rows[y] = pixels.data() + y * row_bytes;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::IoError, "libpng failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(normalized.width),
               static_cast<png_uint_32>(normalized.height), bit_depth,
               normalized.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Raster read_png(const std::filesystem::path& path, int* bit_depth_out) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw Error(ErrorCode::IoError, path.string() + " is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::IoError, "libpng initialisation failed");
  }
  Raster r;
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::IoError, "libpng failed reading " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  depth = png_get_bit_depth(png, info);
  r.width = png_get_image_width(png, info);
  r.height = png_get_image_height(png, info);
  r.channels = png_get_channels(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  pixels.resize(row_bytes * r.height);
  rows.resize(r.height);
  for (std::size_t y = 0; y < r.height; ++y) rows[y] = pixels.data() + y * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = r.width * r.height * r.channels;
  r.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.values[i] = depth == 16 ? static_cast<float>((pixels[2 * i] << 8) | pixels[2 * i + 1])
                              : static_cast<float>(pixels[i]);
  }
  if (bit_depth_out != nullptr) *bit_depth_out = depth;
  return r;
}

std::filesystem::path raw_sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

void write_raw_f32(const std::filesystem::path& path, const Raster& raster) {
  check_raster(raster);
  std::vector<char> bytes(raster.values.size() * 4);
  for (std::size_t i = 0; i < raster.values.size(); ++i) {
    auto le = std::bit_cast<std::array<char, 4>>(raster.values[i]);
    if constexpr (std::endian::native == std::endian::big) std::reverse(le.begin(), le.end());
    std::memcpy(bytes.data() + 4 * i, le.data(), 4);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());

  const nlohmann::json shape = {{"width", raster.width},
                                {"height", raster.height},
                                {"channels", raster.channels},
                                {"dtype", "float32"},
                                {"byte_order", "little"},
                                {"layout", "row-major, channel fastest"}};
  std::ofstream side(raw_sidecar_path(path), std::ios::trunc);
  if (!side) throw Error(ErrorCode::IoError, "cannot create sidecar for " + path.string());
  side << shape.dump(2) << '\n';
}

Raster read_raw_f32(const std::filesystem::path& path) {
  std::ifstream side(raw_sidecar_path(path));
  if (!side) throw Error(ErrorCode::IoError, "missing shape sidecar for " + path.string());
  nlohmann::json shape;
  try {
    side >> shape;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::IoError, "bad shape sidecar: " + std::string(e.what()));
  }
  Raster r;
  r.width = shape.value("width", std::size_t{0});
  r.height = shape.value("height", std::size_t{0});
  r.channels = shape.value("channels", std::size_t{1});

  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t n = r.width * r.height * r.channels;
  if (n == 0 || bytes.size() != n * 4) {
    throw Error(ErrorCode::SizeMismatch, path.string() + " does not match its sidecar shape");
  }
  r.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<char, 4> le;
    std::memcpy(le.data(), bytes.data() + 4 * i, 4);
    if constexpr (std::endian::native == std::endian::big) std::reverse(le.begin(), le.end());
    r.values[i] = std::bit_cast<float>(le);
  }
  check_raster(r);
  return r;
}

}  // namespace dynimg::app
