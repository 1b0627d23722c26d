#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dynimg/volume.hpp"

namespace dynimg::nifti {

inline constexpr std::size_t kHeaderSize = 348;
inline constexpr std::size_t kSingleFileOffset = 352;

enum Datatype : std::int16_t {
  kUint8 = 2,
  kInt16 = 4,
  kInt32 = 8,
  kFloat32 = 16,
  kFloat64 = 64,
};

/// Decoded subset of the NIfTI-1 header. Orientation fields are carried
/// along for display but never used for pooling.
struct Header {
  std::int32_t sizeof_hdr = 348;
  std::array<std::int16_t, 8> dim{};
  std::int16_t datatype = 0;
  std::int16_t bitpix = 0;
  std::array<float, 8> pixdim{};
  float vox_offset = 0.0f;
  float scl_slope = 0.0f;
  float scl_inter = 0.0f;
  std::int16_t qform_code = 0;
  std::int16_t sform_code = 0;
  std::array<float, 4> srow_x{};
  std::array<float, 4> srow_y{};
  std::array<float, 4> srow_z{};
  std::string descrip;
  std::array<char, 4> magic{'n', '+', '1', '\0'};
  /// Byte order the header was stored in.
  std::endian byte_order = std::endian::little;

  std::size_t nx() const noexcept { return static_cast<std::size_t>(dim[1]); }
  std::size_t ny() const noexcept { return static_cast<std::size_t>(dim[2]); }
  std::size_t nz() const noexcept { return static_cast<std::size_t>(dim[3]); }
  std::size_t voxel_count() const noexcept { return nx() * ny() * nz(); }
};

/// Bits per voxel for a supported datatype; 0 otherwise.
int datatype_bits(std::int16_t datatype) noexcept;
const char* datatype_name(std::int16_t datatype) noexcept;

/// Decodes and validates a header. Byte order is detected from sizeof_hdr.
/// Throws TruncatedHeader, InvalidHeader, BadMagic, UnsupportedDatatype or
/// UnsupportedRank.
Header parse_header(std::span<const std::byte> bytes);

/// 348 bytes in the requested byte order. Fields outside Header are zero.
std::vector<std::byte> encode_header(const Header& h, std::endian order = std::endian::little);

/// Reads a single-file .nii or gzip-compressed .nii.gz. Gzip is detected from
/// the leading 0x1f 0x8b bytes, not the file name.
std::pair<Volume3D, Header> read_volume(const std::filesystem::path& path);

/// Decodes an in-memory (already decompressed) .nii image.
std::pair<Volume3D, Header> decode_volume(std::span<const std::byte> bytes);

/// Reads the header only (decompressing as needed).
Header read_header(const std::filesystem::path& path);

/// Writes float32, vox_offset 352, slope 1, inter 0. A path ending in ".gz"
/// is gzip-compressed.
void write_volume(const Volume3D& v, const std::filesystem::path& path);

/// Raw file bytes, gunzipped when the content is gzip.
std::vector<std::byte> load_file(const std::filesystem::path& path);

}  // namespace dynimg::nifti
