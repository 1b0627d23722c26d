#include "dynimg/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dynimg/error.hpp"

namespace dynimg::nifti {

namespace {

// Field offsets within the 348-byte header.
constexpr std::size_t kOffSizeofHdr = 0;
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffSclInter = 116;
constexpr std::size_t kOffDescrip = 148;
constexpr std::size_t kOffQformCode = 252;
constexpr std::size_t kOffSformCode = 254;
constexpr std::size_t kOffSrowX = 280;
constexpr std::size_t kOffSrowY = 296;
constexpr std::size_t kOffSrowZ = 312;
constexpr std::size_t kOffMagic = 344;

template <typename T>
T load(std::span<const std::byte> bytes, std::size_t offset, bool swap) {
  std::array<std::byte, sizeof(T)> raw;
  std::memcpy(raw.data(), bytes.data() + offset, sizeof(T));
  if (swap) std::reverse(raw.begin(), raw.end());
  return std::bit_cast<T>(raw);
}

template <typename T>
void store(std::vector<std::byte>& out, std::size_t offset, T value, bool swap) {
  auto raw = std::bit_cast<std::array<std::byte, sizeof(T)>>(value);
  if (swap) std::reverse(raw.begin(), raw.end());
  std::memcpy(out.data() + offset, raw.data(), sizeof(T));
}

std::vector<std::byte> gunzip(std::span<const std::byte> in) {
  z_stream zs{};
  if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) {
    throw Error(ErrorCode::IoError, "zlib initialisation failed");
  }
  std::vector<std::byte> out;
  std::array<unsigned char, 1 << 16> chunk;
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<std::byte*>(in.data()));
  zs.avail_in = static_cast<uInt>(in.size());
  int rc = Z_OK;
  while (true) {
    zs.next_out = chunk.data();
    zs.avail_out = static_cast<uInt>(chunk.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    const std::size_t produced = chunk.size() - zs.avail_out;
    const auto* p = reinterpret_cast<const std::byte*>(chunk.data());
    out.insert(out.end(), p, p + produced);
    if (rc == Z_STREAM_END) {
      // concatenated gzip members
      if (zs.avail_in == 0) break;
      if (inflateReset(&zs) != Z_OK) break;
      continue;
    }
    if (rc != Z_OK) break;
    if (zs.avail_in == 0 && produced == 0) break;
  }
  const std::string zmsg = zs.msg != nullptr ? zs.msg : "inflate failed";
  inflateEnd(&zs);
  // A truncated stream still yields what was decoded; later size checks
  // report the shortfall precisely.
  if (rc != Z_STREAM_END && rc != Z_OK && rc != Z_BUF_ERROR) {
    throw Error(ErrorCode::IoError, "gzip stream is corrupt: " + zmsg);
  }
  return out;
}

bool is_gzip(std::span<const std::byte> bytes) {
  return bytes.size() >= 2 && bytes[0] == std::byte{0x1f} && bytes[1] == std::byte{0x8b};
}

template <typename Raw>
void convert_payload(std::span<const std::byte> payload, bool swap, double slope, double inter,
                     bool identity, std::vector<float>& out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Raw raw = load<Raw>(payload, i * sizeof(Raw), swap);
    out[i] = identity ? static_cast<float>(raw)
                      : static_cast<float>(slope * static_cast<double>(raw) + inter);
  }
}

}  // namespace

int datatype_bits(std::int16_t datatype) noexcept {
  switch (datatype) {
    case kUint8: return 8;
    case kInt16: return 16;
    case kInt32: return 32;
    case kFloat32: return 32;
    case kFloat64: return 64;
    default: return 0;
  }
}

const char* datatype_name(std::int16_t datatype) noexcept {
  switch (datatype) {
    case kUint8: return "uint8";
    case kInt16: return "int16";
    case kInt32: return "int32";
    case kFloat32: return "float32";
    case kFloat64: return "float64";
    default: return "unsupported";
  }
}

Header parse_header(std::span<const std::byte> bytes) {
  if (bytes.size() < kHeaderSize) {
    throw Error(ErrorCode::TruncatedHeader,
                "need " + std::to_string(kHeaderSize) + " header bytes, got " +
                    std::to_string(bytes.size()));
  }
  Header h;
  bool swap = false;
  const auto plain = load<std::int32_t>(bytes, kOffSizeofHdr, false);
  if (plain != 348) {
    if (load<std::int32_t>(bytes, kOffSizeofHdr, true) != 348) {
      throw Error(ErrorCode::InvalidHeader,
                  "sizeof_hdr is " + std::to_string(plain) + " in either byte order, expected 348");
    }
    swap = true;
  }
  constexpr bool host_little = std::endian::native == std::endian::little;
  h.byte_order = (host_little != swap) ? std::endian::little : std::endian::big;
  h.sizeof_hdr = 348;

  for (std::size_t i = 0; i < 4; ++i) {
    h.magic[i] = static_cast<char>(bytes[kOffMagic + i]);
  }
  if (std::memcmp(h.magic.data(), "n+1\0", 4) != 0) {
    if (std::memcmp(h.magic.data(), "ni1\0", 4) == 0) {
      throw Error(ErrorCode::BadMagic, "two-file NIfTI (.hdr/.img) is not supported");
    }
    throw Error(ErrorCode::BadMagic, "magic is not \"n+1\"");
  }

  for (std::size_t i = 0; i < 8; ++i) {
    h.dim[i] = load<std::int16_t>(bytes, kOffDim + 2 * i, swap);
    h.pixdim[i] = load<float>(bytes, kOffPixdim + 4 * i, swap);
  }
  h.datatype = load<std::int16_t>(bytes, kOffDatatype, swap);
  h.bitpix = load<std::int16_t>(bytes, kOffBitpix, swap);
  h.vox_offset = load<float>(bytes, kOffVoxOffset, swap);
  h.scl_slope = load<float>(bytes, kOffSclSlope, swap);
  h.scl_inter = load<float>(bytes, kOffSclInter, swap);
  h.qform_code = load<std::int16_t>(bytes, kOffQformCode, swap);
  h.sform_code = load<std::int16_t>(bytes, kOffSformCode, swap);
  for (std::size_t i = 0; i < 4; ++i) {
    h.srow_x[i] = load<float>(bytes, kOffSrowX + 4 * i, swap);
    h.srow_y[i] = load<float>(bytes, kOffSrowY + 4 * i, swap);
    h.srow_z[i] = load<float>(bytes, kOffSrowZ + 4 * i, swap);
  }
  const char* descrip = reinterpret_cast<const char*>(bytes.data() + kOffDescrip);
  h.descrip.assign(descrip, strnlen(descrip, 80));

  const int bits = datatype_bits(h.datatype);
  if (bits == 0) {
    throw Error(ErrorCode::UnsupportedDatatype,
                "datatype code " + std::to_string(h.datatype) + " is not supported");
  }
  if (h.bitpix != bits) {
    throw Error(ErrorCode::InvalidHeader, "bitpix " + std::to_string(h.bitpix) +
                                              " does not match datatype " +
                                              datatype_name(h.datatype));
  }
  const int rank = h.dim[0];
  if (rank != 3 && rank != 4) {
    throw Error(ErrorCode::UnsupportedRank, "rank " + std::to_string(rank) + " (need 3 or 4)");
  }
  if (rank == 4 && h.dim[4] > 1) {
    throw Error(ErrorCode::UnsupportedRank,
                "4D series with " + std::to_string(h.dim[4]) + " volumes is not supported");
  }
  for (std::size_t i = 1; i <= 3; ++i) {
    if (h.dim[i] < 1) {
      throw Error(ErrorCode::InvalidHeader, "dim[" + std::to_string(i) + "] must be positive");
    }
  }
  if (!(h.vox_offset >= static_cast<float>(kHeaderSize)) || !std::isfinite(h.vox_offset)) {
    throw Error(ErrorCode::InvalidHeader, "vox_offset must be at least 348");
  }
  return h;
}

std::vector<std::byte> encode_header(const Header& h, std::endian order) {
  const bool swap = order != std::endian::native;
  std::vector<std::byte> out(kHeaderSize, std::byte{0});
  store<std::int32_t>(out, kOffSizeofHdr, 348, swap);
  for (std::size_t i = 0; i < 8; ++i) {
    store(out, kOffDim + 2 * i, h.dim[i], swap);
    store(out, kOffPixdim + 4 * i, h.pixdim[i], swap);
  }
  store(out, kOffDatatype, h.datatype, swap);
  store(out, kOffBitpix, h.bitpix, swap);
  store(out, kOffVoxOffset, h.vox_offset, swap);
  store(out, kOffSclSlope, h.scl_slope, swap);
  store(out, kOffSclInter, h.scl_inter, swap);
  store(out, kOffQformCode, h.qform_code, swap);
  store(out, kOffSformCode, h.sform_code, swap);
  for (std::size_t i = 0; i < 4; ++i) {
    store(out, kOffSrowX + 4 * i, h.srow_x[i], swap);
    store(out, kOffSrowY + 4 * i, h.srow_y[i], swap);
    store(out, kOffSrowZ + 4 * i, h.srow_z[i], swap);
  }
  const std::size_t n = std::min<std::size_t>(h.descrip.size(), 79);
  std::memcpy(out.data() + kOffDescrip, h.descrip.data(), n);
  std::memcpy(out.data() + kOffMagic, h.magic.data(), 4);
  return out;
}

std::vector<std::byte> load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, "cannot open " + path.string());
  }
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(ErrorCode::IoError, "read failed for " + path.string());
  }
  std::vector<std::byte> bytes(raw.size());
  std::memcpy(bytes.data(), raw.data(), raw.size());
  if (is_gzip(bytes)) return gunzip(bytes);
  return bytes;
}

std::pair<Volume3D, Header> decode_volume(std::span<const std::byte> bytes) {
  Header h = parse_header(bytes);
  const bool swap = h.byte_order != std::endian::native;
  const std::size_t offset = static_cast<std::size_t>(h.vox_offset);
  const std::size_t count = h.voxel_count();
  const std::size_t need = count * static_cast<std::size_t>(h.bitpix / 8);
  if (bytes.size() < offset || bytes.size() - offset < need) {
    const std::size_t have = bytes.size() > offset ? bytes.size() - offset : 0;
    throw Error(ErrorCode::SizeMismatch, "payload has " + std::to_string(have) +
                                             " bytes, dims need " + std::to_string(need));
  }
  const auto payload = bytes.subspan(offset, need);

  double slope = h.scl_slope;
  double inter = h.scl_inter;
  if (slope == 0.0 || !std::isfinite(slope)) {
    slope = 1.0;
    inter = 0.0;
  }
  if (!std::isfinite(inter)) inter = 0.0;
  const bool identity = slope == 1.0 && inter == 0.0;

  // The file is x-fastest, then y, then z, which is already slice-major with
  // z as depth.
  std::vector<float> voxels(count);
  switch (h.datatype) {
    case kUint8: convert_payload<std::uint8_t>(payload, swap, slope, inter, identity, voxels); break;
    case kInt16: convert_payload<std::int16_t>(payload, swap, slope, inter, identity, voxels); break;
    case kInt32: convert_payload<std::int32_t>(payload, swap, slope, inter, identity, voxels); break;
    case kFloat32: convert_payload<float>(payload, swap, slope, inter, identity, voxels); break;
    case kFloat64: convert_payload<double>(payload, swap, slope, inter, identity, voxels); break;
    default:
      throw Error(ErrorCode::UnsupportedDatatype, "datatype " + std::to_string(h.datatype));
  }
  for (std::size_t i = 0; i < voxels.size(); ++i) {
    if (!std::isfinite(voxels[i])) {
      throw Error(ErrorCode::NonFiniteVoxel, "voxel " + std::to_string(i) + " is not finite");
    }
  }

  auto spacing_of = [](float p) { return (std::isfinite(p) && p > 0.0f) ? double(p) : 1.0; };
  const Spacing spacing{spacing_of(h.pixdim[1]), spacing_of(h.pixdim[2]),
                        spacing_of(h.pixdim[3])};
  return {Volume3D(h.nx(), h.ny(), h.nz(), std::move(voxels), spacing), std::move(h)};
}

std::pair<Volume3D, Header> read_volume(const std::filesystem::path& path) {
  const auto bytes = load_file(path);
  return decode_volume(bytes);
}

Header read_header(const std::filesystem::path& path) {
  const auto bytes = load_file(path);
  return parse_header(bytes);
}

void write_volume(const Volume3D& v, const std::filesystem::path& path) {
  constexpr std::size_t kMaxExtent = 32767;
  if (v.width() > kMaxExtent || v.height() > kMaxExtent || v.depth() > kMaxExtent) {
    throw Error(ErrorCode::InvalidArgument, "volume extents exceed the NIfTI-1 limit");
  }
  Header h;
  h.dim = {3, static_cast<std::int16_t>(v.width()), static_cast<std::int16_t>(v.height()),
           static_cast<std::int16_t>(v.depth()), 1, 1, 1, 1};
  h.datatype = kFloat32;
  h.bitpix = 32;
  const Spacing s = v.spacing().value_or(Spacing{});
  h.pixdim = {1.0f, static_cast<float>(s.x), static_cast<float>(s.y), static_cast<float>(s.z),
              0.0f, 0.0f, 0.0f, 0.0f};
  h.vox_offset = static_cast<float>(kSingleFileOffset);
  h.scl_slope = 1.0f;
  h.scl_inter = 0.0f;

  std::vector<std::byte> out = encode_header(h, std::endian::little);
  out.resize(kSingleFileOffset, std::byte{0});  // empty extension block
  const std::size_t payload_at = out.size();
  out.resize(payload_at + v.voxel_count() * sizeof(float));
  const bool swap = std::endian::native != std::endian::little;
  const auto voxels = v.voxels();
  for (std::size_t i = 0; i < voxels.size(); ++i) {
    store(out, payload_at + i * sizeof(float), voxels[i], swap);
  }

  const auto ext = path.extension().string();
  if (ext == ".gz") {
    gzFile gz = gzopen(path.string().c_str(), "wb");
    if (gz == nullptr) throw Error(ErrorCode::IoError, "cannot create " + path.string());
    const int written = gzwrite(gz, out.data(), static_cast<unsigned>(out.size()));
    const int closed = gzclose(gz);
    if (written != static_cast<int>(out.size()) || closed != Z_OK) {
      throw Error(ErrorCode::IoError, "gzip write failed for " + path.string());
    }
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot create " + path.string());
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

}  // namespace dynimg::nifti
