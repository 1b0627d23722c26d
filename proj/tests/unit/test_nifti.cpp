#include <doctest.h>

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "dynimg/error.hpp"
#include "dynimg/nifti.hpp"
#include "nifti_fixture.hpp"
#include "test_support.hpp"

using namespace dynimg;
using testing::FixtureHeader;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected dynimg::Error");
  return ErrorCode::InvalidArgument;
}

std::span<const std::byte> as_bytes(const std::vector<unsigned char>& v) {
  return std::as_bytes(std::span(v));
}

FixtureHeader cube_header(std::int16_t n, std::int16_t datatype, std::int16_t bitpix) {
  FixtureHeader h;
  h.dim = {3, n, n, n, 1, 1, 1, 1};
  h.datatype = datatype;
  h.bitpix = bitpix;
  h.pixdim = {1.0f, 1.5f, 1.5f, 2.0f, 0, 0, 0, 0};
  return h;
}

void gzip_file(const std::filesystem::path& src, const std::filesystem::path& dst) {
  std::ifstream in(src, std::ios::binary);
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  gzFile gz = gzopen(dst.string().c_str(), "wb");
  gzwrite(gz, raw.data(), static_cast<unsigned>(raw.size()));
  gzclose(gz);
}

}  // namespace

TEST_CASE("parse_header decodes the 110^3 fixture") {
  const auto bytes = testing::fixture_header_bytes(cube_header(110, 16, 32), false);
  const nifti::Header h = nifti::parse_header(as_bytes(bytes));
  CHECK(h.nx() == 110);
  CHECK(h.ny() == 110);
  CHECK(h.nz() == 110);
  CHECK(h.datatype == nifti::kFloat32);
  CHECK(h.bitpix == 32);
  CHECK(h.vox_offset == 352.0f);
  CHECK(h.pixdim[3] == 2.0f);
  CHECK(h.descrip == "fixture");
  CHECK(h.byte_order == std::endian::little);
}

TEST_CASE("byte-swapped headers parse identically") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> extent(1, 300);
  std::uniform_real_distribution<float> real(-5.0f, 5.0f);
  const std::int16_t types[][2] = {{2, 8}, {4, 16}, {8, 32}, {16, 32}, {64, 64}};
  for (int trial = 0; trial < 40; ++trial) {
    FixtureHeader h;
    h.dim = {static_cast<std::int16_t>(3 + trial % 2), static_cast<std::int16_t>(extent(rng)),
             static_cast<std::int16_t>(extent(rng)), static_cast<std::int16_t>(extent(rng)), 1, 1,
             1, 1};
    h.datatype = types[trial % 5][0];
    h.bitpix = types[trial % 5][1];
    for (auto& p : h.pixdim) p = real(rng);
    h.scl_slope = real(rng);
    h.scl_inter = real(rng);
    h.qform_code = static_cast<std::int16_t>(trial % 3);
    h.sform_code = static_cast<std::int16_t>(trial % 2);
    const auto little = nifti::parse_header(as_bytes(testing::fixture_header_bytes(h, false)));
    const auto big = nifti::parse_header(as_bytes(testing::fixture_header_bytes(h, true)));
    CHECK(big.byte_order == std::endian::big);
    CHECK(little.dim == big.dim);
    CHECK(little.datatype == big.datatype);
    CHECK(little.bitpix == big.bitpix);
    CHECK(little.pixdim == big.pixdim);
    CHECK(little.vox_offset == big.vox_offset);
    CHECK(little.scl_slope == big.scl_slope);
    CHECK(little.scl_inter == big.scl_inter);
    CHECK(little.qform_code == big.qform_code);
    CHECK(little.sform_code == big.sform_code);
    CHECK(little.descrip == big.descrip);
  }
}

TEST_CASE("encode_header round-trips through parse_header in both byte orders") {
  FixtureHeader f = cube_header(17, 4, 16);
  f.scl_slope = 0.25f;
  f.scl_inter = -3.0f;
  const auto original = nifti::parse_header(as_bytes(testing::fixture_header_bytes(f, false)));
  for (auto order : {std::endian::little, std::endian::big}) {
    const auto again = nifti::parse_header(nifti::encode_header(original, order));
    CHECK(again.dim == original.dim);
    CHECK(again.scl_slope == original.scl_slope);
    CHECK(again.byte_order == order);
  }
}

TEST_CASE("malformed headers hit every declared error") {
  const FixtureHeader good = cube_header(4, 16, 32);
  auto parse = [](const FixtureHeader& h) {
    nifti::parse_header(as_bytes(testing::fixture_header_bytes(h, false)));
  };
  SUBCASE("truncated") {
    auto bytes = testing::fixture_header_bytes(good, false);
    bytes.resize(200);
    CHECK(code_of([&] { nifti::parse_header(as_bytes(bytes)); }) == ErrorCode::TruncatedHeader);
  }
  SUBCASE("two-file magic") {
    FixtureHeader h = good;
    h.magic = {'n', 'i', '1', '\0'};
    CHECK(code_of([&] { parse(h); }) == ErrorCode::BadMagic);
  }
  SUBCASE("garbage magic") {
    FixtureHeader h = good;
    h.magic = {'a', 'b', 'c', 'd'};
    CHECK(code_of([&] { parse(h); }) == ErrorCode::BadMagic);
  }
  SUBCASE("unsupported datatype") {
    FixtureHeader h = good;
    h.datatype = 128;  // RGB24
    h.bitpix = 24;
    CHECK(code_of([&] { parse(h); }) == ErrorCode::UnsupportedDatatype);
  }
  SUBCASE("rank 2") {
    FixtureHeader h = good;
    h.dim[0] = 2;
    CHECK(code_of([&] { parse(h); }) == ErrorCode::UnsupportedRank);
  }
  SUBCASE("4D time series") {
    FixtureHeader h = good;
    h.dim[0] = 4;
    h.dim[4] = 3;
    CHECK(code_of([&] { parse(h); }) == ErrorCode::UnsupportedRank);
  }
  SUBCASE("4D with a singleton time axis is accepted") {
    FixtureHeader h = good;
    h.dim[0] = 4;
    h.dim[4] = 1;
    CHECK_NOTHROW(parse(h));
  }
  SUBCASE("bad sizeof_hdr") {
    FixtureHeader h = good;
    h.sizeof_hdr = 540;  // NIfTI-2
    CHECK(code_of([&] { parse(h); }) == ErrorCode::InvalidHeader);
  }
  SUBCASE("bitpix inconsistent with datatype") {
    FixtureHeader h = good;
    h.bitpix = 16;
    CHECK(code_of([&] { parse(h); }) == ErrorCode::InvalidHeader);
  }
  SUBCASE("non-positive extent") {
    FixtureHeader h = good;
    h.dim[2] = 0;
    CHECK(code_of([&] { parse(h); }) == ErrorCode::InvalidHeader);
  }
  SUBCASE("vox_offset inside the header") {
    FixtureHeader h = good;
    h.vox_offset = 100.0f;
    CHECK(code_of([&] { parse(h); }) == ErrorCode::InvalidHeader);
  }
}

TEST_CASE("header fuzzing only ever raises typed errors") {
  const auto base = testing::fixture_header_bytes(cube_header(6, 16, 32), false);
  std::mt19937_64 rng(2718);
  std::uniform_int_distribution<std::size_t> pos(0, 347);
  std::uniform_int_distribution<int> byte(0, 255);
  std::size_t parsed = 0, rejected = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    auto bytes = base;
    for (int k = 0; k < 1 + trial % 4; ++k) bytes[pos(rng)] = static_cast<unsigned char>(byte(rng));
    try {
      nifti::parse_header(as_bytes(bytes));
      ++parsed;
    } catch (const Error&) {
      ++rejected;
    }
  }
  CHECK(parsed + rejected == 2000);
  CHECK(rejected > 0);
}

TEST_CASE("read_volume decodes supported datatypes with scaling") {
  testing::TempDir dir("nifti");
  SUBCASE("float32 identity scaling is bit-exact") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<float> dist(-1e3f, 1e3f);
    std::vector<float> samples(4 * 3 * 2);
    for (auto& s : samples) s = dist(rng);
    samples[5] = -0.0f;
    FixtureHeader h;
    h.dim = {3, 4, 3, 2, 1, 1, 1, 1};
    testing::write_bytes(dir / "f.nii", testing::fixture_file_bytes(h, samples));
    const auto [v, hdr] = nifti::read_volume(dir / "f.nii");
    REQUIRE(v.voxel_count() == samples.size());
    CHECK(std::memcmp(v.voxels().data(), samples.data(), samples.size() * 4) == 0);
    CHECK(v.width() == 4);
    CHECK(v.height() == 3);
    CHECK(v.depth() == 2);
    // x fastest in the file: voxel (x=1, y=2, z=1)
    CHECK(v.at(1, 2, 1) == samples[1 + 4 * (2 + 3 * 1)]);
  }
  SUBCASE("int16 with slope 0.5 and intercept 10") {
    FixtureHeader h;
    h.dim = {3, 2, 1, 1, 1, 1, 1, 1};
    h.datatype = 4;
    h.bitpix = 16;
    h.scl_slope = 0.5f;
    h.scl_inter = 10.0f;
    testing::write_bytes(dir / "s.nii", testing::fixture_file_bytes<std::int16_t>(h, {4, -8}));
    const auto [v, hdr] = nifti::read_volume(dir / "s.nii");
    CHECK(v.voxels()[0] == 12.0f);
    CHECK(v.voxels()[1] == 6.0f);
  }
  SUBCASE("slope 0 means no scaling") {
    FixtureHeader h;
    h.dim = {3, 3, 1, 1, 1, 1, 1, 1};
    h.datatype = 2;
    h.bitpix = 8;
    h.scl_slope = 0.0f;
    h.scl_inter = 99.0f;
    testing::write_bytes(dir / "u.nii", testing::fixture_file_bytes<std::uint8_t>(h, {0, 7, 255}));
    const auto [v, hdr] = nifti::read_volume(dir / "u.nii");
    CHECK(v.voxels()[0] == 0.0f);
    CHECK(v.voxels()[1] == 7.0f);
    CHECK(v.voxels()[2] == 255.0f);
  }
  SUBCASE("int32 and float64 big-endian") {
    FixtureHeader h;
    h.dim = {3, 2, 2, 1, 1, 1, 1, 1};
    h.datatype = 8;
    h.bitpix = 32;
    testing::write_bytes(dir / "i.nii",
                         testing::fixture_file_bytes<std::int32_t>(h, {-5, 0, 70000, 3}, true));
    const auto [vi, hi] = nifti::read_volume(dir / "i.nii");
    CHECK(hi.byte_order == std::endian::big);
    CHECK(std::vector<float>(vi.voxels().begin(), vi.voxels().end()) ==
          std::vector<float>{-5, 0, 70000, 3});

    h.datatype = 64;
    h.bitpix = 64;
    testing::write_bytes(dir / "d.nii",
                         testing::fixture_file_bytes<double>(h, {0.25, -1.5, 1e6, 2.0}, true));
    const auto [vd, hd] = nifti::read_volume(dir / "d.nii");
    CHECK(std::vector<float>(vd.voxels().begin(), vd.voxels().end()) ==
          std::vector<float>{0.25f, -1.5f, 1e6f, 2.0f});
  }
  SUBCASE("spacing comes from pixdim") {
    const FixtureHeader h = cube_header(2, 16, 32);
    testing::write_bytes(dir / "p.nii", testing::fixture_file_bytes(h, std::vector<float>(8, 1.0f)));
    const auto [v, hdr] = nifti::read_volume(dir / "p.nii");
    REQUIRE(v.spacing().has_value());
    CHECK(v.spacing()->x == 1.5);
    CHECK(v.spacing()->z == 2.0);
  }
}

TEST_CASE("read_volume error paths") {
  testing::TempDir dir("nifti_err");
  FixtureHeader h;
  h.dim = {3, 4, 4, 4, 1, 1, 1, 1};
  SUBCASE("missing file") {
    CHECK(code_of([&] { nifti::read_volume(dir / "nope.nii"); }) == ErrorCode::IoError);
  }
  SUBCASE("truncated payload") {
    testing::write_bytes(dir / "t.nii", testing::fixture_file_bytes(h, std::vector<float>(63, 0.0f)));
    CHECK(code_of([&] { nifti::read_volume(dir / "t.nii"); }) == ErrorCode::SizeMismatch);
  }
  SUBCASE("header only") {
    testing::write_bytes(dir / "h.nii", testing::fixture_header_bytes(h, false));
    CHECK(code_of([&] { nifti::read_volume(dir / "h.nii"); }) == ErrorCode::SizeMismatch);
  }
  SUBCASE("truncated header file") {
    auto bytes = testing::fixture_header_bytes(h, false);
    bytes.resize(40);
    testing::write_bytes(dir / "th.nii", bytes);
    CHECK(code_of([&] { nifti::read_volume(dir / "th.nii"); }) == ErrorCode::TruncatedHeader);
  }
  SUBCASE("NaN voxel") {
    std::vector<float> samples(64, 1.0f);
    samples[17] = std::numeric_limits<float>::quiet_NaN();
    testing::write_bytes(dir / "n.nii", testing::fixture_file_bytes(h, samples));
    CHECK(code_of([&] { nifti::read_volume(dir / "n.nii"); }) == ErrorCode::NonFiniteVoxel);
  }
  SUBCASE("float64 overflowing float32") {
    FixtureHeader d = h;
    d.datatype = 64;
    d.bitpix = 64;
    std::vector<double> samples(64, 0.0);
    samples[3] = 1e300;
    testing::write_bytes(dir / "o.nii", testing::fixture_file_bytes(d, samples));
    CHECK(code_of([&] { nifti::read_volume(dir / "o.nii"); }) == ErrorCode::NonFiniteVoxel);
  }
}

TEST_CASE("gzip input is detected by content") {
  testing::TempDir dir("nifti_gz");
  std::mt19937_64 rng(6);
  const Volume3D v = testing::random_volume(rng, 6, 5, 4);
  nifti::write_volume(v, dir / "plain.nii");
  gzip_file(dir / "plain.nii", dir / "packed.nii.gz");
  gzip_file(dir / "plain.nii", dir / "misnamed.nii");  // gzip content, plain name
  const auto [a, ha] = nifti::read_volume(dir / "plain.nii");
  const auto [b, hb] = nifti::read_volume(dir / "packed.nii.gz");
  const auto [c, hc] = nifti::read_volume(dir / "misnamed.nii");
  CHECK(std::equal(a.voxels().begin(), a.voxels().end(), b.voxels().begin()));
  CHECK(std::equal(a.voxels().begin(), a.voxels().end(), c.voxels().begin()));
  CHECK(ha.dim == hb.dim);
}

TEST_CASE("write_volume round trip") {
  testing::TempDir dir("nifti_rt");
  std::mt19937_64 rng(42);
  SUBCASE("random 5x4x3 volume is bit-exact and keeps spacing") {
    std::uniform_real_distribution<float> dist(-1e5f, 1e5f);
    std::vector<float> vox(60);
    for (auto& x : vox) x = dist(rng);
    const Volume3D v(5, 4, 3, vox, Spacing{0.5, 0.75, 3.0});
    nifti::write_volume(v, dir / "rt.nii");
    const auto [back, h] = nifti::read_volume(dir / "rt.nii");
    CHECK(std::memcmp(back.voxels().data(), vox.data(), vox.size() * 4) == 0);
    CHECK(back.spacing() == v.spacing());
    CHECK(h.datatype == 16);
    CHECK(h.bitpix == 32);
    CHECK(h.vox_offset == 352.0f);
    CHECK(h.scl_slope == 1.0f);
    CHECK(h.scl_inter == 0.0f);
    CHECK(std::string(h.magic.data(), 3) == "n+1");
    CHECK(std::filesystem::file_size(dir / "rt.nii") == 352 + 60 * 4);
  }
  SUBCASE("gzip output") {
    const Volume3D v = testing::random_volume(rng, 7, 3, 5);
    nifti::write_volume(v, dir / "rt.nii.gz");
    const auto [back, h] = nifti::read_volume(dir / "rt.nii.gz");
    CHECK(std::memcmp(back.voxels().data(), v.voxels().data(), v.voxel_count() * 4) == 0);
  }
}
