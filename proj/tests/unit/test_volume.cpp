#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dynimg/error.hpp"
#include "dynimg/volume.hpp"
#include "test_support.hpp"

using namespace dynimg;

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

}  // namespace

TEST_CASE("volume_from_slices stacks planes in order") {
  const Plane2D a(2, 2, {1, 2, 3, 4});
  const Plane2D b(2, 2, {5, 6, 7, 8});
  const std::vector<Plane2D> slices{a, b};
  const Volume3D v = volume_from_slices(slices);
  CHECK(v.depth() == 2);
  CHECK(v.voxel_count() == 8);
  CHECK(slice_view(v, 1) == a);
  CHECK(slice_view(v, 2) == b);
  CHECK(v.at(1, 1, 1) == 8.0f);
}

TEST_CASE("volume_from_slices rejects empty and mismatched input") {
  CHECK(code_of([] { volume_from_slices({}); }) == ErrorCode::EmptyInput);
  const std::vector<Plane2D> mixed{Plane2D(2, 2), Plane2D(3, 3)};
  CHECK(code_of([&] { volume_from_slices(mixed); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("110 slices of 110x110 build a 110^3 volume") {
  const std::vector<Plane2D> slices(110, Plane2D::filled(110, 110, 0.5f));
  const Volume3D v = volume_from_slices(slices);
  CHECK(v.width() == 110);
  CHECK(v.height() == 110);
  CHECK(v.depth() == 110);
  CHECK(v.voxel_count() == 110u * 110u * 110u);
}

TEST_CASE("slice_view is 1-based") {
  std::mt19937_64 rng(7);
  const Volume3D v = testing::random_volume(rng, 3, 2, 4);
  CHECK(code_of([&] { slice_view(v, 0); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([&] { slice_view(v, 5); }) == ErrorCode::IndexOutOfRange);
  const Plane2D last = slice_view(v, 4);
  CHECK(last.values()[0] == v.voxels()[3 * 6]);
}

TEST_CASE("construction round trip holds for random slice lists") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> dim(1, 9);
  std::uniform_real_distribution<float> val(-1e6f, 1e6f);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t w = dim(rng), h = dim(rng), d = dim(rng);
    std::vector<Plane2D> slices;
    for (std::size_t k = 0; k < d; ++k) {
      std::vector<float> vals(w * h);
      for (auto& x : vals) x = val(rng);
      slices.emplace_back(w, h, std::move(vals));
    }
    const Volume3D v = volume_from_slices(slices);
    for (std::size_t t = 1; t <= d; ++t) REQUIRE(slice_view(v, t) == slices[t - 1]);
  }
}

TEST_CASE("constructors reject non-finite values") {
  const float nan = std::numeric_limits<float>::quiet_NaN();
  const float inf = std::numeric_limits<float>::infinity();
  CHECK(code_of([&] { Plane2D(1, 2, {0.0f, nan}); }) == ErrorCode::NonFiniteValue);
  CHECK(code_of([&] { Volume3D(1, 1, 2, {inf, 0.0f}); }) == ErrorCode::NonFiniteValue);
  CHECK(code_of([&] { MultiChannelImage(1, 1, {0.0f, -inf, 1.0f}); }) == ErrorCode::NonFiniteValue);
  CHECK(code_of([] { Volume3D(2, 2, 2, std::vector<float>(7)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("sub_volume extracts an inclusive slice range") {
  std::mt19937_64 rng(3);
  const Volume3D v = testing::random_volume(rng, 2, 3, 6);
  const Volume3D mid = sub_volume(v, 3, 4);
  CHECK(mid.depth() == 2);
  CHECK(slice_view(mid, 1) == slice_view(v, 3));
  CHECK(slice_view(mid, 2) == slice_view(v, 4));
  CHECK(code_of([&] { sub_volume(v, 0, 2); }) == ErrorCode::IndexOutOfRange);
  CHECK(code_of([&] { sub_volume(v, 4, 7); }) == ErrorCode::IndexOutOfRange);
}
