#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dynimg/app/config.hpp"
#include "dynimg/app/image_io.hpp"
#include "dynimg/nifti.hpp"
#include "dynimg/ranksvm.hpp"

namespace dynimg::app {

/// A volume pooled and laid out for emission.
struct PooledImage {
  Raster raster;
  /// Range before any normalisation.
  double min_before = 0.0;
  double max_before = 0.0;
  bool normalized = false;
  std::optional<std::string> warning;
};

/// The per-file convert pipeline minus I/O.
PooledImage pool_volume(const Volume3D& volume, const JobConfig& config);

/// Writes `image` as `<output_dir>/<stem>_<method><ext>`; returns the path.
std::filesystem::path emit_image(const PooledImage& image, const std::string& stem,
                                 const JobConfig& config);

struct ConvertSummary {
  int exit_code = 0;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  /// Manifest records in input order.
  std::vector<nlohmann::json> records;
};

/// Converts every input, writing one JSON line per input to the manifest as
/// each finishes. Failures are recorded and do not stop the batch; the exit
/// code is nonzero if any input failed.
ConvertSummary run_convert(const JobConfig& config, std::ostream& log);

/// Human-readable header dump.
std::string format_header(const nifti::Header& h);
int run_info(const std::filesystem::path& path, std::ostream& out, std::ostream& err);

struct ExactConfig {
  std::filesystem::path input;
  std::filesystem::path output_dir = ".";
  OutputFormat format = OutputFormat::RawF32;
  ExactParams params;
};

struct ExactReport {
  RankSvmSolution solution;
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t depth = 0;
  double initial_objective = 1.0;
  /// Cosine between the solved weights and the approximate dynamic image;
  /// 0 when either is the zero vector.
  double cosine_similarity = 0.0;
  std::filesystem::path plane_path;
  std::filesystem::path trace_path;
  std::filesystem::path report_path;
};

/// Solves the exact ranking objective for one volume and emits the weight
/// plane, the objective trace (CSV) and a JSON summary.
ExactReport run_exact(const ExactConfig& config);

/// One CSV row per input (`kStatsCsvHeader` columns). Accepts .nii/.nii.gz
/// volumes, PNG images and raw-f32 planes. Returns nonzero if any failed.
int run_stats(const std::vector<std::string>& inputs, std::ostream& csv, std::ostream& err);

struct BenchConfig {
  std::vector<std::size_t> sizes{110};
  std::size_t repeats = 5;
  std::uint64_t seed = 42;
};

struct BenchRow {
  std::size_t size = 0;
  std::string method;
  std::size_t repeats = 0;
  double median_seconds = 0.0;
  double voxels_per_second = 0.0;
};

void validate(const BenchConfig& config);
/// Times single-pass and two-pass rank pooling and the avg/max baselines on
/// synthetic cubes; each row holds the median of `repeats` runs.
std::vector<BenchRow> run_bench(const BenchConfig& config);
void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out);

/// Reproducible uniform random cube used by bench and tests.
Volume3D synthetic_volume(std::size_t width, std::size_t height, std::size_t depth,
                          std::uint64_t seed, float lo = -100.0f, float hi = 100.0f);

std::string csv_field(const std::string& s);

}  // namespace dynimg::app
