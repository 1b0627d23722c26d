#include <algorithm>
#include <chrono>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "dynimg/app/commands.hpp"
#include "dynimg/app/stats.hpp"
#include "dynimg/error.hpp"
#include "dynimg/nifti.hpp"
#include "dynimg/rankpool.hpp"

namespace dynimg::app {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_header(const nifti::Header& h) {
  std::ostringstream os;
  os << "byte_order:  " << (h.byte_order == std::endian::little ? "little" : "big") << '\n';
  os << "dim:        ";
  for (auto d : h.dim) os << ' ' << d;
  os << '\n';
  os << "extents:     " << h.nx() << " x " << h.ny() << " x " << h.nz() << '\n';
  os << "datatype:    " << h.datatype << " (" << nifti::datatype_name(h.datatype) << ")\n";
  os << "bitpix:      " << h.bitpix << '\n';
  os << "pixdim:     ";
  for (auto p : h.pixdim) os << ' ' << p;
  os << '\n';
  os << "vox_offset:  " << h.vox_offset << '\n';
  os << "scl_slope:   " << h.scl_slope << '\n';
  os << "scl_inter:   " << h.scl_inter << '\n';
  os << "qform_code:  " << h.qform_code << '\n';
  os << "sform_code:  " << h.sform_code << '\n';
  os << "magic:       " << std::string(h.magic.data(), 3) << '\n';
  os << "descrip:     " << h.descrip << '\n';
  return os.str();
}

int run_info(const std::filesystem::path& path, std::ostream& out, std::ostream& err) {
  try {
    const nifti::Header h = nifti::read_header(path);
    out << "file:        " << path.string() << '\n' << format_header(h);
    return 0;
  } catch (const Error& e) {
    err << "error: " << path.string() << ": " << e.what() << '\n';
    return 1;
  }
}

namespace {

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

StatsReport stats_for(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  if (has_suffix(name, ".png")) return compute_stats(read_png(path));
  if (has_suffix(name, ".f32")) return compute_stats(read_raw_f32(path));
  return compute_stats(nifti::read_volume(path).first);
}

}  // namespace

int run_stats(const std::vector<std::string>& inputs, std::ostream& csv, std::ostream& err) {
  int status = 0;
  csv << kStatsCsvHeader << '\n';
  for (const auto& path : expand_inputs(inputs)) {
    try {
      csv << stats_csv_row(csv_field(path.string()), stats_for(path)) << '\n';
    } catch (const std::exception& e) {
      csv << csv_field(path.string()) << ",,,,,,,,,," << csv_field(std::string("error: ") + e.what())
          << '\n';
      err << "error: " << path.string() << ": " << e.what() << '\n';
      status = 1;
    }
  }
  return status;
}

Volume3D synthetic_volume(std::size_t width, std::size_t height, std::size_t depth,
                          std::uint64_t seed, float lo, float hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(lo, hi);
  std::vector<float> voxels(width * height * depth);
  for (auto& v : voxels) v = dist(rng);
  return Volume3D(width, height, depth, std::move(voxels));
}

void validate(const BenchConfig& config) {
  if (config.repeats == 0) {
    throw Error(ErrorCode::InvalidConfig, "repeats must be at least 1");
  }
  if (config.sizes.empty()) {
    throw Error(ErrorCode::InvalidConfig, "no volume sizes given");
  }
  if (std::find(config.sizes.begin(), config.sizes.end(), std::size_t{0}) != config.sizes.end()) {
    throw Error(ErrorCode::InvalidConfig, "volume sizes must be positive");
  }
}

std::vector<BenchRow> run_bench(const BenchConfig& config) {
  validate(config);
  struct Case {
    const char* name;
    DynamicImage (*run)(const Volume3D&);
  };
  const Case cases[] = {
      {"dynamic-single-pass",
       [](const Volume3D& v) { return approx_rank_pool(v, PoolStrategy::SinglePass); }},
      {"dynamic-two-pass",
       [](const Volume3D& v) { return approx_rank_pool(v, PoolStrategy::TwoPass); }},
      {"avg", [](const Volume3D& v) { return avg_pool_depth(v); }},
      {"max", [](const Volume3D& v) { return max_pool_depth(v); }},
  };

  std::vector<BenchRow> rows;
  volatile float sink = 0.0f;
  for (const std::size_t n : config.sizes) {
    const Volume3D volume = synthetic_volume(n, n, n, config.seed);
    for (const Case& c : cases) {
      sink = sink + c.run(volume).plane[0];  // warm-up
      std::vector<double> seconds;
      for (std::size_t r = 0; r < config.repeats; ++r) {
        const auto start = std::chrono::steady_clock::now();
        const DynamicImage img = c.run(volume);
        seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        sink = sink + img.plane[0];
      }
      std::sort(seconds.begin(), seconds.end());
      const std::size_t m = seconds.size();
      const double median = m % 2 == 1 ? seconds[m / 2] : 0.5 * (seconds[m / 2 - 1] + seconds[m / 2]);
      BenchRow row;
      row.size = n;
      row.method = c.name;
      row.repeats = config.repeats;
      row.median_seconds = median;
      row.voxels_per_second =
          median > 0.0 ? static_cast<double>(volume.voxel_count()) / median : 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "size,method,repeats,median_seconds,voxels_per_second\n";
  for (const auto& r : rows) {
    out << r.size << ',' << r.method << ',' << r.repeats << ',' << std::setprecision(6)
        << r.median_seconds << ',' << std::setprecision(6) << r.voxels_per_second << '\n';
  }
}

}  // namespace dynimg::app
