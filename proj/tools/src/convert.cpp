#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "dynimg/app/commands.hpp"
#include "dynimg/error.hpp"
#include "dynimg/nifti.hpp"
#include "dynimg/rankpool.hpp"
#include "dynimg/ranksvm.hpp"

namespace dynimg::app {

namespace {

Plane2D exact_plane(const Volume3D& v, const ExactParams& params) {
  const RankSvmProblem problem = build_problem(v, params.lambda);
  const RankSvmSolution sol = solve(problem, {params.iterations, params.step0});
  std::vector<float> values(sol.d.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>(sol.d[i]);
  return Plane2D(v.width(), v.height(), std::move(values));
}

Plane2D pool_plane(const Volume3D& v, const JobConfig& config,
                   std::optional<std::string>& warning) {
  switch (config.method) {
    case Method::Dynamic: {
      DynamicImage img = approx_rank_pool(v, config.strategy);
      if (img.warning) warning = img.warning;
      return std::move(img.plane);
    }
    case Method::Avg: return avg_pool_depth(v).plane;
    case Method::Max: return max_pool_depth(v).plane;
    case Method::Exact: return exact_plane(v, config.exact);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown method");
}

Raster to_raster(const Plane2D& p) {
  return Raster{p.width(), p.height(), 1, std::vector<float>(p.values().begin(), p.values().end())};
}

Raster to_raster(const MultiChannelImage& img) {
  return Raster{img.width(), img.height(), 3,
                std::vector<float>(img.values().begin(), img.values().end())};
}

}  // namespace

PooledImage pool_volume(const Volume3D& volume, const JobConfig& config) {
  PooledImage out;
  const bool normalize = config.effective_normalize();
  switch (config.channel_mode) {
    case ChannelMode::Single: {
      DynamicImage img;
      img.plane = pool_plane(volume, config, out.warning);
      img.depth_used = volume.depth();
      out.raster = to_raster(normalize ? normalize_min_max(img).plane : img.plane);
      const auto [lo, hi] = std::minmax_element(img.plane.values().begin(), img.plane.values().end());
      out.min_before = *lo;
      out.max_before = *hi;
      break;
    }
    case ChannelMode::Replicate3:
    case ChannelMode::Segment3: {
      MultiChannelImage rgb;
      if (config.channel_mode == ChannelMode::Replicate3) {
        DynamicImage img;
        img.plane = pool_plane(volume, config, out.warning);
        rgb = to_three_channel(img, volume, ChannelMode::Replicate3);
      } else if (config.method == Method::Dynamic) {
        DynamicImage img;
        img.plane = Plane2D(volume.width(), volume.height());
        rgb = to_three_channel(img, volume, ChannelMode::Segment3, config.strategy);
        if (volume.depth() < 6) out.warning = "segments of depth 1 pool to the zero plane";
      } else {
        std::vector<Plane2D> planes;
        for (const auto& [first, last] : segment_bounds(volume.depth())) {
          planes.push_back(pool_plane(sub_volume(volume, first, last), config, out.warning));
        }
        rgb = MultiChannelImage::from_planes(planes[0], planes[1], planes[2]);
      }
      const auto [lo, hi] = std::minmax_element(rgb.values().begin(), rgb.values().end());
      out.min_before = *lo;
      out.max_before = *hi;
      out.raster = to_raster(normalize ? normalize_min_max(rgb) : rgb);
      break;
    }
  }
  out.normalized = normalize;
  return out;
}

std::filesystem::path emit_image(const PooledImage& image, const std::string& stem,
                                 const JobConfig& config) {
  const auto path =
      config.output_dir / (stem + "_" + to_string(config.method) + output_extension(config.format));
  switch (config.format) {
    case OutputFormat::Png8: write_png(path, image.raster, 8); break;
    case OutputFormat::Png16: write_png(path, image.raster, 16); break;
    case OutputFormat::RawF32: write_raw_f32(path, image.raster); break;
  }
  return path;
}

ConvertSummary run_convert(const JobConfig& config, std::ostream& log) {
  validate(config);
  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  if (ec) {
    throw Error(ErrorCode::IoError, "cannot create " + config.output_dir.string() + ": " + ec.message());
  }
  const auto inputs = expand_inputs(config.inputs);
  std::ofstream manifest(config.manifest_path(), std::ios::trunc);
  if (!manifest) {
    throw Error(ErrorCode::IoError, "cannot create manifest " + config.manifest_path().string());
  }

  ConvertSummary summary;
  summary.records.resize(inputs.size());
  std::mutex io_mutex;
  std::atomic<std::size_t> next{0};

  auto process = [&](std::size_t index) {
    const auto& input = inputs[index];
    const auto start = std::chrono::steady_clock::now();
    nlohmann::json rec = {{"input", input.string()},
                          {"method", to_string(config.method)},
                          {"strategy", to_string(config.strategy)},
                          {"channel_mode", std::string(to_string(config.channel_mode))},
                          {"format", to_string(config.format)}};
    try {
      const auto [volume, header] = nifti::read_volume(input);
      const PooledImage pooled = pool_volume(volume, config);
      const auto out_path = emit_image(pooled, input_stem(input), config);
      rec["status"] = "ok";
      rec["output"] = out_path.string();
      rec["width"] = volume.width();
      rec["height"] = volume.height();
      rec["depth"] = volume.depth();
      rec["channels"] = pooled.raster.channels;
      rec["min"] = pooled.min_before;
      rec["max"] = pooled.max_before;
      rec["normalized"] = pooled.normalized;
      if (pooled.warning) rec["warning"] = *pooled.warning;
    } catch (const std::exception& e) {
      rec["status"] = "error";
      rec["error"] = e.what();
    }
    rec["wall_ms"] = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count();

    const std::string line = rec.dump() + "\n";
    std::lock_guard lock(io_mutex);
    manifest << line << std::flush;
    if (rec["status"] == "error") {
      log << "error: " << input.string() << ": " << rec["error"].get<std::string>() << '\n';
    }
    summary.records[index] = std::move(rec);
  };

  auto worker = [&] {
    for (std::size_t i = next++; i < inputs.size(); i = next++) process(i);
  };
  const std::size_t n_threads = std::min(config.workers, std::max<std::size_t>(inputs.size(), 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  for (const auto& rec : summary.records) {
    if (rec.value("status", "") == "ok") {
      ++summary.succeeded;
    } else {
      ++summary.failed;
    }
  }
  summary.exit_code = summary.failed == 0 ? 0 : 1;
  if (!manifest) {
    throw Error(ErrorCode::IoError, "writing manifest failed");
  }
  return summary;
}

}  // namespace dynimg::app
