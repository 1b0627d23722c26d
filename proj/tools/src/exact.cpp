#include <cmath>
#include <fstream>
#include <iomanip>

#include "dynimg/app/commands.hpp"
#include "dynimg/error.hpp"
#include "dynimg/nifti.hpp"
#include "dynimg/rankpool.hpp"

namespace dynimg::app {

namespace {

double cosine(std::span<const double> a, std::span<const float> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

ExactReport run_exact(const ExactConfig& config) {
  validate(config.params);
  const auto [volume, header] = nifti::read_volume(config.input);
  const RankSvmProblem problem = build_problem(volume, config.params.lambda);

  ExactReport report;
  report.width = volume.width();
  report.height = volume.height();
  report.depth = volume.depth();
  report.initial_objective = objective(std::vector<double>(problem.dimension(), 0.0), problem);
  report.solution = solve(problem, {config.params.iterations, config.params.step0});

  const DynamicImage approx = approx_rank_pool(volume, PoolStrategy::SinglePass);
  report.cosine_similarity = cosine(report.solution.d, approx.plane.values());

  std::vector<float> weights(report.solution.d.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] = static_cast<float>(report.solution.d[i]);
  }
  DynamicImage plane_img;
  plane_img.plane = Plane2D(volume.width(), volume.height(), std::move(weights));
  plane_img.method = PoolMethod::ExactRankPool;
  plane_img.depth_used = volume.depth();

  std::error_code ec;
  std::filesystem::create_directories(config.output_dir, ec);
  const std::string stem = input_stem(config.input);

  PooledImage pooled;
  const auto& emitted =
      config.format == OutputFormat::RawF32 ? plane_img : normalize_min_max(plane_img);
  pooled.raster = Raster{volume.width(), volume.height(), 1,
                         std::vector<float>(emitted.plane.values().begin(),
                                            emitted.plane.values().end())};
  JobConfig emit_cfg;
  emit_cfg.method = Method::Exact;
  emit_cfg.format = config.format;
  emit_cfg.output_dir = config.output_dir;
  report.plane_path = emit_image(pooled, stem, emit_cfg);

  report.trace_path = config.output_dir / (stem + "_exact_trace.csv");
  {
    std::ofstream trace(report.trace_path, std::ios::trunc);
    if (!trace) throw Error(ErrorCode::IoError, "cannot create " + report.trace_path.string());
    trace << "iteration,objective\n" << std::setprecision(17);
    trace << 0 << ',' << report.initial_objective << '\n';
    for (std::size_t k = 0; k < report.solution.objective_trace.size(); ++k) {
      trace << (k + 1) << ',' << report.solution.objective_trace[k] << '\n';
    }
  }

  report.report_path = config.output_dir / (stem + "_exact_report.json");
  const nlohmann::json summary = {
      {"input", config.input.string()},
      {"width", report.width},
      {"height", report.height},
      {"depth", report.depth},
      {"lambda", config.params.lambda},
      {"iterations", report.solution.iterations},
      {"step_schedule", report.solution.step_schedule},
      {"initial_objective", report.initial_objective},
      {"best_objective", report.solution.best_objective},
      {"best_iteration", report.solution.best_iteration},
      {"cosine_similarity_to_approx", report.cosine_similarity},
      {"plane", report.plane_path.string()},
      {"trace", report.trace_path.string()}};
  std::ofstream js(report.report_path, std::ios::trunc);
  if (!js) throw Error(ErrorCode::IoError, "cannot create " + report.report_path.string());
  js << summary.dump(2) << '\n';
  return report;
}

}  // namespace dynimg::app
