#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dynimg/app/commands.hpp"
#include "dynimg/error.hpp"

namespace {

using namespace dynimg;
using namespace dynimg::app;

void add_exact_options(CLI::App* cmd, ExactParams& params) {
  cmd->add_option("--lambda", params.lambda, "Regulariser weight for the exact solver")
      ->capture_default_str();
  cmd->add_option("--iterations", params.iterations, "Subgradient descent iterations")
      ->capture_default_str();
  cmd->add_option("--step0", params.step0, "Initial step; iteration k uses step0/sqrt(k)")
      ->capture_default_str();
}

std::ostream* open_or_stdout(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return &std::cout;
  file.open(path, std::ios::trunc);
  if (!file) throw Error(ErrorCode::IoError, "cannot create " + path);
  return &file;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynimg: collapse 3D volumes into 2D dynamic images by rank pooling"};
  app.set_config("--config", "", "TOML-style key/value file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();  // accept --config after the subcommand too

  // convert
  JobConfig job;
  bool normalize = false;
  bool no_normalize = false;
  std::string output_dir = ".";
  std::string manifest;
  auto* convert = app.add_subcommand("convert", "Pool NIfTI volumes into dynamic images");
  convert->add_option("inputs", job.inputs, "Input .nii/.nii.gz files or glob patterns")->required();
  std::string method = "dynamic";
  std::string strategy = "single-pass";
  std::string format = "raw-f32";
  convert->add_option("-m,--method", method, "Pooling method")
      ->transform(CLI::IsMember(method_names(), CLI::ignore_case))
      ->capture_default_str();
  convert->add_option("-s,--strategy", strategy, "Rank pooling strategy")
      ->transform(CLI::IsMember(strategy_names(), CLI::ignore_case))
      ->capture_default_str();
  std::string channels = "single";
  convert->add_option("-c,--channels", channels, "Channel layout")
      ->transform(CLI::IsMember(channel_mode_names(), CLI::ignore_case))
      ->capture_default_str();
  convert->add_option("-f,--format", format, "Output format")
      ->transform(CLI::IsMember(format_names(), CLI::ignore_case))
      ->capture_default_str();
  auto* norm_flag =
      convert->add_flag("--normalize", normalize, "Min-max normalise to [0,1] (default for PNG)");
  convert->add_flag("--no-normalize", no_normalize, "Keep raw pooled values")->excludes(norm_flag);
  convert->add_option("-o,--output-dir", output_dir, "Output directory")->capture_default_str();
  convert->add_option("--manifest", manifest, "Manifest path (default <output-dir>/manifest.jsonl)");
  convert->add_option("-j,--workers", job.workers, "Parallel workers")
      ->envname("DYNIMG_WORKERS")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_exact_options(convert, job.exact);

  // info
  std::vector<std::string> info_paths;
  auto* info = app.add_subcommand("info", "Print the decoded NIfTI-1 header");
  info->add_option("paths", info_paths, "NIfTI files")->required();

  // exact
  ExactConfig exact;
  std::string exact_input;
  std::string exact_out = ".";
  auto* exact_cmd =
      app.add_subcommand("exact", "Solve the exact ranking objective and compare to the approximation");
  exact_cmd->add_option("input", exact_input, "Input volume")->required();
  exact_cmd->add_option("-o,--output-dir", exact_out, "Output directory")->capture_default_str();
  std::string exact_format = "raw-f32";
  exact_cmd->add_option("-f,--format", exact_format, "Weight plane format")
      ->transform(CLI::IsMember(format_names(), CLI::ignore_case))
      ->capture_default_str();
  add_exact_options(exact_cmd, exact.params);

  // stats
  std::vector<std::string> stats_paths;
  std::string stats_out;
  auto* stats = app.add_subcommand("stats", "Image statistics as CSV");
  stats->add_option("inputs", stats_paths, "Volumes, PNG images or raw-f32 planes")->required();
  stats->add_option("--output", stats_out, "CSV path (default stdout)");

  // bench
  BenchConfig bench;
  std::string bench_out;
  auto* bench_cmd = app.add_subcommand("bench", "Time pooling strategies on synthetic cubes");
  bench_cmd->add_option("--sizes", bench.sizes, "Cube edge lengths")->capture_default_str();
  bench_cmd->add_option("--repeats", bench.repeats, "Timed runs per method (median reported)")
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "Synthetic data seed")->capture_default_str();
  bench_cmd->add_option("--output", bench_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*convert) {
      job.method = method_names().at(method);
      job.strategy = strategy_names().at(strategy);
      job.format = format_names().at(format);
      job.channel_mode = channel_mode_names().at(channels);
      if (normalize) job.normalize = true;
      if (no_normalize) job.normalize = false;
      job.output_dir = output_dir;
      job.manifest = manifest;
      const ConvertSummary summary = run_convert(job, std::cerr);
      std::cerr << summary.succeeded << " converted, " << summary.failed << " failed; manifest "
                << job.manifest_path().string() << '\n';
      return summary.exit_code;
    }
    if (*info) {
      int status = 0;
      for (const auto& p : info_paths) status |= run_info(p, std::cout, std::cerr);
      return status;
    }
    if (*exact_cmd) {
      exact.format = format_names().at(exact_format);
      exact.input = exact_input;
      exact.output_dir = exact_out;
      const ExactReport r = run_exact(exact);
      std::cout << "initial objective: " << r.initial_objective << '\n'
                << "best objective:    " << r.solution.best_objective << " (iteration "
                << r.solution.best_iteration << " of " << r.solution.iterations << ")\n"
                << "cosine to approx:  " << r.cosine_similarity << '\n'
                << "weight plane:      " << r.plane_path.string() << '\n'
                << "trace:             " << r.trace_path.string() << '\n';
      return 0;
    }
    if (*stats) {
      std::ofstream file;
      std::ostream* out = open_or_stdout(stats_out, file);
      return run_stats(stats_paths, *out, std::cerr);
    }
    if (*bench_cmd) {
      const auto rows = run_bench(bench);
      std::ofstream file;
      write_bench_csv(rows, *open_or_stdout(bench_out, file));
      for (std::size_t n : bench.sizes) {
        double single = 0.0, two = 0.0;
        for (const auto& r : rows) {
          if (r.size != n) continue;
          if (r.method == "dynamic-single-pass") single = r.voxels_per_second;
          if (r.method == "dynamic-two-pass") two = r.voxels_per_second;
        }
        std::cerr << n << "^3: single-pass/two-pass throughput ratio "
                  << (two > 0.0 ? single / two : 0.0) << '\n';
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidConfig ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
