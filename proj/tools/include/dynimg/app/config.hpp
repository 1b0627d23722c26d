#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dynimg/rankpool.hpp"
#include "dynimg/ranksvm.hpp"
#include "dynimg/volume.hpp"

namespace dynimg::app {

enum class Method { Dynamic, Avg, Max, Exact };
enum class OutputFormat { Png8, Png16, RawF32 };

const std::map<std::string, Method>& method_names();
const std::map<std::string, PoolStrategy>& strategy_names();
const std::map<std::string, ChannelMode>& channel_mode_names();
const std::map<std::string, OutputFormat>& format_names();

std::string to_string(Method m);
std::string to_string(PoolStrategy s);
std::string to_string(OutputFormat f);

struct ExactParams {
  double lambda = kDefaultLambda;
  std::size_t iterations = 100;
  double step0 = 1.0;
};

struct JobConfig {
  /// Paths or glob patterns, expanded in order.
  std::vector<std::string> inputs;
  Method method = Method::Dynamic;
  PoolStrategy strategy = PoolStrategy::SinglePass;
  ChannelMode channel_mode = ChannelMode::Single;
  /// Unset means: normalise for PNG output, keep raw values for raw-f32.
  std::optional<bool> normalize;
  std::filesystem::path output_dir = ".";
  OutputFormat format = OutputFormat::RawF32;
  ExactParams exact;
  std::size_t workers = 1;
  /// Empty means output_dir / "manifest.jsonl".
  std::filesystem::path manifest;

  bool effective_normalize() const;
  std::filesystem::path manifest_path() const;
};

/// Throws Error(InvalidConfig) on inconsistent settings, e.g. PNG output with
/// normalisation switched off.
void validate(const JobConfig& config);
void validate(const ExactParams& params);

/// Expands glob patterns; a pattern with no match is kept verbatim so the
/// failure is reported against that input.
std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& patterns);

/// File name without ".nii" / ".nii.gz" and other extensions.
std::string input_stem(const std::filesystem::path& path);

std::string output_extension(OutputFormat f);

}  // namespace dynimg::app
