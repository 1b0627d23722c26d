#include "dynimg/app/config.hpp"

#include <glob.h>

#include <cmath>

#include "dynimg/error.hpp"

namespace dynimg::app {

const std::map<std::string, Method>& method_names() {
  static const std::map<std::string, Method> names{
      {"dynamic", Method::Dynamic}, {"avg", Method::Avg}, {"max", Method::Max},
      {"exact", Method::Exact}};
  return names;
}

const std::map<std::string, PoolStrategy>& strategy_names() {
  static const std::map<std::string, PoolStrategy> names{
      {"single-pass", PoolStrategy::SinglePass}, {"two-pass", PoolStrategy::TwoPass}};
  return names;
}

const std::map<std::string, ChannelMode>& channel_mode_names() {
  static const std::map<std::string, ChannelMode> names{
      {"single", ChannelMode::Single},
      {"replicate3", ChannelMode::Replicate3},
      {"segment3", ChannelMode::Segment3}};
  return names;
}

const std::map<std::string, OutputFormat>& format_names() {
  static const std::map<std::string, OutputFormat> names{
      {"png8", OutputFormat::Png8}, {"png16", OutputFormat::Png16}, {"raw-f32", OutputFormat::RawF32}};
  return names;
}

namespace {

template <typename Enum>
std::string name_of(const std::map<std::string, Enum>& names, Enum value) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "unknown";
}

}  // namespace

std::string to_string(Method m) { return name_of(method_names(), m); }
std::string to_string(PoolStrategy s) { return name_of(strategy_names(), s); }
std::string to_string(OutputFormat f) { return name_of(format_names(), f); }

bool JobConfig::effective_normalize() const {
  return normalize.value_or(format != OutputFormat::RawF32);
}

std::filesystem::path JobConfig::manifest_path() const {
  return manifest.empty() ? output_dir / "manifest.jsonl" : manifest;
}

void validate(const ExactParams& params) {
  if (!(params.lambda >= 0.0) || !std::isfinite(params.lambda)) {
    throw Error(ErrorCode::InvalidConfig, "lambda must be a finite value >= 0");
  }
  if (params.iterations == 0) {
    throw Error(ErrorCode::InvalidConfig, "iterations must be positive");
  }
  if (!(params.step0 > 0.0) || !std::isfinite(params.step0)) {
    throw Error(ErrorCode::InvalidConfig, "step0 must be positive");
  }
}

void validate(const JobConfig& config) {
  if (config.inputs.empty()) {
    throw Error(ErrorCode::InvalidConfig, "no inputs given");
  }
  if (config.format != OutputFormat::RawF32 && !config.effective_normalize()) {
    throw Error(ErrorCode::InvalidConfig, "PNG output requires normalisation");
  }
  if (config.workers == 0) {
    throw Error(ErrorCode::InvalidConfig, "workers must be at least 1");
  }
  if (config.method == Method::Exact) validate(config.exact);
}

std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& patterns) {
  std::vector<std::filesystem::path> out;
  for (const auto& pattern : patterns) {
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), GLOB_NOCHECK, nullptr, &g);
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
    } else {
      out.emplace_back(pattern);
    }
    globfree(&g);
  }
  return out;
}

std::string input_stem(const std::filesystem::path& path) {
  std::string name = path.filename().string();
  for (const std::string suffix : {".gz", ".nii", ".f32", ".png"}) {
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      name.erase(name.size() - suffix.size());
    }
  }
  return name;
}

std::string output_extension(OutputFormat f) {
  return f == OutputFormat::RawF32 ? ".f32" : ".png";
}

}  // namespace dynimg::app
