#include "dynimg/ranksvm.hpp"

#include <cmath>
#include <cstdint>
#include <sstream>

#include "dynimg/error.hpp"
#include "dynimg/rankpool.hpp"

namespace dynimg {

namespace {

void check_dimension(std::span<const double> d, const RankSvmProblem& p) {
  if (d.size() != p.dimension()) {
    throw Error(ErrorCode::DimensionMismatch,
                "weight vector has dimension " + std::to_string(d.size()) + ", problem has " +
                    std::to_string(p.dimension()));
  }
}

double pair_scale(std::size_t T) {
  return 2.0 / (static_cast<double>(T) * static_cast<double>(T - 1));
}

}  // namespace

RankSvmProblem::RankSvmProblem(std::vector<std::vector<double>> features, double lambda)
    : depth_(features.size()), lambda_(lambda) {
  if (depth_ < 2) {
    throw Error(ErrorCode::InvalidDepth,
                "ranking needs at least 2 frames, got " + std::to_string(depth_));
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::NegativeLambda, "lambda must be finite and >= 0");
  }
  dim_ = features.front().size();
  if (dim_ == 0) {
    throw Error(ErrorCode::DimensionMismatch, "features are empty");
  }
  features_.reserve(depth_ * dim_);
  for (std::size_t t = 0; t < depth_; ++t) {
    if (features[t].size() != dim_) {
      throw Error(ErrorCode::DimensionMismatch,
                  "feature " + std::to_string(t + 1) + " has dimension " +
                      std::to_string(features[t].size()) + ", expected " + std::to_string(dim_));
    }
    for (double x : features[t]) {
      if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteValue, "non-finite feature value");
    }
    features_.insert(features_.end(), features[t].begin(), features[t].end());
  }
}

std::span<const double> RankSvmProblem::feature(std::size_t t) const {
  if (t < 1 || t > depth_) {
    throw Error(ErrorCode::IndexOutOfRange, "feature index " + std::to_string(t));
  }
  return std::span<const double>(features_).subspan((t - 1) * dim_, dim_);
}

RankSvmProblem build_problem(const Volume3D& v, double lambda) {
  if (v.depth() < 2) {
    throw Error(ErrorCode::InvalidDepth, "exact rank pooling needs depth >= 2");
  }
  if (lambda < 0.0) {
    throw Error(ErrorCode::NegativeLambda, "lambda must be >= 0");
  }
  std::vector<std::vector<double>> features;
  features.reserve(v.depth());
  for (const Plane2D& mean : temporal_averages(v)) {
    const auto vals = mean.values();
    features.emplace_back(vals.begin(), vals.end());
  }
  return RankSvmProblem(std::move(features), lambda);
}

std::vector<double> scores(std::span<const double> d, const RankSvmProblem& p) {
  check_dimension(d, p);
  std::vector<double> s(p.depth(), 0.0);
  for (std::size_t t = 1; t <= p.depth(); ++t) {
    const auto v = p.feature(t);
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += d[i] * v[i];
    s[t - 1] = acc;
  }
  return s;
}

double objective(std::span<const double> d, const RankSvmProblem& p) {
  const auto s = scores(d, p);
  const std::size_t T = p.depth();
  double hinge = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t q = t + 1; q < T; ++q) {
      const double arg = 1.0 - s[q] + s[t];
      if (arg > 0.0) hinge += arg;
    }
  }
  double norm2 = 0.0;
  for (double x : d) norm2 += x * x;
  return 0.5 * p.lambda() * norm2 + pair_scale(T) * hinge;
}

std::vector<double> subgradient(std::span<const double> d, const RankSvmProblem& p) {
  const auto s = scores(d, p);
  const std::size_t T = p.depth();

  // Net signed count per frame: +1 each time it is the later frame of an
  // active pair, -1 each time it is the earlier one. The hinge sum is then
  // sum_t count_t * V_t.
  std::vector<std::int64_t> count(T, 0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t q = t + 1; q < T; ++q) {
      if (1.0 - s[q] + s[t] > 0.0) {
        ++count[q];
        --count[t];
      }
    }
  }

  // Sum the integer-weighted features before applying the pair scale so that
  // equal features cancel exactly.
  std::vector<double> hinge(d.size(), 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    if (count[t] == 0) continue;
    const auto c = static_cast<double>(count[t]);
    const auto v = p.feature(t + 1);
    for (std::size_t i = 0; i < hinge.size(); ++i) hinge[i] += c * v[i];
  }
  const double scale = pair_scale(T);
  std::vector<double> g(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) g[i] = p.lambda() * d[i] - scale * hinge[i];
  return g;
}

RankSvmSolution solve(const RankSvmProblem& p, const SolveOptions& opts) {
  if (opts.iterations == 0) {
    throw Error(ErrorCode::InvalidArgument, "iterations must be >= 1");
  }
  if (!(opts.step0 > 0.0) || !std::isfinite(opts.step0)) {
    throw Error(ErrorCode::InvalidArgument, "step0 must be a positive finite number");
  }

  RankSvmSolution sol;
  std::vector<double> d(p.dimension(), 0.0);
  sol.objective_trace.reserve(opts.iterations);

  for (std::size_t k = 1; k <= opts.iterations; ++k) {
    const auto g = subgradient(d, p);
    const double step = opts.step0 / std::sqrt(static_cast<double>(k));
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= step * g[i];
    const double e = objective(d, p);
    sol.objective_trace.push_back(e);
    if (k == 1 || e < sol.best_objective) {
      sol.best_objective = e;
      sol.best_iteration = k;
      sol.d = d;
    }
  }
  sol.iterations = opts.iterations;
  std::ostringstream schedule;
  schedule << "step0/sqrt(k), step0=" << opts.step0;
  sol.step_schedule = schedule.str();
  return sol;
}

}  // namespace dynimg
