#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "dynimg/volume.hpp"

namespace dynimg {

/// Pairwise ranking objective over T ordered feature vectors of dimension m:
///
///   E(d) = lambda/2 |d|^2 + 2/(T(T-1)) * sum_{q>t} max(0, 1 - <d,V_q> + <d,V_t>)
class RankSvmProblem {
 public:
  /// features: T rows of equal length m. Throws InvalidDepth for T < 2,
  /// NegativeLambda for lambda < 0, DimensionMismatch for ragged rows.
  RankSvmProblem(std::vector<std::vector<double>> features, double lambda);

  std::size_t depth() const noexcept { return depth_; }
  std::size_t dimension() const noexcept { return dim_; }
  double lambda() const noexcept { return lambda_; }

  /// Feature vector V_t, 1-based.
  std::span<const double> feature(std::size_t t) const;

 private:
  std::size_t depth_ = 0;
  std::size_t dim_ = 0;
  double lambda_ = 0.0;
  std::vector<double> features_;  // depth_ x dim_, row-major
};

inline constexpr double kDefaultLambda = 1e-3;

/// Features are the flattened prefix-mean planes of `v`.
RankSvmProblem build_problem(const Volume3D& v, double lambda = kDefaultLambda);

/// <d, V_t> for t = 1..T.
std::vector<double> scores(std::span<const double> d, const RankSvmProblem& p);

double objective(std::span<const double> d, const RankSvmProblem& p);

/// lambda*d - 2/(T(T-1)) * sum over pairs with positive hinge of (V_q - V_t).
/// A hinge argument of exactly zero contributes nothing.
std::vector<double> subgradient(std::span<const double> d, const RankSvmProblem& p);

struct SolveOptions {
  std::size_t iterations = 100;
  /// Step at iteration k is step0 / sqrt(k).
  double step0 = 1.0;
};

struct RankSvmSolution {
  std::vector<double> d;
  /// objective_trace[k-1] = E(d_k) for the k-th iterate.
  std::vector<double> objective_trace;
  std::size_t iterations = 0;
  /// 1-based iteration of the returned iterate.
  std::size_t best_iteration = 0;
  double best_objective = 0.0;
  std::string step_schedule;
};

/// Subgradient descent from d_0 = 0. Returns the iterate d_1..d_K with the
/// lowest objective. Throws InvalidArgument for zero iterations or a
/// non-positive step.
RankSvmSolution solve(const RankSvmProblem& p, const SolveOptions& opts);

}  // namespace dynimg
