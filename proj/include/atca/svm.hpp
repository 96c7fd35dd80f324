#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "atca/features.hpp"

namespace atca {

/// exp(-gamma * |x - z|^2). Throws kDimensionMismatch on unequal lengths.
double RbfKernel(std::span<const double> x, std::span<const double> z, double gamma);
double RbfKernel(const FeatureVector& x, const FeatureVector& z, double gamma);

enum class WorkingSetRule {
  kMaxViolatingPair,  ///< first-order: both indices are the extreme violators
  kSecondOrder,       ///< first index max violator, second by largest objective decrease
};

struct SvmParams {
  double c = 1.0;
  double gamma = 1.0;
  double weight_pos = 1.0;
  double weight_neg = 1.0;
  double tolerance = 1e-3;
  std::size_t max_iterations = 100000;
  std::size_t cache_bytes = std::size_t{256} << 20;
  WorkingSetRule rule = WorkingSetRule::kMaxViolatingPair;
};

/// Trained soft-margin RBF classifier. decision(x) = sum coef_i K(sv_i, x) + bias,
/// with coef_i = alpha_i * y_i. Only vectors with alpha_i > 0 are kept.
struct SvmModel {
  std::vector<FeatureVector> support_vectors;
  std::vector<double> coef;
  std::vector<std::size_t> support_indices;  ///< rows of the training matrix
  double bias = 0.0;
  double gamma = 1.0;
  double c = 1.0;
  double weight_pos = 1.0;
  double weight_neg = 1.0;
  std::size_t iterations = 0;
  double kkt_gap = 0.0;         ///< max violating-pair gap at termination
  double dual_objective = 0.0;  ///< sum(alpha) - 1/2 alpha'Q alpha

  bool operator==(const SvmModel&) const = default;
};

/// Trains on rows `x` with labels +1/-1 by sequential minimal optimization.
/// Throws kSingleClass, kNonFinite, kDimensionMismatch or kConvergenceFailure.
SvmModel Train(std::span<const FeatureVector> x, std::span<const int> y, const SvmParams& params);

double DecisionValue(const SvmModel& model, const FeatureVector& x);
double DecisionValue(const SvmModel& model, std::span<const double> x);
std::vector<double> DecisionValues(const SvmModel& model, std::span<const FeatureVector> x);

/// Positive-class penalty multiplier n_neg/n_pos, capped; negatives get 1.
double BalancedPositiveWeight(std::size_t n_pos, std::size_t n_neg, double cap = 100.0);

struct TrainConfig {
  std::vector<double> c_grid = {0.125, 0.5, 2.0, 8.0, 32.0, 128.0};
  std::vector<double> gamma_grid = {1.0 / 512, 1.0 / 128, 1.0 / 32, 1.0 / 8, 0.5, 2.0};
  double tolerance = 1e-3;
  std::size_t max_iterations = 100000;
  std::size_t inner_folds = 3;
  /// Rows used by the inner cross-validation; larger sets are subsampled
  /// (stratified, seeded). 0 disables subsampling.
  std::size_t max_search_samples = 0;
  double weight_cap = 100.0;

  void Validate() const;
};

struct GridChoice {
  double c = 0.0;
  double gamma = 0.0;
  double auc = 0.0;
};

/// Picks (C, gamma) maximizing mean inner-CV AUC. Ties go to the smaller C,
/// then the smaller gamma. Deterministic in `seed`.
GridChoice GridSearch(std::span<const FeatureVector> x, std::span<const int> y,
                      const TrainConfig& config, std::uint64_t seed);

/// Grid search followed by a full fit with class weighting.
SvmModel FitWithSearch(std::span<const FeatureVector> x, std::span<const int> y,
                       const TrainConfig& config, std::uint64_t seed);

}  // namespace atca
