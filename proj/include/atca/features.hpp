#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "atca/core.hpp"

namespace atca {

inline constexpr std::size_t kFeatureCount = 28;

/// Per-stroke descriptor. Index order is fixed and matches FeatureNames().
/// Velocities are in device units per second, accelerations in units/s^2.
enum class Feature : std::size_t {
  kStartX,
  kStartY,
  kStopX,
  kStopY,
  kDurationMs,
  kEndToEndDistance,
  kEndToEndDirection,
  kTrajectoryLength,
  kDistanceRatio,
  kAverageVelocity,
  kVelocityP20,
  kVelocityP50,
  kVelocityP80,
  kAccelP20,
  kAccelP50,
  kAccelP80,
  kMedianVelocityLast3,
  kMaxDeviation,
  kDeviationP20,
  kDeviationP50,
  kDeviationP80,
  kMeanSegmentDirection,
  kMeanResultantLength,
  kMidstrokePressure,
  kMidstrokeArea,
  kMeanPressure,
  kMeanArea,
  kDominantAxisDisplacement,
};

using FeatureVector = std::array<double, kFeatureCount>;
using FeatureMatrix = std::vector<FeatureVector>;

const std::array<std::string_view, kFeatureCount>& FeatureNames();

constexpr double Get(const FeatureVector& v, Feature f) { return v[static_cast<std::size_t>(f)]; }

/// Linear interpolation between closest ranks; q in [0,1]. `values` must be non-empty.
double Percentile(std::vector<double> values, double q);

FeatureVector ExtractFeatures(const RawStroke& stroke);
FeatureMatrix ExtractFeatures(std::span<const RawStroke> strokes);

/// Column-wise min/max used to map features onto [-1, 1].
struct Scaler {
  FeatureVector min{};
  FeatureVector max{};

  bool operator==(const Scaler&) const = default;
};

Scaler FitScaler(std::span<const FeatureVector> matrix);
FeatureVector ApplyScaler(const Scaler& scaler, const FeatureVector& v);
FeatureMatrix ApplyScaler(const Scaler& scaler, std::span<const FeatureVector> matrix);

/// How evaluation matrices are normalized: kFaithful fits a fresh scaler on
/// each test matrix, kTrainStats reuses the training scaler.
enum class NormalizationMode { kFaithful, kTrainStats };

std::string_view ToString(NormalizationMode mode);
NormalizationMode ParseNormalizationMode(std::string_view text);

}  // namespace atca
