#pragma once

#include <span>
#include <vector>

namespace atca {

/// FAR/FRR sweep. Convention: higher score means more legitimate and a stroke
/// is accepted when score >= threshold. The first threshold is -inf
/// (FAR = 1, FRR = 0) and the last is +inf (FAR = 0, FRR = 1).
struct RocCurve {
  std::vector<double> thresholds;
  std::vector<double> far;
  std::vector<double> frr;
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Throws kEmptyScores if either list is empty.
RocCurve ComputeRoc(std::span<const double> positive_scores, std::span<const double> negative_scores);

/// Error rate where FAR equals FRR, interpolating linearly between adjacent
/// sampled thresholds when no sampled threshold hits the crossing exactly.
double ComputeEer(const RocCurve& roc);
double ComputeEer(std::span<const double> positive_scores, std::span<const double> negative_scores);

/// Threshold at the FAR = FRR crossing, interpolated like ComputeEer. Infinite
/// sentinels are replaced by the adjacent finite threshold.
double EerThreshold(const RocCurve& roc);

/// Area under the ROC (Mann-Whitney, ties count one half).
double ComputeAuc(std::span<const double> positive_scores, std::span<const double> negative_scores);

}  // namespace atca
