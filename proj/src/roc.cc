#include "atca/roc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "atca/error.hpp"

namespace atca {

RocCurve ComputeRoc(std::span<const double> positive_scores, std::span<const double> negative_scores) {
  if (positive_scores.empty() || negative_scores.empty()) {
    throw Error(ErrorCode::kEmptyScores, "ROC needs both positive and negative scores");
  }
  std::vector<double> pos(positive_scores.begin(), positive_scores.end());
  std::vector<double> neg(negative_scores.begin(), negative_scores.end());
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  std::vector<double> thresholds;
  thresholds.reserve(pos.size() + neg.size() + 2);
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  std::merge(pos.begin(), pos.end(), neg.begin(), neg.end(), std::back_inserter(thresholds));
  thresholds.push_back(std::numeric_limits<double>::infinity());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  RocCurve roc;
  roc.positives = pos.size();
  roc.negatives = neg.size();
  roc.thresholds = thresholds;
  roc.far.reserve(thresholds.size());
  roc.frr.reserve(thresholds.size());
  const auto n_pos = static_cast<double>(pos.size());
  const auto n_neg = static_cast<double>(neg.size());
  for (double tau : thresholds) {
    const auto rejected = std::lower_bound(pos.begin(), pos.end(), tau) - pos.begin();
    const auto below = std::lower_bound(neg.begin(), neg.end(), tau) - neg.begin();
    roc.frr.push_back(static_cast<double>(rejected) / n_pos);
    roc.far.push_back(static_cast<double>(neg.size() - static_cast<std::size_t>(below)) / n_neg);
  }
  // The +inf sentinel must reject everything, including +inf scores.
  roc.frr.back() = 1.0;
  roc.far.back() = 0.0;
  return roc;
}

double ComputeEer(const RocCurve& roc) {
  const std::size_t n = roc.thresholds.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double diff = roc.far[k] - roc.frr[k];
    if (diff == 0.0) return roc.far[k];
    if (diff < 0.0) {
      if (k == 0) return roc.far[0];
      const double prev = roc.far[k - 1] - roc.frr[k - 1];
      const double lambda = prev / (prev - diff);
      return roc.far[k - 1] + lambda * (roc.far[k] - roc.far[k - 1]);
    }
  }
  return roc.far.back();
}

double EerThreshold(const RocCurve& roc) {
  const std::size_t n = roc.thresholds.size();
  auto finite = [&](std::size_t k) {
    if (std::isfinite(roc.thresholds[k])) return roc.thresholds[k];
    return k == 0 ? roc.thresholds[1] : roc.thresholds[n - 2];
  };
  for (std::size_t k = 0; k < n; ++k) {
    const double diff = roc.far[k] - roc.frr[k];
    if (diff == 0.0) return finite(k);
    if (diff < 0.0) {
      if (k == 0) return finite(0);
      const double prev = roc.far[k - 1] - roc.frr[k - 1];
      const double lambda = prev / (prev - diff);
      const double lo = finite(k - 1);
      const double hi = finite(k);
      return lo + lambda * (hi - lo);
    }
  }
  return finite(n - 1);
}

double ComputeEer(std::span<const double> positive_scores, std::span<const double> negative_scores) {
  return ComputeEer(ComputeRoc(positive_scores, negative_scores));
}

double ComputeAuc(std::span<const double> positive_scores, std::span<const double> negative_scores) {
  if (positive_scores.empty() || negative_scores.empty()) {
    throw Error(ErrorCode::kEmptyScores, "AUC needs both positive and negative scores");
  }
  std::vector<double> neg(negative_scores.begin(), negative_scores.end());
  std::sort(neg.begin(), neg.end());
  double wins = 0.0;
  for (double p : positive_scores) {
    const auto lo = std::lower_bound(neg.begin(), neg.end(), p);
    const auto hi = std::upper_bound(lo, neg.end(), p);
    wins += static_cast<double>(lo - neg.begin()) + 0.5 * static_cast<double>(hi - lo);
  }
  return wins / (static_cast<double>(positive_scores.size()) * static_cast<double>(neg.size()));
}

}  // namespace atca
