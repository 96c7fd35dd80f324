#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "atca/core.hpp"
#include "atca/features.hpp"
#include "atca/random.hpp"
#include "atca/svm.hpp"

namespace atca {

/// kBaseline: negatives are other users in the same setting.
/// kAtca: negatives also include the user's own strokes in the other settings
/// and other users' strokes in every setting.
enum class TrainingMode { kBaseline, kAtca };

std::string_view ToString(TrainingMode mode);
TrainingMode ParseTrainingMode(std::string_view text);

/// Centers of n distinct bins drawn uniformly without replacement from m
/// equal bins over [lo, hi], sorted ascending. Throws kBadBinCounts.
std::vector<ScreenSetting> SampleSettings(Axis axis, double lo, double hi, std::size_t m, std::size_t n, Rng& rng);

struct TrainingSets {
  std::vector<std::size_t> positives;  ///< corpus indices
  std::vector<std::size_t> negatives;
};

/// Assembles training sets for c(u, s, t). `own_settings` restricts which of
/// the user's other settings contribute ATCA negatives (empty: every setting
/// in the corpus). `include` filters individual strokes, e.g. to training folds.
TrainingSets BuildTrainingSets(const StrokeCorpus& corpus, UserId user, const ScreenSetting& setting,
                               StrokeType type, TrainingMode mode, std::span<const ScreenSetting> own_settings = {},
                               const std::function<bool(std::size_t)>& include = {});

struct RegistrationConfig {
  double range_lo = 0.75;
  double range_hi = 1.25;
  std::size_t bins = 5;
  std::size_t sampled = 5;
  /// Axis assigned to settings returned by SampleSettings. Classifiers are
  /// always keyed by the axis along which their stroke type moves.
  Axis axis = Axis::kY;
  TrainingMode mode = TrainingMode::kAtca;
  TrainConfig train;
  /// Fraction of each class held out to place the EER-point threshold.
  double holdout_fraction = 0.2;
  /// Fixed S(u). Empty means sample `sampled` of `bins` per user.
  std::vector<double> factors = {0.8, 0.9, 1.0, 1.1, 1.2};

  void Validate() const;
};

struct BankEntry {
  ScreenSetting setting;
  StrokeType type = StrokeType::kHorizontal;
  SvmModel model;
  Scaler scaler;
  double threshold = 0.0;

  bool operator==(const BankEntry&) const = default;
};

/// c(u, s, t) for every s in S(u) and both stroke types.
struct ClassifierBank {
  UserId user = 0;
  TrainingMode mode = TrainingMode::kAtca;
  std::vector<double> factors;  ///< S(u), ascending
  std::vector<BankEntry> entries;

  /// Entry for a scheduled factor and stroke type, or nullptr.
  const BankEntry* Find(double factor, StrokeType type) const;
  bool operator==(const ClassifierBank&) const = default;
};

ClassifierBank RegisterUser(const StrokeCorpus& corpus, UserId user, const RegistrationConfig& config,
                            std::uint64_t seed, std::size_t threads = 1);

/// One setting per interval. A scheduled factor distorts the axis along
/// which the active stroke type moves.
struct SettingSchedule {
  double interval_seconds = 30.0;
  std::vector<ScreenSetting> intervals;

  std::size_t IntervalOf(double seconds) const;
};

SettingSchedule ScheduleSettings(std::span<const ScreenSetting> settings, double session_seconds,
                                 double interval_seconds, Rng& rng);

struct StrokeDecision {
  double score = 0.0;
  bool accept = false;
  std::size_t interval = 0;
  ScreenSetting setting;
  StrokeType type = StrokeType::kHorizontal;
};

/// Routes the stroke to c(u, setting of the interval containing `seconds`,
/// inferred type) and thresholds its score (accept iff score >= threshold).
StrokeDecision AuthenticateStroke(const ClassifierBank& bank, const SettingSchedule& schedule, double seconds,
                                  const RawStroke& stroke);

struct TimedStroke {
  double seconds = 0.0;  ///< since session start
  RawStroke stroke;
};

struct SessionPolicy {
  std::size_t consecutive_reject_limit = 3;
};

struct SessionResult {
  std::vector<StrokeDecision> decisions;
  bool lockout = false;
  std::optional<std::size_t> lockout_after;  ///< index of the stroke that triggered lockout
  std::optional<double> time_to_first_decision;
  std::optional<double> mean_inter_stroke_seconds;
};

SessionResult RunSession(const ClassifierBank& bank, const SettingSchedule& schedule,
                         std::span<const TimedStroke> stream, const SessionPolicy& policy = {});

}  // namespace atca
