#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "atca/core.hpp"
#include "atca/features.hpp"
#include "atca/pipeline.hpp"
#include "atca/random.hpp"
#include "atca/svm.hpp"

namespace atca {

/// Per-cell partition of stroke indices into k folds.
struct FoldAssignment {
  std::size_t k = 0;
  std::vector<int> fold_of;  ///< per corpus index; -1 when the stroke was not assigned
  std::map<CellKey, std::vector<std::vector<std::size_t>>> folds;

  std::span<const std::size_t> Fold(const CellKey& key, std::size_t i) const;
};

/// Uniform random partition of every cell; fold sizes differ by at most one
/// and earlier folds take the remainder. Throws kTooFewStrokes.
FoldAssignment KFoldSplit(const StrokeCorpus& corpus, std::size_t k, std::uint64_t seed);

enum class AttackKind { kRandom, kTargeted };

inline constexpr AttackKind kAttackKinds[] = {AttackKind::kRandom, AttackKind::kTargeted};
inline constexpr TrainingMode kFamilies[] = {TrainingMode::kBaseline, TrainingMode::kAtca};

/// Replay of strokes recorded in setting `source` against the classifier for
/// setting `classifier`. Random attacks replay other users, targeted attacks
/// replay the target user.
struct AttackSpec {
  AttackKind kind = AttackKind::kRandom;
  std::size_t classifier = 0;
  std::size_t source = 0;

  std::string Label() const;  ///< "RA-ab", "TA-ce", ...
};

/// Letter used for the i-th setting in labels: a, b, c, ...
char SettingLetter(std::size_t i);
std::string FamilyName(TrainingMode family);  ///< "C-Baseline" / "C-ATCA"

struct EvalConfig {
  std::size_t folds = 5;
  TrainConfig train;
  NormalizationMode normalization = NormalizationMode::kFaithful;
  std::size_t threads = 1;
  std::uint64_t seed = 1;
  std::vector<StrokeType> types = {StrokeType::kHorizontal, StrokeType::kVertical};
  /// Strokes per second per setting, used to convert collection time into
  /// stroke counts and to estimate the mean inter-stroke time.
  std::vector<double> horizontal_rate = {0.35, 0.30, 0.19, 0.17, 0.17};
  std::vector<double> vertical_rate = {0.71, 0.47, 0.31, 0.30, 0.27};

  const std::vector<double>& Rates(StrokeType t) const {
    return t == StrokeType::kHorizontal ? horizontal_rate : vertical_rate;
  }
};

struct CellStats {
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation over users
  double min = 0.0;
  double max = 0.0;
  std::vector<double> per_user;
};

CellStats Summarize(std::vector<double> per_user);

/// EERs for every (stroke type, classifier family, attack kind, classifier
/// setting x, attack setting y, user, trial).
class MatrixReport {
 public:
  MatrixReport() = default;
  MatrixReport(std::vector<StrokeType> types, std::vector<double> factors, std::vector<UserId> users,
               std::size_t trials);

  double& At(std::size_t type, TrainingMode family, AttackKind kind, std::size_t x, std::size_t y, std::size_t user,
             std::size_t trial);
  double At(std::size_t type, TrainingMode family, AttackKind kind, std::size_t x, std::size_t y, std::size_t user,
            std::size_t trial) const;

  /// Trial-averaged EER per user for one cell.
  std::vector<double> PerUser(std::size_t type, TrainingMode family, AttackKind kind, std::size_t x,
                              std::size_t y) const;
  CellStats Stats(std::size_t type, TrainingMode family, AttackKind kind, std::size_t x, std::size_t y) const;
  bool Complete() const;

  const std::vector<StrokeType>& types() const { return types_; }
  const std::vector<double>& factors() const { return factors_; }
  const std::vector<UserId>& users() const { return users_; }
  std::size_t trials() const { return trials_; }
  std::size_t settings() const { return factors_.size(); }
  const std::vector<double>& values() const { return values_; }

  NormalizationMode normalization = NormalizationMode::kFaithful;
  std::uint64_t seed = 0;

 private:
  std::size_t Index(std::size_t type, TrainingMode family, AttackKind kind, std::size_t x, std::size_t y,
                    std::size_t user, std::size_t trial) const;

  std::vector<StrokeType> types_;
  std::vector<double> factors_;
  std::vector<UserId> users_;
  std::size_t trials_ = 0;
  std::vector<double> values_;
};

/// Trains C-Baseline-x and C-ATCA-x for every user and trial on folds other
/// than the trial, and scores the trial fold against every attack.
MatrixReport ClassifierAttackMatrix(const StrokeCorpus& corpus, const FoldAssignment& folds,
                                    const EvalConfig& config);

struct SystemRow {
  std::string name;
  CellStats random;
  CellStats targeted;
  double mean_inter_stroke_seconds = 0.0;
  std::optional<double> expected_reauth_seconds;  ///< T_s / FRR at the random-attack EER point
};

struct SystemReport {
  std::vector<StrokeType> types;
  std::vector<std::vector<SystemRow>> rows;  ///< [type][system]
};

/// Per-user system EER: the unweighted mean of the attack cells whose
/// classifier and source settings both lie in `subset`.
CellStats SubsetSystemEer(const MatrixReport& matrix, std::size_t type, TrainingMode family, AttackKind kind,
                          std::span<const std::size_t> subset);

/// S-Baseline-x (best random attack over sources, same-setting targeted
/// attack), S-Baseline-improved and S-ATCA (uniform over all cells).
/// Throws kIncompleteMatrix.
SystemReport SystemEval(const MatrixReport& matrix, const EvalConfig& config);

enum class Scenario { kI, kII };

/// Setting subsets (indices) for n = 2..5: Scenario I grows outward from
/// {a, b}, Scenario II fills in between {a, e}.
std::vector<std::vector<std::size_t>> ScenarioSubsets(Scenario scenario);

struct CountPoint {
  std::size_t n = 0;
  std::vector<std::size_t> subset;
  CellStats targeted;
};

/// S-ATCA targeted-attack EER restricted to each scenario subset.
std::vector<CountPoint> SettingsCountExperiment(const MatrixReport& matrix, std::size_t type, Scenario scenario);

struct LearningCurveSpec {
  UserId user = 0;
  StrokeType type = StrokeType::kHorizontal;
  TrainingMode family = TrainingMode::kAtca;
  std::size_t classifier_setting = 4;
  std::size_t trial = 0;
  std::vector<double> budget_minutes = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
  /// false: (C, gamma) is searched once on the largest budget and reused.
  bool search_each_budget = false;
};

struct LearningCurve {
  std::vector<double> minutes;
  std::vector<std::size_t> counts;  ///< positive training strokes per budget
  std::vector<std::string> attacks;
  std::vector<std::vector<double>> eer;  ///< [attack][budget]
  std::vector<std::vector<std::size_t>> positives;  ///< training positives per budget
  std::vector<double> train_seconds;  ///< wall time of the final fit per budget
};

/// Grows the positive training set of one classifier by collection time
/// while the negatives, the test set and the attack sets stay fixed.
LearningCurve RunLearningCurve(const StrokeCorpus& corpus, const FoldAssignment& folds, const LearningCurveSpec& spec,
                               const EvalConfig& config);

struct PersistentAttackResult {
  std::size_t settings = 0;
  std::size_t trials = 0;
  double mean_tries = 0.0;
  std::map<std::size_t, std::size_t> histogram;  ///< tries -> trial count
};

/// A replay robot fixed on one setting tries once per interval while the
/// system draws settings uniformly; counts tries until they coincide.
PersistentAttackResult PersistentAttackSim(std::size_t settings, std::size_t trials, Rng& rng);

}  // namespace atca
