#include "atca/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include "atca/error.hpp"
#include "atca/parallel.hpp"
#include "atca/roc.hpp"

namespace atca {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::size_t FamilyIndex(TrainingMode f) { return f == TrainingMode::kBaseline ? 0 : 1; }
std::size_t KindIndex(AttackKind k) { return k == AttackKind::kRandom ? 0 : 1; }

}  // namespace

std::span<const std::size_t> FoldAssignment::Fold(const CellKey& key, std::size_t i) const {
  auto it = folds.find(key);
  if (it == folds.end() || i >= it->second.size()) return {};
  return it->second[i];
}

FoldAssignment KFoldSplit(const StrokeCorpus& corpus, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::kInvalidConfig, "need at least 2 folds");
  FoldAssignment out;
  out.k = k;
  out.fold_of.assign(corpus.size(), -1);
  for (const CellKey& key : corpus.Keys()) {
    auto cell = corpus.Cell(key);
    if (cell.size() < k) {
      throw Error(ErrorCode::kTooFewStrokes, "cell " + std::to_string(key.user) + "/" + key.setting.Label() + "/" +
                                                 std::string(ToString(key.type)) + " has " +
                                                 std::to_string(cell.size()) + " strokes, need " + std::to_string(k));
    }
    std::vector<std::size_t> order(cell.begin(), cell.end());
    Rng rng(DeriveSeed({seed, static_cast<std::uint64_t>(key.user), static_cast<std::uint64_t>(key.setting.axis),
                        static_cast<std::uint64_t>(key.setting.FactorKey()), static_cast<std::uint64_t>(key.type)}));
    std::shuffle(order.begin(), order.end(), rng);
    auto& parts = out.folds[key];
    parts.assign(k, {});
    for (std::size_t p = 0; p < order.size(); ++p) {
      parts[p % k].push_back(order[p]);
      out.fold_of[order[p]] = static_cast<int>(p % k);
    }
    for (auto& part : parts) std::sort(part.begin(), part.end());
  }
  return out;
}

char SettingLetter(std::size_t i) { return static_cast<char>('a' + i); }

std::string FamilyName(TrainingMode family) {
  return family == TrainingMode::kBaseline ? "C-Baseline" : "C-ATCA";
}

std::string AttackSpec::Label() const {
  std::string s = kind == AttackKind::kRandom ? "RA-" : "TA-";
  s += SettingLetter(classifier);
  s += SettingLetter(source);
  return s;
}

CellStats Summarize(std::vector<double> per_user) {
  CellStats s;
  s.per_user = std::move(per_user);
  if (s.per_user.empty()) {
    s.mean = s.std = s.min = s.max = kNaN;
    return s;
  }
  const auto n = static_cast<double>(s.per_user.size());
  s.mean = std::accumulate(s.per_user.begin(), s.per_user.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : s.per_user) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / n);
  auto [lo, hi] = std::minmax_element(s.per_user.begin(), s.per_user.end());
  s.min = *lo;
  s.max = *hi;
  // Rounding in the sum can push the mean a hair outside the observed range.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

MatrixReport::MatrixReport(std::vector<StrokeType> types, std::vector<double> factors, std::vector<UserId> users,
                           std::size_t trials)
    : types_(std::move(types)), factors_(std::move(factors)), users_(std::move(users)), trials_(trials) {
  values_.assign(types_.size() * 2 * 2 * factors_.size() * factors_.size() * users_.size() * trials_, kNaN);
}

std::size_t MatrixReport::Index(std::size_t type, TrainingMode family, AttackKind kind, std::size_t x, std::size_t y,
                                std::size_t user, std::size_t trial) const {
  const std::size_t m = factors_.size();
  std::size_t i = type;
  i = i * 2 + FamilyIndex(family);
  i = i * 2 + KindIndex(kind);
  i = i * m + x;
  i = i * m + y;
  i = i * users_.size() + user;
  return i * trials_ + trial;
}

double& MatrixReport::At(std::size_t type, TrainingMode family, AttackKind kind, std::size_t x, std::size_t y,
                         std::size_t user, std::size_t trial) {
  return values_[Index(type, family, kind, x, y, user, trial)];
}

double MatrixReport::At(std::size_t type, TrainingMode family, AttackKind kind, std::size_t x, std::size_t y,
                        std::size_t user, std::size_t trial) const {
  return values_[Index(type, family, kind, x, y, user, trial)];
}

std::vector<double> MatrixReport::PerUser(std::size_t type, TrainingMode family, AttackKind kind, std::size_t x,
                                          std::size_t y) const {
  std::vector<double> out(users_.size(), 0.0);
  for (std::size_t u = 0; u < users_.size(); ++u) {
    double sum = 0.0;
    for (std::size_t i = 0; i < trials_; ++i) sum += At(type, family, kind, x, y, u, i);
    out[u] = sum / static_cast<double>(trials_);
  }
  return out;
}

CellStats MatrixReport::Stats(std::size_t type, TrainingMode family, AttackKind kind, std::size_t x,
                              std::size_t y) const {
  return Summarize(PerUser(type, family, kind, x, y));
}

bool MatrixReport::Complete() const {
  return !values_.empty() && std::none_of(values_.begin(), values_.end(), [](double v) { return std::isnan(v); });
}

MatrixReport ClassifierAttackMatrix(const StrokeCorpus& corpus, const FoldAssignment& folds,
                                    const EvalConfig& config) {
  config.train.Validate();
  if (config.types.empty()) throw Error(ErrorCode::kInvalidConfig, "no stroke types selected");
  if (folds.fold_of.size() != corpus.size()) {
    throw Error(ErrorCode::kInvalidConfig, "fold assignment does not match corpus");
  }
  const std::vector<UserId> users = corpus.Users();
  if (users.size() < 2) throw Error(ErrorCode::kNoOtherUsers, "attack matrix needs at least 2 users");

  std::vector<std::vector<ScreenSetting>> settings;
  for (StrokeType t : config.types) settings.push_back(corpus.Settings(t));
  std::vector<double> factors;
  for (const ScreenSetting& s : settings.front()) factors.push_back(s.factor);
  for (const auto& list : settings) {
    if (list.size() != factors.size() ||
        !std::equal(list.begin(), list.end(), factors.begin(),
                    [](const ScreenSetting& s, double f) { return ScreenSetting{s.axis, f} == s; })) {
      throw Error(ErrorCode::kInvalidConfig, "stroke types must share the same setting factors");
    }
  }
  if (factors.size() < 2) throw Error(ErrorCode::kInvalidConfig, "attack matrix needs at least 2 settings");

  const std::size_t k = folds.k;
  const std::size_t m = factors.size();
  MatrixReport report(config.types, factors, users, k);
  report.normalization = config.normalization;
  report.seed = config.seed;

  const std::vector<FeatureVector> features = ExtractFeatures(corpus.strokes());

  // Test pools: every stroke of one type in one fold, across users and settings.
  struct Pool {
    std::vector<std::size_t> members;
    std::vector<FeatureVector> scaled;  // faithful mode only
  };
  std::vector<std::vector<Pool>> pools(config.types.size(), std::vector<Pool>(k));
  std::vector<std::size_t> pool_pos(corpus.size(), 0);
  for (std::size_t ti = 0; ti < config.types.size(); ++ti) {
    for (std::size_t idx = 0; idx < corpus.size(); ++idx) {
      const int f = folds.fold_of[idx];
      if (f < 0 || corpus.at(idx).stroke_type != config.types[ti]) continue;
      Pool& pool = pools[ti][static_cast<std::size_t>(f)];
      pool_pos[idx] = pool.members.size();
      pool.members.push_back(idx);
    }
    if (config.normalization == NormalizationMode::kFaithful) {
      for (Pool& pool : pools[ti]) {
        std::vector<FeatureVector> raw;
        raw.reserve(pool.members.size());
        for (std::size_t idx : pool.members) raw.push_back(features[idx]);
        if (!raw.empty()) pool.scaled = ApplyScaler(FitScaler(raw), raw);
      }
    }
  }

  const std::size_t task_count = config.types.size() * users.size() * k * 2 * m;
  ParallelFor(task_count, config.threads, [&](std::size_t j) {
    std::size_t rest = j;
    const std::size_t x = rest % m;
    rest /= m;
    const TrainingMode family = kFamilies[rest % 2];
    rest /= 2;
    const std::size_t trial = rest % k;
    rest /= k;
    const std::size_t ui = rest % users.size();
    const std::size_t ti = rest / users.size();
    const StrokeType type = config.types[ti];
    const UserId user = users[ui];
    const ScreenSetting& sx = settings[ti][x];

    auto in_training = [&](std::size_t idx) {
      const int f = folds.fold_of[idx];
      return f >= 0 && static_cast<std::size_t>(f) != trial;
    };
    const TrainingSets sets = BuildTrainingSets(corpus, user, sx, type, family, {}, in_training);
    std::vector<FeatureVector> train_x;
    std::vector<int> train_y;
    train_x.reserve(sets.positives.size() + sets.negatives.size());
    for (std::size_t idx : sets.positives) {
      train_x.push_back(features[idx]);
      train_y.push_back(1);
    }
    for (std::size_t idx : sets.negatives) {
      train_x.push_back(features[idx]);
      train_y.push_back(-1);
    }
    const Scaler scaler = FitScaler(train_x);
    const FeatureMatrix scaled = ApplyScaler(scaler, train_x);
    const std::uint64_t task_seed =
        DeriveSeed({config.seed, static_cast<std::uint64_t>(type), static_cast<std::uint64_t>(user), trial,
                    FamilyIndex(family), static_cast<std::uint64_t>(sx.FactorKey())});
    const SvmModel model = FitWithSearch(scaled, train_y, config.train, task_seed);

    const Pool& pool = pools[ti][trial];
    std::vector<double> scores(pool.members.size());
    for (std::size_t p = 0; p < pool.members.size(); ++p) {
      scores[p] = config.normalization == NormalizationMode::kFaithful
                      ? DecisionValue(model, pool.scaled[p])
                      : DecisionValue(model, ApplyScaler(scaler, features[pool.members[p]]));
    }
    auto gather = [&](UserId v, std::size_t y, std::vector<double>& out) {
      for (std::size_t idx : folds.Fold({v, settings[ti][y], type}, trial)) out.push_back(scores[pool_pos[idx]]);
    };
    std::vector<double> positives;
    gather(user, x, positives);
    for (std::size_t y = 0; y < m; ++y) {
      std::vector<double> random;
      std::vector<double> targeted;
      for (UserId v : users) {
        if (v != user) gather(v, y, random);
      }
      gather(user, y, targeted);
      report.At(ti, family, AttackKind::kRandom, x, y, ui, trial) = ComputeEer(positives, random);
      report.At(ti, family, AttackKind::kTargeted, x, y, ui, trial) = ComputeEer(positives, targeted);
    }
  });
  return report;
}

CellStats SubsetSystemEer(const MatrixReport& matrix, std::size_t type, TrainingMode family, AttackKind kind,
                          std::span<const std::size_t> subset) {
  if (subset.empty()) throw Error(ErrorCode::kInvalidConfig, "empty setting subset");
  for (std::size_t s : subset) {
    if (s >= matrix.settings()) throw Error(ErrorCode::kInvalidConfig, "setting index out of range");
  }
  std::vector<double> per_user(matrix.users().size(), 0.0);
  for (std::size_t x : subset) {
    for (std::size_t y : subset) {
      const std::vector<double> cell = matrix.PerUser(type, family, kind, x, y);
      for (std::size_t u = 0; u < per_user.size(); ++u) per_user[u] += cell[u];
    }
  }
  const auto cells = static_cast<double>(subset.size() * subset.size());
  for (double& v : per_user) v /= cells;
  return Summarize(std::move(per_user));
}

SystemReport SystemEval(const MatrixReport& matrix, const EvalConfig& config) {
  if (!matrix.Complete()) throw Error(ErrorCode::kIncompleteMatrix, "attack matrix has missing cells");
  const std::size_t m = matrix.settings();
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), 0);

  SystemReport out;
  out.types = matrix.types();
  for (std::size_t ti = 0; ti < matrix.types().size(); ++ti) {
    const std::vector<double>& rates = config.Rates(matrix.types()[ti]);
    auto inter_stroke = [&](std::span<const std::size_t> idx) {
      double sum = 0.0;
      for (std::size_t s : idx) sum += s < rates.size() ? rates[s] : rates.back();
      return static_cast<double>(idx.size()) / sum;
    };
    auto finish = [&](SystemRow& row, double ts) {
      row.mean_inter_stroke_seconds = ts;
      if (row.random.mean > 0.0) row.expected_reauth_seconds = ts / row.random.mean;
    };

    std::vector<SystemRow> rows;
    for (std::size_t x = 0; x < m; ++x) {
      SystemRow row;
      row.name = std::string("S-Baseline-") + SettingLetter(x);
      std::vector<double> worst(matrix.users().size(), 0.0);
      for (std::size_t y = 0; y < m; ++y) {
        const std::vector<double> cell = matrix.PerUser(ti, TrainingMode::kBaseline, AttackKind::kRandom, x, y);
        for (std::size_t u = 0; u < worst.size(); ++u) worst[u] = std::max(worst[u], cell[u]);
      }
      row.random = Summarize(std::move(worst));
      row.targeted = matrix.Stats(ti, TrainingMode::kBaseline, AttackKind::kTargeted, x, x);
      const std::size_t one[] = {x};
      finish(row, inter_stroke(one));
      rows.push_back(std::move(row));
    }
    for (TrainingMode family : kFamilies) {
      SystemRow row;
      row.name = family == TrainingMode::kBaseline ? "S-Baseline-improved" : "S-ATCA";
      row.random = SubsetSystemEer(matrix, ti, family, AttackKind::kRandom, all);
      row.targeted = SubsetSystemEer(matrix, ti, family, AttackKind::kTargeted, all);
      finish(row, inter_stroke(all));
      rows.push_back(std::move(row));
    }
    out.rows.push_back(std::move(rows));
  }
  return out;
}

std::vector<std::vector<std::size_t>> ScenarioSubsets(Scenario scenario) {
  if (scenario == Scenario::kI) return {{0, 1}, {0, 1, 2}, {0, 1, 2, 3}, {0, 1, 2, 3, 4}};
  return {{0, 4}, {0, 2, 4}, {0, 1, 2, 4}, {0, 1, 2, 3, 4}};
}

std::vector<CountPoint> SettingsCountExperiment(const MatrixReport& matrix, std::size_t type, Scenario scenario) {
  if (!matrix.Complete()) throw Error(ErrorCode::kIncompleteMatrix, "attack matrix has missing cells");
  if (matrix.settings() < 5) throw Error(ErrorCode::kInvalidConfig, "settings-count experiment needs 5 settings");
  std::vector<CountPoint> out;
  for (const auto& subset : ScenarioSubsets(scenario)) {
    CountPoint p;
    p.n = subset.size();
    p.subset = subset;
    p.targeted = SubsetSystemEer(matrix, type, TrainingMode::kAtca, AttackKind::kTargeted, subset);
    out.push_back(std::move(p));
  }
  return out;
}

LearningCurve RunLearningCurve(const StrokeCorpus& corpus, const FoldAssignment& folds, const LearningCurveSpec& spec,
                               const EvalConfig& config) {
  config.train.Validate();
  const std::vector<ScreenSetting> settings = corpus.Settings(spec.type);
  if (spec.classifier_setting >= settings.size()) {
    throw Error(ErrorCode::kInvalidConfig, "classifier setting index out of range");
  }
  if (spec.trial >= folds.k) throw Error(ErrorCode::kInvalidConfig, "trial index out of range");
  if (spec.budget_minutes.empty() || !std::is_sorted(spec.budget_minutes.begin(), spec.budget_minutes.end())) {
    throw Error(ErrorCode::kInvalidConfig, "budgets must be non-empty and ascending");
  }
  const std::vector<UserId> users = corpus.Users();
  const std::vector<double>& rates = config.Rates(spec.type);
  const double rate = rates[std::min(spec.classifier_setting, rates.size() - 1)];
  const ScreenSetting& sx = settings[spec.classifier_setting];

  auto in_training = [&](std::size_t idx) {
    const int f = folds.fold_of[idx];
    return f >= 0 && static_cast<std::size_t>(f) != spec.trial;
  };
  TrainingSets sets = BuildTrainingSets(corpus, spec.user, sx, spec.type, spec.family, {}, in_training);
  // Collection order: a fixed random permutation of the training positives;
  // each budget takes a prefix, so sets are nested.
  Rng rng(DeriveSeed({config.seed, 0x6c63UL, static_cast<std::uint64_t>(spec.user), spec.trial}));
  std::shuffle(sets.positives.begin(), sets.positives.end(), rng);

  const std::vector<FeatureVector> features = ExtractFeatures(corpus.strokes());
  std::vector<std::size_t> pool;
  for (std::size_t idx = 0; idx < corpus.size(); ++idx) {
    if (folds.fold_of[idx] == static_cast<int>(spec.trial) && corpus.at(idx).stroke_type == spec.type) {
      pool.push_back(idx);
    }
  }
  std::vector<FeatureVector> pool_raw;
  for (std::size_t idx : pool) pool_raw.push_back(features[idx]);
  const Scaler pool_scaler = FitScaler(pool_raw);

  LearningCurve curve;
  const std::size_t m = settings.size();
  for (AttackKind kind : kAttackKinds) {
    for (std::size_t y = 0; y < m; ++y) {
      curve.attacks.push_back(AttackSpec{kind, spec.classifier_setting, y}.Label());
    }
  }
  curve.eer.assign(curve.attacks.size(), {});

  const std::size_t floor_count = std::max<std::size_t>(config.train.inner_folds, 2);
  auto budget_count = [&](double minutes) {
    const auto count = static_cast<std::size_t>(std::llround(minutes * 60.0 * rate));
    return std::clamp(count, std::min(floor_count, sets.positives.size()), sets.positives.size());
  };
  const std::size_t final_count = budget_count(spec.budget_minutes.back());
  std::optional<GridChoice> fixed_choice;
  for (double minutes : spec.budget_minutes) {
    const std::size_t count = budget_count(minutes);
    curve.minutes.push_back(minutes);
    curve.counts.push_back(count);
    curve.positives.emplace_back(sets.positives.begin(), sets.positives.begin() + static_cast<std::ptrdiff_t>(count));

    std::vector<FeatureVector> train_x;
    std::vector<int> train_y;
    for (std::size_t k = 0; k < count; ++k) {
      train_x.push_back(features[sets.positives[k]]);
      train_y.push_back(1);
    }
    for (std::size_t idx : sets.negatives) {
      train_x.push_back(features[idx]);
      train_y.push_back(-1);
    }
    const Scaler scaler = FitScaler(train_x);
    const FeatureMatrix scaled = ApplyScaler(scaler, train_x);
    if (spec.search_each_budget || !fixed_choice) {
      // Without per-budget search, the first pass searches on the largest budget.
      const std::size_t search_count = spec.search_each_budget ? count : final_count;
      std::vector<FeatureVector> search_x(train_x);
      std::vector<int> search_y(train_y);
      for (std::size_t k = count; k < search_count; ++k) {
        search_x.push_back(features[sets.positives[k]]);
        search_y.push_back(1);
      }
      const FeatureMatrix search_scaled = ApplyScaler(FitScaler(search_x), search_x);
      const std::uint64_t fit_seed =
          DeriveSeed({config.seed, static_cast<std::uint64_t>(spec.user), spec.trial, search_count});
      fixed_choice = config.train.c_grid.size() * config.train.gamma_grid.size() > 1
                         ? GridSearch(search_scaled, search_y, config.train, fit_seed)
                         : GridChoice{config.train.c_grid.front(), config.train.gamma_grid.front(), 0.0};
    }
    const GridChoice choice = *fixed_choice;
    SvmParams params;
    params.c = choice.c;
    params.gamma = choice.gamma;
    params.weight_pos = BalancedPositiveWeight(count, sets.negatives.size(), config.train.weight_cap);
    params.tolerance = config.train.tolerance;
    params.max_iterations = config.train.max_iterations;
    const auto t0 = std::chrono::steady_clock::now();
    const SvmModel model = Train(scaled, train_y, params);
    curve.train_seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

    auto score = [&](std::size_t idx) {
      const Scaler& s = config.normalization == NormalizationMode::kFaithful ? pool_scaler : scaler;
      return DecisionValue(model, ApplyScaler(s, features[idx]));
    };
    auto gather = [&](UserId v, std::size_t y, std::vector<double>& out) {
      for (std::size_t idx : folds.Fold({v, settings[y], spec.type}, spec.trial)) out.push_back(score(idx));
    };
    std::vector<double> positives;
    gather(spec.user, spec.classifier_setting, positives);
    for (std::size_t y = 0; y < m; ++y) {
      std::vector<double> random;
      std::vector<double> targeted;
      for (UserId v : users) {
        if (v != spec.user) gather(v, y, random);
      }
      gather(spec.user, y, targeted);
      curve.eer[y].push_back(ComputeEer(positives, random));
      curve.eer[m + y].push_back(ComputeEer(positives, targeted));
    }
  }
  return curve;
}

PersistentAttackResult PersistentAttackSim(std::size_t settings, std::size_t trials, Rng& rng) {
  if (settings < 1 || trials < 1) throw Error(ErrorCode::kInvalidConfig, "need n >= 1 settings and >= 1 trial");
  PersistentAttackResult out;
  out.settings = settings;
  out.trials = trials;
  std::uniform_int_distribution<std::size_t> draw(0, settings - 1);
  const std::size_t guess = 0;
  double total = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t tries = 1;
    while (draw(rng) != guess) ++tries;
    ++out.histogram[tries];
    total += static_cast<double>(tries);
  }
  out.mean_tries = total / static_cast<double>(trials);
  return out;
}

}  // namespace atca
