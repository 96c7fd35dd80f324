#include "atca/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "atca/parallel.hpp"
#include "atca/roc.hpp"

namespace atca {

std::string_view ToString(TrainingMode mode) { return mode == TrainingMode::kBaseline ? "baseline" : "atca"; }

TrainingMode ParseTrainingMode(std::string_view text) {
  if (text == "baseline") return TrainingMode::kBaseline;
  if (text == "atca") return TrainingMode::kAtca;
  throw Error(ErrorCode::kInvalidConfig, "unknown training mode '" + std::string(text) + "'");
}

std::vector<ScreenSetting> SampleSettings(Axis axis, double lo, double hi, std::size_t m, std::size_t n, Rng& rng) {
  if (n < 1 || n > m) {
    throw Error(ErrorCode::kBadBinCounts,
                "need 1 <= n <= m, got n=" + std::to_string(n) + " m=" + std::to_string(m));
  }
  if (!(lo > 0.0) || !(hi > lo)) throw Error(ErrorCode::kInvalidConfig, "setting range must satisfy 0 < lo < hi");
  std::vector<std::size_t> bins(m);
  std::iota(bins.begin(), bins.end(), 0);
  // Partial Fisher-Yates: the first n slots are a uniform n-subset.
  for (std::size_t k = 0; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, m - 1);
    std::swap(bins[k], bins[pick(rng)]);
  }
  bins.resize(n);
  std::sort(bins.begin(), bins.end());
  std::vector<ScreenSetting> out;
  out.reserve(n);
  const double width = (hi - lo) / static_cast<double>(m);
  for (std::size_t b : bins) out.push_back({axis, lo + (static_cast<double>(b) + 0.5) * width});
  return out;
}

TrainingSets BuildTrainingSets(const StrokeCorpus& corpus, UserId user, const ScreenSetting& setting,
                               StrokeType type, TrainingMode mode, std::span<const ScreenSetting> own_settings,
                               const std::function<bool(std::size_t)>& include) {
  auto keep = [&](std::size_t idx) { return !include || include(idx); };
  TrainingSets sets;
  for (std::size_t idx : corpus.Cell({user, setting, type})) {
    if (keep(idx)) sets.positives.push_back(idx);
  }
  if (sets.positives.empty()) throw Error(ErrorCode::kEmptyPositives, "no strokes in T(u, s, t)");

  const std::vector<UserId> users = corpus.Users();
  if (std::none_of(users.begin(), users.end(), [&](UserId v) { return v != user; })) {
    throw Error(ErrorCode::kNoOtherUsers, "negatives need at least one other user");
  }
  const std::vector<ScreenSetting> all_settings = corpus.Settings(type);
  std::vector<ScreenSetting> own(own_settings.begin(), own_settings.end());
  if (own.empty()) own = all_settings;

  auto add_cell = [&](UserId v, const ScreenSetting& s) {
    for (std::size_t idx : corpus.Cell({v, s, type})) {
      if (keep(idx)) sets.negatives.push_back(idx);
    }
  };
  if (mode == TrainingMode::kAtca) {
    for (const ScreenSetting& s : own) {
      if (!(s == setting)) add_cell(user, s);
    }
  }
  for (UserId v : users) {
    if (v == user) continue;
    if (mode == TrainingMode::kBaseline) {
      add_cell(v, setting);
    } else {
      for (const ScreenSetting& s : all_settings) add_cell(v, s);
    }
  }
  return sets;
}

void RegistrationConfig::Validate() const {
  if (!(range_lo > 0.0) || !(range_hi > range_lo)) {
    throw Error(ErrorCode::kInvalidConfig, "setting range must satisfy 0 < lo < hi");
  }
  if (factors.empty() && (sampled < 1 || sampled > bins)) {
    throw Error(ErrorCode::kBadBinCounts, "need 1 <= n <= m");
  }
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "holdout fraction must lie in [0, 1)");
  }
  train.Validate();
}

const BankEntry* ClassifierBank::Find(double factor, StrokeType type) const {
  const ScreenSetting wanted{PrimaryAxis(type), factor};
  for (const BankEntry& e : entries) {
    if (e.type == type && e.setting == wanted) return &e;
  }
  return nullptr;
}

namespace {

BankEntry TrainEntry(const StrokeCorpus& corpus, const std::vector<FeatureVector>& features, UserId user,
                     const ScreenSetting& setting, StrokeType type, std::span<const ScreenSetting> own,
                     const RegistrationConfig& config, std::uint64_t seed) {
  const TrainingSets sets = BuildTrainingSets(corpus, user, setting, type, config.mode, own);
  std::vector<std::size_t> pos = sets.positives;
  std::vector<std::size_t> neg = sets.negatives;
  Rng rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  auto held = [&](std::size_t size) {
    const auto h = static_cast<std::size_t>(std::floor(config.holdout_fraction * static_cast<double>(size)));
    return size >= 2 ? std::min(h, size - 1) : std::size_t{0};
  };
  const std::size_t hold_pos = held(pos.size());
  const std::size_t hold_neg = held(neg.size());

  std::vector<FeatureVector> train_x;
  std::vector<int> train_y;
  for (std::size_t k = hold_pos; k < pos.size(); ++k) {
    train_x.push_back(features[pos[k]]);
    train_y.push_back(1);
  }
  for (std::size_t k = hold_neg; k < neg.size(); ++k) {
    train_x.push_back(features[neg[k]]);
    train_y.push_back(-1);
  }
  BankEntry entry;
  entry.setting = setting;
  entry.type = type;
  entry.scaler = FitScaler(train_x);
  const FeatureMatrix scaled = ApplyScaler(entry.scaler, train_x);
  entry.model = FitWithSearch(scaled, train_y, config.train, Mix64(seed));

  // Threshold at the EER point of held-out data, or of the training data when
  // nothing is held out.
  std::vector<double> pos_scores;
  std::vector<double> neg_scores;
  auto score = [&](std::size_t idx) { return DecisionValue(entry.model, ApplyScaler(entry.scaler, features[idx])); };
  if (hold_pos > 0 && hold_neg > 0) {
    for (std::size_t k = 0; k < hold_pos; ++k) pos_scores.push_back(score(pos[k]));
    for (std::size_t k = 0; k < hold_neg; ++k) neg_scores.push_back(score(neg[k]));
  } else {
    for (std::size_t r = 0; r < scaled.size(); ++r) {
      (train_y[r] > 0 ? pos_scores : neg_scores).push_back(DecisionValue(entry.model, scaled[r]));
    }
  }
  entry.threshold = EerThreshold(ComputeRoc(pos_scores, neg_scores));
  return entry;
}

}  // namespace

ClassifierBank RegisterUser(const StrokeCorpus& corpus, UserId user, const RegistrationConfig& config,
                            std::uint64_t seed, std::size_t threads) {
  config.Validate();
  ClassifierBank bank;
  bank.user = user;
  bank.mode = config.mode;
  if (!config.factors.empty()) {
    bank.factors = config.factors;
  } else {
    Rng rng(DeriveSeed({seed, 0x53UL, static_cast<std::uint64_t>(user)}));
    for (const ScreenSetting& s :
         SampleSettings(config.axis, config.range_lo, config.range_hi, config.bins, config.sampled, rng)) {
      bank.factors.push_back(s.factor);
    }
  }
  std::sort(bank.factors.begin(), bank.factors.end());

  struct Job {
    ScreenSetting setting;
    StrokeType type;
  };
  std::vector<Job> jobs;
  for (double f : bank.factors) {
    for (StrokeType type : kStrokeTypes) {
      const ScreenSetting setting{PrimaryAxis(type), f};
      if (corpus.Cell({user, setting, type}).empty()) {
        throw Error(ErrorCode::kMissingCell, "no " + std::string(ToString(type)) + " strokes for user " +
                                                 std::to_string(user) + " in " + setting.Label());
      }
      jobs.push_back({setting, type});
    }
  }
  const std::vector<FeatureVector> features = ExtractFeatures(corpus.strokes());
  bank.entries.resize(jobs.size());
  ParallelFor(jobs.size(), threads, [&](std::size_t j) {
    const Job& job = jobs[j];
    std::vector<ScreenSetting> own;
    for (double f : bank.factors) own.push_back({PrimaryAxis(job.type), f});
    const std::uint64_t entry_seed =
        DeriveSeed({seed, static_cast<std::uint64_t>(user), static_cast<std::uint64_t>(job.setting.FactorKey()),
                    static_cast<std::uint64_t>(job.type)});
    bank.entries[j] = TrainEntry(corpus, features, user, job.setting, job.type, own, config, entry_seed);
  });
  return bank;
}

std::size_t SettingSchedule::IntervalOf(double seconds) const {
  if (!(seconds >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "timestamp precedes session start");
  const auto k = static_cast<std::size_t>(std::floor(seconds / interval_seconds));
  if (k >= intervals.size()) throw Error(ErrorCode::kInvalidConfig, "timestamp beyond end of session");
  return k;
}

SettingSchedule ScheduleSettings(std::span<const ScreenSetting> settings, double session_seconds,
                                 double interval_seconds, Rng& rng) {
  if (!(interval_seconds > 0.0)) throw Error(ErrorCode::kInvalidConfig, "interval must be positive");
  if (settings.empty()) throw Error(ErrorCode::kInvalidConfig, "schedule needs at least one setting");
  SettingSchedule schedule;
  schedule.interval_seconds = interval_seconds;
  const auto count = static_cast<std::size_t>(std::ceil(session_seconds / interval_seconds));
  std::uniform_int_distribution<std::size_t> pick(0, settings.size() - 1);
  schedule.intervals.reserve(count);
  for (std::size_t k = 0; k < count; ++k) schedule.intervals.push_back(settings[pick(rng)]);
  return schedule;
}

StrokeDecision AuthenticateStroke(const ClassifierBank& bank, const SettingSchedule& schedule, double seconds,
                                  const RawStroke& stroke) {
  StrokeDecision d;
  d.interval = schedule.IntervalOf(seconds);
  d.setting = schedule.intervals[d.interval];
  d.type = InferStrokeType(stroke.points).type;
  const BankEntry* entry = bank.Find(d.setting.factor, d.type);
  if (entry == nullptr) {
    throw Error(ErrorCode::kUnknownSetting, "bank has no classifier for " + d.setting.Label() + "/" +
                                                std::string(ToString(d.type)));
  }
  d.score = DecisionValue(entry->model, ApplyScaler(entry->scaler, ExtractFeatures(stroke)));
  d.accept = d.score >= entry->threshold;
  return d;
}

SessionResult RunSession(const ClassifierBank& bank, const SettingSchedule& schedule,
                         std::span<const TimedStroke> stream, const SessionPolicy& policy) {
  SessionResult result;
  std::size_t run = 0;
  for (std::size_t k = 0; k < stream.size(); ++k) {
    const StrokeDecision d = AuthenticateStroke(bank, schedule, stream[k].seconds, stream[k].stroke);
    result.decisions.push_back(d);
    run = d.accept ? 0 : run + 1;
    if (!result.lockout && policy.consecutive_reject_limit > 0 && run >= policy.consecutive_reject_limit) {
      result.lockout = true;
      result.lockout_after = k;
    }
  }
  if (!stream.empty()) {
    result.time_to_first_decision = stream.front().seconds;
    if (stream.size() > 1) {
      result.mean_inter_stroke_seconds =
          (stream.back().seconds - stream.front().seconds) / static_cast<double>(stream.size() - 1);
    }
  }
  return result;
}

}  // namespace atca
