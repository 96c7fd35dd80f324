#include "atca/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "atca/features.hpp"
#include "atca/parallel.hpp"

namespace atca {
namespace {

double Draw(Rng& rng, const NormalSpec& spec) {
  if (spec.sd <= 0.0) return spec.mean;
  std::normal_distribution<double> dist(spec.mean, spec.sd);
  return dist(rng);
}

double DrawNonNegative(Rng& rng, const NormalSpec& spec) { return std::abs(Draw(rng, spec)); }

double Gaussian(Rng& rng, double mean, double sd) {
  if (sd <= 0.0) return mean;
  std::normal_distribution<double> dist(mean, sd);
  return dist(rng);
}

// Fraction of the path covered at normalized time u under a triangular
// (ease-in, ease-out) speed profile.
double TriangularProgress(double u) { return u <= 0.5 ? 2.0 * u * u : 1.0 - 2.0 * (1.0 - u) * (1.0 - u); }

constexpr double kMinDisplacement = 60.0;

}  // namespace

void PopulationConfig::Validate() const {
  if (user_count < 2) throw Error(ErrorCode::kInvalidConfig, "population needs at least 2 users");
  if (factors.empty()) throw Error(ErrorCode::kInvalidConfig, "population needs at least one setting");
  for (double f : factors) {
    if (!(f > 0.0)) throw Error(ErrorCode::kInvalidFactor, "setting factors must be positive");
  }
  if (horizontal_per_cell < 10 || vertical_per_cell < 10) {
    throw Error(ErrorCode::kInvalidConfig, "need at least 10 strokes per cell");
  }
}

std::uint64_t UserSeed(const PopulationConfig& config, std::size_t user_index) {
  return DeriveSeed({config.master_seed, 0x75736572ULL, user_index});
}

UserParams SampleUserParams(const PopulationConfig& config, std::size_t user_index) {
  const HyperParams& h = config.hyper;
  Rng rng(UserSeed(config, user_index));
  UserParams user;
  user.user = static_cast<UserId>(user_index);
  for (StrokeType type : kStrokeTypes) {
    TypeParams& tp = user.For(type);
    tp.positive_fraction = std::clamp(Draw(rng, h.positive_fraction), 0.0, 1.0);

    // Traits shared by both directions of a stroke type.
    DirectionParams shared;
    shared.kappa = std::clamp(Draw(rng, h.kappa), 0.0, 1.0);
    shared.rho = std::clamp(Draw(rng, h.rho), 0.0, 1.0);
    shared.kappa_sd = DrawNonNegative(rng, h.kappa_noise);
    shared.speed_mean = std::max(0.2, Draw(rng, h.speed));
    shared.speed_sd = shared.speed_mean * DrawNonNegative(rng, h.speed_cv);
    shared.jitter_sd = DrawNonNegative(rng, h.jitter);
    shared.pressure_mean = std::max(0.01, Draw(rng, h.pressure));
    shared.pressure_sd = DrawNonNegative(rng, h.pressure_sd);
    shared.area_mean = std::max(0.01, Draw(rng, h.area));
    shared.area_sd = DrawNonNegative(rng, h.area_sd);
    shared.points_mean = std::max(4.0, Draw(rng, h.points));
    const NormalSpec& displacement =
        type == StrokeType::kHorizontal ? h.horizontal_displacement : h.vertical_displacement;

    for (DirectionParams* dp : {&tp.negative, &tp.positive}) {
      const bool positive = dp == &tp.positive;
      *dp = shared;
      if (type == StrokeType::kHorizontal) {
        dp->start_x = Draw(rng, positive ? h.horizontal_start_x_right : h.horizontal_start_x_left);
        dp->start_y = Draw(rng, h.horizontal_start_y);
      } else {
        dp->start_x = Draw(rng, h.vertical_start_x);
        dp->start_y = Draw(rng, positive ? h.vertical_start_y_down : h.vertical_start_y_up);
      }
      dp->start_sd_x = DrawNonNegative(rng, h.start_sd);
      dp->start_sd_y = DrawNonNegative(rng, h.start_sd);
      dp->displacement_mean = std::max(kMinDisplacement, Draw(rng, displacement));
      dp->displacement_sd = DrawNonNegative(rng, h.displacement_sd);
      dp->lateral_mean = Draw(rng, h.lateral);
      dp->lateral_sd = DrawNonNegative(rng, h.lateral_sd);
      dp->bow = Draw(rng, h.bow);
    }
  }
  return user;
}

RawStroke GenerateStroke(const UserParams& user, const ScreenSetting& setting, StrokeType type, Rng& rng,
                         StrokeId stroke_id) {
  if (!(setting.factor > 0.0)) throw Error(ErrorCode::kInvalidFactor, "distortion factor must be positive");
  const TypeParams& tp = user.For(type);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (;;) {
    const bool positive = unit(rng) < tp.positive_fraction;
    const DirectionParams& dp = positive ? tp.positive : tp.negative;
    const double sign = positive ? 1.0 : -1.0;

    double start_x = Gaussian(rng, dp.start_x, dp.start_sd_x);
    double start_y = Gaussian(rng, dp.start_y, dp.start_sd_y);
    const double along = sign * std::max(kMinDisplacement, Gaussian(rng, dp.displacement_mean, dp.displacement_sd));
    const double across = Gaussian(rng, dp.lateral_mean, dp.lateral_sd);

    // Intended application-view displacement.
    double raw_x = type == StrokeType::kHorizontal ? along : across;
    double raw_y = type == StrokeType::kHorizontal ? across : along;
    double& distorted = setting.axis == Axis::kX ? raw_x : raw_y;
    double& distorted_start = setting.axis == Axis::kX ? start_x : start_y;
    const double intended = distorted;
    const double kappa = Gaussian(rng, dp.kappa, dp.kappa_sd);
    distorted = intended * (kappa / setting.factor + (1.0 - kappa));
    distorted_start -= (1.0 - dp.rho) * (distorted - intended);

    const double chord = std::hypot(raw_x, raw_y);
    const double normal_x = -raw_y / chord;
    const double normal_y = raw_x / chord;
    const auto n = static_cast<std::size_t>(std::max(4.0, std::round(Gaussian(rng, dp.points_mean, 2.0))));
    const double speed = std::max(0.2, Gaussian(rng, dp.speed_mean, dp.speed_sd));
    const double duration = std::max(static_cast<double>(n - 1), chord / speed);
    const double pressure = std::max(0.01, Gaussian(rng, dp.pressure_mean, dp.pressure_sd));
    const double area = std::max(0.01, Gaussian(rng, dp.area_mean, dp.area_sd));

    std::vector<TouchPoint> points(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double u = static_cast<double>(k) / static_cast<double>(n - 1);
      const double s = TriangularProgress(u);
      double offset = dp.bow * chord * std::sin(std::numbers::pi * s);
      if (k > 0 && k + 1 < n) offset += Gaussian(rng, 0.0, dp.jitter_sd);
      TouchPoint& pt = points[k];
      pt.x = start_x + s * raw_x + offset * normal_x;
      pt.y = start_y + s * raw_y + offset * normal_y;
      pt.t = std::round(u * duration);
      if (k > 0) pt.t = std::max(pt.t, points[k - 1].t + 1.0);
      const double bell = 0.8 + 0.2 * std::sin(std::numbers::pi * u);
      pt.p = std::max(0.0, pressure * bell + Gaussian(rng, 0.0, 0.005));
      pt.a = std::max(0.0, area * bell + Gaussian(rng, 0.0, 0.002));
    }
    try {
      RawStroke stroke = ValidateStroke(std::move(points), user.user, setting, stroke_id);
      if (stroke.stroke_type == type) return stroke;
    } catch (const Error&) {
      // Redraw; degenerate draws are vanishingly rare with sane parameters.
    }
  }
}

StrokeCorpus GeneratePopulation(const PopulationConfig& config, std::size_t threads) {
  config.Validate();
  std::vector<std::vector<RawStroke>> per_user(config.user_count);
  ParallelFor(config.user_count, threads, [&](std::size_t u) {
    const UserParams params = SampleUserParams(config, u);
    std::vector<RawStroke>& out = per_user[u];
    for (StrokeType type : kStrokeTypes) {
      const auto type_index = static_cast<std::uint64_t>(type);
      for (std::size_t s = 0; s < config.factors.size(); ++s) {
        const ScreenSetting setting = config.SettingFor(type, s);
        for (std::size_t k = 0; k < config.PerCell(type); ++k) {
          Rng rng(DeriveSeed({config.master_seed, u, static_cast<std::uint64_t>(setting.FactorKey()),
                              type_index, k}));
          const StrokeId id = ((static_cast<StrokeId>(u) * 2 + type_index) * 1000 + s) * 100000 + k;
          out.push_back(GenerateStroke(params, setting, type, rng, id));
        }
      }
    }
  });
  StrokeCorpus corpus;
  for (auto& strokes : per_user) {
    for (RawStroke& s : strokes) corpus.Add(std::move(s));
  }
  return corpus;
}

namespace {

using Centroid = FeatureVector;

double Distance(const FeatureVector& a, const FeatureVector& b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < kFeatureCount; ++k) sum += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(sum);
}

Centroid Mean(const FeatureMatrix& rows, std::span<const std::size_t> idx) {
  Centroid c{};
  for (std::size_t i : idx) {
    for (std::size_t k = 0; k < kFeatureCount; ++k) c[k] += rows[i][k];
  }
  for (double& v : c) v /= static_cast<double>(idx.size());
  return c;
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct TypeReport {
  double stability;
  double sensitivity;
  double scale;
};

TypeReport ValidateType(const StrokeCorpus& corpus, StrokeType type, const std::vector<UserId>& users,
                        const std::vector<ScreenSetting>& settings) {
  // Scaled feature rows for every stroke of this type, keyed by corpus index.
  std::vector<std::size_t> all;
  for (UserId u : users) {
    for (const ScreenSetting& s : settings) {
      auto cell = corpus.Cell({u, s, type});
      all.insert(all.end(), cell.begin(), cell.end());
    }
  }
  FeatureMatrix raw;
  raw.reserve(all.size());
  for (std::size_t i : all) raw.push_back(ExtractFeatures(corpus.at(i)));
  const Scaler scaler = FitScaler(raw);
  FeatureMatrix rows = ApplyScaler(scaler, raw);
  std::vector<std::size_t> row_of(corpus.size(), 0);
  for (std::size_t r = 0; r < all.size(); ++r) row_of[all[r]] = r;
  auto cell_rows = [&](UserId u, const ScreenSetting& s) {
    std::vector<std::size_t> out;
    for (std::size_t i : corpus.Cell({u, s, type})) out.push_back(row_of[i]);
    return out;
  };

  std::vector<std::size_t> every(rows.size());
  std::iota(every.begin(), every.end(), 0);
  const Centroid grand = Mean(rows, every);
  double spread = 0.0;
  for (const FeatureVector& r : rows) spread += Distance(r, grand) * Distance(r, grand);
  const double scale = std::sqrt(spread / static_cast<double>(rows.size()));

  std::vector<Centroid> global(users.size());
  std::vector<std::vector<Centroid>> per_setting(users.size());
  for (std::size_t ui = 0; ui < users.size(); ++ui) {
    std::vector<std::size_t> mine;
    for (const ScreenSetting& s : settings) {
      const auto idx = cell_rows(users[ui], s);
      if (idx.empty()) throw Error(ErrorCode::kInsufficientData, "empty corpus cell");
      per_setting[ui].push_back(Mean(rows, idx));
      mine.insert(mine.end(), idx.begin(), idx.end());
    }
    global[ui] = Mean(rows, mine);
  }

  std::vector<double> margins;
  double sensitivity = 0.0;
  for (std::size_t ui = 0; ui < users.size(); ++ui) {
    double intra = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < settings.size(); ++a) {
      for (std::size_t b = a + 1; b < settings.size(); ++b) {
        intra += Distance(per_setting[ui][a], per_setting[ui][b]);
        ++pairs;
      }
    }
    intra /= static_cast<double>(pairs);
    double inter = 0.0;
    for (std::size_t vi = 0; vi < users.size(); ++vi) {
      if (vi != ui) inter += Distance(global[ui], global[vi]);
    }
    inter /= static_cast<double>(users.size() - 1);
    margins.push_back(inter - intra);

    // Nearest-centroid separation of the two extreme settings, 2-fold CV by
    // alternating stroke index.
    const auto low = cell_rows(users[ui], settings.front());
    const auto high = cell_rows(users[ui], settings.back());
    std::array<std::size_t, 2> correct{0, 0};
    for (std::size_t fold = 0; fold < 2; ++fold) {
      std::vector<std::size_t> low_train;
      std::vector<std::size_t> high_train;
      for (std::size_t r = 0; r < low.size(); ++r) if (r % 2 != fold) low_train.push_back(low[r]);
      for (std::size_t r = 0; r < high.size(); ++r) if (r % 2 != fold) high_train.push_back(high[r]);
      const Centroid cl = Mean(rows, low_train);
      const Centroid ch = Mean(rows, high_train);
      for (std::size_t r = fold; r < low.size(); r += 2) {
        correct[0] += Distance(rows[low[r]], cl) < Distance(rows[low[r]], ch) ? 1 : 0;
      }
      for (std::size_t r = fold; r < high.size(); r += 2) {
        correct[1] += Distance(rows[high[r]], ch) < Distance(rows[high[r]], cl) ? 1 : 0;
      }
    }
    sensitivity += 0.5 * (static_cast<double>(correct[0]) / static_cast<double>(low.size()) +
                          static_cast<double>(correct[1]) / static_cast<double>(high.size()));
  }
  return {Median(margins), sensitivity / static_cast<double>(users.size()), scale};
}

}  // namespace

PopulationReport ValidatePopulation(const StrokeCorpus& corpus) {
  const std::vector<UserId> users = corpus.Users();
  if (users.size() < 2) throw Error(ErrorCode::kInsufficientData, "need at least 2 users");
  PopulationReport report;
  std::size_t types = 0;
  for (StrokeType type : kStrokeTypes) {
    const std::vector<ScreenSetting> settings = corpus.Settings(type);
    if (settings.empty()) continue;
    if (settings.size() < 2) throw Error(ErrorCode::kInsufficientData, "need at least 2 settings");
    for (UserId u : users) {
      for (const ScreenSetting& s : {settings.front(), settings.back()}) {
        if (corpus.Cell({u, s, type}).size() < 2) {
          throw Error(ErrorCode::kInsufficientData, "extreme-setting cells need at least 2 strokes");
        }
      }
    }
    const TypeReport r = ValidateType(corpus, type, users, settings);
    report.stability_margin += r.stability;
    report.sensitivity_score += r.sensitivity;
    report.feature_scale += r.scale;
    ++types;
  }
  if (types == 0) throw Error(ErrorCode::kInsufficientData, "corpus is empty");
  report.stability_margin /= static_cast<double>(types);
  report.sensitivity_score /= static_cast<double>(types);
  report.feature_scale /= static_cast<double>(types);
  return report;
}

}  // namespace atca
