#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "atca/core.hpp"
#include "atca/random.hpp"

namespace atca {

struct NormalSpec {
  double mean = 0.0;
  double sd = 0.0;
  bool operator==(const NormalSpec&) const = default;
};

/// Population-level distributions from which each synthetic user is drawn.
/// Lengths are device units, speeds units/ms, pressure and area device units.
struct HyperParams {
  NormalSpec horizontal_start_x_right{300.0, 90.0};
  NormalSpec horizontal_start_x_left{780.0, 90.0};
  NormalSpec horizontal_start_y{1000.0, 220.0};
  NormalSpec vertical_start_x{560.0, 140.0};
  NormalSpec vertical_start_y_up{1350.0, 140.0};
  NormalSpec vertical_start_y_down{600.0, 140.0};
  NormalSpec start_sd{20.0, 5.0};
  NormalSpec horizontal_displacement{420.0, 80.0};
  NormalSpec vertical_displacement{450.0, 90.0};
  NormalSpec displacement_sd{12.0, 4.0};
  NormalSpec lateral{0.0, 35.0};
  NormalSpec lateral_sd{10.0, 3.0};
  NormalSpec bow{0.0, 0.04};
  NormalSpec positive_fraction{0.5, 0.12};
  NormalSpec kappa{0.9, 0.08};
  NormalSpec rho{0.6, 0.3};
  NormalSpec kappa_noise{0.35, 0.1};
  NormalSpec speed{1.6, 0.45};
  NormalSpec speed_cv{0.04, 0.01};
  NormalSpec jitter{2.5, 0.8};
  NormalSpec pressure{0.45, 0.12};
  NormalSpec pressure_sd{0.03, 0.01};
  NormalSpec area{0.18, 0.05};
  NormalSpec area_sd{0.012, 0.004};
  NormalSpec points{16.0, 4.0};

  bool operator==(const HyperParams&) const = default;
};

struct PopulationConfig {
  std::size_t user_count = 25;
  std::vector<double> factors = {0.8, 0.9, 1.0, 1.1, 1.2};
  std::size_t horizontal_per_cell = 50;
  std::size_t vertical_per_cell = 50;
  HyperParams hyper;
  std::uint64_t master_seed = 1;

  std::size_t PerCell(StrokeType type) const {
    return type == StrokeType::kHorizontal ? horizontal_per_cell : vertical_per_cell;
  }
  /// Setting under which strokes of `type` are recorded for factor index i.
  ScreenSetting SettingFor(StrokeType type, std::size_t i) const { return {PrimaryAxis(type), factors.at(i)}; }
  void Validate() const;
};

/// Behaviour of one user for one stroke direction.
///
/// The user aims for an application-view displacement of `displacement_mean`
/// along the primary axis. Under a distortion factor f on an axis, the raw
/// component along that axis becomes intended * (kappa / f + 1 - kappa); a
/// fraction (1 - rho) of the extra length is realized by moving the start
/// point back and rho by moving the stop point forward. The kappa realized by
/// a single stroke is drawn around `kappa` with std `kappa_sd`.
struct DirectionParams {
  double start_x = 0.0;
  double start_y = 0.0;
  double start_sd_x = 0.0;
  double start_sd_y = 0.0;
  double displacement_mean = 0.0;
  double displacement_sd = 0.0;
  double lateral_mean = 0.0;
  double lateral_sd = 0.0;
  double bow = 0.0;  ///< perpendicular bulge as a fraction of chord length
  double kappa = 0.0;
  double kappa_sd = 0.0;
  double rho = 0.0;
  double speed_mean = 1.0;  ///< units/ms
  double speed_sd = 0.0;
  double jitter_sd = 0.0;
  double pressure_mean = 0.5;
  double pressure_sd = 0.0;
  double area_mean = 0.2;
  double area_sd = 0.0;
  double points_mean = 16.0;

  bool operator==(const DirectionParams&) const = default;
};

struct TypeParams {
  DirectionParams negative;  ///< left / up
  DirectionParams positive;  ///< right / down
  double positive_fraction = 0.5;

  bool operator==(const TypeParams&) const = default;
};

struct UserParams {
  UserId user = 0;
  std::array<TypeParams, 2> types;  ///< indexed by StrokeType

  const TypeParams& For(StrokeType t) const { return types[static_cast<std::size_t>(t)]; }
  TypeParams& For(StrokeType t) { return types[static_cast<std::size_t>(t)]; }
  bool operator==(const UserParams&) const = default;
};

std::uint64_t UserSeed(const PopulationConfig& config, std::size_t user_index);

UserParams SampleUserParams(const PopulationConfig& config, std::size_t user_index);

/// Draws one raw stroke of the user adapted to `setting`. The result always
/// passes ValidateStroke and has the requested stroke type.
RawStroke GenerateStroke(const UserParams& user, const ScreenSetting& setting, StrokeType type, Rng& rng,
                         StrokeId stroke_id = 0);

/// Strokes are ordered by user, stroke type, setting, then stroke index, and
/// every stroke draws from a seed derived from those coordinates.
StrokeCorpus GeneratePopulation(const PopulationConfig& config, std::size_t threads = 1);

struct PopulationReport {
  double stability_margin = 0.0;
  double sensitivity_score = 0.0;
  double feature_scale = 0.0;  ///< RMS distance of scaled rows from their mean
};

/// Stability: median over users of (mean distance from the user's global
/// centroid to other users' global centroids) minus (mean pairwise distance
/// between the user's per-setting centroids). Sensitivity: mean balanced
/// accuracy of a nearest-centroid rule separating each user's lowest- and
/// highest-factor settings under 2-fold CV. Both are computed per stroke
/// type in [-1,1]-scaled feature space and averaged over types.
PopulationReport ValidatePopulation(const StrokeCorpus& corpus);

}  // namespace atca
