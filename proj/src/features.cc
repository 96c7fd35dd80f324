#include "atca/features.hpp"

#include <algorithm>
#include <cmath>

namespace atca {

const std::array<std::string_view, kFeatureCount>& FeatureNames() {
  static const std::array<std::string_view, kFeatureCount> names = {
      "start_x",
      "start_y",
      "stop_x",
      "stop_y",
      "duration_ms",
      "end_to_end_distance",
      "end_to_end_direction_angle",
      "trajectory_length",
      "distance_ratio",
      "average_velocity",
      "velocity_p20",
      "velocity_p50",
      "velocity_p80",
      "accel_p20",
      "accel_p50",
      "accel_p80",
      "median_velocity_last3",
      "max_deviation_from_chord",
      "deviation_p20",
      "deviation_p50",
      "deviation_p80",
      "mean_segment_direction",
      "mean_resultant_length",
      "midstroke_pressure",
      "midstroke_area",
      "mean_pressure",
      "mean_area",
      "dominant_axis_displacement",
  };
  return names;
}

double Percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

FeatureVector ExtractFeatures(const RawStroke& stroke) {
  const std::vector<TouchPoint>& pts = stroke.points;
  const std::size_t n = pts.size();
  const TouchPoint& first = pts.front();
  const TouchPoint& last = pts.back();

  FeatureVector f{};
  auto set = [&f](Feature which, double value) { f[static_cast<std::size_t>(which)] = value; };

  const double chord_x = last.x - first.x;
  const double chord_y = last.y - first.y;
  const double chord = std::hypot(chord_x, chord_y);
  const double duration = last.t - first.t;

  std::vector<double> velocity(n - 1);
  std::vector<double> dt(n - 1);
  double length = 0.0;
  double sum_cos = 0.0;
  double sum_sin = 0.0;
  std::size_t moving_segments = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double sx = pts[i + 1].x - pts[i].x;
    const double sy = pts[i + 1].y - pts[i].y;
    const double seg = std::hypot(sx, sy);
    dt[i] = pts[i + 1].t - pts[i].t;
    velocity[i] = seg / (dt[i] / 1000.0);
    length += seg;
    if (seg > 0.0) {
      sum_cos += sx / seg;
      sum_sin += sy / seg;
      ++moving_segments;
    }
  }

  std::vector<double> accel(n - 2);
  for (std::size_t i = 0; i + 2 < n; ++i) {
    const double mid_gap_s = 0.5 * (dt[i] + dt[i + 1]) / 1000.0;
    accel[i] = (velocity[i + 1] - velocity[i]) / mid_gap_s;
  }

  // Perpendicular distance of interior points to the start->stop chord; with a
  // degenerate chord the distance to the start point is used instead.
  std::vector<double> deviation(n - 2);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double px = pts[i].x - first.x;
    const double py = pts[i].y - first.y;
    deviation[i - 1] = chord > 0.0 ? std::abs(chord_x * py - chord_y * px) / chord : std::hypot(px, py);
  }

  const std::size_t tail = std::min<std::size_t>(3, velocity.size());
  std::vector<double> last_velocities(velocity.end() - static_cast<std::ptrdiff_t>(tail), velocity.end());

  double mid_p = 0.0;
  double mid_a = 0.0;
  if (n % 2 == 1) {
    mid_p = pts[n / 2].p;
    mid_a = pts[n / 2].a;
  } else {
    mid_p = 0.5 * (pts[n / 2 - 1].p + pts[n / 2].p);
    mid_a = 0.5 * (pts[n / 2 - 1].a + pts[n / 2].a);
  }
  double sum_p = 0.0;
  double sum_a = 0.0;
  for (const TouchPoint& pt : pts) {
    sum_p += pt.p;
    sum_a += pt.a;
  }

  const StrokeKind kind = InferStrokeType(pts);

  set(Feature::kStartX, first.x);
  set(Feature::kStartY, first.y);
  set(Feature::kStopX, last.x);
  set(Feature::kStopY, last.y);
  set(Feature::kDurationMs, duration);
  set(Feature::kEndToEndDistance, chord);
  set(Feature::kEndToEndDirection, chord > 0.0 ? std::atan2(chord_y, chord_x) : 0.0);
  set(Feature::kTrajectoryLength, length);
  set(Feature::kDistanceRatio, length > 0.0 ? std::min(1.0, chord / length) : 1.0);
  set(Feature::kAverageVelocity, length / (duration / 1000.0));
  set(Feature::kVelocityP20, Percentile(velocity, 0.2));
  set(Feature::kVelocityP50, Percentile(velocity, 0.5));
  set(Feature::kVelocityP80, Percentile(velocity, 0.8));
  set(Feature::kAccelP20, Percentile(accel, 0.2));
  set(Feature::kAccelP50, Percentile(accel, 0.5));
  set(Feature::kAccelP80, Percentile(accel, 0.8));
  set(Feature::kMedianVelocityLast3, Percentile(last_velocities, 0.5));
  set(Feature::kMaxDeviation, *std::max_element(deviation.begin(), deviation.end()));
  set(Feature::kDeviationP20, Percentile(deviation, 0.2));
  set(Feature::kDeviationP50, Percentile(deviation, 0.5));
  set(Feature::kDeviationP80, Percentile(deviation, 0.8));
  set(Feature::kMeanSegmentDirection, moving_segments > 0 ? std::atan2(sum_sin, sum_cos) : 0.0);
  set(Feature::kMeanResultantLength,
      moving_segments > 0
          ? std::min(1.0, std::hypot(sum_cos, sum_sin) / static_cast<double>(moving_segments))
          : 0.0);
  set(Feature::kMidstrokePressure, mid_p);
  set(Feature::kMidstrokeArea, mid_a);
  set(Feature::kMeanPressure, sum_p / static_cast<double>(n));
  set(Feature::kMeanArea, sum_a / static_cast<double>(n));
  set(Feature::kDominantAxisDisplacement, kind.type == StrokeType::kHorizontal ? chord_x : chord_y);
  return f;
}

FeatureMatrix ExtractFeatures(std::span<const RawStroke> strokes) {
  FeatureMatrix out;
  out.reserve(strokes.size());
  for (const RawStroke& s : strokes) out.push_back(ExtractFeatures(s));
  return out;
}

Scaler FitScaler(std::span<const FeatureVector> matrix) {
  if (matrix.empty()) throw Error(ErrorCode::kEmptyMatrix, "cannot fit scaler on empty matrix");
  Scaler scaler{matrix.front(), matrix.front()};
  for (const FeatureVector& row : matrix) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      scaler.min[j] = std::min(scaler.min[j], row[j]);
      scaler.max[j] = std::max(scaler.max[j], row[j]);
    }
  }
  return scaler;
}

FeatureVector ApplyScaler(const Scaler& scaler, const FeatureVector& v) {
  FeatureVector out{};
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    const double range = scaler.max[j] - scaler.min[j];
    out[j] = range > 0.0 ? 2.0 * (v[j] - scaler.min[j]) / range - 1.0 : 0.0;
  }
  return out;
}

FeatureMatrix ApplyScaler(const Scaler& scaler, std::span<const FeatureVector> matrix) {
  FeatureMatrix out;
  out.reserve(matrix.size());
  for (const FeatureVector& row : matrix) out.push_back(ApplyScaler(scaler, row));
  return out;
}

std::string_view ToString(NormalizationMode mode) {
  return mode == NormalizationMode::kFaithful ? "faithful" : "train-stats";
}

NormalizationMode ParseNormalizationMode(std::string_view text) {
  if (text == "faithful") return NormalizationMode::kFaithful;
  if (text == "train-stats") return NormalizationMode::kTrainStats;
  throw Error(ErrorCode::kInvalidConfig, "unknown normalization mode '" + std::string(text) + "'");
}

}  // namespace atca
