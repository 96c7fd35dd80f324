#include "atca/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace atca {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kNonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::kClickNotStroke: return "ClickNotStroke";
    case ErrorCode::kInvalidPoint: return "InvalidPoint";
    case ErrorCode::kInvalidFactor: return "InvalidFactor";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSingleClass: return "SingleClass";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kBadBinCounts: return "BadBinCounts";
    case ErrorCode::kNoOtherUsers: return "NoOtherUsers";
    case ErrorCode::kEmptyPositives: return "EmptyPositives";
    case ErrorCode::kMissingCell: return "MissingCell";
    case ErrorCode::kUnknownSetting: return "UnknownSetting";
    case ErrorCode::kTooFewStrokes: return "TooFewStrokes";
    case ErrorCode::kEmptyScores: return "EmptyScores";
    case ErrorCode::kIncompleteMatrix: return "IncompleteMatrix";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

std::string_view ToString(StrokeType type) {
  return type == StrokeType::kHorizontal ? "horizontal" : "vertical";
}

std::string_view ToString(Direction direction) {
  switch (direction) {
    case Direction::kUp: return "up";
    case Direction::kDown: return "down";
    case Direction::kLeft: return "left";
    case Direction::kRight: return "right";
  }
  return "?";
}

char AxisLetter(Axis axis) { return axis == Axis::kX ? 'X' : 'Y'; }

StrokeType ParseStrokeType(std::string_view text) {
  if (text == "horizontal" || text == "H") return StrokeType::kHorizontal;
  if (text == "vertical" || text == "V") return StrokeType::kVertical;
  throw Error(ErrorCode::kParseError, "unknown stroke type '" + std::string(text) + "'");
}

std::int64_t ScreenSetting::FactorKey() const { return std::llround(factor * 1e9); }

std::string ScreenSetting::Label() const {
  char buf[64];
  // Shortest representation of the quantized factor, so 0.75 + 0.05 prints as 0.8.
  const double rounded = static_cast<double>(FactorKey()) / 1e9;
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), rounded);
  return std::string(1, AxisLetter(axis)) + std::string(buf, end);
}

ScreenSetting ParseSetting(std::string_view label) {
  if (label.size() < 2 || (label[0] != 'X' && label[0] != 'Y')) {
    throw Error(ErrorCode::kParseError, "bad setting label '" + std::string(label) + "'");
  }
  ScreenSetting s;
  s.axis = label[0] == 'X' ? Axis::kX : Axis::kY;
  const char* first = label.data() + 1;
  const char* last = label.data() + label.size();
  auto [ptr, ec] = std::from_chars(first, last, s.factor);
  if (ec != std::errc() || ptr != last || !(s.factor > 0.0)) {
    throw Error(ErrorCode::kParseError, "bad setting label '" + std::string(label) + "'");
  }
  return s;
}

StrokeKind InferStrokeType(std::span<const TouchPoint> points) {
  const double dx = points.back().x - points.front().x;
  const double dy = points.back().y - points.front().y;
  if (std::abs(dx) >= std::abs(dy)) {
    return {StrokeType::kHorizontal, dx < 0 ? Direction::kLeft : Direction::kRight};
  }
  return {StrokeType::kVertical, dy < 0 ? Direction::kUp : Direction::kDown};
}

double TrajectoryLength(std::span<const TouchPoint> points) {
  double length = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    length += std::hypot(points[i].x - points[i - 1].x, points[i].y - points[i - 1].y);
  }
  return length;
}

RawStroke ValidateStroke(std::vector<TouchPoint> points, UserId user, ScreenSetting setting,
                         StrokeId stroke_id) {
  if (points.size() < kMinStrokePoints) {
    throw Error(ErrorCode::kTooFewPoints,
                "stroke has " + std::to_string(points.size()) + " points, need 3");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const TouchPoint& pt = points[i];
    if (!std::isfinite(pt.t) || !std::isfinite(pt.x) || !std::isfinite(pt.y) ||
        !std::isfinite(pt.p) || !std::isfinite(pt.a) || pt.p < 0.0 || pt.a < 0.0) {
      throw Error(ErrorCode::kInvalidPoint, "point " + std::to_string(i) + " is not finite/non-negative");
    }
    if (i > 0 && !(pt.t - points[i - 1].t >= kMinSampleIntervalMs)) {
      throw Error(ErrorCode::kNonMonotoneTime,
                  "timestamp " + std::to_string(i) + " does not advance by >= 1 ms");
    }
  }
  if (TrajectoryLength(points) < kClickThreshold) {
    throw Error(ErrorCode::kClickNotStroke, "trajectory shorter than click threshold");
  }
  RawStroke stroke;
  const StrokeKind kind = InferStrokeType(points);
  stroke.points = std::move(points);
  stroke.stroke_type = kind.type;
  stroke.direction = kind.direction;
  stroke.user = user;
  stroke.setting = setting;
  stroke.stroke_id = stroke_id;
  return stroke;
}

void StrokeCorpus::Add(RawStroke stroke) {
  const CellKey key{stroke.user, stroke.setting, stroke.stroke_type};
  cells_[key].push_back(strokes_.size());
  strokes_.push_back(std::move(stroke));
}

std::span<const std::size_t> StrokeCorpus::Cell(const CellKey& key) const {
  auto it = cells_.find(key);
  if (it == cells_.end()) return {};
  return it->second;
}

std::vector<CellKey> StrokeCorpus::Keys() const {
  std::vector<CellKey> keys;
  keys.reserve(cells_.size());
  for (const auto& [key, _] : cells_) keys.push_back(key);
  return keys;
}

std::vector<UserId> StrokeCorpus::Users() const {
  std::set<UserId> users;
  for (const auto& [key, _] : cells_) users.insert(key.user);
  return {users.begin(), users.end()};
}

std::vector<ScreenSetting> StrokeCorpus::Settings(StrokeType type) const {
  std::set<ScreenSetting> settings;
  for (const auto& [key, _] : cells_) {
    if (key.type == type) settings.insert(key.setting);
  }
  return {settings.begin(), settings.end()};
}

}  // namespace atca
