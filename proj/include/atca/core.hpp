#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "atca/error.hpp"

namespace atca {

using UserId = std::int32_t;
using StrokeId = std::uint64_t;

// Strokes shorter than this (trajectory length, device units) are treated as clicks.
inline constexpr double kClickThreshold = 20.0;
inline constexpr std::size_t kMinStrokePoints = 3;
// Consecutive samples must be at least this far apart in time.
inline constexpr double kMinSampleIntervalMs = 1.0;

/// One raw sensor sample. Screen origin is top-left and y grows downward.
struct TouchPoint {
  double t = 0.0;  ///< milliseconds
  double x = 0.0;
  double y = 0.0;
  double p = 0.0;  ///< pressure, device units
  double a = 0.0;  ///< covering area, device units

  bool operator==(const TouchPoint&) const = default;
};

enum class StrokeType : std::uint8_t { kHorizontal, kVertical };
enum class Direction : std::uint8_t { kUp, kDown, kLeft, kRight };
enum class Axis : std::uint8_t { kX, kY };

inline constexpr StrokeType kStrokeTypes[] = {StrokeType::kHorizontal, StrokeType::kVertical};

std::string_view ToString(StrokeType type);
std::string_view ToString(Direction direction);
char AxisLetter(Axis axis);
StrokeType ParseStrokeType(std::string_view text);

// Horizontal strokes are recorded under X distortions, vertical ones under Y.
constexpr Axis PrimaryAxis(StrokeType type) {
  return type == StrokeType::kHorizontal ? Axis::kX : Axis::kY;
}

/// A distortion of one screen axis by a positive factor.
///
/// Factors are compared after quantizing to 1e-9 so that settings produced by
/// bin arithmetic (0.75 + 0.05 etc.) key the same corpus cells as literals.
struct ScreenSetting {
  Axis axis = Axis::kY;
  double factor = 1.0;

  std::int64_t FactorKey() const;
  std::string Label() const;  ///< e.g. "Y0.8"

  bool operator==(const ScreenSetting& other) const {
    return axis == other.axis && FactorKey() == other.FactorKey();
  }
  auto operator<=>(const ScreenSetting& other) const {
    return std::tuple(axis, FactorKey()) <=> std::tuple(other.axis, other.FactorKey());
  }
};

ScreenSetting ParseSetting(std::string_view label);

struct RawStroke {
  std::vector<TouchPoint> points;
  StrokeType stroke_type = StrokeType::kHorizontal;
  Direction direction = Direction::kRight;
  UserId user = 0;
  ScreenSetting setting;
  StrokeId stroke_id = 0;

  bool operator==(const RawStroke&) const = default;
};

struct StrokeKind {
  StrokeType type;
  Direction direction;
  bool operator==(const StrokeKind&) const = default;
};

/// Dominant-axis classification; ties go to horizontal.
StrokeKind InferStrokeType(std::span<const TouchPoint> points);

double TrajectoryLength(std::span<const TouchPoint> points);

/// Validates raw samples and returns a typed stroke, or throws Error with
/// kTooFewPoints, kNonMonotoneTime, kClickNotStroke or kInvalidPoint.
RawStroke ValidateStroke(std::vector<TouchPoint> points, UserId user, ScreenSetting setting,
                         StrokeId stroke_id = 0);

struct CellKey {
  UserId user;
  ScreenSetting setting;
  StrokeType type;

  auto operator<=>(const CellKey&) const = default;
  bool operator==(const CellKey&) const = default;
};

/// Strokes indexed by (user, setting, stroke type). Insertion order is kept
/// both globally and within each cell.
class StrokeCorpus {
 public:
  void Add(RawStroke stroke);

  const std::vector<RawStroke>& strokes() const { return strokes_; }
  std::size_t size() const { return strokes_.size(); }
  bool empty() const { return strokes_.empty(); }

  /// Indices into strokes() for one cell; empty if the cell is absent.
  std::span<const std::size_t> Cell(const CellKey& key) const;
  std::vector<CellKey> Keys() const;
  std::vector<UserId> Users() const;
  /// Distinct settings under which strokes of `type` were recorded, ascending.
  std::vector<ScreenSetting> Settings(StrokeType type) const;
  const RawStroke& at(std::size_t index) const { return strokes_.at(index); }

  bool operator==(const StrokeCorpus& other) const { return strokes_ == other.strokes_; }

 private:
  std::vector<RawStroke> strokes_;
  std::map<CellKey, std::vector<std::size_t>> cells_;
};

}  // namespace atca
