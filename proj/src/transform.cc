#include "atca/transform.hpp"

namespace atca {
namespace {

RawStroke ScaleAboutAnchor(const RawStroke& stroke, Axis axis, double factor) {
  RawStroke out = stroke;
  if (out.points.empty()) return out;
  const TouchPoint anchor = out.points.front();
  for (std::size_t i = 1; i < out.points.size(); ++i) {
    TouchPoint& pt = out.points[i];
    if (axis == Axis::kX) {
      pt.x = anchor.x + factor * (pt.x - anchor.x);
    } else {
      pt.y = anchor.y + factor * (pt.y - anchor.y);
    }
  }
  return out;
}

void CheckFactor(const ScreenSetting& setting) {
  if (!(setting.factor > 0.0)) {
    throw Error(ErrorCode::kInvalidFactor, "distortion factor must be positive");
  }
}

}  // namespace

RawStroke ApplySetting(const RawStroke& stroke, const ScreenSetting& setting) {
  CheckFactor(setting);
  return ScaleAboutAnchor(stroke, setting.axis, setting.factor);
}

RawStroke InvertSetting(const RawStroke& stroke, const ScreenSetting& setting) {
  CheckFactor(setting);
  return ScaleAboutAnchor(stroke, setting.axis, 1.0 / setting.factor);
}

}  // namespace atca
