#pragma once

#include "atca/core.hpp"

namespace atca {

/// Maps a raw sensor stroke to what the application sees under `setting`.
/// The first touch point is the anchor and is never moved; every later point
/// has its coordinate along setting.axis scaled about the anchor. Time,
/// pressure, area and the other coordinate pass through unchanged.
RawStroke ApplySetting(const RawStroke& stroke, const ScreenSetting& setting);

/// Inverse of ApplySetting for the same setting.
RawStroke InvertSetting(const RawStroke& stroke, const ScreenSetting& setting);

}  // namespace atca
