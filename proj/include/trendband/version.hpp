#pragma once

#define TRENDBAND_VERSION_MAJOR 0
#define TRENDBAND_VERSION_MINOR 1
#define TRENDBAND_VERSION_PATCH 0

namespace trendband {

inline constexpr const char* version_string() { return "0.1.0"; }

}  // namespace trendband
