#pragma once

namespace diracens {
inline constexpr const char* kVersion = "0.1.0";
}
