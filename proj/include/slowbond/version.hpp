#pragma once

namespace slowbond {
inline constexpr const char* kVersion = "slowbond 0.1.0";
}
