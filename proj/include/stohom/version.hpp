#pragma once

namespace stohom {
inline constexpr const char* kVersion = "0.1.0";
}
