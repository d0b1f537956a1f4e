#pragma once

namespace homodyne {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace homodyne
