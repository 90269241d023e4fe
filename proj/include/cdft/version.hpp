#pragma once

namespace cdft {

inline constexpr const char* version = "1.0.0";
inline constexpr int report_schema = 1;

}  // namespace cdft
