#pragma once

namespace throwkit {

inline constexpr const char* kVersionString = "throwkit 0.1.0";

}  // namespace throwkit
