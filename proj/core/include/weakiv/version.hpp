#pragma once

namespace weakiv {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace weakiv
