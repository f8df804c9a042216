#pragma once

namespace exactlm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace exactlm
