#pragma once

namespace lqs {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lqs
