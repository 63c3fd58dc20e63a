#pragma once

namespace lsearch {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lsearch
