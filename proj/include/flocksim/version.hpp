#pragma once

namespace flocksim {

inline constexpr const char* kVersion = "0.1.0";

} // namespace flocksim
