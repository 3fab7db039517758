#pragma once

#include <cstdint>
#include <vector>

namespace sortbench {

// The sorted value type. Fixed 64-bit width so message byte counts are
// well-defined across platforms.
using Element = std::int64_t;

inline constexpr std::size_t kElementBytes = sizeof(Element);

using DataList = std::vector<Element>;

} // namespace sortbench
