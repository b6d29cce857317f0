#pragma once

#include <string>

namespace blockent {

/// Fixed 12-significant-digit rendering used by every CSV and JSON writer.
/// Infinities render as "inf" / "-inf".
std::string format_real(double value);

}  // namespace blockent
