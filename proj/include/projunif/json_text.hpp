#pragma once

// JSON text with every floating value written to 17 significant digits.

#include <string>

#include <json.hpp>

namespace projunif {

/// Like nlohmann::json::dump(indent), but floats use %.17g; NaN and
/// infinities become null.
std::string json_text(const nlohmann::json& j, int indent = 2);

}  // namespace projunif
