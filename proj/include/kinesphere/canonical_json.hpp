#pragma once

#include <string>

#include <json.hpp>

namespace kinesphere {

/// Rounds to 9 significant digits, the precision of canonical files.
/// Idempotent; maps -0 to +0.
double round_significant9(double value);

/// Deterministic text for a JSON value: sorted keys, two-space indentation,
/// scalar-only arrays on one line, floats with 9 significant digits.
std::string canonical_dump(const nlohmann::json& value);

}  // namespace kinesphere
