#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "aniso/verify.hpp"

namespace aniso {

using ordered_json = nlohmann::ordered_json;

/// Doubles with non-finite values encoded as strings ("inf", "-inf", "nan")
/// so reports stay valid JSON.
ordered_json json_number(double v);

ordered_json sweep_spec_to_json(const SweepSpec& spec);
ordered_json report_to_json(const VerificationReport& report);

/// write-temp-then-rename
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace aniso
