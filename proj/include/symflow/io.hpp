#pragma once

// Output helpers: content hashing for run manifests and exact JSON round-trip
// of real-valued forms.

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "symflow/forms.hpp"

namespace symflow {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// SHA-1 hex digest, used as the content hash of run configurations.
std::string sha1_hex(const std::string& bytes);

nlohmann::json form_to_json(const Form<double>& f);
Form<double> form_from_json(const nlohmann::json& j);

}  // namespace symflow
