#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "freeito/funcspec.hpp"

namespace freeito {

// Parses {"type":"polynomial"|"fourier"|"builtin", ...}. Errors are ConfigError
// messages prefixed with `where` (a JSON path such as "function").
FunctionSpec function_from_json(const nlohmann::json& j, const std::string& where = "function");

// Names accepted by {"type":"builtin","name":...}.
const std::vector<std::string>& builtin_function_names();

}  // namespace freeito
