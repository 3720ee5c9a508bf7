#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "freeito/itoproc.hpp"

namespace freeito {

// A number s (meaning s·I) or an N×N array of rows whose entries are numbers or [re, im].
ComplexMatrix matrix_from_json(const nlohmann::json& j, int n, const std::string& where);

// {"type":"hermitian_bm"|"free_mult_bm"|"modulus_squared"|"custom_linear", ...}
ItoProcessSpec process_from_json(const nlohmann::json& j, int n, const std::string& where = "process");

const std::vector<std::string>& builtin_process_names();

}  // namespace freeito
