#pragma once

#include "itq3/compute.hpp"

#include <json.hpp>

#include <span>
#include <string>

namespace itq3::report {

nlohmann::ordered_json to_json(const compute::ErrorReport &r);
nlohmann::ordered_json to_json(const compute::AblationRow &r);

// Header line plus one line per row; keys match the JSON field names.
std::string to_csv(std::span<const compute::ErrorReport> rows);
std::string to_csv(std::span<const compute::AblationRow> rows);

} // namespace itq3::report
