#pragma once

#include <json.hpp>
#include <string>

#include "arbor/forest.hpp"
#include "arbor/instance.hpp"
#include "arbor/profile.hpp"

namespace arbor {

using json = nlohmann::json;

json instance_to_json(const Instance& inst);
json layered_to_json(const LayeredInstance& li);
// Returns a LayeredInstance; layers is empty when the document has none.
LayeredInstance instance_from_json(const json& j);

json solution_to_json(const SolutionForest& sol);
SolutionForest solution_from_json(const json& j);

json profile_to_json(const ParamProfile& p);
// Overrides fields of base with the ones present in j.
ParamProfile profile_from_json(const json& j, ParamProfile base);

json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace arbor
