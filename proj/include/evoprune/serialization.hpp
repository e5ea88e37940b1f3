#pragma once

#include <nlohmann/json.hpp>

#include "evoprune/network.hpp"

namespace evoprune {

using ordered_json = nlohmann::ordered_json;

ordered_json genome_to_json(const Genome& genome);
Genome genome_from_json(const nlohmann::json& j);

}  // namespace evoprune
