#pragma once

#include <string>
#include <vector>

#include "driver.hpp"

namespace otcli {

// Runs one registered scenario, filling its values block and appending
// tagged verdicts. Throws SchemaError for unknown ids.
void run_scenario(const std::string& id, json& values, json& certificates,
                  std::vector<Verdict>& verdicts);

}  // namespace otcli
