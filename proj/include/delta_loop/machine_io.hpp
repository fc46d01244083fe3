#pragma once

#include <filesystem>
#include <string_view>

#include "json.hpp"

#include "delta_loop/machine.hpp"

namespace delta_loop {

/// Parses {"n", "p", "R", "L", "M", "config": "star"|"delta",
/// "spectrum": [{"order", "magnitude"}, ...]} in SI units.
/// Throws ValidationError naming the offending field.
MachineParams<double> machine_from_json(const nlohmann::json& doc);
MachineParams<double> parse_machine(std::string_view text);
MachineParams<double> load_machine(const std::filesystem::path& path);

nlohmann::json machine_to_json(const MachineParams<double>& params);

}  // namespace delta_loop
