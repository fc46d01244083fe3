#include "delta_loop/machine_io.hpp"

#include <fstream>
#include <sstream>
#include <string>

namespace delta_loop {

namespace {

using nlohmann::json;

const json& require(const json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end()) throw ValidationError(field, "missing");
  return *it;
}

int require_int(const json& doc, const char* field) {
  const json& value = require(doc, field);
  if (!value.is_number_integer()) throw ValidationError(field, "must be an integer");
  return value.get<int>();
}

double require_number(const json& doc, const char* field) {
  const json& value = require(doc, field);
  if (!value.is_number()) throw ValidationError(field, "must be a number");
  return value.get<double>();
}

}  // namespace

MachineParams<double> machine_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("machine", "document must be a JSON object");

  MachineParams<double>::Fields fields;
  fields.phases = require_int(doc, "n");
  fields.pole_pairs = require_int(doc, "p");
  fields.resistance = require_number(doc, "R");
  fields.self_inductance = require_number(doc, "L");
  fields.mutual_inductance = require_number(doc, "M");

  const json& config = require(doc, "config");
  if (!config.is_string()) throw ValidationError("config", "must be \"star\" or \"delta\"");
  const auto name = config.get<std::string>();
  if (name == "star") {
    fields.config = WindingConfig::Star;
  } else if (name == "delta") {
    fields.config = WindingConfig::Delta;
  } else {
    throw ValidationError("config", "must be \"star\" or \"delta\", got \"" + name + "\"");
  }

  const json& spectrum = require(doc, "spectrum");
  if (!spectrum.is_array()) throw ValidationError("spectrum", "must be an array");
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const json& entry = spectrum[i];
    const std::string prefix = "spectrum[" + std::to_string(i) + "].";
    if (!entry.is_object()) throw ValidationError("spectrum[" + std::to_string(i) + "]", "must be an object");
    auto order = entry.find("order");
    if (order == entry.end() || !order->is_number_integer())
      throw ValidationError(prefix + "order", "must be an integer");
    auto magnitude = entry.find("magnitude");
    if (magnitude == entry.end() || !magnitude->is_number())
      throw ValidationError(prefix + "magnitude", "must be a number");
    fields.spectrum.push_back({order->get<int>(), magnitude->get<double>()});
  }
  return MachineParams<double>(std::move(fields));
}

MachineParams<double> parse_machine(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("machine", std::string("malformed JSON: ") + e.what());
  }
  return machine_from_json(doc);
}

MachineParams<double> load_machine(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("machine", "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_machine(buffer.str());
}

json machine_to_json(const MachineParams<double>& params) {
  json spectrum = json::array();
  for (const auto& [order, magnitude] : params.spectrum()) spectrum.push_back({{"order", order}, {"magnitude", magnitude}});
  return {{"n", params.phases()},
          {"p", params.pole_pairs()},
          {"R", params.resistance()},
          {"L", params.self_inductance()},
          {"M", params.mutual_inductance()},
          {"config", to_string(params.config())},
          {"spectrum", std::move(spectrum)}};
}

}  // namespace delta_loop
