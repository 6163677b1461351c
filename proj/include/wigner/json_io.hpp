#ifndef WIGNER_JSON_IO_HPP
#define WIGNER_JSON_IO_HPP

#include <string>

#include <json.hpp>

#include "wigner/netlist.hpp"
#include "wigner/sde.hpp"

namespace wigner {

using Json = nlohmann::ordered_json;

/// Builds a primitive component from a parameter record with a "kind" field.
/// Kinds: "kerr1", "kerr2", "nopo", "bs", "phase", "laser", "mixer".
CircuitModel component_from_json(const Json& record);

/// Netlist exchange document: "instances" (name -> kind + parameters),
/// "connections" (["inst:port", "inst:port"] pairs, source first),
/// "external" ("inputs"/"outputs" as ordered [name, "inst:port"] pairs).
Netlist netlist_from_json(const Json& doc);
Netlist read_netlist(const std::string& path);

/// Dense dump of a flat model, complex entries as [re, im] pairs; suitable
/// for cross-implementation diffing.
Json model_to_json(const CircuitModel& model);
CircuitModel model_from_json(const Json& doc);

Json ensemble_stats_to_json(const EnsembleStats& stats);

void write_json(const std::string& path, const Json& doc);
Json read_json(const std::string& path);

} // namespace wigner

#endif
