#ifndef WIGNER_NETLIST_HPP
#define WIGNER_NETLIST_HPP

#include <string>
#include <utility>
#include <vector>

#include "wigner/model.hpp"

namespace wigner {

struct PortRef {
  std::string instance;
  int port = 0;
};

/// Component instances plus port-to-port wiring. Connections run from an
/// instance output port to an instance input port; declared external ports
/// keep their declaration order in the elaborated model.
struct Netlist {
  struct Connection {
    PortRef src; ///< output endpoint
    PortRef dst; ///< input endpoint
  };

  std::vector<std::pair<std::string, CircuitModel>> instances;
  std::vector<Connection> connections;
  std::vector<std::pair<std::string, PortRef>> external_inputs;
  std::vector<std::pair<std::string, PortRef>> external_outputs;

  void add_instance(std::string name, CircuitModel model);
  void connect(const std::string& src_inst, int src_port,
               const std::string& dst_inst, int dst_port);
  void input(std::string name, const std::string& inst, int port);
  void output(std::string name, const std::string& inst, int port);
};

struct Elaborated {
  CircuitModel model;
  /// first internal-mode index of each instance in the flat state vector
  std::vector<std::pair<std::string, int>> mode_offsets;

  int mode_offset(const std::string& instance) const;
};

/// Concatenates all instances and eliminates every connection exactly,
/// then reorders ports to the declared external maps. Throws
/// DanglingPortError / NetlistError on invalid wiring and propagates
/// SingularLoopError from the reduction.
Elaborated elaborate(const Netlist& netlist);

} // namespace wigner

#endif
