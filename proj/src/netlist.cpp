#include "wigner/netlist.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "wigner/errors.hpp"

namespace wigner {

void Netlist::add_instance(std::string name, CircuitModel model) {
  for (const auto& [n, _] : instances)
    if (n == name) throw NetlistError("duplicate instance '" + name + "'");
  instances.emplace_back(std::move(name), std::move(model));
}

void Netlist::connect(const std::string& src_inst, int src_port,
                      const std::string& dst_inst, int dst_port) {
  connections.push_back({{src_inst, src_port}, {dst_inst, dst_port}});
}

void Netlist::input(std::string name, const std::string& inst, int port) {
  external_inputs.emplace_back(std::move(name), PortRef{inst, port});
}

void Netlist::output(std::string name, const std::string& inst, int port) {
  external_outputs.emplace_back(std::move(name), PortRef{inst, port});
}

int Elaborated::mode_offset(const std::string& instance) const {
  for (const auto& [n, off] : mode_offsets)
    if (n == instance) return off;
  throw std::invalid_argument("unknown instance '" + instance + "'");
}

Elaborated elaborate(const Netlist& netlist) {
  if (netlist.instances.empty()) throw NetlistError("elaborate: empty netlist");

  std::map<std::string, std::pair<int, int>> port_span; // name -> (offset, count)
  std::vector<CircuitModel> models;
  models.reserve(netlist.instances.size());
  Elaborated result;
  int no = 0, mo = 0;
  for (const auto& [name, model] : netlist.instances) {
    port_span[name] = {no, model.num_ports};
    result.mode_offsets.emplace_back(name, mo);
    no += model.num_ports;
    mo += model.num_modes;
    models.push_back(model);
  }
  const int n_total = no;

  auto resolve = [&](const PortRef& ref, const char* what) -> int {
    auto it = port_span.find(ref.instance);
    if (it == port_span.end())
      throw NetlistError(std::string(what) + ": unknown instance '" + ref.instance + "'");
    if (ref.port < 0 || ref.port >= it->second.second)
      throw NetlistError(std::string(what) + ": port " + std::to_string(ref.port) +
                         " out of range on '" + ref.instance + "'");
    return it->second.first + ref.port;
  };

  // wiring validity: each input bound at most once, each output tapped at most once
  std::vector<int> in_bound(n_total, 0), out_bound(n_total, 0);
  std::vector<std::pair<int, int>> loops;
  loops.reserve(netlist.connections.size());
  for (const auto& conn : netlist.connections) {
    const int src = resolve(conn.src, "connection source");
    const int dst = resolve(conn.dst, "connection destination");
    if (out_bound[src]++)
      throw NetlistError("output '" + conn.src.instance + ":" + std::to_string(conn.src.port) +
                         "' drives two connections");
    if (in_bound[dst]++)
      throw NetlistError("input '" + conn.dst.instance + ":" + std::to_string(conn.dst.port) +
                         "' is the target of two connections");
    loops.emplace_back(src, dst);
  }

  std::vector<int> ext_in(n_total, 0), ext_out(n_total, 0);
  for (const auto& [name, ref] : netlist.external_inputs) {
    const int g = resolve(ref, "external input");
    if (ext_in[g]++) throw NetlistError("external input port declared twice: " + name);
    if (in_bound[g])
      throw NetlistError("port '" + ref.instance + ":" + std::to_string(ref.port) +
                         "' is both connected and external input");
  }
  for (const auto& [name, ref] : netlist.external_outputs) {
    const int g = resolve(ref, "external output");
    if (ext_out[g]++) throw NetlistError("external output port declared twice: " + name);
    if (out_bound[g])
      throw NetlistError("port '" + ref.instance + ":" + std::to_string(ref.port) +
                         "' is both connected and external output");
  }
  for (int g = 0; g < n_total; ++g) {
    if (!in_bound[g] && !ext_in[g])
      throw DanglingPortError("input port index " + std::to_string(g) +
                              " neither connected nor declared external");
    if (!out_bound[g] && !ext_out[g])
      throw DanglingPortError("output port index " + std::to_string(g) +
                              " neither connected nor declared external");
  }

  CircuitModel flat = concatenate(models);
  // qualify labels with instance names
  {
    int off = 0;
    for (const auto& [name, model] : netlist.instances) {
      for (int j = 0; j < model.num_ports; ++j) {
        flat.in_labels[off + j] = name + "." + flat.in_labels[off + j];
        flat.out_labels[off + j] = name + "." + flat.out_labels[off + j];
      }
      off += model.num_ports;
    }
  }
  CircuitModel reduced = feedback_reduce(flat, loops);

  // remaining channel order after reduction: kept inputs / outputs ascending
  std::vector<int> kept_in, kept_out;
  for (int g = 0; g < n_total; ++g) {
    if (!in_bound[g]) kept_in.push_back(g);
    if (!out_bound[g]) kept_out.push_back(g);
  }
  const int nk = static_cast<int>(kept_in.size());
  if (static_cast<int>(netlist.external_inputs.size()) != nk ||
      static_cast<int>(netlist.external_outputs.size()) != nk)
    throw NetlistError("external declarations do not cover the unbound ports");

  std::vector<int> in_perm(nk), out_perm(nk); // final index -> reduced index
  auto position = [](const std::vector<int>& kept, int g) {
    return static_cast<int>(std::lower_bound(kept.begin(), kept.end(), g) - kept.begin());
  };
  for (int i = 0; i < nk; ++i) {
    in_perm[i] = position(kept_in, resolve(netlist.external_inputs[i].second, "external input"));
    out_perm[i] = position(kept_out, resolve(netlist.external_outputs[i].second, "external output"));
  }

  CircuitModel out;
  out.num_modes = reduced.num_modes;
  out.num_ports = nk;
  out.A = reduced.A;
  out.a = reduced.a;
  out.nonlin = reduced.nonlin;
  out.B.resize(reduced.num_modes, nk);
  out.C.resize(nk, reduced.num_modes);
  out.D.resize(nk, nk);
  out.c.resize(nk);
  out.in_labels.resize(nk);
  out.out_labels.resize(nk);
  for (int i = 0; i < nk; ++i) {
    out.B.col(i) = reduced.B.col(in_perm[i]);
    out.C.row(i) = reduced.C.row(out_perm[i]);
    out.c[i] = reduced.c[out_perm[i]];
    out.in_labels[i] = netlist.external_inputs[i].first;
    out.out_labels[i] = netlist.external_outputs[i].first;
  }
  for (int i = 0; i < nk; ++i)
    for (int j = 0; j < nk; ++j) out.D(i, j) = reduced.D(out_perm[i], in_perm[j]);
  out.check_consistent();

  result.model = std::move(out);
  return result;
}

} // namespace wigner
