#include "wigner/json_io.hpp"

#include <fstream>

#include "wigner/components.hpp"
#include "wigner/errors.hpp"

namespace wigner {

namespace {

Complex complex_from(const Json& v, const char* what) {
  if (v.is_number()) return Complex(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2) return Complex(v[0].get<double>(), v[1].get<double>());
  throw ConfigError(std::string(what) + ": expected number or [re, im]");
}

Json complex_to(Complex z) { return Json::array({z.real(), z.imag()}); }

std::vector<double> doubles_from(const Json& v, const char* what) {
  if (!v.is_array()) throw ConfigError(std::string(what) + ": expected array");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(x.get<double>());
  return out;
}

PortRef parse_port(const std::string& s, const char* what) {
  const auto pos = s.rfind(':');
  if (pos == std::string::npos || pos + 1 >= s.size())
    throw ConfigError(std::string(what) + ": expected 'instance:port', got '" + s + "'");
  PortRef ref;
  ref.instance = s.substr(0, pos);
  try {
    ref.port = std::stoi(s.substr(pos + 1));
  } catch (const std::exception&) {
    throw ConfigError(std::string(what) + ": bad port index in '" + s + "'");
  }
  return ref;
}

void reject_unknown_keys(const Json& record, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  for (const auto& [key, _] : record.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

} // namespace

CircuitModel component_from_json(const Json& record) {
  if (!record.contains("kind")) throw ConfigError("component record: missing 'kind'");
  const std::string kind = record.at("kind").get<std::string>();
  if (kind == "laser") {
    reject_unknown_keys(record, {"kind", "eta"}, "laser");
    return laser_source(complex_from(record.at("eta"), "laser.eta"));
  }
  if (kind == "phase") {
    reject_unknown_keys(record, {"kind", "phi"}, "phase");
    return phase_shifter(record.at("phi").get<double>());
  }
  if (kind == "bs") {
    reject_unknown_keys(record, {"kind", "theta"}, "bs");
    return beamsplitter(record.at("theta").get<double>());
  }
  if (kind == "mixer") {
    reject_unknown_keys(record, {"kind", "n"}, "mixer");
    return nport_mixer(record.at("n").get<int>());
  }
  if (kind == "kerr1") {
    reject_unknown_keys(record, {"kind", "kappas", "delta", "chi"}, "kerr1");
    KerrParams p;
    p.kappas = doubles_from(record.at("kappas"), "kerr1.kappas");
    p.delta = record.value("delta", 0.0);
    p.chi = record.value("chi", 0.0);
    return kerr_cavity(p);
  }
  if (kind == "kerr2") {
    reject_unknown_keys(
        record, {"kind", "kappas_a", "kappas_b", "delta_a", "delta_b", "chi_a", "chi_b", "chi_ab"},
        "kerr2");
    Kerr2Params p;
    p.kappas_a = doubles_from(record.at("kappas_a"), "kerr2.kappas_a");
    p.kappas_b = doubles_from(record.at("kappas_b"), "kerr2.kappas_b");
    p.delta_a = record.value("delta_a", 0.0);
    p.delta_b = record.value("delta_b", 0.0);
    p.chi_a = record.value("chi_a", 0.0);
    p.chi_b = record.value("chi_b", 0.0);
    p.chi_ab = record.value("chi_ab", 0.0);
    return kerr_cavity_2mode(p);
  }
  if (kind == "nopo") {
    reject_unknown_keys(record, {"kind", "kappa", "kappa_p", "chi"}, "nopo");
    NopoParams p;
    p.kappa = record.at("kappa").get<double>();
    p.kappa_p = record.at("kappa_p").get<double>();
    p.chi = record.at("chi").get<double>();
    return nopo(p);
  }
  throw ConfigError("component record: unknown kind '" + kind + "'");
}

Netlist netlist_from_json(const Json& doc) {
  reject_unknown_keys(doc, {"instances", "connections", "external"}, "netlist");
  Netlist net;
  if (!doc.contains("instances") || !doc.at("instances").is_object())
    throw ConfigError("netlist: 'instances' object required");
  for (const auto& [name, record] : doc.at("instances").items())
    net.add_instance(name, component_from_json(record));
  for (const auto& conn : doc.value("connections", Json::array())) {
    if (!conn.is_array() || conn.size() != 2)
      throw ConfigError("netlist: connection must be [src, dst]");
    const PortRef src = parse_port(conn[0].get<std::string>(), "connection source");
    const PortRef dst = parse_port(conn[1].get<std::string>(), "connection destination");
    net.connect(src.instance, src.port, dst.instance, dst.port);
  }
  const Json ext = doc.value("external", Json::object());
  reject_unknown_keys(ext, {"inputs", "outputs"}, "netlist.external");
  for (const auto& e : ext.value("inputs", Json::array())) {
    if (!e.is_array() || e.size() != 2) throw ConfigError("external input must be [name, port]");
    const PortRef ref = parse_port(e[1].get<std::string>(), "external input");
    net.input(e[0].get<std::string>(), ref.instance, ref.port);
  }
  for (const auto& e : ext.value("outputs", Json::array())) {
    if (!e.is_array() || e.size() != 2) throw ConfigError("external output must be [name, port]");
    const PortRef ref = parse_port(e[1].get<std::string>(), "external output");
    net.output(e[0].get<std::string>(), ref.instance, ref.port);
  }
  return net;
}

Netlist read_netlist(const std::string& path) { return netlist_from_json(read_json(path)); }

namespace {

Json cmat_to_json(const CMat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMat cmat_from_json(const Json& v, Eigen::Index rows, Eigen::Index cols, const char* what) {
  CMat m(rows, cols);
  if (static_cast<Eigen::Index>(v.size()) != rows)
    throw ConfigError(std::string(what) + ": row count mismatch");
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(v[i].size()) != cols)
      throw ConfigError(std::string(what) + ": column count mismatch");
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = complex_from(v[i][j], what);
  }
  return m;
}

Json cvec_to_json(const CVec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to(v[i]));
  return out;
}

CVec cvec_from_json(const Json& v, Eigen::Index n, const char* what) {
  if (static_cast<Eigen::Index>(v.size()) != n)
    throw ConfigError(std::string(what) + ": length mismatch");
  CVec out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = complex_from(v[i], what);
  return out;
}

const char* nonlin_kind_name(NonlinBlock::Kind k) {
  switch (k) {
    case NonlinBlock::Kind::Kerr1: return "kerr1";
    case NonlinBlock::Kind::Kerr2: return "kerr2";
    case NonlinBlock::Kind::Nopo: return "nopo";
  }
  return "?";
}

} // namespace

Json model_to_json(const CircuitModel& model) {
  Json doc;
  doc["num_modes"] = model.num_modes;
  doc["num_ports"] = model.num_ports;
  doc["A"] = cmat_to_json(model.A);
  doc["B"] = cmat_to_json(model.B);
  doc["C"] = cmat_to_json(model.C);
  doc["D"] = cmat_to_json(model.D);
  doc["a"] = cvec_to_json(model.a);
  doc["c"] = cvec_to_json(model.c);
  Json nl = Json::array();
  for (const auto& blk : model.nonlin) {
    Json b;
    b["kind"] = nonlin_kind_name(blk.kind);
    b["modes"] = Json::array({blk.m0, blk.m1, blk.m2});
    b["coeffs"] = Json::array({blk.c0, blk.c1, blk.c2});
    nl.push_back(std::move(b));
  }
  doc["nonlinear"] = std::move(nl);
  doc["inputs"] = model.in_labels;
  doc["outputs"] = model.out_labels;
  return doc;
}

CircuitModel model_from_json(const Json& doc) {
  CircuitModel m;
  m.num_modes = doc.at("num_modes").get<int>();
  m.num_ports = doc.at("num_ports").get<int>();
  m.A = cmat_from_json(doc.at("A"), m.num_modes, m.num_modes, "A");
  m.B = cmat_from_json(doc.at("B"), m.num_modes, m.num_ports, "B");
  m.C = cmat_from_json(doc.at("C"), m.num_ports, m.num_modes, "C");
  m.D = cmat_from_json(doc.at("D"), m.num_ports, m.num_ports, "D");
  m.a = cvec_from_json(doc.at("a"), m.num_modes, "a");
  m.c = cvec_from_json(doc.at("c"), m.num_ports, "c");
  for (const auto& b : doc.value("nonlinear", Json::array())) {
    NonlinBlock blk;
    const std::string kind = b.at("kind").get<std::string>();
    if (kind == "kerr1") blk.kind = NonlinBlock::Kind::Kerr1;
    else if (kind == "kerr2") blk.kind = NonlinBlock::Kind::Kerr2;
    else if (kind == "nopo") blk.kind = NonlinBlock::Kind::Nopo;
    else throw ConfigError("model: unknown nonlinear kind '" + kind + "'");
    blk.m0 = b.at("modes")[0].get<int>();
    blk.m1 = b.at("modes")[1].get<int>();
    blk.m2 = b.at("modes")[2].get<int>();
    blk.c0 = b.at("coeffs")[0].get<double>();
    blk.c1 = b.at("coeffs")[1].get<double>();
    blk.c2 = b.at("coeffs")[2].get<double>();
    m.nonlin.push_back(blk);
  }
  m.in_labels = doc.at("inputs").get<std::vector<std::string>>();
  m.out_labels = doc.at("outputs").get<std::vector<std::string>>();
  m.check_consistent();
  return m;
}

Json ensemble_stats_to_json(const EnsembleStats& stats) {
  Json doc;
  doc["count"] = stats.count;
  Json obs = Json::array();
  for (Eigen::Index i = 0; i < stats.mean.size(); ++i) {
    Json o;
    o["name"] = i < static_cast<Eigen::Index>(stats.names.size()) ? stats.names[i]
                                                                  : ("obs" + std::to_string(i));
    o["mean"] = stats.mean[i];
    o["variance"] = stats.variance[i];
    obs.push_back(std::move(o));
  }
  doc["observables"] = std::move(obs);
  return doc;
}

void write_json(const std::string& path, const Json& doc) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << doc.dump(2) << "\n";
}

Json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  try {
    return Json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

} // namespace wigner
