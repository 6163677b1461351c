#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "wigner/components.hpp"
#include "wigner/errors.hpp"
#include "wigner/json_io.hpp"
#include "wigner/netlist.hpp"

using namespace wigner;
using std::numbers::pi;

TEST_CASE("single unconnected instance elaborates to itself") {
  Netlist net;
  net.add_instance("bs", beamsplitter(0.3));
  net.input("i1", "bs", 0);
  net.input("i2", "bs", 1);
  net.output("o1", "bs", 0);
  net.output("o2", "bs", 1);
  const auto e = elaborate(net);
  CHECK((e.model.D - beamsplitter(0.3).D).cwiseAbs().maxCoeff() == 0.0);
  CHECK(e.model.in_labels[0] == "i1");
}

TEST_CASE("mach-zehnder with a pi arm fully switches") {
  Netlist net;
  net.add_instance("bs1", beamsplitter(pi / 4));
  net.add_instance("ph", phase_shifter(pi));
  net.add_instance("bs2", beamsplitter(pi / 4));
  net.connect("bs1", 0, "ph", 0);
  net.connect("ph", 0, "bs2", 0);
  net.connect("bs1", 1, "bs2", 1);
  net.input("in1", "bs1", 0);
  net.input("in2", "bs1", 1);
  net.output("out1", "bs2", 0);
  net.output("out2", "bs2", 1);
  const auto e = elaborate(net);

  // oracle: multiply the three 2x2 matrices
  CMat ph = CMat::Identity(2, 2);
  ph(0, 0) = std::exp(Complex(0, pi));
  const CMat want = beamsplitter(pi / 4).D * ph * beamsplitter(pi / 4).D;
  CHECK((e.model.D - want).cwiseAbs().maxCoeff() < 1e-14);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) {
      const double mag = std::abs(e.model.D(i, j));
      CHECK(std::min(std::abs(mag - 1.0), mag) < 1e-12);
    }
}

TEST_CASE("dangling and doubly bound ports are rejected") {
  {
    Netlist net;
    net.add_instance("bs", beamsplitter(0.1));
    net.input("i1", "bs", 0);
    net.output("o1", "bs", 0);
    net.output("o2", "bs", 1);
    CHECK_THROWS_AS((void)elaborate(net), DanglingPortError);
  }
  {
    Netlist net;
    net.add_instance("a", phase_shifter(0.1));
    net.add_instance("b", phase_shifter(0.2));
    net.connect("a", 0, "b", 0);
    net.input("in", "a", 0);
    net.input("bad", "b", 0); // also connection target
    net.output("out", "b", 0);
    CHECK_THROWS_AS((void)elaborate(net), NetlistError);
  }
  {
    Netlist net;
    net.add_instance("a", phase_shifter(0.1));
    net.add_instance("b", phase_shifter(0.2));
    net.connect("a", 0, "b", 0);
    net.connect("a", 0, "b", 0);
    net.input("in", "a", 0);
    net.output("out", "b", 0);
    CHECK_THROWS_AS((void)elaborate(net), NetlistError);
  }
}

TEST_CASE("all-pass ring raises SingularLoop") {
  Netlist net;
  net.add_instance("ph", phase_shifter(0.0));
  net.connect("ph", 0, "ph", 0);
  CHECK_THROWS_AS((void)elaborate(net), SingularLoopError);
}

namespace {

Netlist random_feedforward_netlist(std::mt19937& gen, int n_components) {
  std::uniform_real_distribution<double> angle(-pi, pi);
  std::uniform_int_distribution<int> kind(0, 2);
  Netlist net;
  struct Endpoint {
    std::string inst;
    int port;
  };
  std::vector<Endpoint> open_out;
  std::vector<std::string> names;
  for (int k = 0; k < n_components; ++k) {
    const std::string name = "c" + std::to_string(k);
    CircuitModel model;
    switch (kind(gen)) {
      case 0: model = beamsplitter(angle(gen)); break;
      case 1: model = phase_shifter(angle(gen)); break;
      default: model = nport_mixer(3); break;
    }
    const int ports = model.num_ports;
    net.add_instance(name, std::move(model));
    // wire some of this instance's inputs from earlier outputs (feedforward only)
    for (int j = 0; j < ports; ++j) {
      std::uniform_real_distribution<double> u(0, 1);
      if (!open_out.empty() && u(gen) < 0.6) {
        std::uniform_int_distribution<size_t> pick(0, open_out.size() - 1);
        const size_t o = pick(gen);
        net.connect(open_out[o].inst, open_out[o].port, name, j);
        open_out.erase(open_out.begin() + static_cast<long>(o));
      } else {
        net.input("in_" + name + "_" + std::to_string(j), name, j);
      }
    }
    for (int j = 0; j < ports; ++j) open_out.push_back({name, j});
    names.push_back(name);
  }
  int k = 0;
  for (const auto& ep : open_out) net.output("out" + std::to_string(k++), ep.inst, ep.port);
  return net;
}

} // namespace

TEST_CASE("reduction matches the brute-force port solve on random static netlists") {
  std::mt19937 gen(2024);
  for (int trial = 0; trial < 25; ++trial) {
    const Netlist net = random_feedforward_netlist(gen, 4);
    const auto e = elaborate(net);
    const int nk = e.model.num_ports;

    // brute force: unknowns are all concatenated beta_in, beta_out
    std::vector<CircuitModel> models;
    std::vector<std::string> order;
    int n_total = 0;
    std::map<std::string, int> offset;
    for (const auto& [name, model] : net.instances) {
      offset[name] = n_total;
      n_total += model.num_ports;
      models.push_back(model);
      order.push_back(name);
    }
    const CircuitModel flat = concatenate(models);

    std::normal_distribution<double> gauss(0, 1);
    CVec v(nk);
    for (int j = 0; j < nk; ++j) v[j] = Complex(gauss(gen), gauss(gen));

    // unknown x = [beta_in; beta_out], equations:
    //   beta_out - D beta_in = c
    //   beta_in[dst] - beta_out[src] = 0 per connection
    //   beta_in[ext] = v[k]
    const int N = 2 * n_total;
    CMat M = CMat::Zero(N, N);
    CVec rhs = CVec::Zero(N);
    int row = 0;
    for (int i = 0; i < n_total; ++i, ++row) {
      M(row, n_total + i) = 1.0;
      for (int j = 0; j < n_total; ++j) M(row, j) -= flat.D(i, j);
      rhs[row] = flat.c[i];
    }
    for (const auto& conn : net.connections) {
      M(row, offset[conn.dst.instance] + conn.dst.port) = 1.0;
      M(row, n_total + offset[conn.src.instance] + conn.src.port) = -1.0;
      rhs[row] = 0.0;
      ++row;
    }
    for (size_t k = 0; k < net.external_inputs.size(); ++k) {
      const auto& ref = net.external_inputs[k].second;
      M(row, offset[ref.instance] + ref.port) = 1.0;
      rhs[row] = v[static_cast<Eigen::Index>(k)];
      ++row;
    }
    REQUIRE(row == N);
    const CVec x = M.fullPivLu().solve(rhs);

    const CVec got = e.model.D * v + e.model.c;
    for (size_t k = 0; k < net.external_outputs.size(); ++k) {
      const auto& ref = net.external_outputs[k].second;
      const Complex want = x[n_total + offset[ref.instance] + ref.port];
      CHECK(std::abs(got[static_cast<Eigen::Index>(k)] - want) < 1e-10);
    }
  }
}

TEST_CASE("static lossless netlists elaborate to unitary scattering") {
  std::mt19937 gen(77);
  for (int trial = 0; trial < 25; ++trial) {
    const Netlist net = random_feedforward_netlist(gen, 5);
    const auto e = elaborate(net);
    const int n = e.model.num_ports;
    CHECK((e.model.D.adjoint() * e.model.D - CMat::Identity(n, n)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("connection order does not change the elaborated model") {
  std::mt19937 gen(31);
  Netlist net = random_feedforward_netlist(gen, 5);
  auto e1 = elaborate(net);
  std::reverse(net.connections.begin(), net.connections.end());
  auto e2 = elaborate(net);
  CHECK((e1.model.D - e2.model.D).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((e1.model.c - e2.model.c).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("instance order only permutes internal modes") {
  // two cavities in series between external ports; swap declaration order
  auto build = [](bool swapped) {
    Netlist net;
    const KerrParams p1{{1.0}, 0.2, 0.01};
    const KerrParams p2{{2.0}, -0.4, 0.03};
    if (swapped) {
      net.add_instance("k2", kerr_cavity(p2));
      net.add_instance("k1", kerr_cavity(p1));
    } else {
      net.add_instance("k1", kerr_cavity(p1));
      net.add_instance("k2", kerr_cavity(p2));
    }
    net.connect("k1", 0, "k2", 0);
    net.input("in", "k1", 0);
    net.output("out", "k2", 0);
    return elaborate(net);
  };
  const auto a = build(false), b = build(true);
  // same input/output behaviour: drift and output agree after permuting modes
  const int off_a1 = a.mode_offset("k1"), off_a2 = a.mode_offset("k2");
  const int off_b1 = b.mode_offset("k1"), off_b2 = b.mode_offset("k2");
  std::mt19937 gen(5);
  std::normal_distribution<double> gauss(0, 1);
  for (int t = 0; t < 20; ++t) {
    CVec alpha_a(2), alpha_b(2), beta(1);
    const Complex z1(gauss(gen), gauss(gen)), z2(gauss(gen), gauss(gen));
    alpha_a[off_a1] = z1;
    alpha_a[off_a2] = z2;
    alpha_b[off_b1] = z1;
    alpha_b[off_b2] = z2;
    beta << Complex(gauss(gen), gauss(gen));
    const CVec fa = a.model.drift(alpha_a, beta), fb = b.model.drift(alpha_b, beta);
    CHECK(std::abs(fa[off_a1] - fb[off_b1]) < 1e-12);
    CHECK(std::abs(fa[off_a2] - fb[off_b2]) < 1e-12);
    CHECK(std::abs(a.model.output(alpha_a, beta)[0] - b.model.output(alpha_b, beta)[0]) < 1e-12);
  }
}

TEST_CASE("netlist json round trip and model dump") {
  const char* doc = R"({
    "instances": {
      "src": {"kind": "laser", "eta": [0.5, 0.0]},
      "cav": {"kind": "kerr1", "kappas": [1.0], "delta": 0.3, "chi": 0.02},
      "ph":  {"kind": "phase", "phi": 1.2}
    },
    "connections": [["src:0", "cav:0"], ["cav:0", "ph:0"]],
    "external": {
      "inputs":  [["pump", "src:0"]],
      "outputs": [["out", "ph:0"]]
    }
  })";
  const Netlist net = netlist_from_json(Json::parse(doc));
  const auto e = elaborate(net);
  CHECK(e.model.num_modes == 1);
  CHECK(e.model.num_ports == 1);
  const Json dumped = model_to_json(e.model);
  const CircuitModel back = model_from_json(dumped);
  CHECK((back.A - e.model.A).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.D - e.model.D).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.nonlin.size() == e.model.nonlin.size());

  CHECK_THROWS_AS((void)netlist_from_json(Json::parse(R"({"instances": {}, "bogus": 1})")),
                  ConfigError);
  CHECK_THROWS_AS(
      (void)netlist_from_json(Json::parse(R"({"instances": {"x": {"kind": "warp"}}})")),
      ConfigError);
}
