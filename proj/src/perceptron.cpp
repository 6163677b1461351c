#include "wigner/perceptron.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>

#include "wigner/errors.hpp"
#include "wigner/rng.hpp"

namespace wigner {

using std::numbers::pi;

namespace {

constexpr Complex I{0.0, 1.0};

int port_index(const std::vector<std::string>& labels, const std::string& name) {
  const auto it = std::find(labels.begin(), labels.end(), name);
  if (it == labels.end()) throw std::logic_error("port '" + name + "' not found");
  return static_cast<int>(it - labels.begin());
}

/// Declares every still-unbound input as vac_* and output as dump_*.
void autocomplete_externals(Netlist& net) {
  std::set<std::pair<std::string, int>> in_bound, out_bound;
  for (const auto& c : net.connections) {
    out_bound.insert({c.src.instance, c.src.port});
    in_bound.insert({c.dst.instance, c.dst.port});
  }
  for (const auto& [name, ref] : net.external_inputs) in_bound.insert({ref.instance, ref.port});
  for (const auto& [name, ref] : net.external_outputs) out_bound.insert({ref.instance, ref.port});
  for (const auto& [iname, model] : net.instances) {
    for (int j = 0; j < model.num_ports; ++j) {
      if (!in_bound.count({iname, j}))
        net.input("vac_" + iname + "_" + std::to_string(j), iname, j);
      if (!out_bound.count({iname, j}))
        net.output("dump_" + iname + "_" + std::to_string(j), iname, j);
    }
  }
}

Complex single_root_alpha0(const KerrParams& p, Complex eps0) {
  const auto roots = kerr_bias_to_state(p, eps0);
  // the amplifier cavity is operated strictly below the bistability threshold
  if (roots.size() != 1) {
    for (const auto& r : roots)
      if (r.stable) return r.alpha0;
    throw std::logic_error("kerr amplifier operated in a multistable regime");
  }
  return roots[0].alpha0;
}

} // namespace

// ---------------------------------------------------------------------------
// Amplifier

AmplifierDesign::Gains AmplifierDesign::gains_at_bias(Complex eps0) const {
  const KerrParams p = cavity();
  const Complex alpha0 = single_root_alpha0(p, eps0);
  const GainCoefficients g = kerr_reflection_coeffs(p, alpha0);
  Gains out;
  out.g_minus = g.g_minus * std::exp(I * (phi_in + phi_out));
  out.g_plus = g.g_plus * std::exp(I * (phi_out - phi_in));
  return out;
}

AmplifierDesign AmplifierDesign::create(double g_max, double kappa, double chi) {
  if (!(g_max > 1) || !(kappa > 0) || !(chi < 0))
    throw std::invalid_argument("AmplifierDesign: g_max > 1, kappa > 0, chi < 0");
  AmplifierDesign d;
  d.g_max = g_max;
  d.kappa = kappa;
  d.chi = chi;
  d.delta = detuning_for_gain(kappa, g_max);
  const auto mg = kerr_max_gain(kappa, d.delta, chi);
  d.n_max = mg.n_max;
  const KerrParams p = d.cavity();
  d.eps0_max = std::abs(kerr_bias_for_state(p, std::sqrt(d.n_max)));

  // trim phases chosen at the maximum-gain bias so a real probe exits real
  const Complex alpha0 = single_root_alpha0(p, d.eps0_max);
  const GainCoefficients g = kerr_reflection_coeffs(p, alpha0);
  d.phi_in = 0.5 * (std::arg(g.g_plus) - std::arg(g.g_minus));
  d.phi_out = -0.5 * (std::arg(g.g_plus) + std::arg(g.g_minus));

  // locate the g_rr zero crossing below the maximum-gain bias
  double hi = d.eps0_max, lo = 0.05 * d.eps0_max;
  double step = 0.02 * d.eps0_max;
  double at = hi - step;
  while (at > lo && d.gains_at_bias(at).rr() > 0) at -= step;
  if (at <= lo) throw std::logic_error("AmplifierDesign: no g_rr zero crossing found");
  double lo_b = at, hi_b = at + step;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo_b + hi_b);
    (d.gains_at_bias(mid).rr() > 0 ? hi_b : lo_b) = mid;
  }
  d.eps0_min = 0.5 * (lo_b + hi_b);
  return d;
}

namespace {

/// Interferometric cavity pair with signal/bias isolation; shared by the
/// amplifier and the quadrature filter.
Netlist cavity_pair_netlist(const KerrParams& cav, double phi_in, double phi_out) {
  Netlist net;
  net.add_instance("pin", phase_shifter(phi_in));
  net.add_instance("bs1", beamsplitter(pi / 4));
  net.add_instance("ka", kerr_cavity(cav));
  net.add_instance("kb", kerr_cavity(cav));
  net.add_instance("bs2", beamsplitter(pi / 4));
  net.add_instance("pout", phase_shifter(phi_out));
  net.connect("pin", 0, "bs1", 0);
  net.connect("bs1", 0, "ka", 0);
  net.connect("bs1", 1, "kb", 0);
  net.connect("ka", 0, "bs2", 0);
  net.connect("kb", 0, "bs2", 1);
  net.connect("bs2", 1, "pout", 0);
  net.input("sig", "pin", 0);
  net.input("bias", "bs1", 1);
  net.output("sig", "pout", 0);
  net.output("bias", "bs2", 0);
  return net;
}

} // namespace

Elaborated build_tunable_amplifier(const AmplifierDesign& d) {
  Netlist net = cavity_pair_netlist(d.cavity(), d.phi_in, d.phi_out);
  autocomplete_externals(net);
  return elaborate(net);
}

Elaborated build_quadrature_filter(double kappa, double chi, double delta) {
  const auto q = quadrature_filter_coeffs(kappa, chi, delta);
  const double phi_in = 0.5 * (std::arg(q.gains.g_plus) - std::arg(q.gains.g_minus));
  const double phi_out = -0.5 * (std::arg(q.gains.g_plus) + std::arg(q.gains.g_minus));
  const KerrParams cav{{kappa, kappa}, delta, chi};
  Netlist net = cavity_pair_netlist(cav, phi_in, phi_out);
  // the loss ports stay open: vacuum in, discarded out
  net.input("loss_a", "ka", 1);
  net.input("loss_b", "kb", 1);
  net.output("loss_a", "ka", 1);
  net.output("loss_b", "kb", 1);
  autocomplete_externals(net);
  return elaborate(net);
}

// ---------------------------------------------------------------------------
// Synapse

namespace {

Kerr2Params routing_gate_params(double kappa_a, double kappa_b, double chi_ab,
                                double signal_est) {
  const FredkinDesign fd = fredkin_params(kappa_a, kappa_b, 0.0, 0.0, chi_ab, signal_est);
  Kerr2Params p;
  p.kappas_a = {kappa_a};
  p.kappas_b = {kappa_b};
  p.delta_a = fd.delta_a;
  p.delta_b = fd.delta_b;
  p.chi_a = 0.0;
  p.chi_b = 0.0;
  p.chi_ab = chi_ab;
  return p;
}

Netlist synapse_netlist(const SynapseDesign& d, bool probe) {
  const Elaborated amp = build_tunable_amplifier(d.amplifier);
  const double theta_mem = std::acos(d.t_mem);
  Netlist net;
  net.add_instance("asplit", beamsplitter(pi / 4));
  net.add_instance("ampP", amp.model);
  net.add_instance("ampM", amp.model);
  net.add_instance("fbsplit", beamsplitter(pi / 4));
  net.add_instance("gateY", kerr_cavity_2mode(d.fb_gate));
  net.add_instance("gateH", kerr_cavity_2mode(d.fb_gate));
  net.add_instance("fbmerge", beamsplitter(pi / 4));
  net.add_instance("pinj", phase_shifter(d.theta_inj));
  if (!probe) net.add_instance("nopo", nopo(d.nopo));
  net.add_instance("mem", beamsplitter(theta_mem));
  net.add_instance("mix", beamsplitter(pi / 4));
  net.add_instance("pi_m", phase_shifter(pi));
  net.add_instance("omerge", beamsplitter(pi / 4));

  // signal path: split onto the amplifier pair, recombine with a pi shift
  net.connect("asplit", 0, "ampP", 0);
  net.connect("asplit", 1, "ampM", 0);
  net.connect("ampP", 0, "omerge", 0);
  net.connect("ampM", 0, "pi_m", 0);
  net.connect("pi_m", 0, "omerge", 1);

  // feedback path: drive through the two routing gates, difference injected
  // into the memory
  net.connect("fbsplit", 0, "gateY", 0);
  net.connect("fbsplit", 1, "gateH", 0);
  net.connect("gateY", 0, "fbmerge", 0);
  net.connect("gateH", 0, "fbmerge", 1);
  net.connect("fbmerge", 0, "pinj", 0);

  // memory output biases the complementary pair through the offset mixer
  if (!probe) {
    net.connect("pinj", 0, "nopo", 0);
    net.connect("nopo", 0, "mem", 0);
  }
  net.connect("mem", 0, "mix", 1);
  net.connect("mix", 0, "ampM", 1);
  net.connect("mix", 1, "ampP", 1);

  net.input("sig", "asplit", 0);
  net.input("fb", "fbsplit", 0);
  net.output("sig", "omerge", 1);
  net.input("ctl_y", "gateY", 1);
  net.output("ctl_y", "gateY", 1);
  net.input("ctl_yhat", "gateH", 1);
  net.output("ctl_yhat", "gateH", 1);
  net.input("offset", "mix", 0);
  if (probe) {
    net.input("phase_ref", "mem", 0);
    net.output("inject", "pinj", 0);
  } else {
    net.input("pump", "nopo", 2);
  }
  autocomplete_externals(net);
  return net;
}

} // namespace

SynapseDesign SynapseDesign::create(double g_max, double kappa_amp, double chi_amp, double n0,
                                    double alpha_fb, double signal_scale) {
  SynapseDesign d;
  d.amplifier = AmplifierDesign::create(g_max, kappa_amp, chi_amp);
  d.n0 = n0;
  d.alpha_fb = alpha_fb;
  d.signal_scale = signal_scale;

  d.nopo.kappa = 1.0;
  d.nopo.kappa_p = 2.0;
  const double eps_th = std::sqrt(d.nopo.kappa * n0) / 2.0;
  d.nopo.chi = d.nopo.kappa * std::sqrt(d.nopo.kappa_p) / (4.0 * eps_th);
  d.pump = Complex(-2.0 * eps_th, 0.0);

  const double r = std::sqrt(d.nopo.kappa * n0); // memory output amplitude
  const double r_eff = d.amplifier.eps0_max - d.amplifier.eps0_min;
  if (r_eff >= r)
    throw std::invalid_argument("SynapseDesign: memory amplitude too small for the bias span");
  d.t_mem = r_eff / r;
  d.xi0_offset = d.amplifier.eps0_max + d.amplifier.eps0_min;

  // split the input so the classify path respects the small-signal budget and
  // the feedback path injects alpha_fb per unit data value
  const double c_main = 2.0 * signal_scale * d.amplifier.eps0_max / d.x_ref;
  d.x_amp = std::hypot(c_main, alpha_fb);
  d.theta_tap = std::atan2(alpha_fb, c_main);

  // routing gates: the flip level is matched to the label-rail scale by the
  // common mode width; symmetric widths keep the cross-Kerr pair far from its
  // parametric instability (|chi| |a||b| well below kappa/2)
  const double arm_est = alpha_fb / std::sqrt(2.0);
  const double xi0_target = 21.6;
  const double kappa_fb = 2.0 * xi0_target;
  d.fb_gate = routing_gate_params(kappa_fb, kappa_fb, -1.0, arm_est);
  d.fb_xi0 = fredkin_params(kappa_fb, kappa_fb, 0.0, 0.0, -1.0, arm_est).xi0;

  d.theta_inj = -pi / 2.0; // refined by calibration in build paths that need it
  return d;
}

AmplifierDesign::Gains SynapseDesign::gain_at_phase(double phi) const {
  const double r_eff = d_mem_amplitude();
  const Complex xi = r_eff * std::exp(I * phi);
  // per-cavity biases of the complementary pair (mix and amplifier splitters)
  const Complex eP = (xi0_offset / std::sqrt(2.0) + xi / std::sqrt(2.0)) / std::sqrt(2.0);
  const Complex eM = (xi0_offset / std::sqrt(2.0) - xi / std::sqrt(2.0)) / std::sqrt(2.0);
  const auto gP = amplifier.gains_at_bias(eP);
  const auto gM = amplifier.gains_at_bias(eM);
  AmplifierDesign::Gains g;
  g.g_minus = 0.5 * (gP.g_minus - gM.g_minus);
  g.g_plus = 0.5 * (gP.g_plus - gM.g_plus);
  return g;
}

double SynapseDesign::d_mem_amplitude() const {
  return t_mem * std::sqrt(nopo.kappa * n0);
}

SynapseBuilt build_synapse(const SynapseDesign& d) {
  const Netlist net = synapse_netlist(d, false);
  Elaborated e = elaborate(net);
  SynapseBuilt out;
  out.model = std::move(e.model);
  const int off = e.mode_offset("nopo");
  out.mode_nopo_signal = off;
  out.mode_nopo_idler = off + 1;
  out.mode_nopo_pump = off + 2;
  return out;
}

SynapseBuilt build_synapse_probe(const SynapseDesign& d, double /*phi*/) {
  const Netlist net = synapse_netlist(d, true);
  Elaborated e = elaborate(net);
  SynapseBuilt out;
  out.model = std::move(e.model);
  return out;
}

AmplifierDesign::Gains measure_synapse_gain(const SynapseDesign& d, double phi) {
  const SynapseBuilt built = build_synapse_probe(d, phi);
  const CircuitModel& m = built.model;
  const int n = m.num_ports;
  const int i_sig = port_index(m.in_labels, "sig");
  const int i_off = port_index(m.in_labels, "offset");
  const int i_ref = port_index(m.in_labels, "phase_ref");
  const int o_sig = port_index(m.out_labels, "sig");

  const Complex ref = d.d_mem_amplitude() / d.t_mem * std::exp(I * phi);

  auto settle = [&](const CVec& beta, const CVec& guess) {
    SimConfig cfg;
    cfg.noise = false;
    cfg.dt = 2e-4;
    cfg.record_stride = 1000;
    const InputSchedule sched = InputSchedule::constant(m.in_labels, beta, 2.0);
    const Trajectory t = integrate(m, sched, cfg, guess);
    CVec end(m.num_modes);
    for (int j = 0; j < m.num_modes; ++j)
      end[j] = t.states(static_cast<Eigen::Index>(t.times.size()) - 1, j);
    return steady_state(m, beta, end).state;
  };

  CVec beta0 = CVec::Zero(n);
  beta0[i_off] = d.xi0_offset;
  beta0[i_ref] = ref;
  const CVec base = settle(beta0, CVec::Zero(m.num_modes));

  const double delta = 1e-3 * d.amplifier.eps0_max;
  auto out_at = [&](Complex probe) {
    CVec beta = beta0;
    beta[i_sig] = probe;
    const CVec st = steady_state(m, beta, base).state;
    return m.output(st, beta)[o_sig];
  };
  const Complex col_r = (out_at(delta) - out_at(-delta)) / (2.0 * delta);
  const Complex col_i = (out_at(I * delta) - out_at(-I * delta)) / (2.0 * delta);
  AmplifierDesign::Gains g;
  g.g_minus = 0.5 * (col_r - I * col_i);
  g.g_plus = 0.5 * (col_r + I * col_i);
  return g;
}

// ---------------------------------------------------------------------------
// Thresholder

ThresholderDesign ThresholderDesign::create(double zeta0, double kappa_gate, double chi_ab,
                                            double kappa_pre) {
  ThresholderDesign d;
  d.zeta0 = zeta0;
  const double zeta_arm = zeta0 / std::sqrt(2.0);
  d.gate = routing_gate_params(kappa_gate, kappa_gate, chi_ab, zeta_arm);
  d.gate_xi0 = fredkin_params(kappa_gate, kappa_gate, 0.0, 0.0, chi_ab, zeta_arm).xi0;
  // transmission cavity: just below the bistable threshold, dynamically
  // resonant where its output reaches the gate flip level
  const double delta_th = std::numbers::sqrt3 * kappa_pre;
  d.pre_cavity.kappas = {kappa_pre, kappa_pre};
  d.pre_cavity.delta = -0.95 * delta_th;
  const double n_pre = d.gate_xi0 * d.gate_xi0 / kappa_pre;
  d.pre_cavity.chi = -d.pre_cavity.delta / n_pre;
  d.s0 = 0; // calibrated separately
  return d;
}

Elaborated build_thresholder(const ThresholderDesign& d) {
  Netlist net;
  net.add_instance("smix", beamsplitter(pi / 4));
  net.add_instance("pre", kerr_cavity(d.pre_cavity));
  net.add_instance("gate", kerr_cavity_2mode(d.gate));
  net.add_instance("gbs1", beamsplitter(pi / 4));
  net.add_instance("garm", phase_shifter(pi / 2));
  net.add_instance("gbs2", beamsplitter(pi / 4));
  net.connect("smix", 1, "pre", 0);
  net.connect("pre", 1, "gate", 1);
  net.connect("gbs1", 0, "gate", 0);
  net.connect("gbs1", 1, "garm", 0);
  net.connect("garm", 0, "gbs2", 1);
  net.connect("gate", 0, "gbs2", 0);
  net.input("s", "smix", 0);
  net.input("s0", "smix", 1);
  net.input("one", "gbs1", 0);
  net.output("yhat", "gbs2", 0);
  autocomplete_externals(net);
  return elaborate(net);
}

namespace {

struct ThresholderProbe {
  CircuitModel model;
  int i_s, i_s0, i_one, o_yhat;

  explicit ThresholderProbe(const ThresholderDesign& d) {
    model = build_thresholder(d).model;
    i_s = port_index(model.in_labels, "s");
    i_s0 = port_index(model.in_labels, "s0");
    i_one = port_index(model.in_labels, "one");
    o_yhat = port_index(model.out_labels, "yhat");
  }

  /// Cold DC response: relax from the empty state, then polish. The gate can
  /// hysterese near its flip, so the from-vacuum protocol defines the map.
  double intensity(const ThresholderDesign& d, double s, double s0) const {
    CVec beta = CVec::Zero(model.num_ports);
    beta[i_s] = s;
    beta[i_s0] = s0;
    beta[i_one] = d.zeta0;
    SimConfig cfg;
    cfg.noise = false;
    cfg.dt = 5e-5;
    cfg.record_stride = 4000;
    const InputSchedule sched = InputSchedule::constant(model.in_labels, beta, 2.0);
    const Trajectory t = integrate(model, sched, cfg, CVec::Zero(model.num_modes));
    CVec end(model.num_modes);
    for (int j = 0; j < model.num_modes; ++j)
      end[j] = t.states(static_cast<Eigen::Index>(t.times.size()) - 1, j);
    CVec st = end;
    try {
      st = steady_state(model, beta, end).state;
    } catch (const NoConvergenceError&) {
      // mid-jump points relax onto a slow manifold; the long-time state serves
    }
    return std::norm(model.output(st, beta)[o_yhat]);
  }
};

} // namespace

std::vector<std::pair<double, double>> thresholder_dc_map(const ThresholderDesign& d,
                                                          double s_min, double s_max, int n) {
  ThresholderProbe probe(d);
  std::vector<std::pair<double, double>> map;
  for (int k = 0; k < n; ++k) {
    const double s = s_min + (s_max - s_min) * k / double(n - 1);
    map.emplace_back(s, probe.intensity(d, s, d.s0));
  }
  return map;
}

double calibrate_thresholder_offset(const ThresholderDesign& d) {
  ThresholderProbe probe(d);
  const double target = 0.5 * d.zeta0 * d.zeta0;
  // march s0 upward until the cold DC intensity at s = 0 crosses half the
  // logic-one level, then bisect
  double lo = 0, hi = 0;
  double prev = probe.intensity(d, 0.0, 0.0);
  const double s0_max = 2.5 * std::sqrt(2.0) * d.gate_xi0;
  const double step = s0_max / 100.0;
  for (double s0 = step; s0 <= s0_max; s0 += step) {
    const double cur = probe.intensity(d, 0.0, s0);
    if (prev < target && cur >= target) {
      lo = s0 - step;
      hi = s0;
      break;
    }
    prev = cur;
  }
  if (hi == 0) throw NoConvergenceError("thresholder calibration: no half-level crossing");
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (probe.intensity(d, 0.0, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Perceptron

PerceptronSpec PerceptronSpec::create(int n_inputs) {
  if (n_inputs < 1) throw std::invalid_argument("PerceptronSpec: n_inputs >= 1");
  PerceptronSpec s;
  s.n_inputs = n_inputs;
  s.synapse = SynapseDesign::create(20.0, 200.0, -2.0, 2000.0, 3.2, 0.12);
  // wide-band booster: same gain and photon number, negligible settling lag
  s.booster = AmplifierDesign::create(20.0, 400.0, -4.0);
  s.thresholder = ThresholderDesign::create(72.0, 60.0, -0.4, 60.0);
  s.thresholder.s0 = calibrate_thresholder_offset(s.thresholder);
  s.qf_kappa = 20.0;
  s.qf_chi = 0.2;
  s.qf_delta = -10.0;
  // both label rails pass identical T-controlled gates, so their conditioned
  // levels match whatever the common gate transfer is; the T gates carry
  // rail-scale signal amplitudes and stay wide for parametric margin
  const double rail = std::sqrt(2.0) * s.synapse.fb_xi0;
  s.t_gate = routing_gate_params(100.0, 100.0, -1.0, s.synapse.fb_xi0 / std::sqrt(2.0));
  s.t_xi0 = fredkin_params(100.0, 100.0, 0.0, 0.0, -1.0, s.synapse.fb_xi0 / std::sqrt(2.0)).xi0;
  s.t_on_level = s.t_xi0;
  s.yhat_tap_cos = rail / s.thresholder.zeta0;
  if (s.yhat_tap_cos > 1.0)
    throw std::invalid_argument("PerceptronSpec: logic-one level too small for the gate level");
  // saturation level at the readout tap, from the DC map
  double sat = 0;
  for (const auto& [sv, iv] :
       thresholder_dc_map(s.thresholder, 0.0, 0.6 * s.thresholder.s0, 25))
    sat = std::max(sat, iv);
  s.one_level_out = std::sqrt(sat) / std::sqrt(2.0);
  s.ctl_y_level = s.one_level_out * s.yhat_tap_cos;
  return s;
}

double PerceptronCircuit::gain_from_phase(double phi) const {
  const double x = std::fmod(std::fmod(phi, 2 * pi) + 2 * pi, 2 * pi);
  const double pos = x / (2 * pi) * (lut_phi.size() - 1);
  const auto i = std::min(static_cast<size_t>(pos), lut_phi.size() - 2);
  const double f = pos - double(i);
  return (1 - f) * lut_grr[i] + f * lut_grr[i + 1];
}

PerceptronCircuit build_perceptron(const PerceptronSpec& spec) {
  const int N = spec.n_inputs;
  PerceptronCircuit pc;
  pc.spec = spec;

  const SynapseBuilt syn = build_synapse(spec.synapse);
  const Elaborated qf = build_quadrature_filter(spec.qf_kappa, spec.qf_chi, spec.qf_delta);
  const Elaborated booster = build_tunable_amplifier(spec.booster);
  const Elaborated thr = build_thresholder(spec.thresholder);

  Netlist net;
  for (int j = 0; j < N; ++j) net.add_instance("syn" + std::to_string(j), syn.model);
  if (N >= 2) net.add_instance("mix", nport_mixer(N));
  net.add_instance("tpre", beamsplitter(std::asin(spec.diag_tap_sin)));
  net.add_instance("qf", qf.model);
  net.add_instance("tpost", beamsplitter(std::asin(spec.diag_tap_sin)));
  // saturating gain stage sharpens the decision without moving its midpoint
  // (the interferometric stage has no bias leakage at zero signal)
  net.add_instance("boost", booster.model);
  net.add_instance("batt", beamsplitter(std::acos(spec.booster_atten)));
  net.add_instance("thr", thr.model);
  net.add_instance("ytap", beamsplitter(pi / 4));
  net.add_instance("ycond", beamsplitter(std::acos(spec.yhat_tap_cos)));
  // identical T-controlled gates on the estimated- and true-label rails keep
  // the two feedback controls matched through the common gate transfer
  for (const char* g : {"th", "ty"}) {
    net.add_instance(std::string("tg") + g, kerr_cavity_2mode(spec.t_gate));
    net.add_instance(std::string("tbs1") + g, beamsplitter(pi / 4));
    net.add_instance(std::string("tarm") + g, phase_shifter(pi / 2));
    net.add_instance(std::string("tbs2") + g, beamsplitter(pi / 4));
  }

  const int syn_sig_in = port_index(syn.model.in_labels, "sig");
  const int syn_fb_in = port_index(syn.model.in_labels, "fb");
  const int syn_sig_out = port_index(syn.model.out_labels, "sig");
  const int syn_ctl_y = port_index(syn.model.in_labels, "ctl_y");
  const int syn_ctl_yhat = port_index(syn.model.in_labels, "ctl_yhat");
  const int syn_ctl_y_out = port_index(syn.model.out_labels, "ctl_y");
  const int syn_ctl_yhat_out = port_index(syn.model.out_labels, "ctl_yhat");
  const int syn_pump = port_index(syn.model.in_labels, "pump");
  const int syn_offset = port_index(syn.model.in_labels, "offset");
  const int qf_sig_in = port_index(qf.model.in_labels, "sig");
  const int qf_sig_out = port_index(qf.model.out_labels, "sig");
  const int qf_bias = port_index(qf.model.in_labels, "bias");
  const int thr_s = port_index(thr.model.in_labels, "s");
  const int thr_s0 = port_index(thr.model.in_labels, "s0");
  const int thr_one = port_index(thr.model.in_labels, "one");
  const int thr_yhat = port_index(thr.model.out_labels, "yhat");

  // signal path: each input is split between the classify path and the
  // feedback drive of its synapse
  for (int j = 0; j < N; ++j) {
    const std::string s = "syn" + std::to_string(j);
    const std::string tp = "xtap" + std::to_string(j);
    net.add_instance(tp, beamsplitter(spec.synapse.theta_tap));
    net.input("x" + std::to_string(j + 1), tp, 0);
    net.connect(tp, 0, s, syn_sig_in);
    net.connect(tp, 1, s, syn_fb_in);
    if (N >= 2) net.connect(s, syn_sig_out, "mix", j);
  }
  if (N >= 2) net.connect("mix", 0, "tpre", 0);
  else net.connect("syn0", syn_sig_out, "tpre", 0);
  net.connect("tpre", 0, "qf", qf_sig_in);
  net.connect("qf", qf_sig_out, "tpost", 0);
  net.connect("tpost", 0, "boost", 0);
  net.connect("boost", 0, "batt", 0);
  net.connect("batt", 0, "thr", thr_s);
  net.output("s_pre", "tpre", 1);
  net.output("s_post", "tpost", 1);

  // label generation and readout
  net.connect("thr", thr_yhat, "ytap", 0);
  net.output("yhat", "ytap", 0);

  // feedback control rails: the estimated label is conditioned and T-gated,
  // then traverses the synapses sequentially; the true label rail passes an
  // identical T-gate, and the T control is reused across both
  net.connect("ytap", 1, "ycond", 0);
  net.connect("ycond", 0, "tbs1th", 0);
  net.input("Y", "tbs1ty", 0);
  for (const char* g : {"th", "ty"}) {
    const std::string b1 = std::string("tbs1") + g, b2 = std::string("tbs2") + g;
    const std::string tg = std::string("tg") + g, arm = std::string("tarm") + g;
    net.connect(b1, 0, tg, 0);
    net.connect(b1, 1, arm, 0);
    net.connect(arm, 0, b2, 1);
    net.connect(tg, 0, b2, 0);
  }
  net.input("T", "tgth", 1);
  net.connect("tgth", 1, "tgty", 1);
  net.connect("tbs2th", 0, "syn0", syn_ctl_yhat);
  net.connect("tbs2ty", 0, "syn0", syn_ctl_y);
  for (int j = 0; j + 1 < N; ++j) {
    const std::string a = "syn" + std::to_string(j), b = "syn" + std::to_string(j + 1);
    net.connect(a, syn_ctl_y_out, b, syn_ctl_y);
    net.connect(a, syn_ctl_yhat_out, b, syn_ctl_yhat);
  }

  // supplies
  for (int j = 0; j < N; ++j) {
    const std::string s = "syn" + std::to_string(j);
    net.input("pump" + std::to_string(j + 1), s, syn_pump);
    net.input("offset" + std::to_string(j + 1), s, syn_offset);
  }
  net.input("qf_bias", "qf", qf_bias);
  net.input("boost_bias", "boost", 1);
  net.input("one", "thr", thr_one);
  net.input("s0", "thr", thr_s0);

  autocomplete_externals(net);
  Elaborated e = elaborate(net);
  pc.model = std::move(e.model);

  for (int j = 0; j < N; ++j) {
    const int off = e.mode_offset("syn" + std::to_string(j));
    pc.nopo_signal_mode.push_back(off + syn.mode_nopo_signal);
    pc.nopo_idler_mode.push_back(off + syn.mode_nopo_idler);
  }

  // constant supply levels
  const auto& d = spec.synapse;
  const Complex qf_bias_level =
      -std::sqrt(2.0) * std::sqrt(spec.qf_kappa) * std::sqrt(-spec.qf_delta / spec.qf_chi);
  for (int j = 0; j < N; ++j) {
    pc.supply_ports.push_back("pump" + std::to_string(j + 1));
    pc.supply_ports.push_back("offset" + std::to_string(j + 1));
  }
  pc.supply_ports.push_back("qf_bias");
  pc.supply_ports.push_back("boost_bias");
  pc.supply_ports.push_back("one");
  pc.supply_ports.push_back("s0");
  pc.supply_levels.resize(static_cast<Eigen::Index>(pc.supply_ports.size()));
  Eigen::Index k = 0;
  for (int j = 0; j < N; ++j) {
    pc.supply_levels[k++] = d.pump;
    pc.supply_levels[k++] = d.xi0_offset;
  }
  pc.supply_levels[k++] = qf_bias_level;
  pc.supply_levels[k++] = std::sqrt(2.0) * spec.booster.eps0_max;
  pc.supply_levels[k++] = spec.thresholder.zeta0;
  pc.supply_levels[k++] = spec.thresholder.s0;

  // gain lookup over one phase period
  const int n_lut = 720;
  pc.lut_phi.resize(n_lut + 1);
  pc.lut_grr.resize(n_lut + 1);
  pc.lut_gir.resize(n_lut + 1);
  for (int i = 0; i <= n_lut; ++i) {
    const double phi = 2 * pi * i / double(n_lut);
    const auto g = d.gain_at_phase(phi);
    pc.lut_phi[i] = phi;
    pc.lut_grr[i] = g.rr();
    pc.lut_gir[i] = g.ir();
  }
  return pc;
}

CVec perceptron_initial_state(const PerceptronCircuit& pc, uint64_t seed,
                              std::vector<double>* phases_out) {
  const auto& d = pc.spec.synapse;
  CVec alpha = CVec::Zero(pc.model.num_modes);
  Philox rng(seed, 0x70686173ull); // phase-init stream
  const double mag = std::sqrt(d.n0);
  const double eth = nopo_threshold(d.nopo);
  const Complex pump_dir = d.pump / std::abs(d.pump);
  const Complex alpha_p = -(2.0 * eth / std::sqrt(d.nopo.kappa_p)) * pump_dir;
  if (phases_out) phases_out->clear();
  for (size_t j = 0; j < pc.nopo_signal_mode.size(); ++j) {
    // start each weight near zero gain: the gain extremes are fixed points of
    // the phase pull, so a memory parked there would never train away
    const double branch = rng.uniform() < 0.5 ? pi / 2 : 3 * pi / 2;
    const double phi = branch + 0.15 * rng.normal();
    if (phases_out) phases_out->push_back(phi);
    alpha[pc.nopo_signal_mode[j]] = mag * std::exp(I * phi);
    alpha[pc.nopo_idler_mode[j]] = mag * std::exp(-I * phi);
    alpha[pc.nopo_idler_mode[j] + 1] = alpha_p;
  }
  return alpha;
}

InputSchedule encode_dataset(const Eigen::MatrixXd& X, const std::vector<int>& y, int m_train,
                             const PerceptronCircuit& pc) {
  const int N = pc.spec.n_inputs;
  const int M = static_cast<int>(X.rows());
  if (X.cols() != N) throw std::invalid_argument("encode_dataset: dimension mismatch");
  if (static_cast<int>(y.size()) < std::min(m_train, M))
    throw std::invalid_argument("encode_dataset: labels shorter than the training block");

  InputSchedule sched;
  for (int j = 0; j < N; ++j) sched.port_names.push_back("x" + std::to_string(j + 1));
  sched.port_names.push_back("Y");
  sched.port_names.push_back("T");
  for (const auto& p : pc.supply_ports) sched.port_names.push_back(p);

  const Eigen::Index n_ports = static_cast<Eigen::Index>(sched.port_names.size());
  auto base_amps = [&]() {
    CVec amps = CVec::Zero(n_ports);
    amps.tail(pc.supply_levels.size()) = pc.supply_levels;
    return amps;
  };

  double t = 0;
  if (pc.spec.t_settle > 0) {
    sched.segments.push_back({0.0, pc.spec.t_settle, base_amps()});
    t = pc.spec.t_settle;
  }
  const double dt_s = pc.spec.dt_sample;
  for (int i = 0; i < M; ++i) {
    CVec amps = base_amps();
    for (int j = 0; j < N; ++j) amps[j] = pc.spec.synapse.x_amp * X(i, j);
    const bool training = i < m_train;
    amps[N] = training && y[i] ? pc.spec.ctl_y_level : 0.0;
    amps[N + 1] = training ? pc.spec.t_on_level : 0.0;
    sched.segments.push_back({t, t + dt_s, std::move(amps)});
    t += dt_s;
  }
  sched.validate();
  return sched;
}

std::vector<int> decode_labels(const Trajectory& traj, const PerceptronCircuit& pc,
                               int n_segments) {
  const int o = port_index(traj.output_names, "yhat");
  const double one2 = pc.spec.one_level_out * pc.spec.one_level_out;
  std::vector<int> labels(n_segments, 0);
  std::vector<double> acc(n_segments, 0);
  std::vector<long> cnt(n_segments, 0);
  const double t0 = pc.spec.t_settle;
  const double dt_s = pc.spec.dt_sample;
  for (size_t r = 0; r < traj.times.size(); ++r) {
    const double t = traj.times[r];
    if (t < t0) continue;
    const int seg = static_cast<int>((t - t0) / dt_s);
    if (seg < 0 || seg >= n_segments) continue;
    acc[seg] += std::norm(traj.outputs_mean(static_cast<Eigen::Index>(r), o));
    ++cnt[seg];
  }
  for (int i = 0; i < n_segments; ++i) {
    const double frac = cnt[i] ? acc[i] / double(cnt[i]) / one2 : 0.0;
    labels[i] = std::clamp(frac, 0.0, 1.0) >= 0.5 ? 1 : 0;
  }
  return labels;
}

ClassificationRun run_training(const PerceptronCircuit& pc, const Eigen::MatrixXd& X,
                               const std::vector<int>& y, int m_train, const SimConfig& config) {
  const int M = static_cast<int>(X.rows());
  const int N = pc.spec.n_inputs;
  ClassificationRun run;
  run.m_train = m_train;
  run.m_test = M - m_train;
  run.y_true = y;
  run.seed = config.seed;

  const InputSchedule sched = encode_dataset(X, y, m_train, pc);
  SimConfig cfg = config;
  if (cfg.recorded_outputs.empty()) cfg.recorded_outputs = {"yhat", "s_pre", "s_post"};
  if (cfg.recorded_states.empty()) {
    for (int j = 0; j < N; ++j) {
      cfg.recorded_states.push_back(pc.nopo_signal_mode[j]);
      cfg.recorded_states.push_back(pc.nopo_idler_mode[j]);
    }
  }
  const CVec init = perceptron_initial_state(pc, cfg.seed, &run.initial_phases);
  const Trajectory traj = integrate(pc.model, sched, cfg, init);

  run.y_hat = decode_labels(traj, pc, M);
  long train_err = 0, test_err = 0;
  for (int i = 0; i < M; ++i) {
    const bool err = run.y_hat[i] != y[i];
    if (i < m_train) train_err += err;
    else test_err += err;
  }
  run.train_error = m_train ? double(train_err) / m_train : 0.0;
  run.test_error = run.m_test ? double(test_err) / run.m_test : 0.0;

  const auto n_rec = static_cast<Eigen::Index>(traj.times.size());
  run.trace_times.assign(traj.times.begin(), traj.times.end());
  run.gain_trace.resize(n_rec, N);
  run.phase_trace.resize(n_rec, N);
  for (Eigen::Index r = 0; r < n_rec; ++r) {
    for (int j = 0; j < N; ++j) {
      const double phi = std::arg(traj.states(r, 2 * j));
      run.phase_trace(r, j) = phi;
      run.gain_trace(r, j) = pc.gain_from_phase(phi);
    }
  }
  return run;
}

} // namespace wigner
