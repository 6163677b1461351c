#ifndef WIGNER_PERCEPTRON_HPP
#define WIGNER_PERCEPTRON_HPP

#include <optional>
#include <string>
#include <vector>

#include "wigner/components.hpp"
#include "wigner/mleval.hpp"
#include "wigner/netlist.hpp"
#include "wigner/sde.hpp"

namespace wigner {

// ---------------------------------------------------------------------------
// Tunable phase-sensitive amplifier: two identical Kerr cavities in the arms
// of an interferometer, bias and signal isolated onto separate ports.

struct AmplifierDesign {
  double g_max = 20.0; ///< real-to-real gain at the maximum-gain bias
  double kappa = 100.0;
  double chi = -1.0; ///< Delta/chi < 0 is the amplifying regime
  // derived
  double delta = 0;
  double n_max = 0;    ///< intra-cavity photons at maximum gain
  double eps0_max = 0; ///< per-cavity bias amplitude at maximum gain
  double eps0_min = 0; ///< per-cavity bias where the trimmed g_rr vanishes
  double phi_in = 0, phi_out = 0; ///< signal-path trim phases

  KerrParams cavity() const { return {{kappa}, delta, chi}; }

  /// Trimmed small-signal reflection pair at a (complex) per-cavity bias.
  struct Gains {
    Complex g_minus, g_plus;
    double rr() const { return (g_minus + g_plus).real(); }
    double ir() const { return (g_minus + g_plus).imag(); }
  };
  Gains gains_at_bias(Complex eps0) const;

  static AmplifierDesign create(double g_max, double kappa, double chi);
};

/// Flat amplifier model; channels [sig, bias] (in/out each), m = 2.
/// The bias port expects sqrt(2) * eps0 (per-cavity bias is bias/sqrt(2)).
Elaborated build_tunable_amplifier(const AmplifierDesign& d);

/// Critically coupled interferometric pair biased to dynamic resonance:
/// unity linear gain for the real quadrature, zero for the imaginary one at
/// |delta| = kappa/2. Channels [sig, bias, loss_a, loss_b].
Elaborated build_quadrature_filter(double kappa, double chi, double delta);

// ---------------------------------------------------------------------------
// Synapse: NOPO phase memory + complementary amplifier pair + feedback gates.

struct SynapseDesign {
  AmplifierDesign amplifier;
  NopoParams nopo{1.0, 2.0, 0.0}; ///< chi filled from the target photon number
  double n0 = 500;                ///< memory photon number (sets diffusion)
  Complex pump;                   ///< pump drive, real negative by convention
  double xi0_offset = 0;          ///< constant offset mixed with the memory output
  double t_mem = 0;               ///< memory tap transmission
  Kerr2Params fb_gate;            ///< the two routing gates (identical)
  double fb_xi0 = 0;              ///< control level flipping a gate
  double alpha_fb = 3.2;          ///< injected amplitude per unit data value
  double signal_scale = 0.12;     ///< largest per-cavity drive / eps0_max
  double x_ref = 4.0;             ///< data magnitude mapped to the largest drive
  double x_amp = 0;               ///< port amplitude per unit data value
  double theta_tap = 0;           ///< feedback tap mixing angle
  double theta_inj = 0;           ///< injection phase trim (calibrated)

  static SynapseDesign create(double g_max, double kappa_amp, double chi_amp, double n0,
                              double alpha_fb, double signal_scale);

  /// Memory output amplitude after the tap, r_eff = t_mem sqrt(kappa n0).
  double d_mem_amplitude() const;

  /// Analytic overall gain of the synapse at memory phase Phi (small signal,
  /// per unit amplitude on the sig port).
  AmplifierDesign::Gains gain_at_phase(double phi) const;
};

struct SynapseBuilt {
  CircuitModel model;
  int mode_nopo_signal = -1, mode_nopo_idler = -1, mode_nopo_pump = -1;
};

/// Flat synapse. Named channels: sig, ctl_y, ctl_yhat, pump, offset; the
/// remaining vacuum/dump channels carry generated names.
SynapseBuilt build_synapse(const SynapseDesign& d);

/// Probe variant with the memory replaced by a stiff phase reference at Phi.
SynapseBuilt build_synapse_probe(const SynapseDesign& d, double phi);

/// Simulated two-quadrature small-signal gain of the synapse at clamped
/// memory phase (noiseless steady-state probes).
AmplifierDesign::Gains measure_synapse_gain(const SynapseDesign& d, double phi);

// ---------------------------------------------------------------------------
// Thresholder: offset mixer, transmission-shaping Kerr cavity, Fredkin gate.

struct ThresholderDesign {
  Kerr2Params gate;
  double gate_xi0 = 0;
  KerrParams pre_cavity; ///< two-port transmission cavity on the control path
  double zeta0 = 100.0;  ///< logic-one supply amplitude
  double s0 = 0;         ///< phase-reference offset (calibrated)

  static ThresholderDesign create(double zeta0, double kappa_gate, double chi_ab,
                                  double kappa_pre);
};

/// Flat thresholder. Channels: s (decision input), one (logic-one supply),
/// s0 (offset supply), yhat (gate output), plus vacuum/dumps.
Elaborated build_thresholder(const ThresholderDesign& d);

/// Noiseless DC map s -> |yhat|^2 of the thresholder (steady state with
/// amplitude continuation).
std::vector<std::pair<double, double>> thresholder_dc_map(const ThresholderDesign& d,
                                                          double s_min, double s_max, int n);

/// Calibrates s0 so the DC output intensity crosses half the logic-one level
/// at s = 0.
double calibrate_thresholder_offset(const ThresholderDesign& d);

// ---------------------------------------------------------------------------
// Full perceptron

struct PerceptronSpec {
  int n_inputs = 8;
  SynapseDesign synapse;
  AmplifierDesign booster; ///< saturating decision-rail stage, fast variant
  ThresholderDesign thresholder;
  double qf_kappa = 100.0, qf_chi = 1.0, qf_delta = -50.0;
  Kerr2Params t_gate;     ///< identical gates on both label-control rails
  double t_xi0 = 0;
  double dt_sample = 2.0; ///< seconds of kappa^-1 per input sample
  double t_settle = 2.0;  ///< supply settling time before the first sample
  double ctl_y_level = 0; ///< Y drive amplitude realizing the gate flip
  double t_on_level = 0;  ///< T drive amplitude opening the feedback gates
  double yhat_tap_cos = 0;    ///< conditioning attenuation on the fed-back label
  double one_level_out = 0;   ///< calibrated |yhat| at saturation (readout port)
  double diag_tap_sin = 0.05; ///< diagnostic tap amplitude fraction
  double booster_atten = 0.5; ///< post-booster transmission on the decision rail

  static PerceptronSpec create(int n_inputs);
};

struct PerceptronCircuit {
  PerceptronSpec spec;
  CircuitModel model;
  std::vector<int> nopo_signal_mode, nopo_idler_mode; ///< per synapse
  std::vector<std::string> supply_ports;
  CVec supply_levels;
  // G_rr(Phi) lookup for gain traces
  std::vector<double> lut_phi, lut_grr, lut_gir;

  double gain_from_phase(double phi) const;
};

PerceptronCircuit build_perceptron(const PerceptronSpec& spec);

/// Starts every memory on its fixed-point manifold at a seed-drawn phase and
/// the pump mode at its clamped value; all other modes at zero.
CVec perceptron_initial_state(const PerceptronCircuit& pc, uint64_t seed,
                              std::vector<double>* phases_out = nullptr);

/// Piecewise-constant schedule for a train-then-test protocol. Training
/// segments carry the label drive and the gate-open level; test segments
/// drive neither.
InputSchedule encode_dataset(const Eigen::MatrixXd& X, const std::vector<int>& y,
                             int m_train, const PerceptronCircuit& pc);

/// Per-segment labels from the mean-field output intensity normalized by the
/// logic-one level, clamped and rounded.
std::vector<int> decode_labels(const Trajectory& traj, const PerceptronCircuit& pc,
                               int n_segments);

struct ClassificationRun {
  std::vector<int> y_true, y_hat;
  int m_train = 0, m_test = 0;
  double train_error = 0, test_error = 0;
  std::vector<double> trace_times;
  Eigen::MatrixXd gain_trace; ///< records x synapses, G_rr from the phase lookup
  Eigen::MatrixXd phase_trace;
  std::vector<double> initial_phases;
  uint64_t seed = 0;
};

ClassificationRun run_training(const PerceptronCircuit& pc, const Eigen::MatrixXd& X,
                               const std::vector<int>& y, int m_train, const SimConfig& config);

} // namespace wigner

#endif
