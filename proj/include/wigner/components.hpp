#ifndef WIGNER_COMPONENTS_HPP
#define WIGNER_COMPONENTS_HPP

#include <vector>

#include "wigner/model.hpp"

namespace wigner {

// ---------------------------------------------------------------------------
// Parameter records (all rates in units of the reference line width)

struct KerrParams {
  std::vector<double> kappas; ///< per-port coupling rates, port 1 is the driven coupler
  double delta = 0;           ///< cavity detuning from the drive frame
  double chi = 0;             ///< Kerr coefficient (rate per photon)

  double kappa_total() const {
    double s = 0;
    for (double k : kappas) s += k;
    return s;
  }
};

struct Kerr2Params {
  std::vector<double> kappas_a, kappas_b;
  double delta_a = 0, delta_b = 0;
  double chi_a = 0, chi_b = 0, chi_ab = 0;
};

struct NopoParams {
  double kappa = 1;   ///< signal/idler line width
  double kappa_p = 2; ///< pump line width
  double chi = 0.05;  ///< conversion coefficient
};

/// Small-signal reflection data of a biased Kerr cavity. The quadrature gains
/// are the 2x2 real form of (g-, g+): delta_out = g- delta_in + g+ conj(delta_in).
struct GainCoefficients {
  Complex eta;     ///< bias reflection coefficient, |eta| = 1 when lossless
  Complex g_minus; ///< co-rotating gain
  Complex g_plus;  ///< conjugate gain
  double g_rr = 0, g_ir = 0, g_ri = 0, g_ii = 0;

  double envelope() const { return std::abs(g_minus) + std::abs(g_plus); }
  void fill_quadrature();
};

// ---------------------------------------------------------------------------
// Static components

CircuitModel laser_source(Complex eta);
CircuitModel phase_shifter(double phi);
CircuitModel beamsplitter(double theta);

/// N-port static mixer whose first output is the uniformly weighted sum
/// (1/sqrt(N)) sum_k in_k. Remaining rows complete an orthonormal basis via
/// the Householder reflection mapping e1 to the uniform vector.
CircuitModel nport_mixer(int n);

// ---------------------------------------------------------------------------
// Resonator components

CircuitModel kerr_cavity(const KerrParams& p);
CircuitModel kerr_cavity_2mode(const Kerr2Params& p);
CircuitModel nopo(const NopoParams& p);

// ---------------------------------------------------------------------------
// Closed-form Kerr operating-point analysis (single-mode cavity, port 1 driven)

/// Bias that holds the cavity at steady amplitude alpha0:
///   eps0 = -(1/sqrt(k1)) [kT/2 + i(Delta + chi |alpha0|^2)] alpha0.
Complex kerr_bias_for_state(const KerrParams& p, Complex alpha0);

/// Reflection coefficients of the single lossless port at bias point alpha0.
/// Throws DegenerateDenominatorError at a parametric-resonance point.
GainCoefficients kerr_reflection_coeffs(const KerrParams& p, Complex alpha0);

struct KerrRoot {
  Complex alpha0;
  bool stable;
};

/// All steady states for a given bias: roots of the cubic in |alpha0|^2,
/// each flagged by the sign of the linearized drift spectrum.
std::vector<KerrRoot> kerr_bias_to_state(const KerrParams& p, Complex eps0);

struct KerrMaxGain {
  double g_max; ///< maximal quadrature gain envelope over bias amplitudes
  double n_max; ///< intra-cavity photon number attaining it
};

/// Peak small-signal gain of the lossless single-port cavity; independent of
/// chi. Throws InvalidRegimeError at or beyond the bistability threshold.
KerrMaxGain kerr_max_gain(double kappa, double delta, double chi);

/// Detuning that realizes a requested maximal gain (inverse of kerr_max_gain).
double detuning_for_gain(double kappa, double g_max);

/// Reflection coefficients of the coupler port when internal losses equal the
/// input coupling (kappa_2 = kappa_1 = kappa).
GainCoefficients kerr_lossy_reflection_coeffs(double kappa, double delta, double chi,
                                              Complex alpha0);

/// Critically coupled cavity (loss port equal to the coupler) evaluated at
/// dynamic resonance chi |alpha0|^2 = -Delta, where |g-| = |g+| and one
/// reflected quadrature vanishes.
struct QuadratureFilterPoint {
  GainCoefficients gains;
  Complex eps0;
  Complex alpha0;
};
QuadratureFilterPoint quadrature_filter_coeffs(double kappa, double chi, double delta);

// ---------------------------------------------------------------------------
// Cross-Kerr modulator design

struct FredkinDesign {
  double delta_a, delta_b; ///< detunings realizing the pi reflection flip
  double xi0;              ///< control amplitude of the "on" level
};

/// Detunings and control level for a controlled phase shifter whose signal
/// reflection flips sign between control 0 and control xi0. Enforces the
/// stability inequalities delta_{a,b} <= sqrt(3) kappa_{a,b} / 2.
FredkinDesign fredkin_params(double kappa_a, double kappa_b, double chi_a,
                             double chi_b, double chi_ab, double zeta0);

// ---------------------------------------------------------------------------
// NOPO statics

double nopo_threshold(const NopoParams& p);

struct NopoSteadyState {
  double alpha_s_mag;           ///< |alpha_s| = |alpha_i| on the fixed-point manifold
  Complex alpha_p;              ///< clamped pump amplitude
  Complex signal_idler_product; ///< alpha_s * alpha_i, pins the common phase
};

/// Above-threshold fixed-point manifold data; the differential phase itself is
/// free. Throws BelowThresholdError for |eps| < eps_th.
NopoSteadyState nopo_steady_state(const NopoParams& p, Complex eps);

/// Phase diffusion rate along the manifold, kappa/(8 n0).
double nopo_phase_diffusion_rate(const NopoParams& p, Complex eps);

} // namespace wigner

#endif
