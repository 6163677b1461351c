#include "wigner/components.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wigner/errors.hpp"

namespace wigner {

namespace {
constexpr Complex I{0.0, 1.0};

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_kerr(const KerrParams& p) {
  require(!p.kappas.empty(), "KerrParams: at least one port");
  double kt = 0;
  for (double k : p.kappas) {
    require(k >= 0, "KerrParams: negative coupling");
    kt += k;
  }
  require(kt > 0, "KerrParams: total width must be positive");
}
} // namespace

void GainCoefficients::fill_quadrature() {
  const Complex sum = g_minus + g_plus, dif = g_minus - g_plus;
  g_rr = sum.real();
  g_ir = sum.imag();
  g_ri = -dif.imag();
  g_ii = dif.real();
}

// ---------------------------------------------------------------------------
// Static components

CircuitModel laser_source(Complex eta) {
  CMat D(1, 1);
  D << 1.0;
  CVec c(1);
  c << eta;
  return CircuitModel::make_static(D, c, {"out"});
}

CircuitModel phase_shifter(double phi) {
  CMat D(1, 1);
  D << std::exp(I * phi);
  return CircuitModel::make_static(D, CVec::Zero(1), {"port"});
}

CircuitModel beamsplitter(double theta) {
  const double co = std::cos(theta), si = std::sin(theta);
  CMat D(2, 2);
  D << co, -si, si, co;
  return CircuitModel::make_static(D, CVec::Zero(2), {"p1", "p2"});
}

CircuitModel nport_mixer(int n) {
  require(n >= 2, "nport_mixer: n >= 2");
  Eigen::VectorXd u = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(double(n)));
  Eigen::VectorXd v = -u;
  v[0] += 1.0; // e1 - u, nonzero for n >= 2
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n) - (2.0 / v.squaredNorm()) * (v * v.transpose());
  std::vector<std::string> labels(n);
  for (int j = 0; j < n; ++j) labels[j] = "p" + std::to_string(j + 1);
  return CircuitModel::make_static(H.cast<Complex>(), CVec::Zero(n), std::move(labels));
}

// ---------------------------------------------------------------------------
// Resonators

CircuitModel kerr_cavity(const KerrParams& p) {
  check_kerr(p);
  const int n = static_cast<int>(p.kappas.size());
  CircuitModel m;
  m.num_modes = 1;
  m.num_ports = n;
  m.A = CMat::Constant(1, 1, Complex(-p.kappa_total() / 2.0, -p.delta));
  m.B.resize(1, n);
  for (int j = 0; j < n; ++j) m.B(0, j) = -std::sqrt(p.kappas[j]);
  m.C = -m.B.transpose();
  m.D = CMat::Identity(n, n);
  m.a = CVec::Zero(1);
  m.c = CVec::Zero(n);
  m.nonlin.push_back({NonlinBlock::Kind::Kerr1, 0, -1, -1, p.chi, 0, 0});
  for (int j = 0; j < n; ++j) {
    m.in_labels.push_back("p" + std::to_string(j + 1));
    m.out_labels.push_back("p" + std::to_string(j + 1));
  }
  m.check_consistent();
  return m;
}

CircuitModel kerr_cavity_2mode(const Kerr2Params& p) {
  require(!p.kappas_a.empty() && !p.kappas_b.empty(), "Kerr2Params: ports on both modes");
  double kat = 0, kbt = 0;
  for (double k : p.kappas_a) {
    require(k >= 0, "Kerr2Params: negative coupling");
    kat += k;
  }
  for (double k : p.kappas_b) {
    require(k >= 0, "Kerr2Params: negative coupling");
    kbt += k;
  }
  require(kat > 0 && kbt > 0, "Kerr2Params: total widths must be positive");
  const int na = static_cast<int>(p.kappas_a.size());
  const int nb = static_cast<int>(p.kappas_b.size());
  const int n = na + nb;
  CircuitModel m;
  m.num_modes = 2;
  m.num_ports = n;
  m.A = CMat::Zero(2, 2);
  m.A(0, 0) = Complex(-kat / 2.0, -p.delta_a);
  m.A(1, 1) = Complex(-kbt / 2.0, -p.delta_b);
  m.B = CMat::Zero(2, n);
  for (int j = 0; j < na; ++j) m.B(0, j) = -std::sqrt(p.kappas_a[j]);
  for (int j = 0; j < nb; ++j) m.B(1, na + j) = -std::sqrt(p.kappas_b[j]);
  m.C = -m.B.transpose();
  m.D = CMat::Identity(n, n);
  m.a = CVec::Zero(2);
  m.c = CVec::Zero(n);
  m.nonlin.push_back({NonlinBlock::Kind::Kerr2, 0, 1, -1, p.chi_a, p.chi_b, p.chi_ab});
  for (int j = 0; j < na; ++j) {
    m.in_labels.push_back("a" + std::to_string(j + 1));
    m.out_labels.push_back("a" + std::to_string(j + 1));
  }
  for (int j = 0; j < nb; ++j) {
    m.in_labels.push_back("b" + std::to_string(j + 1));
    m.out_labels.push_back("b" + std::to_string(j + 1));
  }
  m.check_consistent();
  return m;
}

CircuitModel nopo(const NopoParams& p) {
  require(p.kappa > 0 && p.kappa_p > 0 && p.chi > 0, "NopoParams: rates must be positive");
  CircuitModel m;
  m.num_modes = 3;
  m.num_ports = 3;
  m.A = CMat::Zero(3, 3);
  m.A(0, 0) = Complex(-p.kappa / 2.0, 0);
  m.A(1, 1) = Complex(-p.kappa / 2.0, 0);
  m.A(2, 2) = Complex(-p.kappa_p / 2.0, 0);
  m.B = CMat::Zero(3, 3);
  m.B(0, 0) = -std::sqrt(p.kappa);
  m.B(1, 1) = -std::sqrt(p.kappa);
  m.B(2, 2) = -std::sqrt(p.kappa_p);
  m.C = -m.B.transpose();
  m.D = CMat::Identity(3, 3);
  m.a = CVec::Zero(3);
  m.c = CVec::Zero(3);
  m.nonlin.push_back({NonlinBlock::Kind::Nopo, 0, 1, 2, p.chi, 0, 0});
  m.in_labels = {"signal", "idler", "pump"};
  m.out_labels = m.in_labels;
  m.check_consistent();
  return m;
}

// ---------------------------------------------------------------------------
// Kerr operating-point analysis

Complex kerr_bias_for_state(const KerrParams& p, Complex alpha0) {
  check_kerr(p);
  require(p.kappas[0] > 0, "kerr_bias_for_state: driven port must couple");
  const double kt = p.kappa_total();
  const double n0 = std::norm(alpha0);
  return -(Complex(kt / 2.0, p.delta + p.chi * n0) / std::sqrt(p.kappas[0])) * alpha0;
}

GainCoefficients kerr_reflection_coeffs(const KerrParams& p, Complex alpha0) {
  require(p.kappas.size() == 1 && p.kappas[0] > 0,
          "kerr_reflection_coeffs: single lossless port");
  const double k = p.kappas[0];
  const double n0 = std::norm(alpha0);
  const double deff = p.delta + p.chi * n0;
  const double dbar = p.delta + 2.0 * p.chi * n0;
  const double denom = 0.25 * k * k + dbar * dbar - p.chi * p.chi * n0 * n0;
  if (std::abs(denom) < 1e-300 * std::max(1.0, k * k))
    throw DegenerateDenominatorError("kerr_reflection_coeffs: vanishing gain denominator");
  GainCoefficients g;
  g.eta = -Complex(k / 2.0, -deff) / Complex(k / 2.0, deff);
  g.g_minus = 1.0 + k * Complex(-k / 2.0, dbar) / denom;
  g.g_plus = I * k * p.chi * alpha0 * alpha0 / denom;
  g.fill_quadrature();
  return g;
}

namespace {
/// Real roots of x^3 + a x^2 + b x + c, ascending.
std::vector<double> cubic_roots(double a, double b, double c) {
  // depressed cubic t^3 + pt + q with x = t - a/3
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  std::vector<double> roots;
  if (disc > 0) {
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-q / 2.0 + sq);
    const double v = std::cbrt(-q / 2.0 - sq);
    roots.push_back(u + v - a / 3.0);
  } else if (disc == 0) {
    if (p == 0) {
      roots.assign(3, -a / 3.0);
    } else {
      const double u = std::cbrt(-q / 2.0);
      roots = {2.0 * u - a / 3.0, -u - a / 3.0, -u - a / 3.0};
    }
  } else {
    const double r = std::sqrt(-p * p * p / 27.0);
    const double phi = std::acos(std::clamp(-q / (2.0 * r), -1.0, 1.0));
    const double t = 2.0 * std::sqrt(-p / 3.0);
    for (int k = 0; k < 3; ++k)
      roots.push_back(t * std::cos((phi + 2.0 * std::numbers::pi * k) / 3.0) - a / 3.0);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

bool kerr_point_stable(double kappa_total, double delta, double chi, double n) {
  const double dbar = delta + 2.0 * chi * n;
  // eigenvalues -kT/2 +- sqrt(chi^2 n^2 - dbar^2)
  return chi * chi * n * n - dbar * dbar < 0.25 * kappa_total * kappa_total;
}
} // namespace

std::vector<KerrRoot> kerr_bias_to_state(const KerrParams& p, Complex eps0) {
  check_kerr(p);
  require(p.kappas[0] > 0, "kerr_bias_to_state: driven port must couple");
  const double kt2 = p.kappa_total() / 2.0;
  const double k1 = p.kappas[0];
  std::vector<KerrRoot> out;
  if (p.chi == 0.0) {
    const Complex alpha0 = -std::sqrt(k1) * eps0 / Complex(kt2, p.delta);
    out.push_back({alpha0, kerr_point_stable(p.kappa_total(), p.delta, 0.0, std::norm(alpha0))});
    return out;
  }
  // k1 |eps0|^2 = n [(kT/2)^2 + (Delta + chi n)^2]  =>  cubic in n = |alpha0|^2
  const double chi2 = p.chi * p.chi;
  const double a = 2.0 * p.delta / p.chi;
  const double b = (kt2 * kt2 + p.delta * p.delta) / chi2;
  const double c = -k1 * std::norm(eps0) / chi2;
  for (double n : cubic_roots(a, b, c)) {
    if (n < 0) {
      if (n > -1e-12 * std::max(1.0, std::abs(c))) n = 0;
      else continue;
    }
    const Complex alpha0 = -std::sqrt(k1) * eps0 / Complex(kt2, p.delta + p.chi * n);
    out.push_back({alpha0, kerr_point_stable(p.kappa_total(), p.delta, p.chi, n)});
  }
  return out;
}

KerrMaxGain kerr_max_gain(double kappa, double delta, double chi) {
  require(kappa > 0, "kerr_max_gain: kappa > 0");
  require(chi != 0, "kerr_max_gain: chi != 0");
  const double f = 28.0 * delta * delta + 4.0 * kappa * kappa -
                   8.0 * delta * std::sqrt(12.0 * delta * delta + 3.0 * kappa * kappa);
  if (f <= kappa * kappa)
    throw InvalidRegimeError("kerr_max_gain: f <= kappa^2 (at or past the bistable threshold)");
  const double sf = std::sqrt(f);
  KerrMaxGain r;
  r.g_max = std::sqrt((sf + kappa) / (sf - kappa));
  r.n_max = std::sqrt((delta * delta + kappa * kappa / 4.0) / (3.0 * chi * chi));
  return r;
}

double detuning_for_gain(double kappa, double g_max) {
  require(kappa > 0 && g_max > 1, "detuning_for_gain: kappa > 0, g_max > 1");
  const double s3 = std::numbers::sqrt3;
  return (s3 * kappa / 2.0) * (g_max - s3) * (g_max - 1.0 / s3) / (g_max * g_max - 1.0);
}

GainCoefficients kerr_lossy_reflection_coeffs(double kappa, double delta, double chi,
                                              Complex alpha0) {
  require(kappa > 0, "kerr_lossy_reflection_coeffs: kappa > 0");
  const double n0 = std::norm(alpha0);
  const double dbar = delta + 2.0 * chi * n0;
  const double denom = kappa * kappa + dbar * dbar - chi * chi * n0 * n0;
  if (std::abs(denom) < 1e-300 * std::max(1.0, kappa * kappa))
    throw DegenerateDenominatorError("kerr_lossy_reflection_coeffs: vanishing denominator");
  GainCoefficients g;
  g.eta = -Complex(kappa, -(delta + chi * n0)) / Complex(kappa, delta + chi * n0);
  g.g_minus = 1.0 + kappa * Complex(-kappa, dbar) / denom;
  g.g_plus = I * kappa * chi * alpha0 * alpha0 / denom;
  g.fill_quadrature();
  return g;
}

QuadratureFilterPoint quadrature_filter_coeffs(double kappa, double chi, double delta) {
  require(kappa > 0 && chi != 0, "quadrature_filter_coeffs: kappa > 0, chi != 0");
  require(delta / chi < 0, "quadrature_filter_coeffs: dynamic resonance needs Delta/chi < 0");
  const double n0 = -delta / chi;
  const Complex alpha0 = std::sqrt(n0);
  QuadratureFilterPoint q;
  q.alpha0 = alpha0;
  q.gains = kerr_lossy_reflection_coeffs(kappa, delta, chi, alpha0);
  q.eps0 = -(Complex(kappa, delta + chi * n0) / std::sqrt(kappa)) * alpha0;
  return q;
}

FredkinDesign fredkin_params(double kappa_a, double kappa_b, double chi_a,
                             double chi_b, double chi_ab, double zeta0) {
  require(kappa_a > 0 && kappa_b > 0, "fredkin_params: positive couplings");
  require(chi_ab != 0, "fredkin_params: chi_ab != 0");
  const double z2 = zeta0 * zeta0;
  FredkinDesign d;
  d.delta_a = kappa_a / 2.0 - 2.0 * chi_a * z2 / kappa_a;
  d.delta_b = kappa_a * chi_b / chi_ab - 2.0 * chi_ab * z2 / kappa_a;
  d.xi0 = std::sqrt(kappa_a * kappa_b) / (2.0 * std::sqrt(std::abs(chi_ab)));
  const double s3 = std::numbers::sqrt3;
  if (d.delta_a > s3 * kappa_a / 2.0)
    throw UnstableParametersError("fredkin_params: delta_a exceeds sqrt(3) kappa_a / 2");
  if (d.delta_b > s3 * kappa_b / 2.0)
    throw UnstableParametersError("fredkin_params: delta_b exceeds sqrt(3) kappa_b / 2");
  return d;
}

// ---------------------------------------------------------------------------
// NOPO statics

double nopo_threshold(const NopoParams& p) {
  require(p.kappa > 0 && p.kappa_p > 0 && p.chi > 0, "NopoParams: rates must be positive");
  return p.kappa * std::sqrt(p.kappa_p) / (4.0 * p.chi);
}

NopoSteadyState nopo_steady_state(const NopoParams& p, Complex eps) {
  const double eth = nopo_threshold(p);
  const double mag = std::abs(eps);
  if (mag < eth)
    throw BelowThresholdError("nopo_steady_state: |eps| below threshold");
  const Complex dir = eps / mag;
  NopoSteadyState s;
  const double n0 = (4.0 * eth / p.kappa) * (mag - eth);
  s.alpha_s_mag = std::sqrt(n0);
  s.alpha_p = -(2.0 * eth / std::sqrt(p.kappa_p)) * dir;
  s.signal_idler_product = -n0 * dir;
  return s;
}

double nopo_phase_diffusion_rate(const NopoParams& p, Complex eps) {
  const double eth = nopo_threshold(p);
  const double mag = std::abs(eps);
  if (mag <= eth)
    throw BelowThresholdError("nopo_phase_diffusion_rate: |eps| must exceed threshold");
  return p.kappa * p.kappa / (32.0 * eth * (mag - eth));
}

} // namespace wigner
