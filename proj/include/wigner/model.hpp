#ifndef WIGNER_MODEL_HPP
#define WIGNER_MODEL_HPP

#include <complex>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace wigner {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Tagged nonlinear drift contribution acting on a fixed set of internal
/// modes. Keeping descriptors instead of callbacks lets elaboration fuse
/// per-mode evaluation and keeps models serializable.
struct NonlinBlock {
  enum class Kind { Kerr1, Kerr2, Nopo };
  Kind kind;
  // mode indices into the owning model's state vector
  int m0 = -1, m1 = -1, m2 = -1;
  // Kerr1: c0 = chi. Kerr2: c0 = chi_a, c1 = chi_b, c2 = chi_ab. Nopo: c0 = chi.
  double c0 = 0, c1 = 0, c2 = 0;

  void shift_modes(int offset) {
    if (m0 >= 0) m0 += offset;
    if (m1 >= 0) m1 += offset;
    if (m2 >= 0) m2 += offset;
  }
};

/// Flat circuit model: internal modes alpha obey
///   d(alpha)/dt = A alpha + a + A_NL(alpha) + B beta_in
/// and outputs are the algebraic relation
///   beta_out = C alpha + c + D beta_in.
/// A port is one input/output channel pair; num_ports counts channels.
struct CircuitModel {
  int num_modes = 0;
  int num_ports = 0;
  CMat A, B, C, D;
  CVec a, c;
  std::vector<NonlinBlock> nonlin;
  std::vector<std::string> in_labels, out_labels;

  static CircuitModel make_static(const CMat& D, const CVec& c,
                                  std::vector<std::string> labels);

  /// A_NL(alpha); zero at alpha = 0 for every model in this artifact.
  CVec nonlinear_drift(const CVec& alpha) const;
  void add_nonlinear_drift(const CVec& alpha, CVec& acc) const;

  /// Wirtinger partials of A_NL at alpha: P += dNL/dalpha, Q += dNL/dalpha*.
  void add_nonlinear_jacobian(const CVec& alpha, CMat& P, CMat& Q) const;

  CVec drift(const CVec& alpha, const CVec& beta_in) const;
  CVec output(const CVec& alpha, const CVec& beta_in) const;

  /// Dimension bookkeeping; throws std::logic_error on mismatch.
  void check_consistent() const;
};

/// Block-diagonal direct sum of non-interacting component models.
CircuitModel concatenate(std::span<const CircuitModel> models);

/// Exact linear elimination of connected port variables. Each loop feeds
/// output port `first` back into input port `second`. One batch LU solve;
/// reciprocal condition below 1e-12 raises SingularLoopError.
CircuitModel feedback_reduce(const CircuitModel& model,
                             std::span<const std::pair<int, int>> loops);

} // namespace wigner

#endif
