#ifndef WIGNER_ERRORS_HPP
#define WIGNER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wigner {

/// Zero-delay algebraic loop: the scattered-feedback block I - D_kl is not
/// invertible within the conditioning threshold.
struct SingularLoopError : std::runtime_error {
  explicit SingularLoopError(const std::string& what) : std::runtime_error(what) {}
};

/// A netlist port is neither connected nor declared external (or is both).
struct DanglingPortError : std::runtime_error {
  explicit DanglingPortError(const std::string& what) : std::runtime_error(what) {}
};

/// Netlist structurally invalid (duplicate bindings, unknown instances, ...).
struct NetlistError : std::runtime_error {
  explicit NetlistError(const std::string& what) : std::runtime_error(what) {}
};

/// Trajectory state magnitude exceeded the blow-up threshold.
struct DivergedError : std::runtime_error {
  DivergedError(const std::string& what, long step, double t)
      : std::runtime_error(what), step(step), time(t) {}
  long step;
  double time;
};

/// Newton iteration failed to reach the drift tolerance.
struct NoConvergenceError : std::runtime_error {
  explicit NoConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Linearized gain denominator vanished (operating exactly at a bistable edge).
struct DegenerateDenominatorError : std::runtime_error {
  explicit DegenerateDenominatorError(const std::string& what) : std::runtime_error(what) {}
};

/// Maximum-gain formula out of its validity region (f <= kappa^2).
struct InvalidRegimeError : std::runtime_error {
  explicit InvalidRegimeError(const std::string& what) : std::runtime_error(what) {}
};

/// Cross-Kerr modulator parameter choice violates a stability inequality.
struct UnstableParametersError : std::runtime_error {
  explicit UnstableParametersError(const std::string& what) : std::runtime_error(what) {}
};

/// Above-threshold quantity requested below the oscillation threshold.
struct BelowThresholdError : std::runtime_error {
  explicit BelowThresholdError(const std::string& what) : std::runtime_error(what) {}
};

/// Pooled covariance not invertible (regularized fits warn instead).
struct DegenerateCovarianceError : std::runtime_error {
  explicit DegenerateCovarianceError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed experiment config or CLI usage.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace wigner

#endif
