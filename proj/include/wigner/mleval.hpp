#ifndef WIGNER_MLEVAL_HPP
#define WIGNER_MLEVAL_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace wigner {

/// Two isotropic Gaussian clusters with a common standard deviation.
struct GaussianTask {
  Eigen::VectorXd mu0, mu1;
  double sigma = 1.0;

  int dim() const { return static_cast<int>(mu0.size()); }
  double separation() const { return (mu1 - mu0).norm() / sigma; }

  static GaussianTask axis_separated(int dim, double separation, double sigma = 1.0);
};

struct Dataset {
  Eigen::MatrixXd X; ///< samples x dim
  std::vector<int> y;
};

/// Balanced Bernoulli(1/2) labels, x | y ~ N(mu_y, sigma^2 I); deterministic
/// per (seed, stream).
Dataset sample_dataset(const GaussianTask& task, int m, uint64_t seed, uint64_t stream = 0);

/// Shared-covariance Gaussian discriminant (linear boundary). Ties at the
/// boundary break toward label 1.
struct GdaClassifier {
  Eigen::VectorXd w;
  double b = 0;
  bool regularized = false; ///< pooled covariance needed a ridge to invert

  int predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return w.dot(x) + b >= 0 ? 1 : 0;
  }
};

GdaClassifier gda_fit(const Eigen::MatrixXd& X, const std::vector<int>& y);
std::vector<int> gda_predict(const GdaClassifier& c, const Eigen::MatrixXd& X);

/// Bayes error for the equal-covariance two-Gaussian task,
/// (1/2) erfc(separation / sqrt(8)).
double optimal_error_rate(double separation);

struct ErrorEstimate {
  double p_err = 0;
  double stderr_ = 0;
  long n_samples = 0;
  int n_trials = 0;
};

ErrorEstimate estimate_error_rate(const std::vector<int>& predicted,
                                  const std::vector<int>& truth);

/// Pools trial estimates; stderr becomes the sample standard deviation of the
/// per-trial rates divided by sqrt(trials).
ErrorEstimate aggregate(const std::vector<ErrorEstimate>& estimates);

} // namespace wigner

#endif
