#include "wigner/mleval.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "wigner/errors.hpp"
#include "wigner/rng.hpp"

namespace wigner {

GaussianTask GaussianTask::axis_separated(int dim, double separation, double sigma) {
  if (dim < 1 || sigma <= 0) throw std::invalid_argument("GaussianTask: dim >= 1, sigma > 0");
  GaussianTask t;
  t.sigma = sigma;
  t.mu0 = Eigen::VectorXd::Zero(dim);
  t.mu1 = Eigen::VectorXd::Zero(dim);
  t.mu0[0] = -separation * sigma / 2.0;
  t.mu1[0] = separation * sigma / 2.0;
  return t;
}

Dataset sample_dataset(const GaussianTask& task, int m, uint64_t seed, uint64_t stream) {
  if (m < 1) throw std::invalid_argument("sample_dataset: m >= 1");
  const int d = task.dim();
  Dataset ds;
  ds.X.resize(m, d);
  ds.y.resize(m);
  Philox rng(seed, stream ^ 0x6d6c6576616cull); // task stream tag
  for (int i = 0; i < m; ++i) {
    const int label = rng.uniform() < 0.5 ? 0 : 1;
    ds.y[i] = label;
    const Eigen::VectorXd& mu = label ? task.mu1 : task.mu0;
    for (int j = 0; j < d; ++j) ds.X(i, j) = mu[j] + task.sigma * rng.normal();
  }
  return ds;
}

GdaClassifier gda_fit(const Eigen::MatrixXd& X, const std::vector<int>& y) {
  const int m = static_cast<int>(X.rows());
  const int d = static_cast<int>(X.cols());
  if (m != static_cast<int>(y.size()) || m < 2)
    throw std::invalid_argument("gda_fit: need matching X, y with at least two rows");
  long n1 = 0;
  for (int v : y) n1 += v;
  const long n0 = m - n1;
  if (n0 == 0 || n1 == 0) throw std::invalid_argument("gda_fit: both classes required");

  Eigen::VectorXd mu0 = Eigen::VectorXd::Zero(d), mu1 = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < m; ++i) (y[i] ? mu1 : mu0) += X.row(i).transpose();
  mu0 /= double(n0);
  mu1 /= double(n1);

  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd r = X.row(i).transpose() - (y[i] ? mu1 : mu0);
    S.noalias() += r * r.transpose();
  }
  S /= double(m);

  GdaClassifier c;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  Eigen::VectorXd diff = mu1 - mu0;
  bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
  if (ok) {
    c.w = ldlt.solve(diff);
    ok = ((S * c.w - diff).norm() <= 1e-8 * std::max(1.0, diff.norm()));
  }
  if (!ok) {
    double eps = 1e-9 * S.trace() / d;
    if (!(eps > 0)) eps = 1e-9 * std::max(1.0, diff.squaredNorm() / d);
    std::cerr << "gda_fit: pooled covariance is degenerate, regularizing with eps = " << eps
              << "\n";
    Eigen::MatrixXd Sr = S + eps * Eigen::MatrixXd::Identity(d, d);
    c.w = Sr.ldlt().solve(diff);
    c.regularized = true;
  }
  const Eigen::VectorXd mid = 0.5 * (mu0 + mu1);
  c.b = -c.w.dot(mid) + std::log(double(n1) / double(n0));
  return c;
}

std::vector<int> gda_predict(const GdaClassifier& c, const Eigen::MatrixXd& X) {
  std::vector<int> out(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[i] = c.predict(X.row(i).transpose());
  return out;
}

double optimal_error_rate(double separation) {
  if (separation < 0) throw std::invalid_argument("optimal_error_rate: separation >= 0");
  return 0.5 * std::erfc(separation / std::sqrt(8.0));
}

ErrorEstimate estimate_error_rate(const std::vector<int>& predicted,
                                  const std::vector<int>& truth) {
  if (predicted.empty() || predicted.size() != truth.size())
    throw std::invalid_argument("estimate_error_rate: empty or mismatched inputs");
  long bad = 0;
  for (size_t i = 0; i < predicted.size(); ++i) bad += predicted[i] != truth[i];
  ErrorEstimate e;
  e.n_samples = static_cast<long>(predicted.size());
  e.n_trials = 1;
  e.p_err = double(bad) / double(e.n_samples);
  e.stderr_ = std::sqrt(e.p_err * (1.0 - e.p_err) / double(e.n_samples));
  return e;
}

ErrorEstimate aggregate(const std::vector<ErrorEstimate>& estimates) {
  if (estimates.empty()) throw std::invalid_argument("aggregate: empty input");
  ErrorEstimate out;
  double sum = 0;
  for (const auto& e : estimates) {
    sum += e.p_err;
    out.n_samples += e.n_samples;
    out.n_trials += e.n_trials;
  }
  const double n = double(estimates.size());
  out.p_err = sum / n;
  if (estimates.size() > 1) {
    double ss = 0;
    for (const auto& e : estimates) ss += (e.p_err - out.p_err) * (e.p_err - out.p_err);
    out.stderr_ = std::sqrt(ss / (n - 1.0) / n);
  } else {
    out.stderr_ = estimates.front().stderr_;
  }
  return out;
}

} // namespace wigner
