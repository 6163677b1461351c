#include "wigner/sde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wigner/errors.hpp"
#include "wigner/rng.hpp"

namespace wigner {

void InputSchedule::validate() const {
  if (segments.empty()) return;
  if (std::abs(segments.front().t_start) > 1e-12)
    throw std::invalid_argument("InputSchedule: must start at t = 0");
  double t = 0;
  for (const auto& s : segments) {
    if (s.t_end <= s.t_start) throw std::invalid_argument("InputSchedule: empty segment");
    if (std::abs(s.t_start - t) > 1e-9)
      throw std::invalid_argument("InputSchedule: segments must be contiguous");
    if (s.amps.size() != static_cast<Eigen::Index>(port_names.size()))
      throw std::invalid_argument("InputSchedule: amplitude size mismatch");
    if (!s.amps.allFinite()) throw std::invalid_argument("InputSchedule: non-finite amplitude");
    t = s.t_end;
  }
}

InputSchedule InputSchedule::constant(std::vector<std::string> names, CVec amps, double t_end) {
  InputSchedule s;
  s.port_names = std::move(names);
  s.segments.push_back({0.0, t_end, std::move(amps)});
  s.validate();
  return s;
}

namespace {

std::vector<int> map_ports(const std::vector<std::string>& names,
                           const std::vector<std::string>& labels, const char* what) {
  std::vector<int> idx;
  idx.reserve(names.size());
  for (const auto& n : names) {
    auto it = std::find(labels.begin(), labels.end(), n);
    if (it == labels.end())
      throw std::invalid_argument(std::string(what) + ": unknown port '" + n + "'");
    idx.push_back(static_cast<int>(it - labels.begin()));
  }
  return idx;
}

} // namespace

Trajectory integrate(const CircuitModel& model, const InputSchedule& schedule,
                     const SimConfig& config, const CVec& initial_state, uint64_t stream) {
  schedule.validate();
  if (config.dt <= 0) throw std::invalid_argument("SimConfig: dt must be positive");
  if (config.record_stride < 1) throw std::invalid_argument("SimConfig: stride >= 1");

  const int m = model.num_modes;
  const int n = model.num_ports;
  const double dt = config.dt;
  const double t_end = config.t_end > 0 ? config.t_end : schedule.t_end();
  const long steps = std::lround(t_end / dt);
  const int stride = config.record_stride;
  const long n_records = steps / stride + 1;

  const std::vector<int> drive_idx = map_ports(schedule.port_names, model.in_labels, "integrate");

  // recorded output rows
  std::vector<int> out_idx;
  if (config.recorded_outputs.empty()) {
    out_idx.resize(n);
    for (int j = 0; j < n; ++j) out_idx[j] = j;
  } else {
    out_idx = map_ports(config.recorded_outputs, model.out_labels, "integrate");
  }
  const int n_out = static_cast<int>(out_idx.size());
  CMat C_rec(n_out, m), D_rec(n_out, n);
  CVec c_rec(n_out);
  for (int r = 0; r < n_out; ++r) {
    C_rec.row(r) = model.C.row(out_idx[r]);
    D_rec.row(r) = model.D.row(out_idx[r]);
    c_rec[r] = model.c[out_idx[r]];
  }

  std::vector<int> st_idx = config.recorded_states;
  if (st_idx.empty()) {
    st_idx.resize(m);
    for (int j = 0; j < m; ++j) st_idx[j] = j;
  }
  const int n_st = static_cast<int>(st_idx.size());

  Trajectory traj;
  traj.seed = config.seed;
  traj.stream = stream;
  traj.state_indices = st_idx;
  for (int r : out_idx) traj.output_names.push_back(model.out_labels[r]);
  traj.times.resize(n_records);
  traj.states.resize(n_records, n_st);
  traj.outputs_mean.resize(n_records, n_out);
  traj.outputs_sampled.resize(n_records, n_out);

  CVec alpha = initial_state.size() ? CVec(initial_state) : CVec(CVec::Zero(m));
  if (alpha.size() != m) throw std::invalid_argument("integrate: initial state size mismatch");

  Philox rng(config.seed, stream);

  CVec beta_full = CVec::Zero(n);
  CVec Bbeta = CVec::Zero(m);
  CVec Dbeta_rec = CVec::Zero(n_out);
  size_t seg = 0;
  auto load_segment = [&](size_t s) {
    beta_full.setZero();
    const auto& amps = schedule.segments[s].amps;
    for (size_t j = 0; j < drive_idx.size(); ++j) beta_full[drive_idx[j]] = amps[j];
    Bbeta.noalias() = model.B * beta_full;
    Dbeta_rec.noalias() = D_rec * beta_full;
  };
  if (!schedule.segments.empty()) load_segment(0);

  CVec dW = CVec::Zero(n);
  CVec f(m), out_mean(n_out), acc_mean = CVec::Zero(n_out), acc_sampled = CVec::Zero(n_out);
  long acc_count = 0;
  long rec = 0;
  const double noise_scale = std::sqrt(dt) / 2.0;
  const double thr2 = config.divergence_threshold * config.divergence_threshold;

  for (long k = 0; k <= steps; ++k) {
    const double t = k * dt;
    while (seg + 1 < schedule.segments.size() && t >= schedule.segments[seg].t_end - 1e-12) {
      ++seg;
      load_segment(seg);
    }

    if (config.noise) {
      for (int j = 0; j < n; ++j) {
        const auto z = rng.normal2();
        dW[j] = Complex(z[0], z[1]) * noise_scale;
      }
    }

    out_mean.noalias() = C_rec * alpha;
    out_mean += c_rec + Dbeta_rec;
    acc_mean += out_mean;
    if (config.noise) {
      acc_sampled += out_mean;
      acc_sampled.noalias() += D_rec * (dW / dt);
    } else {
      acc_sampled += out_mean;
    }
    ++acc_count;

    if (k % stride == 0) {
      traj.times[rec] = t;
      for (int j = 0; j < n_st; ++j) traj.states(rec, j) = alpha[st_idx[j]];
      traj.outputs_mean.row(rec) = (acc_mean / double(acc_count)).transpose();
      traj.outputs_sampled.row(rec) = (acc_sampled / double(acc_count)).transpose();
      acc_mean.setZero();
      acc_sampled.setZero();
      acc_count = 0;
      ++rec;
    }

    if (k == steps) break;

    f.noalias() = model.A * alpha;
    f += model.a + Bbeta;
    model.add_nonlinear_drift(alpha, f);
    alpha += f * dt;
    if (config.noise) alpha.noalias() += model.B * dW;

    double worst = 0;
    for (int j = 0; j < m; ++j) worst = std::max(worst, std::norm(alpha[j]));
    if (!(worst < thr2))
      throw DivergedError("integrate: state magnitude exceeded " +
                              std::to_string(config.divergence_threshold) + " at step " +
                              std::to_string(k + 1),
                          k + 1, t + dt);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Noiseless steady state via damped Newton with the analytic Jacobian

namespace {

Eigen::VectorXd to_real(const CVec& z) {
  const int m = static_cast<int>(z.size());
  Eigen::VectorXd r(2 * m);
  for (int j = 0; j < m; ++j) {
    r[j] = z[j].real();
    r[m + j] = z[j].imag();
  }
  return r;
}

CVec to_complex(const Eigen::VectorXd& r) {
  const int m = static_cast<int>(r.size()) / 2;
  CVec z(m);
  for (int j = 0; j < m; ++j) z[j] = Complex(r[j], r[m + j]);
  return z;
}

Eigen::MatrixXd real_jacobian(const CMat& P, const CMat& Q) {
  const int m = static_cast<int>(P.rows());
  Eigen::MatrixXd J(2 * m, 2 * m);
  const CMat S = P + Q, Dm = P - Q;
  J.topLeftCorner(m, m) = S.real();
  J.topRightCorner(m, m) = -Dm.imag();
  J.bottomLeftCorner(m, m) = S.imag();
  J.bottomRightCorner(m, m) = Dm.real();
  return J;
}

} // namespace

SteadyState steady_state(const CircuitModel& model, const CVec& beta_in, const CVec& guess,
                         int max_iter) {
  const int m = model.num_modes;
  if (beta_in.size() != model.num_ports)
    throw std::invalid_argument("steady_state: input vector size mismatch");
  CVec alpha = guess.size() ? CVec(guess) : CVec(CVec::Zero(m));
  if (alpha.size() != m) throw std::invalid_argument("steady_state: guess size mismatch");

  const CVec forcing = model.a + model.B * beta_in;
  auto drift = [&](const CVec& x) -> CVec {
    CVec f = model.A * x + forcing;
    model.add_nonlinear_drift(x, f);
    return f;
  };

  auto scale_of = [&](const CVec& x) {
    double s = forcing.size() ? forcing.cwiseAbs().maxCoeff() : 0.0;
    if (m > 0) s = std::max(s, (model.A * x).cwiseAbs().maxCoeff());
    return std::max(1.0, s);
  };

  CVec f = drift(alpha);
  double fnorm = m > 0 ? f.cwiseAbs().maxCoeff() : 0.0;
  const double tol = 1e-12;

  CMat P(m, m), Q(m, m);
  for (int it = 0; it < max_iter && fnorm > tol; ++it) {
    P = model.A;
    Q.setZero();
    model.add_nonlinear_jacobian(alpha, P, Q);
    const Eigen::MatrixXd J = real_jacobian(P, Q);
    const Eigen::VectorXd rhs = -to_real(f);
    Eigen::VectorXd step = J.partialPivLu().solve(rhs);
    if (!step.allFinite()) throw NoConvergenceError("steady_state: singular Jacobian");

    double tstep = 1.0;
    bool accepted = false;
    for (int half = 0; half < 30; ++half) {
      const CVec cand = alpha + to_complex(tstep * step);
      const CVec fc = drift(cand);
      const double fn = m > 0 ? fc.cwiseAbs().maxCoeff() : 0.0;
      if (fn < fnorm * (1.0 - 0.25 * tstep) || fn < tol) {
        alpha = cand;
        f = fc;
        fnorm = fn;
        accepted = true;
        break;
      }
      tstep *= 0.5;
    }
    if (!accepted) break;
  }

  // accept rounding-limited residuals on large-amplitude systems
  if (fnorm > tol && fnorm > 64.0 * std::numeric_limits<double>::epsilon() * scale_of(alpha))
    throw NoConvergenceError("steady_state: residual " + std::to_string(fnorm));

  P = model.A;
  Q.setZero();
  model.add_nonlinear_jacobian(alpha, P, Q);
  SteadyState out;
  out.state = alpha;
  if (m > 0) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(real_jacobian(P, Q), false);
    out.max_real_eig = es.eigenvalues().real().maxCoeff();
  } else {
    out.max_real_eig = 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ensembles

namespace {

EnsembleStats reduce_in_order(const std::vector<Eigen::VectorXd>& rows) {
  EnsembleStats s;
  s.count = static_cast<int>(rows.size());
  if (rows.empty()) return s;
  const Eigen::Index n = rows.front().size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n), m2 = Eigen::VectorXd::Zero(n);
  long cnt = 0;
  for (const auto& r : rows) {
    if (r.size() != n) throw std::logic_error("run_ensemble: reducer size changed");
    ++cnt;
    const Eigen::VectorXd d = r - mean;
    mean += d / double(cnt);
    m2 += d.cwiseProduct(r - mean);
  }
  s.mean = mean;
  s.variance = cnt > 1 ? Eigen::VectorXd(m2 / double(cnt - 1)) : Eigen::VectorXd(Eigen::VectorXd::Zero(n));
  return s;
}

} // namespace

EnsembleStats run_ensemble_serial(const CircuitModel& model, const InputSchedule& schedule,
                                  const SimConfig& config, int n_traj,
                                  const TrajectoryReducer& reducer, const CVec& initial_state) {
  if (n_traj < 1) throw std::invalid_argument("run_ensemble: n_traj >= 1");
  std::vector<Eigen::VectorXd> rows(n_traj);
  for (int i = 0; i < n_traj; ++i) {
    try {
      Trajectory t = integrate(model, schedule, config, initial_state, static_cast<uint64_t>(i));
      rows[i] = reducer(t, i);
    } catch (const DivergedError& e) {
      throw DivergedError("trajectory " + std::to_string(i) + ": " + e.what(), e.step, e.time);
    }
  }
  return reduce_in_order(rows);
}

EnsembleStats run_ensemble(const CircuitModel& model, const InputSchedule& schedule,
                           const SimConfig& config, int n_traj, const TrajectoryReducer& reducer,
                           const CVec& initial_state, int n_workers) {
  if (n_traj < 1) throw std::invalid_argument("run_ensemble: n_traj >= 1");
#ifdef _OPENMP
  std::vector<Eigen::VectorXd> rows(n_traj);
  std::exception_ptr first_error = nullptr;
  const int threads = n_workers > 0 ? n_workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (int i = 0; i < n_traj; ++i) {
    try {
      try {
        Trajectory t = integrate(model, schedule, config, initial_state, static_cast<uint64_t>(i));
        rows[i] = reducer(t, i);
      } catch (const DivergedError& e) {
        throw DivergedError("trajectory " + std::to_string(i) + ": " + e.what(), e.step, e.time);
      }
    } catch (...) {
#pragma omp critical
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return reduce_in_order(rows);
#else
  (void)n_workers;
  return run_ensemble_serial(model, schedule, config, n_traj, reducer, initial_state);
#endif
}

} // namespace wigner
