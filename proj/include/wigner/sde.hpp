#ifndef WIGNER_SDE_HPP
#define WIGNER_SDE_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wigner/model.hpp"

namespace wigner {

/// Piecewise-constant coherent drive over a named subset of external input
/// ports. Ports not named are driven by vacuum only.
struct InputSchedule {
  struct Segment {
    double t_start, t_end;
    CVec amps; ///< coherent amplitudes over port_names
  };
  std::vector<std::string> port_names;
  std::vector<Segment> segments;

  double t_end() const { return segments.empty() ? 0.0 : segments.back().t_end; }
  void validate() const;

  static InputSchedule constant(std::vector<std::string> names, CVec amps, double t_end);
};

struct SimConfig {
  double dt = 1e-3;
  double t_end = 0; ///< 0: run to the schedule end
  uint64_t seed = 0;
  bool noise = true;
  int record_stride = 1;
  std::vector<std::string> recorded_outputs; ///< empty: all output ports
  std::vector<int> recorded_states;          ///< empty: all modes
  double divergence_threshold = 1e9;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<int> state_indices;
  std::vector<std::string> output_names;
  Eigen::MatrixXcd states;          ///< records x recorded modes, instantaneous
  Eigen::MatrixXcd outputs_mean;    ///< C a + c + D beta_coh, stride-window averaged
  Eigen::MatrixXcd outputs_sampled; ///< adds the D dW/dt shot-noise contribution
  uint64_t seed = 0;
  uint64_t stream = 0;
  std::string generator = "philox4x32-10";
};

/// Euler-Maruyama integration of the Langevin dynamics with vacuum-level
/// complex white noise (variance dt/4 per quadrature per port).
Trajectory integrate(const CircuitModel& model, const InputSchedule& schedule,
                     const SimConfig& config, const CVec& initial_state = CVec(),
                     uint64_t stream = 0);

struct SteadyState {
  CVec state;
  double max_real_eig; ///< largest real part of the linearized drift spectrum
  bool stable() const { return max_real_eig < 0; }
};

/// Damped Newton iteration on the noiseless drift with the analytic
/// nonlinearity Jacobian. beta_in is the full constant input vector.
SteadyState steady_state(const CircuitModel& model, const CVec& beta_in,
                         const CVec& guess = CVec(), int max_iter = 200);

struct EnsembleStats {
  std::vector<std::string> names;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance; ///< sample variance over trajectories
  int count = 0;
};

/// Per-trajectory observable vector; must have the same length for every
/// trajectory of an ensemble.
using TrajectoryReducer = std::function<Eigen::VectorXd(const Trajectory&, int)>;

/// Runs n_traj independent trajectories on per-trajectory counter streams and
/// reduces observables in trajectory order, so results are bitwise identical
/// for any worker count. n_workers = 0 uses all available cores.
EnsembleStats run_ensemble(const CircuitModel& model, const InputSchedule& schedule,
                           const SimConfig& config, int n_traj,
                           const TrajectoryReducer& reducer,
                           const CVec& initial_state = CVec(), int n_workers = 0);

/// Plain-loop reference implementation of run_ensemble.
EnsembleStats run_ensemble_serial(const CircuitModel& model, const InputSchedule& schedule,
                                  const SimConfig& config, int n_traj,
                                  const TrajectoryReducer& reducer,
                                  const CVec& initial_state = CVec());

// Trajectory records: CSV and the compact binary form (magic "WGNR1",
// little-endian doubles).
void write_trajectory_csv(const std::string& path, const Trajectory& t);
void write_trajectory_wgnr1(const std::string& path, const Trajectory& t);
Trajectory read_trajectory_wgnr1(const std::string& path);

} // namespace wigner

#endif
