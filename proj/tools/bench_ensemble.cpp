// Benchmark: OpenMP trajectory ensemble against the serial reference.
// Verifies the bitwise-determinism contract while timing both paths.

#include <chrono>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wigner/components.hpp"
#include "wigner/sde.hpp"

using namespace wigner;

int main(int argc, char** argv) {
  const int n_traj = argc > 1 ? std::atoi(argv[1]) : 200;
  const double t_end = argc > 2 ? std::atof(argv[2]) : 50.0;

  const NopoParams p{1.0, 2.0, 0.05};
  const double eth = nopo_threshold(p);
  const Complex eps(-2.0 * eth, 0);
  const auto ss = nopo_steady_state(p, eps);
  const CircuitModel model = nopo(p);
  CVec amps(3);
  amps << 0, 0, eps;
  CVec init(3);
  init << ss.alpha_s_mag, ss.alpha_s_mag, ss.alpha_p;
  const InputSchedule sched = InputSchedule::constant(model.in_labels, amps, t_end);
  SimConfig cfg;
  cfg.dt = 1e-3;
  cfg.seed = 7;
  cfg.record_stride = 1000;

  auto reducer = [](const Trajectory& t, int) -> Eigen::VectorXd {
    Eigen::VectorXd v(2);
    const auto last = static_cast<Eigen::Index>(t.times.size()) - 1;
    v << std::arg(t.states(last, 0)), std::norm(t.states(last, 0));
    return v;
  };

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const EnsembleStats serial = run_ensemble_serial(model, sched, cfg, n_traj, reducer, init);
  const auto t1 = clock::now();
  const EnsembleStats parallel = run_ensemble(model, sched, cfg, n_traj, reducer, init);
  const auto t2 = clock::now();

  const double ts = std::chrono::duration<double>(t1 - t0).count();
  const double tp = std::chrono::duration<double>(t2 - t1).count();
  const bool identical = (serial.mean - parallel.mean).cwiseAbs().maxCoeff() == 0.0 &&
                         (serial.variance - parallel.variance).cwiseAbs().maxCoeff() == 0.0;

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::cout << "trajectories: " << n_traj << ", t_end: " << t_end << "\n";
  std::cout << "serial reference: " << ts << " s (" << n_traj / ts << " traj/s)\n";
  std::cout << "openmp (" << threads << " threads): " << tp << " s (" << n_traj / tp
            << " traj/s), speedup " << ts / tp << "x\n";
  std::cout << "bitwise identical results: " << (identical ? "yes" : "NO") << "\n";
  return identical ? 0 : 1;
}
