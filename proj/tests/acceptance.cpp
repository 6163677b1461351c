// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wigner/components.hpp"
#include "wigner/errors.hpp"
#include "wigner/mleval.hpp"
#include "wigner/perceptron.hpp"
#include "wigner/rng.hpp"
#include "wigner/sde.hpp"

using namespace wigner;
using std::numbers::pi;

namespace {

int failures = 0;

void criterion(int id, const std::string& name, const std::function<bool(std::string&)>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%2d] %s  %-52s (%.1f s)  %s\n", id, ok ? "PASS" : "FAIL", name.c_str(), dt,
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

// shared perceptron harness -------------------------------------------------

struct TrialErrors {
  std::vector<double> noisy, clean;
};

double run_one(const PerceptronCircuit& pc, const GaussianTask& task, int trial, bool noise) {
  const Dataset tr = sample_dataset(task, 100, 1000 + trial, 1);
  const Dataset te = sample_dataset(task, 100, 1000 + trial, 2);
  Eigen::MatrixXd X(200, task.dim());
  std::vector<int> y(200);
  X.topRows(100) = tr.X;
  X.bottomRows(100) = te.X;
  for (int i = 0; i < 100; ++i) {
    y[i] = tr.y[i];
    y[100 + i] = te.y[i];
  }
  SimConfig cfg;
  cfg.noise = noise;
  cfg.dt = 1e-3;
  cfg.record_stride = 500;
  cfg.seed = 42 + static_cast<uint64_t>(trial);
  return run_training(pc, X, y, 100, cfg).test_error;
}

std::vector<double> run_trials(const PerceptronCircuit& pc, const GaussianTask& task,
                               int n_trials, bool noise) {
  std::vector<double> errs(n_trials);
  std::exception_ptr first = nullptr;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int t = 0; t < n_trials; ++t) {
    try {
      errs[t] = run_one(pc, task, t, noise);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
  return errs;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double stderr_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (double(v.size()) - 1.0) / double(v.size()));
}

} // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::string(argv[1]) == "--quick";

  // 1 ------------------------------------------------------------------
  criterion(1, "lossless Kerr identities (|eta| = 1, squeezing)", [](std::string& d) {
    Philox rng(2024, 0);
    double worst_eta = 0, worst_sq = 0;
    for (int k = 0; k < 1000; ++k) {
      KerrParams p;
      p.kappas = {0.2 + 2.0 * rng.uniform()};
      p.delta = 3.0 * (rng.uniform() - 0.5);
      p.chi = (rng.uniform() < 0.5 ? -1 : 1) * (0.001 + 0.05 * rng.uniform());
      const Complex alpha0 = Complex(rng.normal(), rng.normal()) * std::sqrt(15.0 * rng.uniform());
      const GainCoefficients g = kerr_reflection_coeffs(p, alpha0);
      worst_eta = std::max(worst_eta, std::abs(std::abs(g.eta) - 1.0));
      const double gm = std::abs(g.g_minus), gp = std::abs(g.g_plus);
      worst_sq = std::max(worst_sq, std::abs((gm + gp) * std::abs(gm - gp) - 1.0));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "worst |eta|-1: %.2e, worst squeezing: %.2e", worst_eta,
                  worst_sq);
    d = buf;
    return worst_eta < 1e-8 && worst_sq < 1e-8;
  });

  // 2 ------------------------------------------------------------------
  criterion(2, "gain/detuning inversion round trip", [](std::string& d) {
    double worst = 0;
    for (double g = 2.0; g <= 50.0; g += 0.25) {
      const double delta = detuning_for_gain(1.0, g);
      worst = std::max(worst, std::abs(kerr_max_gain(1.0, delta, 0.01).g_max - g) / g);
    }
    const double d20 = detuning_for_gain(1.0, 20.0);
    char buf[96];
    std::snprintf(buf, sizeof buf, "worst rel err %.2e, Delta(20) = %.6f", worst, d20);
    d = buf;
    return worst < 1e-6 && std::abs(d20 - 0.770109) < 1e-5;
  });

  // 3 ------------------------------------------------------------------
  criterion(3, "probe gains match analytic; g_rr crossing near 0.8", [](std::string& d) {
    const auto design = AmplifierDesign::create(20.0, 1.0, -0.01);
    const KerrParams p = design.cavity();
    const CircuitModel cav = kerr_cavity(p);
    double worst = 0;
    for (int k = 1; k <= 20; ++k) {
      const double eps0 = design.eps0_max * k / 20.0;
      CVec beta(1);
      beta << eps0;
      // noiseless relaxation, then probe the steady response
      SimConfig cfg;
      cfg.noise = false;
      cfg.dt = 1e-3;
      cfg.record_stride = 5000;
      const InputSchedule sched = InputSchedule::constant(cav.in_labels, beta, 80.0);
      const Trajectory t = integrate(cav, sched, cfg);
      CVec base(1);
      base << t.states(static_cast<Eigen::Index>(t.times.size()) - 1, 0);
      base = steady_state(cav, beta, base).state;
      const double del = 1e-3 * eps0;
      auto out_at = [&](Complex dd) {
        CVec b(1);
        b << eps0 + dd;
        return cav.output(steady_state(cav, b, base).state, b)[0];
      };
      const Complex col_r = (out_at(del) - out_at(-del)) / (2.0 * del);
      const Complex col_i = (out_at(Complex(0, del)) - out_at(Complex(0, -del))) / (2.0 * del);
      const Complex gm = 0.5 * (col_r - Complex(0, 1) * col_i);
      const Complex gp = 0.5 * (col_r + Complex(0, 1) * col_i);
      const GainCoefficients a = kerr_reflection_coeffs(p, steady_state(cav, beta, base).state[0]);
      const double env = a.envelope();
      worst = std::max(worst, std::abs(gm - a.g_minus) / env);
      worst = std::max(worst, std::abs(gp - a.g_plus) / env);
    }
    const double ratio = design.eps0_min / design.eps0_max;
    char buf[96];
    std::snprintf(buf, sizeof buf, "worst probe mismatch %.2e, crossing at %.3f", worst, ratio);
    d = buf;
    return worst < 0.01 && ratio > 0.7 && ratio < 0.9;
  });

  // 4 ------------------------------------------------------------------
  criterion(4, "NOPO statics and U(1) manifold", [](std::string& d) {
    const NopoParams p{1.0, 2.0, 0.05};
    const double eth = nopo_threshold(p);
    bool ok = std::abs(eth - 7.07107) < 1e-5;
    const Complex eps(-2.0 * eth, 0);
    const auto ss = nopo_steady_state(p, eps);
    ok = ok && std::abs(ss.alpha_s_mag - std::sqrt(200.0)) < 1e-6;
    ok = ok && std::abs(std::abs(ss.alpha_p) - p.kappa / (2.0 * p.chi)) < 1e-6;
    // Newton lands on the manifold from a symmetry-broken guess
    const CircuitModel m = nopo(p);
    CVec beta(3);
    beta << 0, 0, eps;
    CVec guess(3);
    guess << 0.7 * ss.alpha_s_mag, 1.1 * ss.alpha_s_mag, ss.alpha_p;
    const SteadyState st = steady_state(m, beta, guess);
    ok = ok && std::abs(std::abs(st.state[0]) - ss.alpha_s_mag) < 1e-6;
    // U(1) rotations keep the drift at zero
    double worst = 0;
    for (double phi = 0; phi < 2 * pi; phi += 0.3) {
      CVec a(3);
      a << ss.alpha_s_mag * std::exp(Complex(0, phi)), ss.alpha_s_mag * std::exp(Complex(0, -phi)),
          ss.alpha_p;
      worst = std::max(worst, m.drift(a, beta).cwiseAbs().maxCoeff());
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "rotated-fixpoint drift max %.2e", worst);
    d = buf;
    return ok && worst < 1e-10;
  });

  // 5 ------------------------------------------------------------------
  criterion(5, "NOPO phase diffusion Monte Carlo", [quick](std::string& d) {
    const NopoParams p{1.0, 2.0, 0.05};
    const double eth = nopo_threshold(p);
    const Complex eps(-2.0 * eth, 0);
    const double gamma = nopo_phase_diffusion_rate(p, eps);
    const auto ss = nopo_steady_state(p, eps);
    const CircuitModel m = nopo(p);
    CVec amps(3);
    amps << 0, 0, eps;
    CVec init(3);
    init << ss.alpha_s_mag, ss.alpha_s_mag, ss.alpha_p;
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.seed = 2718;
    cfg.record_stride = 1000;
    const InputSchedule sched = InputSchedule::constant(m.in_labels, amps, 100.0);
    auto reducer = [](const Trajectory& t, int) -> Eigen::VectorXd {
      Eigen::VectorXd phis(static_cast<Eigen::Index>(t.times.size()));
      double prev = 0;
      for (size_t r = 0; r < t.times.size(); ++r) {
        double phi = 0.5 * (std::arg(t.states(static_cast<Eigen::Index>(r), 1)) -
                            std::arg(t.states(static_cast<Eigen::Index>(r), 0)));
        while (phi - prev > pi / 2) phi -= pi;
        while (phi - prev < -pi / 2) phi += pi;
        phis[static_cast<Eigen::Index>(r)] = phi;
        prev = phi;
      }
      return phis;
    };
    const int n_traj = quick ? 500 : 1500;
    const EnsembleStats st = run_ensemble(m, sched, cfg, n_traj, reducer, init);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (Eigen::Index r = 0; r < st.mean.size(); ++r) {
      const double t = double(r);
      if (t < 5) continue;
      sx += t;
      sy += st.variance[r];
      sxx += t * t;
      sxy += t * st.variance[r];
      ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    char buf[96];
    std::snprintf(buf, sizeof buf, "slope/gamma = %.3f over %d trajectories", slope / gamma,
                  n_traj);
    d = buf;
    return std::abs(slope - gamma) / gamma < 0.15;
  });

  // 6 ------------------------------------------------------------------
  criterion(6, "Fredkin modulator reflection flip", [](std::string& d) {
    const double ka = 10.0, kb = 10.0, chi_ab = -0.1, zeta0 = 5.0;
    const FredkinDesign fd = fredkin_params(ka, kb, 0.0, 0.0, chi_ab, zeta0);
    Kerr2Params gp;
    gp.kappas_a = {ka};
    gp.kappas_b = {kb};
    gp.delta_a = fd.delta_a;
    gp.delta_b = fd.delta_b;
    gp.chi_ab = chi_ab;
    const CircuitModel m = kerr_cavity_2mode(gp);
    auto reflect = [&](double xi) {
      CVec beta(2);
      beta << zeta0, xi;
      CVec guess(2);
      guess << -std::sqrt(ka) * zeta0 / Complex(ka / 2, ka / 2), 0.0;
      if (xi != 0.0) guess[1] = -std::sqrt(kb) * xi / Complex(kb / 2, 0);
      const SteadyState ss = steady_state(m, beta, guess);
      return m.output(ss.state, beta)[0];
    };
    const Complex ratio = reflect(fd.xi0) / reflect(0.0);
    bool raised = false;
    try {
      (void)fredkin_params(1.0, 1.0, 0.0, 10.0, 0.1, 1.0);
    } catch (const UnstableParametersError&) {
      raised = true;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "zeta'(xi0)/zeta'(0) = %.8f%+.1e i", ratio.real(),
                  ratio.imag());
    d = buf;
    return std::abs(ratio + 1.0) < 1e-6 && raised;
  });

  // 7 ------------------------------------------------------------------
  criterion(7, "quadrature filter balance and rejection", [](std::string& d) {
    const auto q = quadrature_filter_coeffs(1.0, 1.0, -0.5);
    const double bal = std::abs(std::abs(q.gains.g_minus) - std::abs(q.gains.g_plus));
    // simulated imaginary-quadrature response of the composite filter
    const double kappa = 20.0, chi = 0.2, delta = -10.0;
    const auto qf = build_quadrature_filter(kappa, chi, delta);
    const CircuitModel& m = qf.model;
    const double bias = -std::sqrt(2.0) * std::sqrt(kappa) * std::sqrt(-delta / chi);
    CVec beta = CVec::Zero(m.num_ports);
    beta[1] = bias;
    SimConfig cfg;
    cfg.noise = false;
    cfg.dt = 2e-4;
    cfg.record_stride = 5000;
    const InputSchedule sched = InputSchedule::constant(m.in_labels, beta, 3.0);
    const Trajectory t = integrate(m, sched, cfg, CVec::Zero(m.num_modes));
    CVec base(m.num_modes);
    for (int j = 0; j < m.num_modes; ++j)
      base[j] = t.states(static_cast<Eigen::Index>(t.times.size()) - 1, j);
    base = steady_state(m, beta, base).state;
    const double del = 1e-3 * std::abs(bias);
    auto out_at = [&](Complex dd) {
      CVec b = beta;
      b[0] = dd;
      return m.output(steady_state(m, b, base).state, b)[0];
    };
    const Complex imag_resp = (out_at(Complex(0, del)) - out_at(Complex(0, -del))) / (2.0 * del);
    char buf[96];
    std::snprintf(buf, sizeof buf, "||g-|-|g+|| = %.1e, imag response %.2e", bal,
                  std::abs(imag_resp));
    d = buf;
    return bal < 1e-10 && std::abs(imag_resp) < 1e-3;
  });

  // 8 and 9 --------------------------------------------------------------
  {
    const auto spec = PerceptronSpec::create(8);
    const auto pc = build_perceptron(spec);
    const int n_trials = quick ? 4 : 20;
    std::vector<double> noisy2, clean2;

    criterion(8, "perceptron end-to-end at separation 2 (+ monotone grid)",
              [&](std::string& d) {
                const GaussianTask task2 = GaussianTask::axis_separated(8, 2.0);
                noisy2 = run_trials(pc, task2, n_trials, true);
                const double p2 = mean_of(noisy2);
                bool monotone = true;
                std::string grid_str;
                if (!quick) {
                  const std::vector<double> grid{0.5, 1.0, 1.5, 2.5, 3.0, 4.0};
                  std::vector<std::pair<double, std::pair<double, double>>> pts;
                  pts.push_back({2.0, {p2, stderr_of(noisy2)}});
                  for (double sep : grid) {
                    const GaussianTask t = GaussianTask::axis_separated(8, sep);
                    const auto es = run_trials(pc, t, n_trials, true);
                    pts.push_back({sep, {mean_of(es), stderr_of(es)}});
                  }
                  std::sort(pts.begin(), pts.end());
                  for (size_t i = 0; i + 1 < pts.size(); ++i) {
                    const double slack =
                        2.0 * std::hypot(pts[i].second.second, pts[i + 1].second.second);
                    if (pts[i + 1].second.first > pts[i].second.first + slack) monotone = false;
                  }
                  for (const auto& [sep, pe] : pts)
                    grid_str += " " + std::to_string(sep).substr(0, 3) + ":" +
                                std::to_string(pe.first).substr(0, 5);
                }
                char buf[200];
                std::snprintf(buf, sizeof buf,
                              "mean err %.4f (Bayes bound %.4f), monotone %s;%s", p2,
                              optimal_error_rate(2.0), monotone ? "yes" : "NO", grid_str.c_str());
                d = buf;
                return p2 <= 0.25 && monotone;
              });

    criterion(9, "shot-noise insensitivity at separation 2", [&](std::string& d) {
      const GaussianTask task2 = GaussianTask::axis_separated(8, 2.0);
      clean2 = run_trials(pc, task2, n_trials, false);
      if (noisy2.empty()) noisy2 = run_trials(pc, task2, n_trials, true);
      const double gap = mean_of(noisy2) - mean_of(clean2);
      char buf[120];
      std::snprintf(buf, sizeof buf, "noisy %.4f vs noiseless %.4f, |gap| = %.4f", mean_of(noisy2),
                    mean_of(clean2), std::abs(gap));
      d = buf;
      return std::abs(gap) < 0.03;
    });
  }

  // 10 -----------------------------------------------------------------
  criterion(10, "GDA baseline near the Bayes rate", [](std::string& d) {
    const GaussianTask task = GaussianTask::axis_separated(8, 2.0);
    const Dataset tr = sample_dataset(task, 10000, 101);
    const Dataset te = sample_dataset(task, 100000, 102);
    const GdaClassifier c = gda_fit(tr.X, tr.y);
    const ErrorEstimate e = estimate_error_rate(gda_predict(c, te.X), te.y);
    char buf[96];
    std::snprintf(buf, sizeof buf, "GDA %.6f vs optimal 0.158655", e.p_err);
    d = buf;
    return std::abs(e.p_err - 0.158655) < 0.01;
  });

  // 11 -----------------------------------------------------------------
  criterion(11, "learning-rule sign tests (all four label pairs)", [](std::string& d) {
    const auto spec = PerceptronSpec::create(1);
    const auto pc = build_perceptron(spec);
    auto run_case = [&](double phi0, double x, int y) {
      InputSchedule sched;
      sched.port_names = {"x1", "Y", "T"};
      for (const auto& p : pc.supply_ports) sched.port_names.push_back(p);
      CVec base = CVec::Zero(static_cast<Eigen::Index>(sched.port_names.size()));
      base.tail(pc.supply_levels.size()) = pc.supply_levels;
      CVec settle = base;
      settle[0] = x * spec.synapse.x_amp;
      CVec train = settle;
      train[1] = y ? spec.ctl_y_level : 0.0;
      train[2] = spec.t_on_level;
      sched.segments.push_back({0.0, 3.0, settle});
      sched.segments.push_back({3.0, 5.0, train});
      SimConfig cfg;
      cfg.noise = false;
      cfg.dt = 1e-3;
      cfg.record_stride = 100;
      cfg.recorded_outputs = {"yhat"};
      cfg.recorded_states = {pc.nopo_signal_mode[0], pc.nopo_idler_mode[0]};
      CVec init = CVec::Zero(pc.model.num_modes);
      const auto& dd = spec.synapse;
      const double eth = nopo_threshold(dd.nopo);
      init[pc.nopo_signal_mode[0]] = std::sqrt(dd.n0) * std::exp(Complex(0, phi0));
      init[pc.nopo_idler_mode[0]] = std::sqrt(dd.n0) * std::exp(Complex(0, -phi0));
      init[pc.nopo_idler_mode[0] + 1] = 2.0 * eth / std::sqrt(dd.nopo.kappa_p);
      const Trajectory t = integrate(pc.model, sched, cfg, init);
      auto g_at = [&](double tt) {
        size_t best = 0;
        double bd = 1e9;
        for (size_t r = 0; r < t.times.size(); ++r)
          if (std::abs(t.times[r] - tt) < bd) {
            bd = std::abs(t.times[r] - tt);
            best = r;
          }
        return pc.gain_from_phase(std::arg(t.states(static_cast<Eigen::Index>(best), 0)));
      };
      return g_at(5.0) - g_at(3.0);
    };
    // four (y, yhat) pairs, with each mismatch probed at both input signs:
    // the move must follow (y - yhat) x
    const double up = run_case(3 * pi / 4, +2.0, 1);     // (1,0), x>0: up
    const double down = run_case(pi / 4, +2.0, 0);       // (0,1), x>0: down
    const double up_n = run_case(3 * pi / 4, -2.0, 0);   // (0,1), x<0: up
    const double down_n = run_case(pi / 4, -2.0, 1);     // (1,0), x<0: down
    const double hold1 = run_case(pi / 4, +2.0, 1);     // (1,1)
    const double hold0 = run_case(3 * pi / 4, +2.0, 0); // (0,0)
    const double push = std::min(std::min(up, -down), std::min(up_n, -down_n));
    const double hold = std::max(std::abs(hold1), std::abs(hold0));
    char buf[120];
    std::snprintf(buf, sizeof buf, "weakest mismatch move %.3f, largest matched move %.4f", push,
                  hold);
    d = buf;
    return up > 0 && down < 0 && up_n > 0 && down_n < 0 && hold < 0.1 * push;
  });

  // 12 -----------------------------------------------------------------
  criterion(12, "engine validation (closed form + vacuum variance)", [](std::string& d) {
    KerrParams p{{1.0}, 0.0, 0.0};
    const CircuitModel m = kerr_cavity(p);
    CVec amps(1);
    amps << 1.0;
    SimConfig cfg;
    cfg.noise = false;
    cfg.dt = 1e-3;
    cfg.record_stride = 100;
    const Trajectory t = integrate(m, InputSchedule::constant(m.in_labels, amps, 10.0), cfg);
    double worst = 0;
    for (size_t r = 0; r < t.times.size(); ++r) {
      const double expect = -2.0 * (1.0 - std::exp(-t.times[r] / 2.0));
      worst = std::max(worst,
                       std::abs(t.states(static_cast<Eigen::Index>(r), 0).real() - expect));
    }
    const double rel = worst / 2.0; // relative to the steady amplitude

    CVec vac(1);
    vac << 0.0;
    SimConfig ncfg;
    ncfg.dt = 1e-3;
    ncfg.seed = 99;
    ncfg.record_stride = 5000;
    auto reducer = [](const Trajectory& tr, int) -> Eigen::VectorXd {
      std::vector<double> vals;
      for (size_t r = 0; r < tr.times.size(); ++r) {
        if (tr.times[r] < 10.0) continue;
        vals.push_back(tr.states(static_cast<Eigen::Index>(r), 0).real());
        vals.push_back(tr.states(static_cast<Eigen::Index>(r), 0).imag());
      }
      return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    };
    const EnsembleStats st =
        run_ensemble(m, InputSchedule::constant(m.in_labels, vac, 60.0), ncfg, 200, reducer);
    const double var = st.variance.mean() + st.mean.cwiseAbs2().mean();
    char buf[96];
    std::snprintf(buf, sizeof buf, "trajectory rel err %.2e, quadrature variance %.4f", rel, var);
    d = buf;
    return rel < 1e-4 && std::abs(var - 0.25) < 0.025;
  });

  std::printf("%d/%d criteria passed\n", 12 - failures, 12);
  return failures == 0 ? 0 : 1;
}
