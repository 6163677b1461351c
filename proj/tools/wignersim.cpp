// wignersim: semi-classical photonic circuit experiments from JSON configs.
//
// Subcommands: sweep-gain, sweep-synapse, train, benchmark, sweep-learning,
// elaborate. Every command is deterministic given (--config, --seed); CSVs
// carry a header row plus a comment line with the config hash and seed.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wigner/errors.hpp"
#include "wigner/json_io.hpp"
#include "wigner/mleval.hpp"
#include "wigner/perceptron.hpp"

using namespace wigner;
namespace fs = std::filesystem;

namespace {

uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct Common {
  std::string config_path;
  std::string out_dir = ".";
  uint64_t seed = 0;
  int workers = 0;
  bool no_noise = false;
};

std::string hash_of(const Json& config) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(config.dump())));
  return buf;
}

std::ofstream open_csv(const Common& c, const Json& config, const std::string& name) {
  fs::create_directories(c.out_dir);
  const fs::path p = fs::path(c.out_dir) / name;
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot open output file " + p.string());
  os.precision(12);
  os << "# spec=" << hash_of(config) << " seed=" << c.seed << "\n";
  return os;
}

void reject_unknown(const Json& doc, std::initializer_list<const char*> allowed,
                    const std::string& where) {
  for (const auto& [key, _] : doc.items()) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

void check_schema(const Json& doc) {
  if (doc.value("schema", 1) != 1) throw ConfigError("config: unsupported schema version");
}

// ---------------------------------------------------------------------------
// perceptron spec from config (all rates in units of the memory line width)

PerceptronSpec spec_from_config(const Json& doc) {
  reject_unknown(doc,
                 {"n_inputs", "g_max", "kappa_amp", "chi_amp", "n0", "alpha_fb", "signal_scale",
                  "dt_sample", "t_settle", "booster_atten"},
                 "perceptron");
  PerceptronSpec def = PerceptronSpec::create(doc.value("n_inputs", 8));
  const double g_max = doc.value("g_max", def.synapse.amplifier.g_max);
  const double kappa = doc.value("kappa_amp", def.synapse.amplifier.kappa);
  const double chi = doc.value("chi_amp", def.synapse.amplifier.chi);
  const double n0 = doc.value("n0", def.synapse.n0);
  const double alpha = doc.value("alpha_fb", def.synapse.alpha_fb);
  const double scale = doc.value("signal_scale", def.synapse.signal_scale);
  def.synapse = SynapseDesign::create(g_max, kappa, chi, n0, alpha, scale);
  def.dt_sample = doc.value("dt_sample", def.dt_sample);
  def.t_settle = doc.value("t_settle", def.t_settle);
  def.booster_atten = doc.value("booster_atten", def.booster_atten);
  return def;
}

GaussianTask task_from_config(const Json& doc, int n_inputs) {
  reject_unknown(doc, {"dim", "separation", "sigma"}, "dataset");
  const int dim = doc.value("dim", n_inputs);
  if (dim != n_inputs) throw ConfigError("dataset: dim must equal the perceptron input count");
  return GaussianTask::axis_separated(dim, doc.value("separation", 2.0),
                                      doc.value("sigma", 1.0));
}

SimConfig sim_from_config(const Json& doc, const Common& c) {
  reject_unknown(doc, {"dt", "record_stride"}, "sim");
  SimConfig cfg;
  cfg.dt = doc.value("dt", 1e-3);
  cfg.record_stride = doc.value("record_stride", 500);
  cfg.seed = c.seed;
  cfg.noise = !c.no_noise;
  return cfg;
}

struct TrialResult {
  double p_err;
  double gda_err;
};

TrialResult one_trial(const PerceptronCircuit& pc, const GaussianTask& task, int m_train,
                      int m_test, const SimConfig& base, uint64_t trial) {
  const Dataset tr = sample_dataset(task, m_train, base.seed + trial, 1);
  const Dataset te = sample_dataset(task, m_test, base.seed + trial, 2);
  Eigen::MatrixXd X(m_train + m_test, task.dim());
  std::vector<int> y(m_train + m_test);
  X.topRows(m_train) = tr.X;
  X.bottomRows(m_test) = te.X;
  for (int i = 0; i < m_train; ++i) y[i] = tr.y[i];
  for (int i = 0; i < m_test; ++i) y[m_train + i] = te.y[i];
  SimConfig cfg = base;
  cfg.seed = base.seed + trial;
  const ClassificationRun run = run_training(pc, X, y, m_train, cfg);
  const GdaClassifier gda = gda_fit(tr.X, tr.y);
  const ErrorEstimate ge = estimate_error_rate(gda_predict(gda, te.X), te.y);
  return {run.test_error, ge.p_err};
}

/// Trial loop with per-trial seeds; results identical for any worker count.
std::vector<TrialResult> run_trials(const PerceptronCircuit& pc, const GaussianTask& task,
                                    int m_train, int m_test, const SimConfig& base, int n_trials,
                                    int workers) {
  std::vector<TrialResult> out(n_trials);
  std::exception_ptr first = nullptr;
#ifdef _OPENMP
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (int t = 0; t < n_trials; ++t) {
    try {
      out[t] = one_trial(pc, task, m_train, m_test, base, static_cast<uint64_t>(t));
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
  return out;
}

ErrorEstimate pool(const std::vector<TrialResult>& rs, bool gda, long n_samples) {
  std::vector<ErrorEstimate> es;
  for (const auto& r : rs) {
    ErrorEstimate e;
    e.p_err = gda ? r.gda_err : r.p_err;
    e.n_samples = n_samples;
    e.n_trials = 1;
    es.push_back(e);
  }
  return aggregate(es);
}

// ---------------------------------------------------------------------------
// commands

int cmd_sweep_gain(const Common& c, const Json& config) {
  reject_unknown(config, {"schema", "g_max", "kappa", "chi", "points", "max_ratio", "probe"},
                 "sweep-gain");
  check_schema(config);
  const double g_max = config.value("g_max", 20.0);
  const double kappa = config.value("kappa", 1.0);
  const double chi = config.value("chi", -0.01);
  const int points = config.value("points", 240);
  const double max_ratio = config.value("max_ratio", 1.2);
  const bool probe = config.value("probe", true);
  if (points < 2) throw ConfigError("sweep-gain: points >= 2");

  const AmplifierDesign d = AmplifierDesign::create(g_max, kappa, chi);
  const KerrParams cav = d.cavity();
  const CircuitModel cavity = kerr_cavity(cav);

  auto os = open_csv(c, config, "sweep_gain.csv");
  os << "bias_ratio,g_rr,g_ir,g_ri,g_ii,envelope";
  if (probe) os << ",sim_g_rr,sim_g_ir,sim_g_ri,sim_g_ii";
  os << "\n";
  for (int k = 0; k < points; ++k) {
    const double ratio = max_ratio * (k + 1) / double(points);
    const double eps0 = ratio * d.eps0_max;
    const auto g = d.gains_at_bias(eps0);
    const Complex sum = g.g_minus + g.g_plus, dif = g.g_minus - g.g_plus;
    const double envelope = std::abs(g.g_minus) + std::abs(g.g_plus);
    os << ratio << "," << sum.real() << "," << sum.imag() << "," << -dif.imag() << ","
       << dif.real() << "," << envelope;
    if (probe) {
      // noiseless steady-state probe of the bare cavity, trims applied in post
      CVec beta(1);
      beta << eps0;
      const CVec base = steady_state(cavity, beta).state;
      const double delta = 1e-3 * d.eps0_max;
      auto out_at = [&](Complex probe_amp) {
        CVec b(1);
        b << eps0 + probe_amp;
        return cavity.output(steady_state(cavity, b, base).state, b)[0];
      };
      const Complex col_r = (out_at(delta) - out_at(-delta)) / (2.0 * delta);
      const Complex col_i = (out_at(Complex(0, delta)) - out_at(Complex(0, -delta))) / (2.0 * delta);
      Complex gm = 0.5 * (col_r - Complex(0, 1) * col_i);
      Complex gp = 0.5 * (col_r + Complex(0, 1) * col_i);
      gm *= std::exp(Complex(0, d.phi_in + d.phi_out));
      gp *= std::exp(Complex(0, d.phi_out - d.phi_in));
      const Complex ssum = gm + gp, sdif = gm - gp;
      os << "," << ssum.real() << "," << ssum.imag() << "," << -sdif.imag() << "," << sdif.real();
    }
    os << "\n";
  }
  std::cout << "sweep_gain.csv written (" << points << " points)\n";
  return 0;
}

int cmd_sweep_synapse(const Common& c, const Json& config) {
  reject_unknown(config, {"schema", "perceptron", "n_phi", "probe"}, "sweep-synapse");
  check_schema(config);
  const PerceptronSpec spec = spec_from_config(config.value("perceptron", Json::object()));
  const int n_phi = config.value("n_phi", 64);
  const bool probe = config.value("probe", false);
  if (n_phi < 2) throw ConfigError("sweep-synapse: n_phi >= 2");

  auto os = open_csv(c, config, "sweep_synapse.csv");
  os << "phi,G_rr,G_ir";
  if (probe) os << ",sim_G_rr,sim_G_ir";
  os << "\n";
  for (int k = 0; k <= n_phi; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n_phi;
    const auto g = spec.synapse.gain_at_phase(phi);
    os << phi << "," << g.rr() << "," << g.ir();
    if (probe) {
      const auto m = measure_synapse_gain(spec.synapse, phi);
      os << "," << m.rr() << "," << m.ir();
    }
    os << "\n";
  }
  std::cout << "sweep_synapse.csv written (" << n_phi + 1 << " points)\n";
  return 0;
}

void write_run_artifacts(const Common& c, const Json& config, const ClassificationRun& run,
                         const PerceptronCircuit& pc, const std::string& suffix,
                         double wall_seconds) {
  {
    auto os = open_csv(c, config, "labels" + suffix + ".csv");
    os << "segment,y,yhat,error\n";
    for (size_t i = 0; i < run.y_true.size(); ++i)
      os << i << "," << run.y_true[i] << "," << run.y_hat[i] << ","
         << (run.y_true[i] != run.y_hat[i]) << "\n";
  }
  {
    auto os = open_csv(c, config, "gains" + suffix + ".csv");
    os << "time";
    for (int j = 0; j < pc.spec.n_inputs; ++j) os << ",G" << j + 1;
    os << "\n";
    for (Eigen::Index r = 0; r < run.gain_trace.rows(); ++r) {
      os << run.trace_times[static_cast<size_t>(r)];
      for (int j = 0; j < pc.spec.n_inputs; ++j) os << "," << run.gain_trace(r, j);
      os << "\n";
    }
  }
  Json manifest;
  manifest["spec_hash"] = hash_of(config);
  manifest["seed"] = run.seed;
  manifest["m_train"] = run.m_train;
  manifest["m_test"] = run.m_test;
  manifest["train_error"] = run.train_error;
  manifest["test_error"] = run.test_error;
  manifest["wall_seconds"] = wall_seconds;
  manifest["initial_phases"] = run.initial_phases;
  write_json((fs::path(c.out_dir) / ("manifest" + suffix + ".json")).string(), manifest);
}

int cmd_train(const Common& c, const Json& config) {
  reject_unknown(config, {"schema", "perceptron", "dataset", "sim", "m_train", "m_test",
                          "noiseless_twin"},
                 "train");
  check_schema(config);
  const PerceptronSpec spec = spec_from_config(config.value("perceptron", Json::object()));
  const GaussianTask task = task_from_config(config.value("dataset", Json::object()), spec.n_inputs);
  const int m_train = config.value("m_train", 100);
  const int m_test = config.value("m_test", 100);
  SimConfig cfg = sim_from_config(config.value("sim", Json::object()), c);

  const PerceptronCircuit pc = build_perceptron(spec);
  const Dataset tr = sample_dataset(task, m_train, c.seed, 1);
  const Dataset te = sample_dataset(task, m_test, c.seed, 2);
  Eigen::MatrixXd X(m_train + m_test, task.dim());
  std::vector<int> y(m_train + m_test);
  X.topRows(m_train) = tr.X;
  X.bottomRows(m_test) = te.X;
  for (int i = 0; i < m_train; ++i) y[i] = tr.y[i];
  for (int i = 0; i < m_test; ++i) y[m_train + i] = te.y[i];

  const auto t0 = std::chrono::steady_clock::now();
  const ClassificationRun run = run_training(pc, X, y, m_train, cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_run_artifacts(c, config, run, pc, "", wall);
  std::cout << "train: test error " << run.test_error << " (train " << run.train_error << "), "
            << wall << " s\n";

  if (config.value("noiseless_twin", false)) {
    SimConfig twin = cfg;
    twin.noise = false;
    const ClassificationRun run2 = run_training(pc, X, y, m_train, twin);
    write_run_artifacts(c, config, run2, pc, "_noiseless", 0.0);
    std::cout << "noiseless twin: test error " << run2.test_error << "\n";
  }
  return 0;
}

int cmd_benchmark(const Common& c, const Json& config) {
  reject_unknown(config,
                 {"schema", "perceptron", "dataset", "sim", "m_train", "m_test", "separations",
                  "n_trials"},
                 "benchmark");
  check_schema(config);
  const PerceptronSpec spec = spec_from_config(config.value("perceptron", Json::object()));
  const int m_train = config.value("m_train", 100);
  const int m_test = config.value("m_test", 100);
  const int n_trials = config.value("n_trials", 20);
  std::vector<double> seps =
      config.value("separations", std::vector<double>{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0});
  SimConfig cfg = sim_from_config(config.value("sim", Json::object()), c);
  if (n_trials < 1) throw ConfigError("benchmark: n_trials >= 1");

  const PerceptronCircuit pc = build_perceptron(spec);
  auto os = open_csv(c, config, "benchmark.csv");
  os << "separation,p_perceptron,sd_perceptron,p_gda,sd_gda,p_optimal,n_trials\n";
  for (double sep : seps) {
    const GaussianTask task = GaussianTask::axis_separated(spec.n_inputs, sep);
    const auto rs = run_trials(pc, task, m_train, m_test, cfg, n_trials, c.workers);
    const ErrorEstimate pe = pool(rs, false, m_test);
    const ErrorEstimate ge = pool(rs, true, m_test);
    os << sep << "," << pe.p_err << "," << pe.stderr_ << "," << ge.p_err << "," << ge.stderr_
       << "," << optimal_error_rate(sep) << "," << n_trials << "\n";
    std::cout << "sep " << sep << ": perceptron " << pe.p_err << " gda " << ge.p_err
              << " optimal " << optimal_error_rate(sep) << "\n";
  }
  return 0;
}

int cmd_sweep_learning(const Common& c, const Json& config) {
  reject_unknown(config,
                 {"schema", "perceptron", "dataset", "sim", "m_train", "m_test", "dt_grid",
                  "alpha2_grid", "n_trials"},
                 "sweep-learning");
  check_schema(config);
  const Json pjson = config.value("perceptron", Json::object());
  const int m_train = config.value("m_train", 100);
  const int m_test = config.value("m_test", 100);
  const int n_trials = config.value("n_trials", 5);
  const std::vector<double> dt_grid = config.value("dt_grid", std::vector<double>{1.0, 2.0, 4.0});
  const std::vector<double> a2_grid =
      config.value("alpha2_grid", std::vector<double>{2.56, 10.24, 40.96});
  SimConfig cfg = sim_from_config(config.value("sim", Json::object()), c);

  auto os = open_csv(c, config, "sweep_learning.csv");
  os << "dt_sample,alpha2,n_fb,p_err,sd,n_trials\n";
  for (double dts : dt_grid) {
    for (double a2 : a2_grid) {
      Json pj = pjson;
      pj["dt_sample"] = dts;
      pj["alpha_fb"] = std::sqrt(a2);
      const PerceptronSpec spec = spec_from_config(pj);
      const PerceptronCircuit pc = build_perceptron(spec);
      const GaussianTask task = GaussianTask::axis_separated(spec.n_inputs, 2.0);
      const auto rs = run_trials(pc, task, m_train, m_test, cfg, n_trials, c.workers);
      const ErrorEstimate pe = pool(rs, false, m_test);
      os << dts << "," << a2 << "," << a2 * dts << "," << pe.p_err << "," << pe.stderr_ << ","
         << n_trials << "\n";
      std::cout << "dt " << dts << " |alpha|^2 " << a2 << " -> " << pe.p_err << "\n";
    }
  }
  return 0;
}

int cmd_elaborate(const Common& c, const Json& config, const std::string& netlist_path) {
  std::string path = netlist_path;
  if (path.empty()) {
    reject_unknown(config, {"schema", "netlist"}, "elaborate");
    check_schema(config);
    if (!config.contains("netlist")) throw ConfigError("elaborate: 'netlist' path required");
    path = config.at("netlist").get<std::string>();
  }
  const Netlist net = read_netlist(path);
  const Elaborated e = elaborate(net);
  fs::create_directories(c.out_dir);
  const fs::path out = fs::path(c.out_dir) / "model.json";
  write_json(out.string(), model_to_json(e.model));
  std::cout << "elaborated " << path << ": m=" << e.model.num_modes << " n=" << e.model.num_ports
            << " -> " << out.string() << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"semi-classical photonic circuit simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  Common common;
  app.add_option("--config", common.config_path, "experiment config (JSON)");
  app.add_option("--seed", common.seed, "base seed");
  app.add_option("--out", common.out_dir, "output directory");
  app.add_option("--workers", common.workers, "worker threads (0 = all cores)");
  app.add_flag("--no-noise", common.no_noise, "disable shot noise");

  std::string netlist_path;
  auto* sg = app.add_subcommand("sweep-gain", "amplifier gain vs bias sweep");
  auto* ss = app.add_subcommand("sweep-synapse", "synapse gain vs memory phase sweep");
  auto* tr = app.add_subcommand("train", "single train/test run");
  auto* bm = app.add_subcommand("benchmark", "error rate vs separation, against GDA and optimum");
  auto* sl = app.add_subcommand("sweep-learning", "error rate over (dt_sample, |alpha|^2)");
  auto* el = app.add_subcommand("elaborate", "flatten a netlist JSON to a model JSON");
  el->add_option("netlist", netlist_path, "netlist JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    Json config = Json::object();
    if (!common.config_path.empty()) config = read_json(common.config_path);
    if (sg->parsed()) return cmd_sweep_gain(common, config);
    if (ss->parsed()) return cmd_sweep_synapse(common, config);
    if (tr->parsed()) return cmd_train(common, config);
    if (bm->parsed()) return cmd_benchmark(common, config);
    if (sl->parsed()) return cmd_sweep_learning(common, config);
    if (el->parsed()) return cmd_elaborate(common, config, netlist_path);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config-error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config-error: " << e.what() << "\n";
    return 2;
  } catch (const DivergedError& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return 3;
  } catch (const SingularLoopError& e) {
    std::cerr << "elaboration-error: " << e.what() << "\n";
    return 4;
  } catch (const DanglingPortError& e) {
    std::cerr << "elaboration-error: " << e.what() << "\n";
    return 4;
  } catch (const NetlistError& e) {
    std::cerr << "elaboration-error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
