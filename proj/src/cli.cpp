#include "coop2/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "coop2/certify.hpp"
#include "coop2/expr.hpp"
#include "coop2/models.hpp"
#include "coop2/report.hpp"
#include "coop2/sim.hpp"

namespace coop2 {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRefuted = 2;
constexpr int kExitInconclusive = 3;

struct ModelArgs {
  std::string builtin;
  std::string file;
  GoodwinParams goodwin;
  FieldNoyesParams fn;
  double m_value = 10.0;
};

void add_model_options(CLI::App* app, ModelArgs& a) {
  app->add_option("--model", a.builtin, "built-in model: goodwin | field-noyes")
      ->check(CLI::IsMember({"goodwin", "field-noyes"}));
  app->add_option("--model-file", a.file, "JSON model description");
  app->add_option("--alpha", a.goodwin.alpha, "Goodwin alpha")->capture_default_str();
  app->add_option("--beta", a.goodwin.beta, "Goodwin beta")->capture_default_str();
  app->add_option("--gamma", a.goodwin.gamma, "Goodwin gamma")->capture_default_str();
  app->add_option("--m", a.m_value, "Goodwin Hill exponent (positive integer)")
      ->capture_default_str();
  app->add_option("--s", a.fn.s, "Field-Noyes s")->capture_default_str();
  app->add_option("--q", a.fn.q, "Field-Noyes q")->capture_default_str();
  app->add_option("--f", a.fn.f, "Field-Noyes f")->capture_default_str();
  app->add_option("--w", a.fn.w, "Field-Noyes w")->capture_default_str();
}

int to_int_m(double m) {
  if (!(m >= 1.0) || std::floor(m) != m) throw std::invalid_argument("--m must be a positive integer");
  return static_cast<int>(m);
}

SystemModel build_model(ModelArgs a) {
  if (a.builtin.empty() == a.file.empty())
    throw std::invalid_argument("give exactly one of --model or --model-file");
  if (!a.file.empty()) {
    std::ifstream in(a.file);
    if (!in) throw std::invalid_argument("cannot open model file '" + a.file + "'");
    nlohmann::json spec;
    try {
      in >> spec;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("model file is not valid JSON: ") + e.what());
    }
    return model_from_json(spec);
  }
  if (a.builtin == "goodwin") {
    a.goodwin.m = to_int_m(a.m_value);
    return goodwin(a.goodwin);
  }
  return field_noyes(a.fn);
}

Vec3 parse_vec3(const std::vector<double>& v, const char* what) {
  if (v.size() != 3) throw std::invalid_argument(std::string(what) + " needs exactly 3 values");
  return {v[0], v[1], v[2]};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Writes to the named file, or to `fallback` when the name is empty or "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      os_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw std::invalid_argument("cannot open output file '" + path + "'");
      os_ = file_.get();
    }
  }
  std::ostream& stream() { return *os_; }
  bool is_file() const { return file_ != nullptr; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

int exit_code(Conclusion c) {
  switch (c) {
    case Conclusion::Certified: return kExitOk;
    case Conclusion::Refuted: return kExitRefuted;
    case Conclusion::Inconclusive: return kExitInconclusive;
  }
  return kExitInconclusive;
}

struct CertifyArgs {
  std::size_t grid_n = 12;
  std::size_t invariant_grid = 20;
  double eta_fraction = 0.5;
  std::size_t verify = 0;
  double horizon = 500.0;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_certify(const SystemModel& model, const CertifyArgs& a, std::ostream& out,
                std::ostream& err) {
  nlohmann::json doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["model"] = model.name;
  doc["params"] = params_json(model);
  nlohmann::json timing;

  auto t0 = std::chrono::steady_clock::now();
  const CertificationReport rep = check_theorem(model, {a.grid_n, 0});
  timing["certification_s"] = seconds_since(t0);
  doc["certification"] = to_json(rep);
  doc["invariant_set"] = nullptr;

  if (rep.conclusion == Conclusion::Certified) {
    t0 = std::chrono::steady_clock::now();
    try {
      const InvariantSetCert cert = construct_invariant_set(model, rep, a.invariant_grid, a.eta_fraction);
      doc["invariant_set"] = to_json(cert);
      if (a.verify > 0) {
        const BoxPartition part = partition(model.box, rep.equilibrium, model.signature);
        InvarianceOptions vo;
        vo.horizon = a.horizon;
        const InvarianceReport inv = verify_invariance(model, part, cert, a.verify, a.seed, vo);
        doc["invariant_set"]["verification"] = to_json(inv);
        doc["invariant_set"]["verification"]["seed"] = a.seed;
        doc["invariant_set"]["verification"]["horizon"] = a.horizon;
      }
    } catch (const std::runtime_error& e) {
      doc["invariant_set"] = {{"error", e.what()}};
    }
    timing["invariant_set_s"] = seconds_since(t0);
  }
  doc["timing"] = timing;

  Sink sink(a.out, out);
  sink.stream() << doc.dump(2) << '\n';
  for (const auto& note : rep.notes) err << "note: " << note << '\n';
  err << "conclusion: " << to_string(rep.conclusion) << " (" << rep.reason << ")\n";
  return exit_code(rep.conclusion);
}

struct SimulateArgs {
  std::vector<double> x0;
  double t_end = 500.0;
  double rtol = 1e-8;
  double atol = 1e-10;
  std::size_t uniform = 0;
  bool detect = false;
  std::string out;
  std::string orbit_out;
};

Vec3 start_state(const SystemModel& model, const std::vector<double>& x0) {
  if (!x0.empty()) return parse_vec3(x0, "--x0");
  if (model.default_x0) return *model.default_x0;
  throw std::invalid_argument("model has no default initial state; pass --x0");
}

Vec3 box_atol_scale(const SystemModel& model) {
  const Vec3 w = model.box.width();
  return {std::max(1.0, w[0]), std::max(1.0, w[1]), std::max(1.0, w[2])};
}

int cmd_simulate(const SystemModel& model, const SimulateArgs& a, std::ostream& out,
                 std::ostream& err) {
  if (!(a.t_end >= 0.0)) throw std::invalid_argument("--t-end must be non-negative");
  if (!(a.rtol > 0.0) || !(a.atol > 0.0)) throw std::invalid_argument("tolerances must be positive");
  const Vec3 x0 = start_state(model, a.x0);
  IntegrateOptions io;
  io.rtol = a.rtol;
  io.atol = a.atol;
  io.atol_scale = box_atol_scale(model);
  io.uniform_samples = a.uniform;
  const Trajectory traj = integrate(model, x0, a.t_end, io);
  Sink sink(a.out, out);
  write_csv(sink.stream(), traj);
  if (traj.stats.left_box)
    err << "warning: trajectory left the model box at t = " << format_double(traj.stats.exit_time)
        << "; output clipped there\n";

  if (a.detect && a.t_end > 0.0) {
    OrbitOptions oo;
    oo.horizon = a.t_end;
    oo.rtol = a.rtol;
    oo.atol = a.atol;
    oo.atol_scale = io.atol_scale;
    const PeriodEstimate est = detect_orbit(model, x0, oo);
    nlohmann::json j = to_json(est);
    j["schema_version"] = kReportSchemaVersion;
    if (!a.orbit_out.empty()) {
      Sink orbit(a.orbit_out, out);
      orbit.stream() << j.dump(2) << '\n';
    } else {
      // Keep CSV output clean: the estimate goes to whichever stream the CSV
      // does not use.
      (sink.is_file() ? out : err) << j.dump(2) << '\n';
    }
  }
  return kExitOk;
}

struct SweepArgs {
  std::string param;
  double from = 0.0;
  double to = 0.0;
  std::size_t steps = 0;
  std::size_t grid_n = 12;
  bool detect = false;
  double horizon = 2000.0;
  std::vector<double> x0;
  std::string out;
};

int cmd_sweep(const ModelArgs& base, const SweepArgs& a, std::ostream& out, std::ostream& err) {
  if (a.steps == 0) throw std::invalid_argument("--steps must be at least 1");
  if (a.param.empty()) throw std::invalid_argument("--param is required");
  if (!base.file.empty()) throw std::invalid_argument("sweep supports built-in models only");
  Sink sink(a.out, out);
  std::ostream& os = sink.stream();
  os << a.param << ",certified,conclusion,period\n";
  for (std::size_t i = 0; i < a.steps; ++i) {
    const double v = a.steps == 1 ? a.from
                                  : a.from + (a.to - a.from) * static_cast<double>(i) /
                                                 static_cast<double>(a.steps - 1);
    ModelArgs m = base;
    if (base.builtin == "goodwin") {
      if (a.param == "alpha") m.goodwin.alpha = v;
      else if (a.param == "beta") m.goodwin.beta = v;
      else if (a.param == "gamma") m.goodwin.gamma = v;
      else if (a.param == "m") m.m_value = v;
      else throw std::invalid_argument("goodwin has no parameter '" + a.param + "'");
    } else {
      if (a.param == "s") m.fn.s = v;
      else if (a.param == "q") m.fn.q = v;
      else if (a.param == "f") m.fn.f = v;
      else if (a.param == "w") m.fn.w = v;
      else throw std::invalid_argument("field-noyes has no parameter '" + a.param + "'");
    }
    const SystemModel model = build_model(m);
    const CertificationReport rep = check_theorem(model, {a.grid_n, 0});
    std::string period;
    if (a.detect) {
      OrbitOptions oo;
      oo.horizon = a.horizon;
      oo.atol_scale = box_atol_scale(model);
      try {
        const PeriodEstimate est = detect_orbit(model, start_state(model, a.x0), oo);
        if (est.converged) period = format_double(est.period);
      } catch (const StiffnessError& e) {
        err << "warning: " << a.param << "=" << format_double(v) << ": " << e.what() << '\n';
      }
    }
    os << format_double(v) << ',' << (rep.conclusion == Conclusion::Certified ? 1 : 0) << ','
       << to_string(rep.conclusion) << ',' << period << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"coop2: certify and simulate 3D strongly 2-cooperative systems"};
  app.require_subcommand(1);

  ModelArgs certify_model, simulate_model, sweep_model;
  CertifyArgs ca;
  SimulateArgs sa;
  SweepArgs wa;

  auto* certify = app.add_subcommand("certify", "check the convergence theorem's hypotheses");
  add_model_options(certify, certify_model);
  certify->add_option("--grid-n", ca.grid_n, "interior grid size per axis for pattern checks")
      ->capture_default_str();
  certify->add_option("--invariant-grid", ca.invariant_grid, "grid size for the invariant set")
      ->capture_default_str();
  certify->add_option("--eta-fraction", ca.eta_fraction, "eta as a fraction of eta*")
      ->capture_default_str();
  certify->add_option("--verify", ca.verify, "number of random trajectories to check in H_eta")
      ->capture_default_str();
  certify->add_option("--horizon", ca.horizon, "horizon for --verify")->capture_default_str();
  certify->add_option("--seed", ca.seed, "seed for --verify")->capture_default_str();
  certify->add_option("--out", ca.out, "JSON report path (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "integrate and write a CSV trajectory");
  add_model_options(simulate, simulate_model);
  simulate->add_option("--x0", sa.x0, "initial state x1,x2,x3")->delimiter(',');
  simulate->add_option("--t-end", sa.t_end, "final time")->capture_default_str();
  simulate->add_option("--rtol", sa.rtol)->capture_default_str();
  simulate->add_option("--atol", sa.atol, "absolute tolerance (scaled per component by box width)")
      ->capture_default_str();
  simulate->add_option("--uniform", sa.uniform, "resample to N uniform times (0: every step)")
      ->capture_default_str();
  simulate->add_flag("--detect-orbit", sa.detect, "also estimate the orbit period");
  simulate->add_option("--out", sa.out, "CSV path (default stdout)");
  simulate->add_option("--orbit-out", sa.orbit_out, "JSON path for the period estimate");

  auto* sweep = app.add_subcommand("sweep", "certify over a range of one parameter");
  add_model_options(sweep, sweep_model);
  sweep->add_option("--param", wa.param, "parameter to sweep")->required();
  sweep->add_option("--from", wa.from)->required();
  sweep->add_option("--to", wa.to)->required();
  sweep->add_option("--steps", wa.steps, "number of parameter values")->required();
  sweep->add_option("--grid-n", wa.grid_n)->capture_default_str();
  sweep->add_flag("--detect-orbit", wa.detect, "add the detected period column");
  sweep->add_option("--horizon", wa.horizon, "orbit detection horizon")->capture_default_str();
  sweep->add_option("--x0", wa.x0, "initial state for orbit detection")->delimiter(',');
  sweep->add_option("--out", wa.out, "CSV path (default stdout)");
  // Every command is deterministic; the seed only matters for --verify.
  sweep->add_option("--seed", ca.seed, "accepted for uniformity; sweeps draw no random numbers");
  simulate->add_option("--seed", ca.seed, "accepted for uniformity; simulation draws no random numbers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (certify->parsed()) return cmd_certify(build_model(certify_model), ca, out, err);
    if (simulate->parsed()) return cmd_simulate(build_model(simulate_model), sa, out, err);
    if (sweep->parsed()) return cmd_sweep(sweep_model, wa, out, err);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed model description: " << e.what() << '\n';
    return kExitConfig;
  } catch (const StiffnessError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInconclusive;
  }
  return kExitConfig;
}

}  // namespace coop2
