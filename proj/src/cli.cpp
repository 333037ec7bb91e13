#include "certcal/cli.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "certcal/errors.hpp"
#include "certcal/json_io.hpp"
#include "certcal/problem.hpp"
#include "certcal/report.hpp"
#include "certcal/sim.hpp"
#include "certcal/solver.hpp"

namespace certcal::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string constraint_set = "r+c+h";
  double tol_gap = 1e-9;
  double tol_feas = 1e-9;
  bool no_timing = false;
};

struct CalibrateArgs {
  std::string input;
  std::string poses_a;
  std::string poses_b;
  std::string output;
  std::string sdp_trace;
  bool strict = false;
};

struct SimulateArgs {
  std::string output_dir = ".";
  int n_motions = 100;
  double sigma_r = 0.0;
  double sigma_t = 0.0;
  double amplitude = 1.5;
  double radius = 10.0;
  std::uint64_t seed = 0;
  bool trajectories = false;
};

struct ExperimentArgs {
  std::string kind;
  std::string output_dir = ".";
  std::uint64_t seed = 0;
  int jobs = 1;
  int n_trials = 100;
  int n_motions = 100;
  int n_axes = 100;
  int n_inits = 64;
  int runs = 20;
  double sigma_r = 0.01;
  double sigma_t = 0.01;
  double amplitude = 1.5;
  std::vector<double> sigmas{0.01, 0.05, 0.1};
  std::vector<double> magnitudes = sim::default_rotation_magnitudes();
  std::vector<double> translation_magnitudes{0.1, 1.0, 10.0};
  bool rotation_only = false;
  std::vector<double> angles = sim::default_heatmap_angles();
  std::vector<double> distances{0.0, 1.0, 2.0, 5.0, 10.0};
  std::vector<int> n_list{10, 100, 1000};
};

struct CertifyArgs {
  std::string input;
  std::string theta;
  std::string output;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

void write_json(const json& j, const std::string& path, std::ostream& fallback) {
  if (path.empty()) {
    fallback << j.dump(2) << '\n';
    return;
  }
  open_out(path) << j.dump(2) << '\n';
}

Tolerances tolerances(const Common& c) {
  if (!(c.tol_gap > 0.0) || !(c.tol_feas > 0.0)) throw Error("tolerances must be positive");
  Tolerances t;
  t.tol_gap = c.tol_gap;
  t.tol_feas = c.tol_feas;
  return t;
}

MeasurementSet read_measurements(const CalibrateArgs& a) {
  if (!a.input.empty()) {
    if (!a.poses_a.empty() || !a.poses_b.empty()) throw Error("give either --input or --poses-a/--poses-b");
    auto in = open_in(a.input);
    return load_measurements(in);
  }
  if (a.poses_a.empty() || a.poses_b.empty()) throw Error("calibrate needs --input or both --poses-a and --poses-b");
  auto in_a = open_in(a.poses_a);
  auto in_b = open_in(a.poses_b);
  return relative_motions_from_trajectories(load_trajectory(in_a), load_trajectory(in_b));
}

int cmd_calibrate(const CalibrateArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  const MeasurementSet m = read_measurements(a);
  CalibrationOptions opts;
  opts.constraint_set = parse_constraint_kind(c.constraint_set);
  opts.tol = tolerances(c);
  opts.strict_observability = a.strict;
  if (!opts.strict_observability && !check_observability(m, opts.observability).observable) {
    err << "warning: measurements rotate about fewer than two distinct axes; the extrinsic is not observable\n";
  }
  const CalibrationResult r = calibrate(m, opts);
  write_json(calibration_report(r, opts.constraint_set, {!c.no_timing}), a.output, out);
  if (!a.sdp_trace.empty()) {
    auto trace = open_out(a.sdp_trace);
    write_sdp_trace_csv(trace, r.sdp_history);
  }
  return r.certificate.verdict == Verdict::CertifiedGlobal ? kCertified : kNotCertified;
}

sim::PathParams path_params(const SimulateArgs& a) {
  if (a.n_motions < 3) throw Error("--n-motions must be at least 3");
  if (a.sigma_r < 0.0 || a.sigma_t < 0.0) throw Error("noise standard deviations must be non-negative");
  if (a.amplitude < 0.0) throw Error("--amplitude must be non-negative");
  if (!(a.radius > 0.0)) throw Error("--radius must be positive");
  sim::PathParams p;
  p.n_steps = a.n_motions;
  p.amplitude = a.amplitude;
  p.radius = a.radius;
  p.seed = sim::trial_seed(a.seed, 0);
  return p;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const sim::PathParams params = path_params(a);
  const sim::TerrainPath path = sim::generate_path(params);
  const Extrinsic theta = sim::random_extrinsic(sim::trial_seed(a.seed, 1));
  const auto [poses_a, poses_b] = sim::sensor_trajectories(path, theta);
  const sim::NoiseModel noise{a.sigma_r, a.sigma_t, sim::trial_seed(a.seed, 2)};
  const MeasurementSet m = sim::corrupt(relative_motions_from_trajectories(poses_a, poses_b), noise);
  const ObservabilityReport obs = check_observability(m);

  const fs::path dir(a.output_dir);
  fs::create_directories(dir);
  {
    auto f = open_out(dir / "measurements.jsonl");
    write_measurements(f, m);
  }
  {
    auto f = open_out(dir / "ground_truth.json");
    f << ground_truth_report(theta, params, noise, obs).dump(2) << '\n';
  }
  {
    auto f = open_out(dir / "path.csv");
    write_path_csv(f, path);
  }
  if (a.trajectories) {
    auto fa = open_out(dir / "poses_a.jsonl");
    write_trajectory(fa, poses_a);
    auto fb = open_out(dir / "poses_b.jsonl");
    write_trajectory(fb, poses_b);
  }
  out << "wrote " << m.size() << " motions to " << (dir / "measurements.jsonl").string()
      << (obs.observable ? "" : " (not observable)") << '\n';
  return kCertified;
}

template <typename T>
void require_nonempty(const std::vector<T>& v, const char* flag) {
  if (v.empty()) throw Error(std::string(flag) + " must list at least one value");
}

int cmd_experiment(const ExperimentArgs& a, const Common& c, std::ostream& out) {
  if (a.jobs < 1) throw Error("--jobs must be at least 1");
  const ReportOptions ropts{!c.no_timing};
  const fs::path dir(a.output_dir);
  fs::create_directories(dir);
  sim::PathParams path;
  path.amplitude = a.amplitude;

  json summary;
  if (a.kind == "ablation") {
    require_nonempty(a.magnitudes, "--magnitudes");
    sim::AblationConfig cfg;
    cfg.rotation_magnitudes = a.magnitudes;
    cfg.translation_magnitudes = a.rotation_only ? std::vector<double>{} : a.translation_magnitudes;
    cfg.n_axes = a.n_axes;
    cfg.tol = tolerances(c);
    cfg.jobs = a.jobs;
    const sim::AblationReport rep = sim::ablation_experiment(cfg);
    auto csv = open_out(dir / "ablation.csv");
    write_ablation_csv(csv, rep);
    summary = ablation_summary(rep);
  } else if (a.kind == "noise-sweep") {
    require_nonempty(a.sigmas, "--sigmas");
    sim::SweepConfig cfg;
    cfg.sigmas.clear();
    for (double sr : a.sigmas) {
      for (double st : a.sigmas) cfg.sigmas.emplace_back(sr, st);
    }
    cfg.n_trials = a.n_trials;
    cfg.n_motions = a.n_motions;
    cfg.seed = a.seed;
    cfg.constraint_set = parse_constraint_kind(c.constraint_set);
    cfg.path = path;
    cfg.jobs = a.jobs;
    const sim::SweepReport rep = sim::noise_sweep(cfg);
    auto csv = open_out(dir / "noise_sweep.csv");
    write_trials_csv(csv, rep.trials, ropts);
    summary = sweep_summary(rep);
  } else if (a.kind == "heatmap") {
    require_nonempty(a.angles, "--angles");
    require_nonempty(a.distances, "--distances");
    sim::HeatmapConfig cfg;
    cfg.angles = a.angles;
    cfg.distances = a.distances;
    cfg.n_inits = a.n_inits;
    cfg.n_motions = a.n_motions;
    cfg.sigma_r = a.sigma_r;
    cfg.sigma_t = a.sigma_t;
    cfg.seed = a.seed;
    cfg.path = path;
    cfg.jobs = a.jobs;
    const sim::HeatmapReport rep = sim::init_heatmap(cfg);
    auto csv = open_out(dir / "heatmap.csv");
    write_heatmap_csv(csv, rep);
    summary = heatmap_summary(rep);
  } else if (a.kind == "runtime") {
    require_nonempty(a.n_list, "--n-list");
    sim::RuntimeConfig cfg;
    cfg.n_list = a.n_list;
    cfg.runs = a.runs;
    cfg.seed = a.seed;
    cfg.sigma_r = a.sigma_r;
    cfg.sigma_t = a.sigma_t;
    cfg.path = path;
    const sim::RuntimeReport rep = sim::runtime_bench(cfg);
    auto csv = open_out(dir / "runtime.csv");
    write_runtime_csv(csv, rep, ropts);
    summary = runtime_summary(rep, ropts);
  } else {
    throw Error("unknown experiment '" + a.kind + "'");
  }
  summary["seed"] = a.seed;
  const fs::path summary_path = dir / (a.kind + "_summary.json");
  open_out(summary_path) << summary.dump(2) << '\n';
  out << "wrote " << summary_path.string() << '\n';
  return kCertified;
}

Extrinsic read_theta(const std::string& path) {
  auto in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("'" + path + "' is not valid JSON: " + e.what());
  }
  const json& tf = j.contains("theta") ? j.at("theta") : j;
  return transform_from_json(tf);
}

int cmd_certify(const CertifyArgs& a, const Common& c, std::ostream& out) {
  auto in = open_in(a.input);
  const MeasurementSet m = load_measurements(in);
  const Extrinsic theta = read_theta(a.theta);
  CalibrationOptions opts;
  opts.constraint_set = parse_constraint_kind(c.constraint_set);
  opts.tol = tolerances(c);
  const CandidateCheck check = certify_candidate(m, theta, opts);
  write_json(candidate_report(check, opts.constraint_set), a.output, out);
  return check.globally_optimal ? kCertified : kNotCertified;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--constraint-set", c.constraint_set, "Constraint set: r, r+c, r+h or r+c+h")
      ->capture_default_str();
  cmd->add_option("--tol-gap", c.tol_gap, "Interior-point duality gap tolerance")->capture_default_str();
  cmd->add_option("--tol-feas", c.tol_feas, "Interior-point feasibility tolerance")->capture_default_str();
  cmd->add_flag("--no-timing", c.no_timing, "Write 0 for wall-clock fields so outputs compare byte for byte");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certifiably globally optimal extrinsic calibration from paired egomotion"};
  app.require_subcommand(1);

  Common common;
  CalibrateArgs cal;
  SimulateArgs simu;
  ExperimentArgs exp;
  CertifyArgs cert;

  auto* c_cal = app.add_subcommand("calibrate", "Estimate the extrinsic and certify global optimality");
  c_cal->add_option("--input", cal.input, "Measurement JSON-lines file");
  c_cal->add_option("--poses-a", cal.poses_a, "Sensor a trajectory (JSON lines), used with --poses-b");
  c_cal->add_option("--poses-b", cal.poses_b, "Sensor b trajectory (JSON lines)");
  c_cal->add_option("--output", cal.output, "Report path (default: stdout)");
  c_cal->add_option("--sdp-trace", cal.sdp_trace, "Write interior-point iterates as CSV");
  c_cal->add_flag("--strict-observability", cal.strict, "Fail when fewer than two rotation axes are present");
  add_common(c_cal, common);

  auto* c_sim = app.add_subcommand("simulate", "Generate a terrain path and paired egomotion");
  c_sim->add_option("--output-dir,--output", simu.output_dir, "Directory for the generated files")
      ->capture_default_str();
  c_sim->add_option("--seed", simu.seed, "Master seed")->required();
  c_sim->add_option("--n-motions", simu.n_motions, "Relative motions")->capture_default_str();
  c_sim->add_option("--sigma-r", simu.sigma_r, "Euler-angle noise std dev (rad)")->capture_default_str();
  c_sim->add_option("--sigma-t", simu.sigma_t, "Translation noise std dev (m)")->capture_default_str();
  c_sim->add_option("--amplitude", simu.amplitude, "Terrain sinusoid amplitude bound (m)")->capture_default_str();
  c_sim->add_option("--radius", simu.radius, "Circle radius (m)")->capture_default_str();
  c_sim->add_flag("--trajectories", simu.trajectories, "Also write poses_a.jsonl and poses_b.jsonl");

  auto* c_exp = app.add_subcommand("experiment", "Run an evaluation protocol and write CSV plus a JSON summary");
  c_exp->add_option("kind", exp.kind, "ablation, noise-sweep, heatmap or runtime")
      ->required()
      ->check(CLI::IsMember({"ablation", "noise-sweep", "heatmap", "runtime"}));
  c_exp->add_option("--output-dir,--output", exp.output_dir, "Directory for CSV and summary")
      ->capture_default_str();
  c_exp->add_option("--seed", exp.seed, "Master seed")->required();
  c_exp->add_option("--jobs", exp.jobs, "Worker threads; results do not depend on it")->capture_default_str();
  c_exp->add_option("--n-trials", exp.n_trials, "Trials per noise cell")->capture_default_str();
  c_exp->add_option("--n-motions", exp.n_motions, "Relative motions per trial")->capture_default_str();
  c_exp->add_option("--n-axes", exp.n_axes, "Perturbation axes per ablation magnitude")->capture_default_str();
  c_exp->add_option("--n-inits", exp.n_inits, "Local-solver initializations per heatmap cell")
      ->capture_default_str();
  c_exp->add_option("--runs", exp.runs, "Runs per n in the runtime experiment")->capture_default_str();
  c_exp->add_option("--sigma-r", exp.sigma_r, "Rotation noise for heatmap/runtime (rad)")->capture_default_str();
  c_exp->add_option("--sigma-t", exp.sigma_t, "Translation noise for heatmap/runtime (m)")->capture_default_str();
  c_exp->add_option("--amplitude", exp.amplitude, "Terrain sinusoid amplitude bound (m)")->capture_default_str();
  c_exp->add_option("--sigmas", exp.sigmas, "Noise-sweep grid, applied to both sigma_r and sigma_t")
      ->delimiter(',');
  c_exp->add_option("--magnitudes", exp.magnitudes, "Ablation rotation magnitudes (rad)")->delimiter(',');
  c_exp->add_option("--translation-magnitudes", exp.translation_magnitudes, "Ablation translation magnitudes (m)")
      ->delimiter(',');
  c_exp->add_flag("--rotation-only", exp.rotation_only, "Ablation: skip the translation-perturbation variant");
  c_exp->add_option("--angles", exp.angles, "Heatmap initial rotation errors (rad)")->delimiter(',');
  c_exp->add_option("--distances", exp.distances, "Heatmap initial translation errors (m)")->delimiter(',');
  c_exp->add_option("--n-list", exp.n_list, "Runtime experiment motion counts")->delimiter(',');
  add_common(c_exp, common);

  auto* c_cert = app.add_subcommand("certify", "Check whether a candidate extrinsic is globally optimal");
  c_cert->add_option("--input", cert.input, "Measurement JSON-lines file")->required();
  c_cert->add_option("--theta", cert.theta, "Candidate: a calibrate report or a {R, t} object")->required();
  c_cert->add_option("--output", cert.output, "Report path (default: stdout)");
  add_common(c_cert, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, eo;
    const int code = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return code == 0 ? kCertified : kError;
  }

  try {
    if (c_cal->parsed()) return cmd_calibrate(cal, common, out, err);
    if (c_sim->parsed()) return cmd_simulate(simu, out);
    if (c_exp->parsed()) return cmd_experiment(exp, common, out);
    if (c_cert->parsed()) return cmd_certify(cert, common, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

}  // namespace certcal::cli
