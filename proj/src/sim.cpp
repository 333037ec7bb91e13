#include "certcal/sim.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include <Eigen/Geometry>

#include "certcal/errors.hpp"

namespace certcal::sim {

namespace {

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Results must be
// written to per-index slots so the output does not depend on scheduling.
template <typename Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
  jobs = std::clamp(jobs, 1, std::max(count, 1));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (int j = 0; j < jobs; ++j) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Vec3 tangent(const TerrainPath& path, double angle) {
  const double r = path.params.radius;
  const double x = r * std::cos(angle);
  const double y = r * std::sin(angle);
  const double dx = -r * std::sin(angle);
  const double dy = r * std::cos(angle);
  double dz = 0.0;
  for (const auto& s : path.terrain) {
    const double c = s.amplitude * std::cos(s.fx * x + s.fy * y + s.phase);
    dz += c * (s.fx * dx + s.fy * dy);
  }
  return Vec3(dx, dy, dz).normalized();
}

double translation_error(const Extrinsic& a, const Extrinsic& b) { return (a.translation - b.translation).norm(); }

}  // namespace

double TerrainPath::height(double x, double y) const {
  double z = 0.0;
  for (const auto& s : terrain) z += s.amplitude * std::sin(s.fx * x + s.fy * y + s.phase);
  return z;
}

TerrainPath generate_path(const PathParams& params) {
  if (params.n_steps < 2) throw Error("generate_path: n_steps must be at least 2");
  if (!(params.radius > 0.0)) throw Error("generate_path: radius must be positive");

  TerrainPath path;
  path.params = params;
  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int j = 0; j < params.n_sinusoids; ++j) {
    Sinusoid s;
    s.amplitude = params.amplitude * (0.5 + 0.5 * unit(rng));
    const double freq = params.min_frequency + (params.max_frequency - params.min_frequency) * unit(rng);
    const double dir = 2.0 * std::numbers::pi * unit(rng);
    s.fx = freq * std::cos(dir);
    s.fy = freq * std::sin(dir);
    s.phase = 2.0 * std::numbers::pi * unit(rng);
    if (s.amplitude > 0.0) path.terrain.push_back(s);
  }
  const double start = 2.0 * std::numbers::pi * unit(rng);

  const Vec3 up = Vec3::UnitZ();
  for (int k = 0; k <= params.n_steps; ++k) {
    const double angle = start + 2.0 * std::numbers::pi * k / params.n_steps;
    const double x = params.radius * std::cos(angle);
    const double y = params.radius * std::sin(angle);
    const Vec3 forward = tangent(path, angle);
    const Vec3 left = up.cross(forward).normalized();
    const Vec3 vehicle_up = forward.cross(left);
    Mat3 r;
    r.col(0) = forward;
    r.col(1) = left;
    r.col(2) = vehicle_up;
    path.waypoints.push_back({project_to_so3(r), Vec3(x, y, path.height(x, y))});
  }
  return path;
}

std::pair<std::vector<Transform>, std::vector<Transform>> sensor_trajectories(const TerrainPath& path,
                                                                              const Extrinsic& theta) {
  std::vector<Transform> poses_a;
  std::vector<Transform> poses_b = path.waypoints;
  poses_a.reserve(poses_b.size());
  for (const auto& pb : poses_b) poses_a.push_back(compose(pb, theta));
  return {poses_a, poses_b};
}

MeasurementSet corrupt(const MeasurementSet& m, const NoiseModel& noise) {
  if (noise.sigma_r < 0.0 || noise.sigma_t < 0.0) throw Error("corrupt: noise levels must be non-negative");
  if (noise.sigma_r == 0.0 && noise.sigma_t == 0.0) return m;

  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  auto perturb = [&](Transform& tf) {
    const double ax = noise.sigma_r * n01(rng);
    const double ay = noise.sigma_r * n01(rng);
    const double az = noise.sigma_r * n01(rng);
    const Vec3 dt(noise.sigma_t * n01(rng), noise.sigma_t * n01(rng), noise.sigma_t * n01(rng));
    if (noise.sigma_r > 0.0) tf.rotation = project_to_so3((tf.rotation * rotation_from_euler_xyz(ax, ay, az)).matrix());
    tf.translation += dt;
  };
  MeasurementSet out = m;
  for (auto& p : out.pairs) {
    perturb(p.v_a);
    perturb(p.v_b);
  }
  return out;
}

std::vector<Vec3> fibonacci_sphere(int count) {
  std::vector<Vec3> pts;
  pts.reserve(count);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / count;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * i;
    pts.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return pts;
}

Extrinsic default_ablation_theta() {
  return {rotation_from_axis_angle({Vec3(1.0, 1.0, 1.0).normalized(), std::numbers::pi / 4}), Vec3(0.1, 0.2, 0.3)};
}

MeasurementSet two_motion_instance(const Extrinsic& theta) {
  const double half_pi = std::numbers::pi / 2;
  const Transform vb1{rotation_from_axis_angle({Vec3::UnitX(), half_pi}), Vec3::UnitX()};
  const Transform vb2{rotation_from_axis_angle({Vec3::UnitY(), half_pi}), Vec3::UnitY()};
  const Transform theta_inv = invert(theta);
  MeasurementSet m;
  for (const auto& vb : {vb1, vb2}) {
    RelativeMotionPair p;
    p.v_b = vb;
    p.v_a = compose(compose(theta_inv, vb), theta);
    m.pairs.push_back(p);
  }
  return m;
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Extrinsic random_extrinsic(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Extrinsic theta;
  theta.rotation = random_rotation(rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  theta.translation = Vec3(u(rng), u(rng), u(rng));
  return theta;
}

Quantiles quantiles(std::vector<double> v) {
  Quantiles q;
  if (v.empty()) return q;
  std::sort(v.begin(), v.end());
  auto at = [&](double p) {
    const double pos = p * (v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - lo) * (v[hi] - v[lo]);
  };
  q.min = v.front();
  q.max = v.back();
  q.q1 = at(0.25);
  q.median = at(0.5);
  q.q3 = at(0.75);
  double sum = 0.0;
  for (double x : v) sum += x;
  q.mean = sum / v.size();
  return q;
}

// --------------------------------------------------------------------------

const AblationCell* AblationReport::find(const std::string& variant, ConstraintKind set, double rot_mag,
                                         double trans_mag) const {
  for (const auto& c : cells) {
    if (c.variant == variant && c.constraint_set == set && std::abs(c.rotation_magnitude - rot_mag) < 1e-12 &&
        std::abs(c.translation_magnitude - trans_mag) < 1e-12) {
      return &c;
    }
  }
  return nullptr;
}

std::vector<double> default_rotation_magnitudes() {
  std::vector<double> out{0.0};
  for (int k = 1; k <= 8; ++k) out.push_back(k * std::numbers::pi / 16.0);
  return out;
}

AblationReport ablation_experiment(const AblationConfig& cfg) {
  AblationReport report;
  report.theta = cfg.theta;
  const MeasurementSet base = two_motion_instance(cfg.theta);

  struct Job {
    std::string variant;
    ConstraintKind set;
    double rot_mag;
    double trans_mag;
    int trial;
    Vec3 axis;
    Vec3 direction;
  };
  std::vector<Job> jobs;
  const auto axes = fibonacci_sphere(cfg.n_axes);
  for (ConstraintKind set : cfg.constraint_sets) {
    for (double mag : cfg.rotation_magnitudes) {
      for (int i = 0; i < cfg.n_axes; ++i) jobs.push_back({"rotation", set, mag, 0.0, i, axes[i], Vec3::Zero()});
    }
  }
  const auto rot_axes = fibonacci_sphere(cfg.n_translation_rotation_axes);
  const auto dirs = fibonacci_sphere(cfg.n_translation_directions);
  for (ConstraintKind set : cfg.constraint_sets) {
    for (double tmag : cfg.translation_magnitudes) {
      int trial = 0;
      for (const auto& ax : rot_axes) {
        for (const auto& dir : dirs) {
          jobs.push_back({"translation", set, cfg.translation_rotation_magnitude, tmag, trial++, ax, dir});
        }
      }
    }
  }

  report.trials.resize(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), cfg.jobs, [&](int idx) {
    const Job& job = jobs[idx];
    MeasurementSet m = base;
    auto& vb = m.pairs[0].v_b;
    vb.rotation = project_to_so3((rotation_from_axis_angle({job.axis, job.rot_mag}) * vb.rotation).matrix());
    vb.translation += job.trans_mag * job.direction;

    CalibrationOptions opts;
    opts.constraint_set = job.set;
    opts.tol = cfg.tol;
    AblationTrial t;
    t.variant = job.variant;
    t.constraint_set = job.set;
    t.rotation_magnitude = job.rot_mag;
    t.translation_magnitude = job.trans_mag;
    t.trial = job.trial;
    try {
      const CalibrationResult r = calibrate(m, opts);
      t.certified = r.certificate.verdict == Verdict::CertifiedGlobal;
      t.gap = r.certificate.gap;
      t.rotation_error = rotation_distance_frobenius(r.extrinsic.rotation, cfg.theta.rotation);
    } catch (const Error&) {
      t.certified = false;
      t.gap = std::numeric_limits<double>::quiet_NaN();
    }
    report.trials[idx] = t;
  });

  for (const auto& t : report.trials) {
    auto it = std::find_if(report.cells.begin(), report.cells.end(), [&](const AblationCell& c) {
      return c.variant == t.variant && c.constraint_set == t.constraint_set &&
             c.rotation_magnitude == t.rotation_magnitude && c.translation_magnitude == t.translation_magnitude;
    });
    if (it == report.cells.end()) {
      report.cells.push_back({t.variant, t.constraint_set, t.rotation_magnitude, t.translation_magnitude, 0, 0});
      it = report.cells.end() - 1;
    }
    ++it->trials;
    if (t.certified) ++it->certified;
  }
  return report;
}

// --------------------------------------------------------------------------

namespace {

struct TrialData {
  MeasurementSet m;
  Extrinsic theta;
};

TrialData make_trial(const PathParams& base, int n_motions, double sigma_r, double sigma_t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PathParams params = base;
  params.n_steps = n_motions;
  params.seed = rng();
  const Extrinsic theta = random_extrinsic(rng());
  const TerrainPath path = generate_path(params);
  const auto [pa, pb] = sensor_trajectories(path, theta);
  const MeasurementSet clean = relative_motions_from_trajectories(pa, pb);
  return {corrupt(clean, {sigma_r, sigma_t, rng()}), theta};
}

TrialRecord record(const CalibrationResult& r, const TrialData& data, std::uint64_t seed, double sr, double st,
                   const char* method, ConstraintKind set) {
  TrialRecord rec;
  rec.seed = seed;
  rec.sigma_r = sr;
  rec.sigma_t = st;
  rec.n = static_cast<int>(data.m.size());
  rec.method = method;
  rec.constraint_set = set;
  rec.rotation_error = rotation_distance_frobenius(r.extrinsic.rotation, data.theta.rotation);
  rec.translation_error = translation_error(r.extrinsic, data.theta);
  rec.cost = r.cost;
  rec.certified = r.certificate.verdict == Verdict::CertifiedGlobal;
  rec.wall_time = r.solve_stats.wall_time_seconds;
  return rec;
}

}  // namespace

SweepReport noise_sweep(const SweepConfig& cfg) {
  SweepReport report;
  const int per_cell = cfg.n_trials;
  const int total = static_cast<int>(cfg.sigmas.size()) * per_cell;
  report.trials.resize(2 * static_cast<std::size_t>(total));

  parallel_for(total, cfg.jobs, [&](int idx) {
    const auto [sr, st] = cfg.sigmas[idx / per_cell];
    const std::uint64_t seed = trial_seed(cfg.seed, static_cast<std::uint64_t>(idx));
    const TrialData data = make_trial(cfg.path, cfg.n_motions, sr, st, seed);

    CalibrationOptions opts;
    opts.constraint_set = cfg.constraint_set;
    const CalibrationResult convex = calibrate(data.m, opts);
    LocalOptions lo;
    lo.fail_on_max_iter = false;
    const CalibrationResult local = local_solve(data.m, Extrinsic::identity(), lo);

    report.trials[2 * idx] = record(convex, data, seed, sr, st, "convex", cfg.constraint_set);
    report.trials[2 * idx + 1] = record(local, data, seed, sr, st, "local", cfg.constraint_set);
  });

  for (std::size_t c = 0; c < cfg.sigmas.size(); ++c) {
    SweepCell cell;
    cell.sigma_r = cfg.sigmas[c].first;
    cell.sigma_t = cfg.sigmas[c].second;
    std::vector<double> cr, ct, lr, lt;
    cell.max_cost_excess = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < per_cell; ++i) {
      const auto& convex = report.trials[2 * (c * per_cell + i)];
      const auto& local = report.trials[2 * (c * per_cell + i) + 1];
      cr.push_back(convex.rotation_error);
      ct.push_back(convex.translation_error);
      lr.push_back(local.rotation_error);
      lt.push_back(local.translation_error);
      ++cell.trials;
      if (convex.certified) ++cell.certified;
      const double excess = convex.cost - local.cost;
      cell.max_cost_excess = std::max(cell.max_cost_excess, excess);
      if (excess > 1e-9) ++cell.dominance_violations;
    }
    cell.convex_rotation = quantiles(cr);
    cell.convex_translation = quantiles(ct);
    cell.local_rotation = quantiles(lr);
    cell.local_translation = quantiles(lt);
    report.cells.push_back(cell);
  }
  return report;
}

std::vector<std::pair<double, double>> default_sigma_grid() {
  std::vector<std::pair<double, double>> out;
  for (double sr : {0.01, 0.05, 0.1}) {
    for (double st : {0.01, 0.05, 0.1}) out.emplace_back(sr, st);
  }
  return out;
}

std::vector<double> default_heatmap_angles() {
  std::vector<double> out;
  for (int k = 0; k <= 8; ++k) out.push_back(k * std::numbers::pi / 8.0);
  return out;
}

HeatmapReport init_heatmap(const HeatmapConfig& cfg) {
  HeatmapReport report;
  const TrialData data = make_trial(cfg.path, cfg.n_motions, cfg.sigma_r, cfg.sigma_t, trial_seed(cfg.seed, 0));
  report.theta = data.theta;

  const CalibrationResult convex = calibrate(data.m);
  report.convex_rotation_error = rotation_distance_frobenius(convex.extrinsic.rotation, data.theta.rotation);
  report.convex_translation_error = translation_error(convex.extrinsic, data.theta);
  report.convex_cost = convex.cost;
  report.convex_certified = convex.certificate.verdict == Verdict::CertifiedGlobal;

  // n_inits = axes x directions, as square as possible.
  int n_axes = static_cast<int>(std::round(std::sqrt(cfg.n_inits)));
  n_axes = std::max(1, n_axes);
  const int n_dirs = std::max(1, cfg.n_inits / n_axes);
  const auto axes = fibonacci_sphere(n_axes);
  const auto dirs = fibonacci_sphere(n_dirs);

  const int n_cells = static_cast<int>(cfg.angles.size() * cfg.distances.size());
  report.cells.resize(n_cells);
  parallel_for(n_cells, cfg.jobs, [&](int idx) {
    HeatmapCell cell;
    cell.angle = cfg.angles[idx % cfg.angles.size()];
    cell.distance = cfg.distances[idx / cfg.angles.size()];
    cell.max_rotation_diff = cell.max_translation_diff = cell.max_cost_diff = -std::numeric_limits<double>::infinity();
    LocalOptions lo;
    lo.fail_on_max_iter = false;
    for (const auto& ax : axes) {
      for (const auto& dir : dirs) {
        Extrinsic init;
        init.rotation = data.theta.rotation * rotation_from_axis_angle({ax, cell.angle});
        init.translation = data.theta.translation + cell.distance * dir;
        const CalibrationResult local = local_solve(data.m, init, lo);
        const double rot_err = rotation_distance_frobenius(local.extrinsic.rotation, data.theta.rotation);
        const double trans_err = translation_error(local.extrinsic, data.theta);
        cell.max_rotation_diff = std::max(cell.max_rotation_diff, rot_err - report.convex_rotation_error);
        cell.max_translation_diff = std::max(cell.max_translation_diff, trans_err - report.convex_translation_error);
        cell.max_cost_diff = std::max(cell.max_cost_diff, local.cost - convex.cost);
      }
    }
    report.cells[idx] = cell;
  });
  return report;
}

RuntimeReport runtime_bench(const RuntimeConfig& cfg) {
  RuntimeReport report;
  for (std::size_t k = 0; k < cfg.n_list.size(); ++k) {
    const int n = cfg.n_list[k];
    std::vector<double> convex_t, local_t;
    for (int run = 0; run < cfg.runs; ++run) {
      const std::uint64_t seed = trial_seed(cfg.seed, k * 100000 + run);
      const TrialData data = make_trial(cfg.path, n, cfg.sigma_r, cfg.sigma_t, seed);
      const CalibrationResult convex = calibrate(data.m);
      LocalOptions lo;
      lo.fail_on_max_iter = false;
      const CalibrationResult local = local_solve(data.m, Extrinsic::identity(), lo);
      convex_t.push_back(convex.solve_stats.solver_time_seconds);
      local_t.push_back(local.solve_stats.solver_time_seconds);
      TrialRecord rc = record(convex, data, seed, cfg.sigma_r, cfg.sigma_t, "convex", ConstraintKind::RCH);
      rc.wall_time = convex.solve_stats.solver_time_seconds;
      TrialRecord rl = record(local, data, seed, cfg.sigma_r, cfg.sigma_t, "local", ConstraintKind::RCH);
      report.trials.push_back(rc);
      report.trials.push_back(rl);
    }
    report.rows.push_back({n, quantiles(convex_t), quantiles(local_t)});
  }
  return report;
}

}  // namespace certcal::sim
