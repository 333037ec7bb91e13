#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "certcal/geom.hpp"
#include "certcal/problem.hpp"
#include "certcal/qcqp.hpp"
#include "certcal/solver.hpp"

namespace certcal::sim {

/// z(x, y) = sum_j amplitude_j * sin(fx_j * x + fy_j * y + phase_j)
struct Sinusoid {
  double amplitude = 0.0;
  double fx = 0.0;
  double fy = 0.0;
  double phase = 0.0;
};

struct PathParams {
  double radius = 10.0;      // m
  int n_steps = 100;         // relative motions; the path has n_steps + 1 waypoints
  int n_sinusoids = 3;
  double amplitude = 1.5;    // m, upper bound on each sinusoid's amplitude; 0 gives a planar circle
  double min_frequency = 0.15;  // rad/m
  double max_frequency = 0.45;  // rad/m
  std::uint64_t seed = 0;
};

struct TerrainPath {
  std::vector<Transform> waypoints;
  std::vector<Sinusoid> terrain;
  PathParams params;

  double height(double x, double y) const;
};

/// One lap of a circle in x-y over a random sinusoidal landscape. The vehicle
/// x-axis follows the velocity, the z-axis stays as close to world up as the
/// slope allows (yaw plus pitch, no roll). Deterministic per seed.
TerrainPath generate_path(const PathParams& params);

/// poses_b[t] = waypoint t, poses_a[t] = poses_b[t] * theta.
std::pair<std::vector<Transform>, std::vector<Transform>> sensor_trajectories(const TerrainPath& path,
                                                                              const Extrinsic& theta);

struct NoiseModel {
  double sigma_r = 0.0;  // rad, per Euler angle
  double sigma_t = 0.0;  // m, per axis
  std::uint64_t seed = 0;
};

/// Right-multiplies every rotation by an intrinsic X-Y-Z Euler rotation with
/// N(0, sigma_r^2) angles and adds N(0, sigma_t^2 I) to every translation.
/// Both sensors are corrupted. Zero sigmas return the input unchanged.
MeasurementSet corrupt(const MeasurementSet& m, const NoiseModel& noise);

/// Deterministic near-uniform directions on the unit sphere.
std::vector<Vec3> fibonacci_sphere(int count);

/// Default ground truth for the two-motion ablation instance.
Extrinsic default_ablation_theta();

/// pi/2 rotation with 1 m translation along the vehicle x-axis, then the
/// same about y, seen by sensor b; sensor a sees the conjugated motions.
MeasurementSet two_motion_instance(const Extrinsic& theta);

/// Per-trial RNG stream derived from (master seed, trial index).
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index);

/// Random extrinsic: Haar rotation, translation uniform in [-1, 1]^3 m.
Extrinsic random_extrinsic(std::uint64_t seed);

// --------------------------------------------------------------------------
// Experiments

/// 0 followed by k * pi / 16 for k = 1..8.
std::vector<double> default_rotation_magnitudes();

struct AblationConfig {
  std::vector<double> rotation_magnitudes = default_rotation_magnitudes();  // rad
  int n_axes = 100;
  std::vector<ConstraintKind> constraint_sets{ConstraintKind::R, ConstraintKind::RC, ConstraintKind::RH,
                                              ConstraintKind::RCH};
  /// Translation variant: rotation fixed at translation_rotation_magnitude,
  /// rotation axes x translation directions trials per magnitude.
  std::vector<double> translation_magnitudes{0.1, 1.0, 10.0};  // m
  double translation_rotation_magnitude = 1.5707963267948966;
  int n_translation_rotation_axes = 16;
  int n_translation_directions = 16;
  Extrinsic theta = default_ablation_theta();
  Tolerances tol;
  int jobs = 1;
};

struct AblationTrial {
  std::string variant;  // "rotation" or "translation"
  ConstraintKind constraint_set = ConstraintKind::RCH;
  double rotation_magnitude = 0.0;
  double translation_magnitude = 0.0;
  int trial = 0;
  bool certified = false;
  double gap = 0.0;
  double rotation_error = 0.0;
};

struct AblationCell {
  std::string variant;
  ConstraintKind constraint_set = ConstraintKind::RCH;
  double rotation_magnitude = 0.0;
  double translation_magnitude = 0.0;
  int trials = 0;
  int certified = 0;
  double percent() const { return trials ? 100.0 * certified / trials : 0.0; }
};

struct AblationReport {
  std::vector<AblationTrial> trials;
  std::vector<AblationCell> cells;
  Extrinsic theta;

  const AblationCell* find(const std::string& variant, ConstraintKind set, double rot_mag,
                           double trans_mag = 0.0) const;
};

/// Each trial perturbs the first vehicle-frame (sensor b) measurement: its
/// rotation is left-multiplied by exp(magnitude * axis) and, in the
/// translation variant, magnitude * direction is added to its translation.
AblationReport ablation_experiment(const AblationConfig& cfg);

/// {0.01, 0.05, 0.1} x {0.01, 0.05, 0.1}, sigma_r major.
std::vector<std::pair<double, double>> default_sigma_grid();

struct SweepConfig {
  std::vector<std::pair<double, double>> sigmas = default_sigma_grid();  // (sigma_r, sigma_t)
  int n_trials = 100;
  int n_motions = 100;
  std::uint64_t seed = 0;
  ConstraintKind constraint_set = ConstraintKind::RCH;
  PathParams path;  // n_steps and seed are overridden per trial
  int jobs = 1;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  double sigma_r = 0.0;
  double sigma_t = 0.0;
  int n = 0;
  std::string method;  // "convex" or "local"
  ConstraintKind constraint_set = ConstraintKind::RCH;
  double rotation_error = 0.0;     // Frobenius
  double translation_error = 0.0;  // m
  double cost = 0.0;
  bool certified = false;
  double wall_time = 0.0;
};

struct Quantiles {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0, mean = 0.0;
};
Quantiles quantiles(std::vector<double> values);

struct SweepCell {
  double sigma_r = 0.0;
  double sigma_t = 0.0;
  Quantiles convex_rotation, convex_translation, local_rotation, local_translation;
  int certified = 0;
  int trials = 0;
  int dominance_violations = 0;  // trials with convex cost > local cost + 1e-9
  double max_cost_excess = 0.0;  // max over trials of convex cost - local cost
};

struct SweepReport {
  std::vector<TrialRecord> trials;
  std::vector<SweepCell> cells;
};

SweepReport noise_sweep(const SweepConfig& cfg);

/// k * pi / 8 for k = 0..8.
std::vector<double> default_heatmap_angles();

struct HeatmapConfig {
  std::vector<double> angles = default_heatmap_angles();  // rad, initial rotation error magnitude
  std::vector<double> distances{0.0, 1.0, 2.0, 5.0, 10.0};  // m, initial translation error magnitude
  int n_inits = 64;
  int n_motions = 100;
  double sigma_r = 0.01;
  double sigma_t = 0.01;
  std::uint64_t seed = 0;
  PathParams path;
  int jobs = 1;
};

struct HeatmapCell {
  double angle = 0.0;
  double distance = 0.0;
  double max_translation_diff = 0.0;  // max over inits of local error - convex error
  double max_rotation_diff = 0.0;
  double max_cost_diff = 0.0;
};

struct HeatmapReport {
  Extrinsic theta;
  double convex_rotation_error = 0.0;
  double convex_translation_error = 0.0;
  double convex_cost = 0.0;
  bool convex_certified = false;
  std::vector<HeatmapCell> cells;
};

HeatmapReport init_heatmap(const HeatmapConfig& cfg);

struct RuntimeConfig {
  std::vector<int> n_list{10, 100, 1000};
  int runs = 20;
  std::uint64_t seed = 0;
  double sigma_r = 0.01;
  double sigma_t = 0.01;
  PathParams path;
};

struct RuntimeRow {
  int n = 0;
  Quantiles convex_seconds;  // Schur reduction onward: SDP plus extraction
  Quantiles local_seconds;
};

struct RuntimeReport {
  std::vector<RuntimeRow> rows;
  std::vector<TrialRecord> trials;
};

RuntimeReport runtime_bench(const RuntimeConfig& cfg);

}  // namespace certcal::sim
