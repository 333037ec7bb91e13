#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "certcal/geom.hpp"

namespace certcal {

/// One timestep of paired egomotion: v_a and v_b map frame s_{t-1} to s_t.
/// kappa weights the rotation residual, tau the translation residual.
struct RelativeMotionPair {
  Transform v_a;
  Transform v_b;
  double kappa = 1.0;
  double tau = 1.0;
};

struct MeasurementSet {
  std::vector<RelativeMotionPair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

struct ObservabilityOptions {
  double angle_tol = 1e-3;  // rad; smaller rotations carry no axis
  double axis_tol = 1e-2;   // rad; axes closer than this are the same axis
};

struct ObservabilityReport {
  int distinct_axis_count = 0;
  double max_axis_angle_between = 0.0;
  std::vector<double> rotation_magnitudes;
  bool observable = false;
  /// Condition number of the translation block Q_tt (infinity if singular).
  double condition_estimate = 0.0;
};

/// Reads the JSON-lines measurement format. Blank lines are skipped.
/// Throws ParseError (with 1-based line number), InvalidRotation, EmptyInput.
MeasurementSet load_measurements(std::istream& in);
void write_measurements(std::ostream& out, const MeasurementSet& m);

/// Reads a JSON-lines trajectory: one {"t": k, "pose": {"R": ..., "t": ...}} per line.
std::vector<Transform> load_trajectory(std::istream& in);
void write_trajectory(std::ostream& out, const std::vector<Transform>& poses);

/// Pair t holds inv(poses_s[t-1]) * poses_s[t] for each sensor.
/// Throws LengthMismatch or TooShort (fewer than 3 poses).
MeasurementSet relative_motions_from_trajectories(const std::vector<Transform>& poses_a,
                                                  const std::vector<Transform>& poses_b);

/// Two-distinct-axes predicate on the sensor-a rotations. Axes are compared
/// modulo sign. Never throws.
ObservabilityReport check_observability(const MeasurementSet& m,
                                        const ObservabilityOptions& opts = {});

}  // namespace certcal
