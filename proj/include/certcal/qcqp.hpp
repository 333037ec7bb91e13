#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "certcal/geom.hpp"
#include "certcal/problem.hpp"

namespace certcal {

using Mat9 = Eigen::Matrix<double, 9, 9>;
using Mat10 = Eigen::Matrix<double, 10, 10>;
using Mat13 = Eigen::Matrix<double, 13, 13>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Vec10 = Eigen::Matrix<double, 10, 1>;
using Vec13 = Eigen::Matrix<double, 13, 1>;

// Variable ordering of the homogenized QCQP: x = [t (3), vec(R) (9), y (1)],
// vec() stacking columns. The reduced variable is r~ = [vec(R); y].
inline constexpr int kTOffset = 0;
inline constexpr int kROffset = 3;
inline constexpr int kYIndex = 12;
inline constexpr int kReducedY = 9;

/// Column-major vec(): R(i, j) lands at index 3 * j + i.
Vec9 vec(const Mat3& m);
Mat3 unvec(const Eigen::Ref<const Vec9>& v);

/// x = [t; vec(R); y].
Vec13 stack_x(const Extrinsic& theta, double y = 1.0);
/// r~ = [vec(R); y].
Vec10 stack_r_tilde(const Rotation& r, double y = 1.0);

/// M_r = (R_a^T (x) I) - (I (x) R_b), so M_r vec(R) = vec(R R_a - R_b R).
Mat9 rotation_block(const RelativeMotionPair& pair);

/// M_t = [I - R_b, (t_a^T (x) I), -t_b], so M_t x = R t_a + t - R_b t - y t_b.
Eigen::Matrix<double, 3, 13> translation_block(const RelativeMotionPair& pair);

/// Quadratic-form data of the calibration cost and its Schur reduction.
/// All blocks are in the caller's (un-normalized) units. The reduction itself
/// is computed on q / scale.
struct DataMatrix {
  Mat13 q = Mat13::Zero();
  double scale = 1.0;  // trace(q), the normalization applied before reduction
  Mat3 q_tt = Mat3::Zero();
  Eigen::Matrix<double, 3, 10> q_t_rtilde = Eigen::Matrix<double, 3, 10>::Zero();
  Mat10 q_tilde = Mat10::Zero();
  double q_tt_condition = 0.0;

  /// q_tilde / scale, the cost handed to the SDP.
  Mat10 normalized_q_tilde() const { return q_tilde / scale; }
};

/// Sums the Gram contributions of every pair into q without reduction.
Mat13 assemble_q(const MeasurementSet& m);

/// Assembles q, partitions it and forms q_tilde = q / q_tt.
/// Throws TooShort for fewer than 2 pairs and SingularQtt if cond(q_tt) > 1e12.
DataMatrix assemble(const MeasurementSet& m);

enum class ConstraintKind { R, RC, RH, RCH };

std::string to_string(ConstraintKind kind);
/// Accepts "r", "r+c", "r+h", "r+c+h" (case-insensitive). Throws Error otherwise.
ConstraintKind parse_constraint_kind(std::string_view s);

/// Quadratic equality constraints r~^T A_k r~ = 0 plus the homogenizer
/// r~^T E r~ = 1 (E = e_y e_y^T).
struct ConstraintSet {
  ConstraintKind kind = ConstraintKind::RCH;
  std::vector<Mat10> matrices;
  std::vector<std::string> labels;
  Mat10 homogenizer = Mat10::Zero();
};

/// Row orthogonality RR^T = y^2 I (6), optional column orthogonality
/// R^T R = y^2 I (6) and handedness R_i x R_j = y R_k over cyclic column
/// triples (9). Symmetric entries are taken in upper-triangle order.
ConstraintSet constraint_catalog(ConstraintKind kind);

}  // namespace certcal
