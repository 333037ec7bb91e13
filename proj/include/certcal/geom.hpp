#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace certcal {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

/// Element of SO(3). Construction through from_matrix() validates
/// orthogonality and handedness to 1e-9.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  static Rotation identity() { return Rotation(); }

  /// Throws InvalidRotation if ||m^T m - I||_F or |det(m) - 1| exceeds tol.
  static Rotation from_matrix(const Mat3& m, double tol = 1e-9);

  /// For matrices that are rotations by construction (products, exp maps).
  static Rotation from_matrix_unchecked(const Mat3& m) { return Rotation(m); }

  const Mat3& matrix() const { return m_; }
  Rotation inverse() const { return Rotation(Mat3(m_.transpose())); }

  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  Rotation operator*(const Rotation& o) const { return Rotation(Mat3(m_ * o.m_)); }

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}

  Mat3 m_;
};

/// Canonical axis-angle: angle in [0, pi], unit axis.
struct AxisAngle {
  Vec3 axis = Vec3::UnitZ();
  double angle = 0.0;
};

/// Rigid transform acting on points as p -> R p + t.
struct Transform {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  static Transform identity() { return {}; }
  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Eigen::Matrix4d matrix() const;
};

/// The sensor-to-sensor calibration Theta = T_{b,a}.
using Extrinsic = Transform;

Mat3 skew(const Vec3& v);

Rotation rotation_from_axis_angle(const AxisAngle& aa);
AxisAngle axis_angle_from_rotation(const Rotation& r);
/// exp([w]_x): rotation by |w| about w / |w|.
Rotation exp_so3(const Vec3& w);

/// Frobenius-nearest rotation. Throws SingularInput when the smallest singular
/// value is below 1e-12.
Rotation project_to_so3(const Mat3& m);

Transform compose(const Transform& a, const Transform& b);
Transform invert(const Transform& a);

/// Haar-uniform rotation, deterministic per seed.
Rotation random_rotation(std::uint64_t seed);
Rotation random_rotation(std::mt19937_64& rng);
Vec3 random_unit_vector(std::mt19937_64& rng);

/// Intrinsic X-Y-Z Euler angles: R = Rx(ax) * Ry(ay) * Rz(az).
Rotation rotation_from_euler_xyz(double ax, double ay, double az);

double rotation_distance_frobenius(const Rotation& a, const Rotation& b);

}  // namespace certcal
