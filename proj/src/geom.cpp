#include "certcal/geom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "certcal/errors.hpp"

namespace certcal {

Rotation Rotation::from_matrix(const Mat3& m, double tol) {
  const double orth = (m.transpose() * m - Mat3::Identity()).norm();
  const double det = m.determinant();
  if (!std::isfinite(orth) || orth > tol || std::abs(det - 1.0) > tol) {
    throw InvalidRotation("matrix is not in SO(3): ||R^T R - I||_F = " + std::to_string(orth) +
                          ", det = " + std::to_string(det));
  }
  return Rotation(m);
}

Eigen::Matrix4d Transform::matrix() const {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.topLeftCorner<3, 3>() = rotation.matrix();
  t.topRightCorner<3, 1>() = translation;
  return t;
}

Mat3 skew(const Vec3& v) {
  Mat3 k;
  k << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return k;
}

Rotation rotation_from_axis_angle(const AxisAngle& aa) {
  const Mat3 k = skew(aa.axis);
  const Mat3 r = Mat3::Identity() + std::sin(aa.angle) * k + (1.0 - std::cos(aa.angle)) * k * k;
  return Rotation::from_matrix_unchecked(r);
}

Rotation exp_so3(const Vec3& w) {
  const double angle = w.norm();
  if (angle == 0.0) return Rotation::identity();
  return rotation_from_axis_angle({w / angle, angle});
}

AxisAngle axis_angle_from_rotation(const Rotation& rot) {
  const Mat3& r = rot.matrix();
  // w = sin(angle) * axis
  const Vec3 w(0.5 * (r(2, 1) - r(1, 2)), 0.5 * (r(0, 2) - r(2, 0)), 0.5 * (r(1, 0) - r(0, 1)));
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double s = w.norm();
  const double angle = std::atan2(s, c);

  AxisAngle out;
  if (angle == 0.0) {
    return out;
  }
  if (angle < std::numbers::pi / 2) {
    out.axis = w / s;
    out.angle = angle;
    return out;
  }

  // Near pi the skew part vanishes; read the axis off the symmetric part
  // (1 - cos) a a^T, pivoting on its largest diagonal entry.
  const Mat3 b = 0.5 * (r + r.transpose()) - c * Mat3::Identity();
  const double one_minus_c = 1.0 - c;
  Eigen::Index i = 0;
  b.diagonal().maxCoeff(&i);
  Vec3 axis = b.col(i) / std::sqrt(std::max(b(i, i), 0.0) * one_minus_c);
  axis.normalize();
  if (axis.dot(w) < 0.0) {
    axis = -axis;
  }
  out.axis = axis;
  out.angle = angle;
  return out;
}

Rotation project_to_so3(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (!(svd.singularValues()(2) >= 1e-12)) {
    throw SingularInput("project_to_so3: smallest singular value below 1e-12");
  }
  const Mat3& u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  d(2, 2) = (u * v.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return Rotation::from_matrix_unchecked(u * d * v.transpose());
}

Transform compose(const Transform& a, const Transform& b) {
  return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

Transform invert(const Transform& a) {
  const Rotation rt = a.rotation.inverse();
  return {rt, -(rt * a.translation)};
}

Rotation random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::Vector4d q;
  do {
    q = Eigen::Vector4d(n01(rng), n01(rng), n01(rng), n01(rng));
  } while (q.norm() < 1e-8);
  q.normalize();
  const Eigen::Quaterniond quat(q(0), q(1), q(2), q(3));
  return Rotation::from_matrix_unchecked(quat.toRotationMatrix());
}

Rotation random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return random_rotation(rng);
}

Vec3 random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Vec3 v;
  do {
    v = Vec3(n01(rng), n01(rng), n01(rng));
  } while (v.norm() < 1e-8);
  return v.normalized();
}

Rotation rotation_from_euler_xyz(double ax, double ay, double az) {
  const Mat3 r = (Eigen::AngleAxisd(ax, Vec3::UnitX()) * Eigen::AngleAxisd(ay, Vec3::UnitY()) *
                  Eigen::AngleAxisd(az, Vec3::UnitZ()))
                     .toRotationMatrix();
  return Rotation::from_matrix_unchecked(r);
}

double rotation_distance_frobenius(const Rotation& a, const Rotation& b) {
  return (a.matrix() - b.matrix()).norm();
}

}  // namespace certcal
