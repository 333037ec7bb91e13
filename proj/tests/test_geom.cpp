#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "certcal/errors.hpp"
#include "certcal/geom.hpp"

using namespace certcal;

namespace {

Transform random_transform(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return {random_rotation(rng), Vec3(n(rng), n(rng), n(rng))};
}

double transform_distance(const Transform& a, const Transform& b) {
  return (a.matrix() - b.matrix()).norm();
}

}  // namespace

TEST_CASE("axis-angle: identity and quarter turn about z") {
  CHECK(rotation_from_axis_angle({Vec3::UnitZ(), 0.0}).matrix().isApprox(Mat3::Identity(), 1e-15));
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  CHECK((rotation_from_axis_angle({Vec3::UnitZ(), std::numbers::pi / 2}).matrix() - expected).norm() < 1e-15);
}

TEST_CASE("axis-angle: angle 0.7 about (1,2,3) matches a reference matrix and round-trips") {
  const Vec3 axis = Vec3(1, 2, 3).normalized();
  Mat3 reference;  // computed with an independent rotation-vector library
  reference << 0.781639173907025, -0.4829292842142122, 0.3947397981737998,  //
      0.5501172307043584, 0.8320301337746345, -0.07139249941787584,         //
      -0.29395787843858057, 0.27295633888831433, 0.9160150668873173;
  const Rotation r = rotation_from_axis_angle({axis, 0.7});
  CHECK((r.matrix() - reference).norm() < 1e-14);
  const AxisAngle back = axis_angle_from_rotation(r);
  CHECK(std::abs(back.angle - 0.7) < 1e-12);
  CHECK((back.axis - axis).norm() < 1e-12);
}

TEST_CASE("axis-angle round trip over random axes and angles, including near pi") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-6, std::numbers::pi - 1e-6);
  for (int k = 0; k < 500; ++k) {
    const Vec3 axis = random_unit_vector(rng);
    const double angle = k < 10 ? std::numbers::pi - 1e-7 * (k + 1) : u(rng);
    const Rotation r = rotation_from_axis_angle({axis, angle});
    const AxisAngle aa = axis_angle_from_rotation(r);
    CHECK(std::abs(aa.axis.norm() - 1.0) < 1e-12);
    CHECK(rotation_distance_frobenius(rotation_from_axis_angle(aa), r) < 1e-9);
    CHECK(aa.angle >= 0.0);
    CHECK(aa.angle <= std::numbers::pi);
  }
}

TEST_CASE("axis-angle at exactly pi returns a unit axis up to sign") {
  const Rotation r = rotation_from_axis_angle({Vec3(0, 1, 1).normalized(), std::numbers::pi});
  const AxisAngle aa = axis_angle_from_rotation(r);
  CHECK(std::abs(aa.angle - std::numbers::pi) < 1e-12);
  CHECK(std::abs(std::abs(aa.axis.dot(Vec3(0, 1, 1).normalized())) - 1.0) < 1e-12);
}

TEST_CASE("exp_so3 agrees with axis-angle") {
  const Vec3 w(0.2, -0.4, 0.9);
  CHECK(rotation_distance_frobenius(exp_so3(w), rotation_from_axis_angle({w.normalized(), w.norm()})) < 1e-14);
  CHECK(exp_so3(Vec3::Zero()).matrix().isApprox(Mat3::Identity()));
}

TEST_CASE("skew builds the cross-product matrix") {
  const Vec3 a(1, -2, 3), b(0.5, 4, -1);
  CHECK((skew(a) * b - a.cross(b)).norm() < 1e-15);
  CHECK((skew(a) + skew(a).transpose()).norm() == 0.0);
}

TEST_CASE("from_matrix validates orthogonality and handedness") {
  CHECK_THROWS_AS(Rotation::from_matrix(Vec3(1, 1, -1).asDiagonal().toDenseMatrix()), InvalidRotation);
  CHECK_THROWS_AS(Rotation::from_matrix(Mat3::Identity() * 1.01), InvalidRotation);
  CHECK_NOTHROW(Rotation::from_matrix(exp_so3(Vec3(0.1, 0.2, 0.3)).matrix()));
}

TEST_CASE("project_to_so3") {
  SUBCASE("a rotation is a fixed point") {
    const Rotation r = exp_so3(Vec3(0.3, 1.1, -0.5));
    CHECK(rotation_distance_frobenius(project_to_so3(r.matrix()), r) < 1e-12);
  }
  SUBCASE("diag(1,1,-1) maps to identity, which beats sampled rotations") {
    const Mat3 m = Vec3(1, 1, -1).asDiagonal();
    const Rotation p = project_to_so3(m);
    CHECK((p.matrix() - Mat3::Identity()).norm() < 1e-12);
    const double best = (m - p.matrix()).norm();
    for (std::uint64_t s = 0; s < 2000; ++s) CHECK((m - random_rotation(s).matrix()).norm() >= best - 1e-12);
  }
  SUBCASE("scaling does not move the projection") {
    const Rotation r = exp_so3(Vec3(-0.7, 0.2, 0.4));
    CHECK(rotation_distance_frobenius(project_to_so3(1.0001 * r.matrix()), r) < 1e-12);
  }
  SUBCASE("singular input throws") {
    Mat3 m = Mat3::Identity();
    m(2, 2) = 0.0;
    CHECK_THROWS_AS(project_to_so3(m), SingularInput);
  }
}

TEST_CASE("compose and invert") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 200; ++k) {
    const Transform a = random_transform(rng), b = random_transform(rng), c = random_transform(rng);
    const Vec3 p = random_unit_vector(rng) * 3.0;
    CHECK((compose(a, b).apply(p) - a.apply(b.apply(p))).norm() < 1e-12);
    CHECK(transform_distance(compose(compose(a, b), c), compose(a, compose(b, c))) < 1e-12);
    CHECK(transform_distance(invert(compose(a, b)), compose(invert(b), invert(a))) < 1e-12);
    CHECK(transform_distance(compose(a, invert(a)), Transform::identity()) < 1e-12);
  }
}

TEST_CASE("Euler X-Y-Z composes intrinsic axes in order") {
  Mat3 reference;  // intrinsic XYZ from an independent library
  reference << 0.9362933635841993, -0.2896294776255156, -0.19866933079506122,  //
      0.27509584731824377, 0.9564250858492325, -0.0978433950072557,            //
      0.21835066314633444, 0.03695701352462507, 0.975170327201816;
  CHECK((rotation_from_euler_xyz(0.1, -0.2, 0.3).matrix() - reference).norm() < 1e-14);
}

TEST_CASE("random_rotation: deterministic per seed and Haar mean trace near 0") {
  CHECK(random_rotation(42).matrix() == random_rotation(42).matrix());
  CHECK(random_rotation(42).matrix() != random_rotation(43).matrix());
  double sum = 0.0;
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10000; ++k) {
    const Rotation r = random_rotation(rng);
    CHECK((r.matrix().transpose() * r.matrix() - Mat3::Identity()).norm() < 1e-12);
    sum += r.matrix().trace();
  }
  CHECK(std::abs(sum / 10000) < 0.05);
}
