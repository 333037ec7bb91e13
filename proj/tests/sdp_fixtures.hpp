#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "certcal/sdp.hpp"

namespace certcal::test {

inline Eigen::MatrixXd random_symmetric(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  }
  return 0.5 * (a + a.transpose());
}

struct Constructed {
  sdp::Problem problem;
  double optimum = 0.0;
};

// Fix a strictly complementary pair (X*, S*) on orthogonal subspaces and any
// dual vector y*; setting C = S* + sum y*_k A_k and b = A(X*) makes both
// optimal with objective tr(C X*) = b^T y*.
inline Constructed complementary_sdp(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(3, 8);
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  std::normal_distribution<double> g(0.0, 1.0);
  const int n = dim(rng);
  const int rank = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n - 1));
  const int m = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(n * (n + 1) / 2 - 1));

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Eigen::MatrixXd::NullaryExpr(n, n, [&] { return g(rng); }));
  const Eigen::MatrixXd u = qr.householderQ();
  Eigen::VectorXd dx = Eigen::VectorXd::Zero(n), ds = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) (i < rank ? dx : ds)(i) = pos(rng);
  const Eigen::MatrixXd x_star = u * dx.asDiagonal() * u.transpose();
  const Eigen::MatrixXd s_star = u * ds.asDiagonal() * u.transpose();

  Constructed c;
  c.problem.constraints.push_back(Eigen::MatrixXd::Identity(n, n));  // keeps the primal set bounded
  for (int k = 1; k < m; ++k) c.problem.constraints.push_back(random_symmetric(n, rng));
  Eigen::MatrixXd cost = s_star;
  for (const auto& a : c.problem.constraints) {
    const double y = g(rng);
    cost += y * a;
    c.problem.rhs.push_back((a * x_star).trace());
  }
  c.problem.cost = cost;
  c.optimum = (cost * x_star).trace();
  return c;
}


}  // namespace certcal::test
