#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "certcal/errors.hpp"
#include "certcal/sdp.hpp"
#include "sdp_fixtures.hpp"

using namespace certcal;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using test::complementary_sdp;
using test::Constructed;


TEST_CASE("2x2 eigenvalue problem") {
  sdp::Problem p;
  p.cost = Eigen::Vector2d(1.0, 2.0).asDiagonal();
  p.constraints = {MatrixXd::Identity(2, 2)};
  p.rhs = {1.0};
  const sdp::Solution s = sdp::solve(p);
  REQUIRE(s.status == sdp::Status::Optimal);
  CHECK(std::abs(s.primal_obj - 1.0) < 1e-8);
  CHECK(std::abs(s.dual_obj - 1.0) < 1e-8);
  CHECK((s.x_primal - Eigen::Vector2d(1.0, 0.0).asDiagonal().toDenseMatrix()).norm() < 1e-6);
  CHECK(s.y(0) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("50 constructed SDPs with known optima") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    CAPTURE(seed);
    const Constructed c = complementary_sdp(seed);
    const sdp::Solution s = sdp::solve(c.problem);
    CHECK(s.status == sdp::Status::Optimal);
    CHECK(std::abs(s.primal_obj - c.optimum) < 1e-7 * (1.0 + std::abs(c.optimum)));
    CHECK(std::abs(s.dual_obj - c.optimum) < 1e-7 * (1.0 + std::abs(c.optimum)));
    Eigen::SelfAdjointEigenSolver<MatrixXd> ex(s.x_primal);
    CHECK(ex.eigenvalues()(0) > -1e-8 * (1.0 + s.x_primal.norm()));
    CHECK(s.kkt.primal < 1e-9);
    CHECK(s.kkt.dual < 1e-9);
  }
}

TEST_CASE("weak duality holds on every iterate that is primal and dual feasible") {
  const sdp::Options opts;
  int checked = 0;
  for (std::uint64_t seed = 100; seed < 150; ++seed) {
    const sdp::Solution s = sdp::solve(complementary_sdp(seed).problem, opts);
    REQUIRE_FALSE(s.history.empty());
    for (const auto& it : s.history) {
      if (it.primal_residual < opts.tol_feas && it.dual_residual < opts.tol_feas) {
        ++checked;
        CHECK(it.primal_obj >= it.dual_obj - opts.tol_gap * (1.0 + std::abs(it.primal_obj) + std::abs(it.dual_obj)));
      }
    }
  }
  CHECK(checked >= 50);
}

TEST_CASE("solver is deterministic") {
  const Constructed c = complementary_sdp(7);
  const sdp::Solution a = sdp::solve(c.problem), b = sdp::solve(c.problem);
  CHECK(a.iterations == b.iterations);
  CHECK(a.primal_obj == b.primal_obj);
  CHECK(a.x_primal == b.x_primal);
}

TEST_CASE("scaling the cost scales both objectives and keeps the LMI verdict") {
  Constructed c = complementary_sdp(3);
  const sdp::Solution base = sdp::solve(c.problem);
  c.problem.cost *= 4.0;
  const sdp::Solution scaled = sdp::solve(c.problem);
  CHECK(scaled.primal_obj == doctest::Approx(4.0 * base.primal_obj).epsilon(1e-7));
  CHECK(sdp::certify_lmi(c.problem.cost, c.problem.constraints, scaled.y).psd ==
        sdp::certify_lmi(c.problem.cost / 4.0, c.problem.constraints, base.y).psd);
}

TEST_CASE("linearly dependent constraints are dropped, not fatal") {
  Constructed c = complementary_sdp(12);
  c.problem.constraints.push_back(2.0 * c.problem.constraints.front());
  c.problem.rhs.push_back(2.0 * c.problem.rhs.front());
  const sdp::Solution s = sdp::solve(c.problem);
  CHECK(s.status == sdp::Status::Optimal);
  CHECK(s.dropped_constraints == 1);
  CHECK(std::abs(s.primal_obj - c.optimum) < 1e-7 * (1.0 + std::abs(c.optimum)));
}

TEST_CASE("certify_lmi") {
  SUBCASE("accepts the optimal dual and rejects a perturbed one") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Constructed c = complementary_sdp(seed);
      const sdp::Solution s = sdp::solve(c.problem);
      CHECK(sdp::certify_lmi(c.problem.cost, c.problem.constraints, s.y, 1e-7).psd);
      VectorXd bumped = s.y;
      bumped(0) += 1.0;  // shifts the LMI by -I
      const sdp::LmiCheck bad = sdp::certify_lmi(c.problem.cost, c.problem.constraints, bumped);
      CHECK_FALSE(bad.psd);
      CHECK(bad.min_eig < -0.5);
    }
  }
  SUBCASE("zero multipliers on an indefinite cost") {
    const MatrixXd cost = Eigen::Vector3d(1.0, -0.5, 2.0).asDiagonal();
    const auto r = sdp::certify_lmi(cost, {MatrixXd::Identity(3, 3)}, VectorXd::Zero(1));
    CHECK_FALSE(r.psd);
    CHECK(r.min_eig == doctest::Approx(-0.5));
  }
}

TEST_CASE("malformed problems throw") {
  sdp::Problem p;
  p.cost = MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(sdp::solve(p), Error);
  p.constraints = {MatrixXd::Identity(3, 3)};
  p.rhs = {1.0};
  CHECK_THROWS_AS(sdp::solve(p), Error);
  p.constraints = {MatrixXd::Identity(2, 2)};
  p.rhs = {1.0, 2.0};
  CHECK_THROWS_AS(sdp::solve(p), Error);
  p.rhs = {1.0};
  p.cost(0, 1) = 1.0;
  CHECK_THROWS_AS(sdp::solve(p), Error);
}

TEST_CASE("status names") {
  CHECK(sdp::to_string(sdp::Status::Optimal) == "optimal");
  CHECK(sdp::to_string(sdp::Status::MaxIter) == "max_iter");
}
