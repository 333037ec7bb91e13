#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace certcal::sdp {

/// Standard-form SDP
///
///   minimize tr(C X)  s.t.  tr(A_k X) = b_k,  X >= 0,
///
/// and its dual
///
///   maximize b^T y    s.t.  S = C - sum_k y_k A_k >= 0.
struct Problem {
  Eigen::MatrixXd cost;
  std::vector<Eigen::MatrixXd> constraints;
  std::vector<double> rhs;

  int dimension() const { return static_cast<int>(cost.rows()); }
  int num_constraints() const { return static_cast<int>(constraints.size()); }
};

struct Options {
  double tol_feas = 1e-9;
  double tol_gap = 1e-9;
  int max_iter = 100;
  /// Fraction of the distance to the cone boundary taken per step.
  double step_fraction = 0.9;
};

enum class Status { Optimal, MaxIter, NumericalFailure, Infeasible };

std::string to_string(Status s);

struct KktResiduals {
  double primal = 0.0;           // ||b - A(X)|| / (1 + ||b||)
  double dual = 0.0;             // ||C - S - A^T(y)||_F / (1 + ||C||_F)
  double complementarity = 0.0;  // tr(X S) / (1 + |pobj| + |dobj|)
};

struct Iterate {
  int iter = 0;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double mu = 0.0;
  double step_primal = 0.0;
  double step_dual = 0.0;
  double sigma = 0.0;
};

struct Solution {
  Eigen::MatrixXd x_primal;
  Eigen::MatrixXd s_dual;
  /// Dual vector in the standard form above, one entry per input constraint.
  /// Constraints removed as linearly dependent during presolve get 0.
  Eigen::VectorXd y;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  KktResiduals kkt;
  Status status = Status::NumericalFailure;
  int iterations = 0;
  int dropped_constraints = 0;
  std::vector<Iterate> history;
  std::string message;
};

/// Infeasible-start primal-dual path following with Nesterov-Todd scaling and
/// Mehrotra predictor-corrector steps. Dense; meant for n of a few dozen at most.
/// Throws certcal::Error on malformed input (non-square or asymmetric data,
/// mismatched sizes, empty constraint list).
Solution solve(const Problem& p, const Options& opts = {});

struct LmiCheck {
  double min_eig = 0.0;
  bool psd = false;
};

/// Rebuilds H = C - sum_k y_k A_k from the problem data and reports its
/// smallest eigenvalue; psd iff min_eig > -tol * (1 + ||H||_2).
LmiCheck certify_lmi(const Eigen::MatrixXd& cost, const std::vector<Eigen::MatrixXd>& constraints,
                     const Eigen::VectorXd& y, double tol = 1e-9);

}  // namespace certcal::sdp
