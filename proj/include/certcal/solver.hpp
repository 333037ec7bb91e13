#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "certcal/geom.hpp"
#include "certcal/problem.hpp"
#include "certcal/qcqp.hpp"
#include "certcal/sdp.hpp"

namespace certcal {

struct Tolerances {
  // Interior-point solver.
  double tol_feas = 1e-9;
  double tol_gap = 1e-9;
  int max_iter = 100;
  // Certificate.
  double gap_tol = 1e-7;      // relative duality gap
  double psd_tol = 1e-8;      // on min eig of the (trace-normalized) Lagrangian Hessian
  double rank_ratio = 1e-6;   // second / first eigenvalue of X for rank-1 acceptance
  double nullspace_tol = 1e-6;  // eigenvalues of H below this count toward its nullspace
  double crosscheck_tol = 1e-6;  // refined primal vs refined dual rotation (Frobenius)
};

struct CalibrationOptions {
  ConstraintKind constraint_set = ConstraintKind::RCH;
  Tolerances tol;
  bool strict_observability = false;
  ObservabilityOptions observability;
};

enum class Verdict { CertifiedGlobal, NotCertified };
std::string to_string(Verdict v);

/// Gap and dual bound are in cost units. min_eig_h is measured on the
/// trace-normalized problem, where the psd_tol and nullspace_tol thresholds
/// apply; cost_scale converts back.
struct Certificate {
  double gap = 0.0;
  double dual_bound = 0.0;
  double min_eig_h = 0.0;
  int nullspace_dim = 0;
  double extraction_residual = 0.0;
  double eigen_ratio = 0.0;
  double crosscheck_error = 0.0;
  double cost_scale = 1.0;
  std::string sdp_status;
  Verdict verdict = Verdict::NotCertified;
};

struct SolveStats {
  int sdp_iters = 0;
  int local_iters = 0;
  double wall_time_seconds = 0.0;
  /// Time spent after assembly: Schur reduction, SDP, extraction.
  double solver_time_seconds = 0.0;
};

struct CalibrationResult {
  Extrinsic extrinsic;
  double cost = 0.0;
  Certificate certificate;
  ObservabilityReport observability;
  SolveStats solve_stats;
  /// Per-iteration record of the SDP solve the certificate came from.
  std::vector<sdp::Iterate> sdp_history;
};

/// Dual multipliers in Lagrangian form: H = Q~ + sum_k lambda_k A_k - gamma E.
/// Values are for the trace-normalized cost.
struct DualSolution {
  sdp::Solution sdp;
  Eigen::VectorXd lambda;
  double gamma = 0.0;
  Mat10 hessian = Mat10::Zero();
};

/// Solves the SDP relaxation of the reduced rotation QCQP for d.normalized_q_tilde().
DualSolution solve_relaxation(const DataMatrix& d, const ConstraintSet& set, const Tolerances& tol = {});

/// H = cost + sum_k lambda_k A_k - gamma E, rebuilt from the constraint catalog.
Mat10 lagrangian_hessian(const Mat10& cost, const ConstraintSet& set, const Eigen::VectorXd& lambda,
                         double gamma);

struct Extraction {
  Rotation rotation;
  Vec10 r_tilde = Vec10::Zero();  // pre-projection, scaled so y = +1
  double residual = 0.0;          // distance of the reshaped matrix from SO(3)
  double eigen_ratio = 0.0;       // lambda_2 / lambda_1 of X
};

/// Minimizes [vec(R); 1]^T q_tilde [vec(R); 1] over SO(3) from `start` by
/// damped Riemannian Newton. Used to polish the rotation read off the SDP.
Rotation refine_rotation(const Mat10& q_tilde, const Rotation& start, int max_iter = 50);

/// Dominant eigenvector of X, scaled to y = +1, reshaped column-wise and
/// projected onto SO(3). Throws RankDeficiencyAmbiguous when
/// lambda_2 / lambda_1 exceeds rank_ratio.
Extraction extract_solution(const Mat10& x_primal, double rank_ratio = 1e-6);

/// Same extraction from a null vector of H (its smallest eigenvector).
Extraction extract_from_nullspace(const Mat10& hessian);

/// t* = -Q_tt^{-1} Q_{t,r~} r~. Throws SingularQtt.
Vec3 recover_translation(const DataMatrix& d, const Vec10& r_tilde);

/// sum kappa ||R R_a - R_b R||_F^2 + tau ||R t_a + t - R_b t - t_b||^2.
double evaluate_cost(const MeasurementSet& m, const Extrinsic& theta);

/// Gradient of evaluate_cost w.r.t. (delta, dt) where R <- R exp([delta]_x), t <- t + dt.
Eigen::Matrix<double, 6, 1> cost_gradient(const MeasurementSet& m, const Extrinsic& theta);

/// Assemble, reduce, solve the strengthened dual, extract and certify.
/// Throws TooShort, SingularQtt, NotObservable (strict mode only), SdpFailure.
CalibrationResult calibrate(const MeasurementSet& m, const CalibrationOptions& opts = {});

struct CandidateCheck {
  double cost = 0.0;
  double dual_bound = 0.0;
  double gap = 0.0;
  bool globally_optimal = false;
  sdp::Status sdp_status = sdp::Status::NumericalFailure;
};

/// Compares a candidate's cost against the dual bound gamma.
CandidateCheck certify_candidate(const MeasurementSet& m, const Extrinsic& candidate,
                                 const CalibrationOptions& opts = {});

struct LocalOptions {
  int max_iter = 500;
  double grad_tol = 1e-10;  // relative to 1 + cost
  bool fail_on_max_iter = true;
};

/// Levenberg-Marquardt on evaluate_cost over a rotation increment and the
/// translation. The verdict is always NotCertified. Throws MaxIterReached
/// when fail_on_max_iter is set.
CalibrationResult local_solve(const MeasurementSet& m, const Extrinsic& init, const LocalOptions& opts = {});

}  // namespace certcal
