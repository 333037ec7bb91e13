#include "certcal/solver.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "certcal/errors.hpp"

namespace certcal {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Scales v to y = +1 and projects the reshaped 3x3 block onto SO(3).
Extraction extract_from_vector(const Vec10& v) {
  Extraction out;
  const double yv = v(kReducedY);
  out.r_tilde = std::abs(yv) > 1e-12 ? Vec10(v / yv) : v;
  const Mat3 raw = unvec(out.r_tilde.head<9>());
  try {
    out.rotation = project_to_so3(raw);
    out.residual = (raw - out.rotation.matrix()).norm();
  } catch (const SingularInput&) {
    out.rotation = Rotation::identity();
    out.residual = std::numeric_limits<double>::infinity();
  }
  if (std::abs(yv) <= 1e-12) {
    out.residual = std::numeric_limits<double>::infinity();
  }
  return out;
}

Extraction extract_unchecked(const Mat10& x_primal) {
  const Eigen::SelfAdjointEigenSolver<Mat10> eig(0.5 * (x_primal + x_primal.transpose()));
  const auto& ev = eig.eigenvalues();
  Extraction out = extract_from_vector(eig.eigenvectors().col(9));
  out.eigen_ratio = ev(9) > 0.0 ? std::max(ev(8), 0.0) / ev(9) : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace

Rotation refine_rotation(const Mat10& q_tilde, const Rotation& start, int max_iter) {
  // Damped Riemannian Newton on f(R) = r~(R)^T Q r~(R) with R <- R exp([delta]_x).
  // Near the minimizer f stops resolving changes long before the gradient
  // does, so a step that keeps f level and shrinks the gradient is accepted.
  const Mat10 q = 0.5 * (q_tilde + q_tilde.transpose());
  auto cost_of = [&](const Rotation& r) {
    const Vec10 v = stack_r_tilde(r);
    return v.dot(q * v);
  };
  auto derivatives = [&](const Rotation& r, Vec3& g, Mat3& h) {
    const Vec10 v = stack_r_tilde(r);
    const Vec10 qv = q * v;
    std::array<Vec10, 3> d;
    for (int k = 0; k < 3; ++k) {
      d[k] = Vec10::Zero();
      d[k].head<9>() = vec(r.matrix() * skew(Vec3::Unit(k)));
      g(k) = 2.0 * d[k].dot(qv);
    }
    for (int k = 0; k < 3; ++k) {
      for (int l = k; l < 3; ++l) {
        const Mat3 gk = skew(Vec3::Unit(k));
        const Mat3 gl = skew(Vec3::Unit(l));
        Vec10 dd = Vec10::Zero();
        dd.head<9>() = vec(0.5 * r.matrix() * (gk * gl + gl * gk));
        h(k, l) = h(l, k) = 2.0 * d[k].dot(q * d[l]) + 2.0 * dd.dot(qv);
      }
    }
  };

  Rotation r = start;
  double cost = cost_of(r);
  Vec3 g;
  Mat3 h;
  derivatives(r, g, h);
  double lambda = 0.0;
  for (int iter = 0; iter < max_iter && g.norm() > 1e-15 * (1.0 + cost); ++iter) {
    bool accepted = false;
    for (int attempt = 0; attempt < 40; ++attempt) {
      Mat3 a = h;
      a.diagonal().array() += lambda;
      const Eigen::LLT<Mat3> llt(a);
      if (llt.info() != Eigen::Success) {
        lambda = std::max(2.0 * lambda, 1e-12 * (1.0 + h.diagonal().cwiseAbs().maxCoeff()));
        continue;
      }
      const Rotation trial = project_to_so3((r * exp_so3(llt.solve(-g))).matrix());
      const double trial_cost = cost_of(trial);
      Vec3 trial_g;
      Mat3 trial_h;
      derivatives(trial, trial_g, trial_h);
      const bool lower = trial_cost < cost;
      const bool level = trial_cost <= cost + 1e-15 * (1.0 + cost) && trial_g.norm() < g.norm();
      if (lower || level) {
        r = trial;
        cost = trial_cost;
        g = trial_g;
        h = trial_h;
        lambda *= 0.1;
        if (lambda < 1e-14) lambda = 0.0;
        accepted = true;
        break;
      }
      lambda = std::max(10.0 * lambda, 1e-12 * (1.0 + h.diagonal().cwiseAbs().maxCoeff()));
    }
    if (!accepted) break;
  }
  return r;
}

namespace {

struct Residuals {
  Eigen::VectorXd r;
  Eigen::MatrixXd j;  // columns: rotation increment (3), translation (3)
};

Residuals residuals_and_jacobian(const MeasurementSet& m, const Extrinsic& theta) {
  const std::size_t n = m.size();
  Residuals out;
  out.r.resize(12 * n);
  out.j.resize(12 * n, 6);
  const Mat3& r = theta.rotation.matrix();
  const Vec3& t = theta.translation;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = m.pairs[i];
    const Mat3& ra = p.v_a.rotation.matrix();
    const Mat3& rb = p.v_b.rotation.matrix();
    const double sk = std::sqrt(p.kappa);
    const double st = std::sqrt(p.tau);
    const auto row = static_cast<Eigen::Index>(12 * i);
    out.r.segment<9>(row) = sk * vec(r * ra - rb * r);
    out.r.segment<3>(row + 9) = st * (r * p.v_a.translation + t - rb * t - p.v_b.translation);
    for (int k = 0; k < 3; ++k) {
      const Mat3 g = skew(Vec3::Unit(k));
      out.j.block<9, 1>(row, k) = sk * vec(r * g * ra - rb * r * g);
      out.j.block<3, 1>(row + 9, k) = st * (r * g * p.v_a.translation);
    }
    out.j.block<3, 3>(row + 9, 3) = st * (Mat3::Identity() - rb);
    out.j.block<9, 3>(row, 3).setZero();
  }
  return out;
}

}  // namespace

std::string to_string(Verdict v) {
  return v == Verdict::CertifiedGlobal ? "CertifiedGlobal" : "NotCertified";
}

Mat10 lagrangian_hessian(const Mat10& cost, const ConstraintSet& set, const Eigen::VectorXd& lambda,
                         double gamma) {
  if (lambda.size() != static_cast<Eigen::Index>(set.matrices.size())) {
    throw Error("lagrangian_hessian: one multiplier per constraint matrix is required");
  }
  Mat10 h = cost - gamma * set.homogenizer;
  for (std::size_t k = 0; k < set.matrices.size(); ++k) {
    h += lambda(static_cast<Eigen::Index>(k)) * set.matrices[k];
  }
  return 0.5 * (h + h.transpose());
}

DualSolution solve_relaxation(const DataMatrix& d, const ConstraintSet& set, const Tolerances& tol) {
  sdp::Problem p;
  p.cost = d.normalized_q_tilde();
  for (const auto& a : set.matrices) {
    p.constraints.emplace_back(a);
    p.rhs.push_back(0.0);
  }
  p.constraints.emplace_back(set.homogenizer);
  p.rhs.push_back(1.0);

  sdp::Options so;
  so.tol_feas = tol.tol_feas;
  so.tol_gap = tol.tol_gap;
  so.max_iter = tol.max_iter;

  DualSolution out;
  out.sdp = sdp::solve(p, so);
  const auto k = static_cast<Eigen::Index>(set.matrices.size());
  // Standard-form dual S = C - sum y_k A_k - y_E E maps to lambda = -y, gamma = y_E.
  out.lambda = -out.sdp.y.head(k);
  out.gamma = out.sdp.y(k);
  out.hessian = lagrangian_hessian(p.cost, set, out.lambda, out.gamma);

  // For fixed lambda, the largest gamma keeping H PSD is the Schur complement
  // of the rotation block (E only touches the y-y entry). Moving gamma there
  // yields the tightest valid bound for these multipliers.
  const Mat9 h_rr = out.hessian.topLeftCorner<9, 9>();
  const Eigen::SelfAdjointEigenSolver<Mat9> eig_rr(h_rr);
  if (out.hessian.allFinite() && eig_rr.eigenvalues()(0) > 1e-10) {
    const Vec9 h_ry = out.hessian.block<9, 1>(0, kReducedY);
    const Vec9 z = eig_rr.eigenvectors() * eig_rr.eigenvalues().cwiseInverse().asDiagonal() *
                   eig_rr.eigenvectors().transpose() * h_ry;
    const double shift = out.hessian(kReducedY, kReducedY) - h_ry.dot(z);
    if (std::isfinite(shift)) {
      out.gamma += shift;
      out.hessian = lagrangian_hessian(p.cost, set, out.lambda, out.gamma);
    }
  }
  return out;
}

Extraction extract_solution(const Mat10& x_primal, double rank_ratio) {
  Extraction out = extract_unchecked(x_primal);
  if (!(out.eigen_ratio <= rank_ratio)) {
    throw RankDeficiencyAmbiguous("primal matrix is not rank one: lambda2/lambda1 = " +
                                  std::to_string(out.eigen_ratio));
  }
  return out;
}

Extraction extract_from_nullspace(const Mat10& hessian) {
  const Eigen::SelfAdjointEigenSolver<Mat10> eig(0.5 * (hessian + hessian.transpose()));
  return extract_from_vector(eig.eigenvectors().col(0));
}

Vec3 recover_translation(const DataMatrix& d, const Vec10& r_tilde) {
  const Mat3 q_tt = d.q_tt / d.scale;
  const Eigen::LLT<Mat3> llt(q_tt);
  if (llt.info() != Eigen::Success || !(d.q_tt_condition <= 1e12)) {
    throw SingularQtt("cannot recover translation: Q_tt is singular");
  }
  return -llt.solve((d.q_t_rtilde / d.scale) * r_tilde);
}

double evaluate_cost(const MeasurementSet& m, const Extrinsic& theta) {
  const Mat3& r = theta.rotation.matrix();
  const Vec3& t = theta.translation;
  double cost = 0.0;
  for (const auto& p : m.pairs) {
    const Mat3& rb = p.v_b.rotation.matrix();
    cost += p.kappa * (r * p.v_a.rotation.matrix() - rb * r).squaredNorm();
    cost += p.tau * (r * p.v_a.translation + t - rb * t - p.v_b.translation).squaredNorm();
  }
  return cost;
}

Eigen::Matrix<double, 6, 1> cost_gradient(const MeasurementSet& m, const Extrinsic& theta) {
  const Residuals res = residuals_and_jacobian(m, theta);
  return 2.0 * res.j.transpose() * res.r;
}

CalibrationResult calibrate(const MeasurementSet& m, const CalibrationOptions& opts) {
  const auto start = Clock::now();
  CalibrationResult result;
  result.observability = check_observability(m, opts.observability);
  if (opts.strict_observability && !result.observability.observable) {
    throw NotObservable("measurements rotate about " +
                        std::to_string(result.observability.distinct_axis_count) +
                        " distinct axis/axes; at least two are required");
  }

  const DataMatrix d = assemble(m);
  const auto solve_start = Clock::now();
  const ConstraintSet set = constraint_catalog(opts.constraint_set);
  DualSolution dual = solve_relaxation(d, set, opts.tol);
  int sdp_iters = dual.sdp.iterations;
  if (dual.sdp.status == sdp::Status::Optimal && dual.sdp.x_primal.allFinite() &&
      extract_unchecked(dual.sdp.x_primal).eigen_ratio >= opts.tol.rank_ratio) {
    // X's spurious eigenvalues shrink like mu / lambda_2(H). When H is nearly
    // singular the default stopping point leaves the rank test undecided, so
    // solve once more at a tenfold tighter tolerance.
    Tolerances tighter = opts.tol;
    tighter.tol_feas /= 10.0;
    tighter.tol_gap /= 10.0;
    DualSolution retry = solve_relaxation(d, set, tighter);
    sdp_iters += retry.sdp.iterations;
    if (retry.sdp.status == sdp::Status::Optimal) dual = std::move(retry);
  }
  if (dual.sdp.status == sdp::Status::Infeasible) {
    throw SdpFailure("SDP relaxation reported infeasibility: " + dual.sdp.message);
  }
  if (!dual.sdp.x_primal.allFinite() || !dual.hessian.allFinite()) {
    throw SdpFailure("SDP solver returned non-finite iterates: " + dual.sdp.message);
  }

  const Tolerances& tol = opts.tol;
  const Extraction primal = extract_unchecked(dual.sdp.x_primal);
  const Extraction from_dual = extract_from_nullspace(dual.hessian);

  // Both readouts carry an error of order sqrt(gap); the same polish takes
  // each to its local minimizer, and the two must land on the same one.
  const Mat10 q_n = d.normalized_q_tilde();
  Extrinsic theta;
  theta.rotation = refine_rotation(q_n, primal.rotation);
  const Rotation dual_rotation = refine_rotation(q_n, from_dual.rotation);
  theta.translation = recover_translation(d, stack_r_tilde(theta.rotation));
  result.solve_stats.solver_time_seconds = seconds_since(solve_start);

  result.extrinsic = theta;
  result.cost = evaluate_cost(m, theta);

  Certificate& cert = result.certificate;
  cert.cost_scale = d.scale;
  cert.dual_bound = dual.gamma * d.scale;
  cert.gap = result.cost - cert.dual_bound;
  cert.extraction_residual = primal.residual;
  cert.eigen_ratio = primal.eigen_ratio;
  cert.sdp_status = sdp::to_string(dual.sdp.status);

  const Eigen::SelfAdjointEigenSolver<Mat10> h_eig(dual.hessian, Eigen::EigenvaluesOnly);
  cert.min_eig_h = h_eig.eigenvalues()(0);
  cert.nullspace_dim = static_cast<int>((h_eig.eigenvalues().array() < tol.nullspace_tol).count());
  cert.crosscheck_error = rotation_distance_frobenius(theta.rotation, dual_rotation);
  if (!std::isfinite(cert.crosscheck_error)) {
    cert.crosscheck_error = std::numeric_limits<double>::infinity();
  }

  const double cost_n = result.cost / d.scale;
  const double gap_n = cert.gap / d.scale;
  const bool certified = dual.sdp.status == sdp::Status::Optimal && gap_n < tol.gap_tol * (1.0 + std::abs(cost_n)) &&
                         cert.min_eig_h > -tol.psd_tol && cert.nullspace_dim == 1 &&
                         cert.eigen_ratio < tol.rank_ratio && cert.crosscheck_error <= tol.crosscheck_tol;
  cert.verdict = certified ? Verdict::CertifiedGlobal : Verdict::NotCertified;

  result.solve_stats.sdp_iters = sdp_iters;
  result.sdp_history = dual.sdp.history;
  result.solve_stats.wall_time_seconds = seconds_since(start);
  return result;
}

CandidateCheck certify_candidate(const MeasurementSet& m, const Extrinsic& candidate,
                                 const CalibrationOptions& opts) {
  const DataMatrix d = assemble(m);
  const DualSolution dual = solve_relaxation(d, constraint_catalog(opts.constraint_set), opts.tol);
  if (dual.sdp.status == sdp::Status::Infeasible || !std::isfinite(dual.gamma)) {
    throw SdpFailure("SDP relaxation failed: " + dual.sdp.message);
  }
  CandidateCheck out;
  out.sdp_status = dual.sdp.status;
  out.cost = evaluate_cost(m, candidate);
  out.dual_bound = dual.gamma * d.scale;
  out.gap = out.cost - out.dual_bound;
  const double lmi_min = Eigen::SelfAdjointEigenSolver<Mat10>(dual.hessian, Eigen::EigenvaluesOnly).eigenvalues()(0);
  // The bound is only valid if the dual point is feasible.
  out.globally_optimal = lmi_min > -opts.tol.psd_tol &&
                         out.gap / d.scale <= opts.tol.gap_tol * (1.0 + std::abs(out.cost) / d.scale);
  return out;
}

CalibrationResult local_solve(const MeasurementSet& m, const Extrinsic& init, const LocalOptions& opts) {
  const auto start = Clock::now();
  CalibrationResult result;
  result.observability = check_observability(m);

  Extrinsic theta = init;
  Residuals res = residuals_and_jacobian(m, theta);
  double cost = res.r.squaredNorm();
  double lambda = 1e-4;
  int iter = 0;
  bool converged = false;

  for (; iter < opts.max_iter; ++iter) {
    const Eigen::Matrix<double, 6, 6> jtj = res.j.transpose() * res.j;
    const Eigen::Matrix<double, 6, 1> jtr = res.j.transpose() * res.r;
    if (2.0 * jtr.norm() < opts.grad_tol * (1.0 + cost)) {
      converged = true;
      break;
    }

    bool accepted = false;
    while (!accepted) {
      Eigen::Matrix<double, 6, 6> a = jtj;
      a.diagonal() += lambda * (jtj.diagonal().array() + 1e-12).matrix();
      const Eigen::Matrix<double, 6, 1> step = a.ldlt().solve(-jtr);

      Extrinsic trial;
      trial.rotation = project_to_so3((theta.rotation * exp_so3(step.head<3>())).matrix());
      trial.translation = theta.translation + step.tail<3>();

      const double trial_cost = evaluate_cost(m, trial);
      if (trial_cost < cost) {
        const double decrease = cost - trial_cost;
        theta = trial;
        cost = trial_cost;
        res = residuals_and_jacobian(m, theta);
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (decrease <= 1e-16 * (1.0 + cost) && step.norm() < 1e-12) {
          converged = true;
        }
      } else {
        lambda *= 10.0;
        if (lambda > 1e12) {
          // No descent available at machine precision: stationary.
          converged = true;
          break;
        }
      }
    }
    if (converged) break;
  }

  if (!converged && opts.fail_on_max_iter) {
    throw MaxIterReached("local_solve did not converge in " + std::to_string(opts.max_iter) + " iterations");
  }

  result.extrinsic = theta;
  result.cost = cost;
  result.certificate.verdict = Verdict::NotCertified;
  result.certificate.sdp_status = "n/a";
  result.solve_stats.local_iters = iter;
  result.solve_stats.wall_time_seconds = seconds_since(start);
  result.solve_stats.solver_time_seconds = result.solve_stats.wall_time_seconds;
  return result;
}

}  // namespace certcal
