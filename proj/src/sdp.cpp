#include "certcal/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "certcal/errors.hpp"

namespace certcal::sdp {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kDependenceTol = 1e-10;

double inner(const MatrixXd& a, const MatrixXd& b) { return a.cwiseProduct(b).sum(); }

MatrixXd sym(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

void validate(const Problem& p) {
  const auto n = p.cost.rows();
  if (n == 0 || p.cost.cols() != n) {
    throw Error("sdp: cost must be a non-empty square matrix");
  }
  if (p.constraints.empty()) {
    throw Error("sdp: constraint list is empty");
  }
  if (p.constraints.size() != p.rhs.size()) {
    throw Error("sdp: constraint and rhs counts differ");
  }
  auto check_sym = [&](const MatrixXd& a, const char* what) {
    if (a.rows() != n || a.cols() != n) {
      throw Error(std::string("sdp: ") + what + " has the wrong size");
    }
    if (!a.allFinite() || (a - a.transpose()).norm() > 1e-12 * (1.0 + a.norm())) {
      throw Error(std::string("sdp: ") + what + " is not symmetric");
    }
  };
  check_sym(p.cost, "cost");
  for (const auto& a : p.constraints) {
    check_sym(a, "constraint");
  }
}

// Greedy Gram-Schmidt over constraint matrices in input order. Returns the
// indices kept; sets `consistent` to false when a dropped constraint's rhs
// does not follow from the kept ones.
std::vector<int> independent_subset(const Problem& p, bool& consistent) {
  const int m = p.num_constraints();
  const auto n = p.dimension();
  std::vector<int> keep;
  MatrixXd basis(n * n, 0);
  MatrixXd kept_vecs(n * n, 0);
  consistent = true;
  for (int k = 0; k < m; ++k) {
    const VectorXd v = Eigen::Map<const VectorXd>(p.constraints[k].data(), n * n);
    const double vnorm = v.norm();
    if (vnorm == 0.0) {
      if (std::abs(p.rhs[k]) > kDependenceTol) consistent = false;
      continue;
    }
    VectorXd r = v;
    for (int pass = 0; pass < 2; ++pass) {
      r -= basis * (basis.transpose() * r);
    }
    if (r.norm() > kDependenceTol * vnorm) {
      basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
      basis.col(basis.cols() - 1) = r / r.norm();
      kept_vecs.conservativeResize(Eigen::NoChange, kept_vecs.cols() + 1);
      kept_vecs.col(kept_vecs.cols() - 1) = v;
      keep.push_back(k);
    } else {
      const VectorXd coeff = kept_vecs.colPivHouseholderQr().solve(v);
      double implied = 0.0;
      for (int j = 0; j < static_cast<int>(keep.size()); ++j) {
        implied += coeff(j) * p.rhs[keep[j]];
      }
      if (std::abs(implied - p.rhs[k]) > 1e-8 * (1.0 + std::abs(p.rhs[k]))) consistent = false;
    }
  }
  return keep;
}

// Largest alpha with M + alpha * dM >= 0, given M = L L^T.
double max_step(const Eigen::LLT<MatrixXd>& llt, const MatrixXd& d) {
  const MatrixXd t = llt.matrixL().solve(d);
  const MatrixXd u = llt.matrixL().solve(MatrixXd(t.transpose()));
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym(u), Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues()(0);
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

struct Scaling {
  MatrixXd g;      // W = G G^T, G^{-1} X G^{-T} = G^T S G = diag(d)
  MatrixXd g_inv;
  MatrixXd w;
  VectorXd d;
};

bool nt_scaling(const Eigen::LLT<MatrixXd>& llt_x, const Eigen::LLT<MatrixXd>& llt_s, Scaling& sc) {
  const MatrixXd lx = llt_x.matrixL();
  const MatrixXd ls = llt_s.matrixL();
  const Eigen::JacobiSVD<MatrixXd> svd(ls.transpose() * lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  sc.d = svd.singularValues();
  if (!(sc.d.minCoeff() > 0.0) || !sc.d.allFinite()) return false;
  const MatrixXd& q = svd.matrixV();
  const VectorXd dis = sc.d.cwiseSqrt().cwiseInverse();
  sc.g = lx * q * dis.asDiagonal();
  // G^{-1} = D^{1/2} Q^T L_x^{-1}
  const MatrixXd lx_inv = llt_x.matrixL().solve(MatrixXd::Identity(lx.rows(), lx.cols()));
  sc.g_inv = sc.d.cwiseSqrt().asDiagonal() * q.transpose() * lx_inv;
  sc.w = sym(sc.g * sc.g.transpose());
  return sc.g.allFinite() && sc.g_inv.allFinite();
}

}  // namespace

std::string to_string(Status s) {
  switch (s) {
    case Status::Optimal:
      return "optimal";
    case Status::MaxIter:
      return "max_iter";
    case Status::NumericalFailure:
      return "numerical_failure";
    case Status::Infeasible:
      return "infeasible";
  }
  return "?";
}

Solution solve(const Problem& p, const Options& opts) {
  validate(p);
  const int n = p.dimension();
  Solution sol;
  sol.y = VectorXd::Zero(p.num_constraints());

  bool consistent = true;
  const std::vector<int> keep = independent_subset(p, consistent);
  sol.dropped_constraints = p.num_constraints() - static_cast<int>(keep.size());
  if (!consistent) {
    sol.status = Status::Infeasible;
    sol.message = "linearly dependent constraints have inconsistent right-hand sides";
    sol.x_primal = MatrixXd::Zero(n, n);
    sol.s_dual = p.cost;
    return sol;
  }

  const int m = static_cast<int>(keep.size());
  std::vector<MatrixXd> a(m);
  VectorXd b(m);
  for (int k = 0; k < m; ++k) {
    a[k] = sym(p.constraints[keep[k]]);
    b(k) = p.rhs[keep[k]];
  }
  const MatrixXd c = sym(p.cost);
  const double norm_b = b.norm();
  const double norm_c = c.norm();

  double xi = 1.0;
  double eta = std::max(1.0, norm_c);
  for (int k = 0; k < m; ++k) {
    xi = std::max(xi, (1.0 + std::abs(b(k))) / (1.0 + a[k].norm()));
    eta = std::max(eta, a[k].norm());
  }
  const MatrixXd id = MatrixXd::Identity(n, n);
  MatrixXd x = xi * id;
  MatrixXd s = eta * id;
  VectorXd y = VectorXd::Zero(m);
  const double x_blowup = 1e12 * (1.0 + x.trace());

  auto finish = [&](Status st, std::string msg) {
    sol.status = st;
    sol.message = std::move(msg);
    sol.x_primal = sym(x);
    sol.s_dual = sym(s);
    for (int k = 0; k < m; ++k) sol.y(keep[k]) = y(k);
    return sol;
  };

  Iterate last_step;
  for (int iter = 0;; ++iter) {
    VectorXd rp(m);
    for (int k = 0; k < m; ++k) rp(k) = b(k) - inner(a[k], x);
    MatrixXd rd = c - s;
    for (int k = 0; k < m; ++k) rd -= y(k) * a[k];

    const double pobj = inner(c, x);
    const double dobj = b.dot(y);
    const double xs = inner(x, s);
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    sol.primal_obj = pobj;
    sol.dual_obj = dobj;
    sol.kkt.primal = rp.norm() / (1.0 + norm_b);
    sol.kkt.dual = rd.norm() / (1.0 + norm_c);
    sol.kkt.complementarity = xs / denom;
    sol.iterations = iter;

    Iterate it = last_step;
    it.iter = iter;
    it.primal_obj = pobj;
    it.dual_obj = dobj;
    it.primal_residual = sol.kkt.primal;
    it.dual_residual = sol.kkt.dual;
    it.mu = xs / n;
    sol.history.push_back(it);

    if (sol.kkt.primal < opts.tol_feas && sol.kkt.dual < opts.tol_feas &&
        sol.kkt.complementarity < opts.tol_gap && std::abs(pobj - dobj) / denom < opts.tol_gap) {
      return finish(Status::Optimal, "converged");
    }
    if (iter >= opts.max_iter) {
      return finish(Status::MaxIter, "iteration limit reached");
    }
    if (x.trace() > x_blowup) {
      return finish(Status::Infeasible, "primal iterates diverge");
    }

    const Eigen::LLT<MatrixXd> llt_x(x);
    const Eigen::LLT<MatrixXd> llt_s(s);
    if (llt_x.info() != Eigen::Success || llt_s.info() != Eigen::Success) {
      return finish(Status::NumericalFailure, "iterate left the PSD cone");
    }
    Scaling sc;
    if (!nt_scaling(llt_x, llt_s, sc)) {
      return finish(Status::NumericalFailure, "NT scaling breakdown");
    }

    // Schur complement M_ij = tr(A_i W A_j W).
    std::vector<MatrixXd> waw(m);
    for (int k = 0; k < m; ++k) waw[k] = sym(sc.w * a[k] * sc.w);
    MatrixXd schur(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        schur(i, j) = schur(j, i) = inner(a[i], waw[j]);
      }
    }
    // Degenerate problems drive the Schur matrix to singularity as mu -> 0;
    // a rank-revealing solve takes over once LDLT meets a zero pivot.
    const Eigen::LDLT<MatrixXd> ldlt(schur);
    std::optional<Eigen::CompleteOrthogonalDecomposition<MatrixXd>> cod;
    if (ldlt.info() != Eigen::Success) {
      cod.emplace(schur);
    }
    const MatrixXd wrdw = sc.w * rd * sc.w;

    // Solves for (dX, dy, dS) given the complementarity right-hand side
    // dX + W dS W = rc.
    auto direction = [&](const MatrixXd& rc, MatrixXd& dx, VectorXd& dy, MatrixXd& ds) {
      VectorXd rhs(m);
      for (int k = 0; k < m; ++k) rhs(k) = rp(k) - inner(a[k], rc) + inner(a[k], wrdw);
      dy = cod ? VectorXd(cod->solve(rhs)) : VectorXd(ldlt.solve(rhs));
      ds = rd;
      for (int k = 0; k < m; ++k) ds -= dy(k) * a[k];
      ds = sym(ds);
      dx = sym(rc - sc.w * ds * sc.w);
      return dy.allFinite() && dx.allFinite() && ds.allFinite();
    };

    const double mu = xs / n;

    // Predictor.
    MatrixXd dx_aff, ds_aff;
    VectorXd dy_aff;
    if (!direction(-x, dx_aff, dy_aff, ds_aff)) {
      return finish(Status::NumericalFailure, "non-finite predictor direction");
    }
    const double ap_aff = std::min(1.0, max_step(llt_x, dx_aff));
    const double ad_aff = std::min(1.0, max_step(llt_s, ds_aff));
    const double mu_aff = inner(x + ap_aff * dx_aff, s + ad_aff * ds_aff) / n;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector in the scaled space: V o (dX~ + dS~) = sigma mu I - V^2 - (dX~a dS~a)_sym.
    const MatrixXd dxt = sc.g_inv * dx_aff * sc.g_inv.transpose();
    const MatrixXd dst = sc.g.transpose() * ds_aff * sc.g;
    MatrixXd r = -sym(dxt * dst);
    for (int i = 0; i < n; ++i) r(i, i) += sigma * mu - sc.d(i) * sc.d(i);
    MatrixXd h(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) h(i, j) = 2.0 * r(i, j) / (sc.d(i) + sc.d(j));
    }
    const MatrixXd rc = sym(sc.g * h * sc.g.transpose());

    MatrixXd dx, ds;
    VectorXd dy;
    if (!direction(rc, dx, dy, ds)) {
      return finish(Status::NumericalFailure, "non-finite corrector direction");
    }
    const double ap = std::min(1.0, opts.step_fraction * max_step(llt_x, dx));
    const double ad = std::min(1.0, opts.step_fraction * max_step(llt_s, ds));
    if (ap < 1e-12 && ad < 1e-12) {
      return finish(Status::NumericalFailure, "step length collapsed");
    }
    x = sym(x + ap * dx);
    s = sym(s + ad * ds);
    y += ad * dy;

    last_step.step_primal = ap;
    last_step.step_dual = ad;
    last_step.sigma = sigma;
  }
}

LmiCheck certify_lmi(const Eigen::MatrixXd& cost, const std::vector<Eigen::MatrixXd>& constraints,
                     const Eigen::VectorXd& y, double tol) {
  if (static_cast<Eigen::Index>(constraints.size()) != y.size()) {
    throw Error("certify_lmi: one multiplier per constraint is required");
  }
  MatrixXd h = cost;
  for (std::size_t k = 0; k < constraints.size(); ++k) h -= y(static_cast<Eigen::Index>(k)) * constraints[k];
  h = sym(h);
  const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(h, Eigen::EigenvaluesOnly);
  LmiCheck out;
  out.min_eig = eig.eigenvalues()(0);
  const double hnorm = eig.eigenvalues().cwiseAbs().maxCoeff();
  out.psd = out.min_eig > -tol * (1.0 + hnorm);
  return out;
}

}  // namespace certcal::sdp
