#include "certcal/qcqp.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "certcal/errors.hpp"

namespace certcal {

namespace {

constexpr double kMaxQttCondition = 1e12;

int r_index(int row, int col) { return 3 * col + row; }

// Adds coeff * u_p * u_q to the quadratic form u^T A u, split symmetrically.
void add_bilinear(Mat10& a, int p, int q, double coeff) {
  a(p, q) += 0.5 * coeff;
  a(q, p) += 0.5 * coeff;
}

Eigen::Matrix<double, 9, 9> kron3(const Mat3& a, const Mat3& b) {
  Eigen::Matrix<double, 9, 9> k;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      k.block<3, 3>(3 * i, 3 * j) = a(i, j) * b;
    }
  }
  return k;
}

constexpr std::array<std::pair<int, int>, 6> kUpperPairs{
    {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};

}  // namespace

Vec9 vec(const Mat3& m) { return Eigen::Map<const Vec9>(m.data()); }

Mat3 unvec(const Eigen::Ref<const Vec9>& v) {
  Mat3 m;
  for (int c = 0; c < 3; ++c) {
    for (int r = 0; r < 3; ++r) {
      m(r, c) = v(r_index(r, c));
    }
  }
  return m;
}

Vec13 stack_x(const Extrinsic& theta, double y) {
  Vec13 x;
  x.segment<3>(kTOffset) = theta.translation;
  x.segment<9>(kROffset) = vec(theta.rotation.matrix());
  x(kYIndex) = y;
  return x;
}

Vec10 stack_r_tilde(const Rotation& r, double y) {
  Vec10 v;
  v.head<9>() = vec(r.matrix());
  v(kReducedY) = y;
  return v;
}

Mat9 rotation_block(const RelativeMotionPair& pair) {
  const Mat3 id = Mat3::Identity();
  return kron3(pair.v_a.rotation.matrix().transpose(), id) - kron3(id, pair.v_b.rotation.matrix());
}

Eigen::Matrix<double, 3, 13> translation_block(const RelativeMotionPair& pair) {
  Eigen::Matrix<double, 3, 13> m;
  m.block<3, 3>(0, kTOffset) = Mat3::Identity() - pair.v_b.rotation.matrix();
  const Vec3& ta = pair.v_a.translation;
  for (int j = 0; j < 3; ++j) {
    m.block<3, 3>(0, kROffset + 3 * j) = ta(j) * Mat3::Identity();
  }
  m.col(kYIndex) = -pair.v_b.translation;
  return m;
}

Mat13 assemble_q(const MeasurementSet& m) {
  Mat13 q = Mat13::Zero();
  for (const auto& p : m.pairs) {
    const Mat9 mr = rotation_block(p);
    q.block<9, 9>(kROffset, kROffset).noalias() += p.kappa * mr.transpose() * mr;
    const Eigen::Matrix<double, 3, 13> mt = translation_block(p);
    q.noalias() += p.tau * mt.transpose() * mt;
  }
  return 0.5 * (q + q.transpose());
}

DataMatrix assemble(const MeasurementSet& m) {
  if (m.size() < 2) {
    throw TooShort("calibration needs at least 2 relative motions");
  }
  DataMatrix d;
  d.q = assemble_q(m);
  d.scale = d.q.trace();
  if (!(d.scale > 0.0)) {
    throw SingularQtt("data matrix is zero: no motion in the measurements");
  }
  d.q_tt = d.q.block<3, 3>(kTOffset, kTOffset);
  d.q_t_rtilde = d.q.block<3, 10>(kTOffset, kROffset);

  const Mat13 qn = d.q / d.scale;
  const Mat3 qn_tt = qn.block<3, 3>(kTOffset, kTOffset);
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(qn_tt, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(2);
  d.q_tt_condition = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(d.q_tt_condition <= kMaxQttCondition)) {
    throw SingularQtt("translation block is singular (cond = " + std::to_string(d.q_tt_condition) +
                      "); sensor-b rotations do not span two axes");
  }

  const Eigen::LLT<Mat3> llt(qn_tt);
  if (llt.info() != Eigen::Success) {
    throw SingularQtt("translation block is not positive definite");
  }
  // q~ = Q_rr - Q_rt Q_tt^{-1} Q_tr = Q_rr - W^T W with W = L^{-1} Q_tr.
  const Eigen::Matrix<double, 3, 10> w = llt.matrixL().solve(qn.block<3, 10>(kTOffset, kROffset));
  Mat10 qt = qn.block<10, 10>(kROffset, kROffset) - w.transpose() * w;
  qt = 0.5 * (qt + qt.transpose());
  d.q_tilde = d.scale * qt;
  return d;
}

std::string to_string(ConstraintKind kind) {
  switch (kind) {
    case ConstraintKind::R:
      return "r";
    case ConstraintKind::RC:
      return "r+c";
    case ConstraintKind::RH:
      return "r+h";
    case ConstraintKind::RCH:
      return "r+c+h";
  }
  return "?";
}

ConstraintKind parse_constraint_kind(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "r") return ConstraintKind::R;
  if (lower == "r+c") return ConstraintKind::RC;
  if (lower == "r+h") return ConstraintKind::RH;
  if (lower == "r+c+h") return ConstraintKind::RCH;
  throw Error("unknown constraint set '" + std::string(s) + "' (expected r, r+c, r+h or r+c+h)");
}

ConstraintSet constraint_catalog(ConstraintKind kind) {
  ConstraintSet set;
  set.kind = kind;
  const bool with_columns = kind == ConstraintKind::RC || kind == ConstraintKind::RCH;
  const bool with_handedness = kind == ConstraintKind::RH || kind == ConstraintKind::RCH;

  // Row orthogonality: sum_k R(i,k) R(j,k) - delta_ij y^2 = 0.
  for (const auto& [i, j] : kUpperPairs) {
    Mat10 a = Mat10::Zero();
    for (int k = 0; k < 3; ++k) {
      add_bilinear(a, r_index(i, k), r_index(j, k), 1.0);
    }
    if (i == j) a(kReducedY, kReducedY) = -1.0;
    set.matrices.push_back(a);
    set.labels.push_back("row(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
  }

  if (with_columns) {
    // Column orthogonality: sum_k R(k,i) R(k,j) - delta_ij y^2 = 0.
    for (const auto& [i, j] : kUpperPairs) {
      Mat10 a = Mat10::Zero();
      for (int k = 0; k < 3; ++k) {
        add_bilinear(a, r_index(k, i), r_index(k, j), 1.0);
      }
      if (i == j) a(kReducedY, kReducedY) = -1.0;
      set.matrices.push_back(a);
      set.labels.push_back("col(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
    }
  }

  if (with_handedness) {
    // Columns: c_i x c_j - y c_k = 0 for (i, j, k) in cyclic(0, 1, 2).
    constexpr std::array<std::array<int, 3>, 3> kCyclic{{{0, 1, 2}, {1, 2, 0}, {2, 0, 1}}};
    for (const auto& [i, j, k] : kCyclic) {
      for (int m = 0; m < 3; ++m) {
        const int m1 = (m + 1) % 3;
        const int m2 = (m + 2) % 3;
        Mat10 a = Mat10::Zero();
        add_bilinear(a, r_index(m1, i), r_index(m2, j), 1.0);
        add_bilinear(a, r_index(m2, i), r_index(m1, j), -1.0);
        add_bilinear(a, kReducedY, r_index(m, k), -1.0);
        set.matrices.push_back(a);
        set.labels.push_back("hand(" + std::to_string(i + 1) + "x" + std::to_string(j + 1) + "=" +
                             std::to_string(k + 1) + ")[" + std::to_string(m + 1) + "]");
      }
    }
  }

  set.homogenizer(kReducedY, kReducedY) = 1.0;
  return set;
}

}  // namespace certcal
