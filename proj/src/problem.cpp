#include "certcal/problem.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "certcal/errors.hpp"
#include "certcal/json_io.hpp"

namespace certcal {

namespace {

using nlohmann::json;

template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    if (!rec.is_object()) {
      throw ParseError(line_no, "record is not a JSON object");
    }
    try {
      fn(rec);
    } catch (const InvalidRotation& e) {
      throw InvalidRotation("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(line_no, e.what());
    }
  }
}

double positive_weight(const json& rec, const char* key) {
  if (!rec.contains(key)) {
    return 1.0;
  }
  const double w = rec.at(key).get<double>();
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw Error(std::string(key) + " must be a positive finite number");
  }
  return w;
}

}  // namespace

MeasurementSet load_measurements(std::istream& in) {
  MeasurementSet m;
  for_each_record(in, [&](const json& rec) {
    RelativeMotionPair p;
    p.v_a = transform_from_json(rec.at("a"), 1e-6);
    p.v_b = transform_from_json(rec.at("b"), 1e-6);
    p.kappa = positive_weight(rec, "kappa");
    p.tau = positive_weight(rec, "tau");
    m.pairs.push_back(p);
  });
  if (m.empty()) {
    throw EmptyInput("no measurement records in input");
  }
  return m;
}

void write_measurements(std::ostream& out, const MeasurementSet& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto& p = m.pairs[i];
    json rec;
    rec["t"] = i + 1;
    rec["a"] = transform_to_json(p.v_a);
    rec["b"] = transform_to_json(p.v_b);
    rec["kappa"] = p.kappa;
    rec["tau"] = p.tau;
    out << rec.dump() << '\n';
  }
}

std::vector<Transform> load_trajectory(std::istream& in) {
  std::vector<Transform> poses;
  for_each_record(in, [&](const json& rec) { poses.push_back(transform_from_json(rec.at("pose"), 1e-6)); });
  if (poses.empty()) {
    throw EmptyInput("no pose records in input");
  }
  return poses;
}

void write_trajectory(std::ostream& out, const std::vector<Transform>& poses) {
  for (std::size_t i = 0; i < poses.size(); ++i) {
    json rec;
    rec["t"] = i;
    rec["pose"] = transform_to_json(poses[i]);
    out << rec.dump() << '\n';
  }
}

MeasurementSet relative_motions_from_trajectories(const std::vector<Transform>& poses_a,
                                                  const std::vector<Transform>& poses_b) {
  if (poses_a.size() != poses_b.size()) {
    throw LengthMismatch("trajectories have " + std::to_string(poses_a.size()) + " and " +
                         std::to_string(poses_b.size()) + " poses");
  }
  if (poses_a.size() < 3) {
    throw TooShort("at least 3 poses per trajectory are required");
  }
  MeasurementSet m;
  m.pairs.reserve(poses_a.size() - 1);
  for (std::size_t t = 1; t < poses_a.size(); ++t) {
    RelativeMotionPair p;
    p.v_a = compose(invert(poses_a[t - 1]), poses_a[t]);
    p.v_b = compose(invert(poses_b[t - 1]), poses_b[t]);
    m.pairs.push_back(p);
  }
  return m;
}

ObservabilityReport check_observability(const MeasurementSet& m, const ObservabilityOptions& opts) {
  ObservabilityReport report;

  std::vector<Vec3> axes;
  for (const auto& p : m.pairs) {
    const AxisAngle aa = axis_angle_from_rotation(p.v_a.rotation);
    report.rotation_magnitudes.push_back(aa.angle);
    if (aa.angle > opts.angle_tol) {
      axes.push_back(aa.axis);
    }
  }

  auto separation = [](const Vec3& u, const Vec3& v) {
    return std::acos(std::clamp(std::abs(u.dot(v)), 0.0, 1.0));
  };

  // Greedy clustering: an axis starts a new cluster if it is farther than
  // axis_tol from every existing representative.
  std::vector<Vec3> reps;
  for (const auto& a : axes) {
    const bool seen = std::any_of(reps.begin(), reps.end(),
                                  [&](const Vec3& r) { return separation(a, r) <= opts.axis_tol; });
    if (!seen) {
      reps.push_back(a);
    }
  }
  for (std::size_t i = 0; i < axes.size(); ++i) {
    for (std::size_t j = i + 1; j < axes.size(); ++j) {
      report.max_axis_angle_between = std::max(report.max_axis_angle_between, separation(axes[i], axes[j]));
    }
  }
  report.distinct_axis_count = static_cast<int>(reps.size());
  report.observable = report.distinct_axis_count >= 2;

  Mat3 q_tt = Mat3::Zero();
  for (const auto& p : m.pairs) {
    const Mat3 d = Mat3::Identity() - p.v_b.rotation.matrix();
    q_tt += p.tau * d.transpose() * d;
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(q_tt, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(2);
  report.condition_estimate = (lo > 0.0 && hi > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
  return report;
}

}  // namespace certcal
