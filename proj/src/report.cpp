#include "certcal/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "certcal/json_io.hpp"

namespace certcal {

using nlohmann::json;

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// JSON has no infinity; a null there means "unbounded" (e.g. singular Q_tt).
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json quantiles_to_json(const sim::Quantiles& q) {
  return {{"min", q.min}, {"q1", q.q1}, {"median", q.median}, {"q3", q.q3}, {"max", q.max}, {"mean", q.mean}};
}

}  // namespace

json observability_to_json(const ObservabilityReport& obs) {
  return {{"observable", obs.observable},
          {"distinct_axis_count", obs.distinct_axis_count},
          {"max_axis_angle_between", obs.max_axis_angle_between},
          {"condition_estimate", finite_or_null(obs.condition_estimate)}};
}

json certificate_to_json(const Certificate& cert) {
  return {{"verdict", to_string(cert.verdict)},
          {"gap", cert.gap},
          {"dual_bound", cert.dual_bound},
          {"min_eig_H", cert.min_eig_h},
          {"nullspace_dim", cert.nullspace_dim},
          {"extraction_residual", cert.extraction_residual},
          {"eigen_ratio", cert.eigen_ratio},
          {"crosscheck_error", finite_or_null(cert.crosscheck_error)},
          {"cost_scale", cert.cost_scale},
          {"sdp_status", cert.sdp_status}};
}

json calibration_report(const CalibrationResult& r, ConstraintKind set, const ReportOptions& opts) {
  const double wall = opts.include_timing ? r.solve_stats.wall_time_seconds : 0.0;
  const double solver = opts.include_timing ? r.solve_stats.solver_time_seconds : 0.0;
  return {{"schema_version", kSchemaVersion},
          {"constraint_set", to_string(set)},
          {"theta", transform_to_json(r.extrinsic)},
          {"cost", r.cost},
          {"certificate", certificate_to_json(r.certificate)},
          {"observability", observability_to_json(r.observability)},
          {"solve_stats",
           {{"sdp_iters", r.solve_stats.sdp_iters},
            {"local_iters", r.solve_stats.local_iters},
            {"wall_time_seconds", wall},
            {"solver_time_seconds", solver}}}};
}

json candidate_report(const CandidateCheck& c, ConstraintKind set) {
  return {{"schema_version", kSchemaVersion},
          {"constraint_set", to_string(set)},
          {"cost", c.cost},
          {"dual_bound", c.dual_bound},
          {"gap", c.gap},
          {"globally_optimal", c.globally_optimal},
          {"sdp_status", sdp::to_string(c.sdp_status)}};
}

json ground_truth_report(const Extrinsic& theta, const sim::PathParams& path, const sim::NoiseModel& noise,
                         const ObservabilityReport& obs) {
  return {{"schema_version", kSchemaVersion},
          {"theta", transform_to_json(theta)},
          {"observable", obs.observable},
          {"observability", observability_to_json(obs)},
          {"path",
           {{"radius", path.radius},
            {"n_steps", path.n_steps},
            {"n_sinusoids", path.n_sinusoids},
            {"amplitude", path.amplitude},
            {"min_frequency", path.min_frequency},
            {"max_frequency", path.max_frequency},
            {"seed", path.seed}}},
          {"noise", {{"sigma_r", noise.sigma_r}, {"sigma_t", noise.sigma_t}, {"seed", noise.seed}}}};
}

void write_sdp_trace_csv(std::ostream& out, const std::vector<sdp::Iterate>& history) {
  out << "iter,primal_obj,dual_obj,primal_residual,dual_residual,mu,step_primal,step_dual,sigma\n";
  for (const auto& it : history) {
    out << it.iter << ',' << num(it.primal_obj) << ',' << num(it.dual_obj) << ',' << num(it.primal_residual) << ','
        << num(it.dual_residual) << ',' << num(it.mu) << ',' << num(it.step_primal) << ',' << num(it.step_dual)
        << ',' << num(it.sigma) << '\n';
  }
}

void write_path_csv(std::ostream& out, const sim::TerrainPath& path) {
  out << "step,x,y,z,r11,r12,r13,r21,r22,r23,r31,r32,r33\n";
  for (std::size_t k = 0; k < path.waypoints.size(); ++k) {
    const Transform& w = path.waypoints[k];
    out << k;
    for (int i = 0; i < 3; ++i) out << ',' << num(w.translation(i));
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) out << ',' << num(w.rotation.matrix()(i, j));
    }
    out << '\n';
  }
}

void write_ablation_csv(std::ostream& out, const sim::AblationReport& rep) {
  out << "variant,constraint_set,rotation_magnitude,translation_magnitude,trial,certified,gap,rotation_error\n";
  for (const auto& t : rep.trials) {
    out << t.variant << ',' << to_string(t.constraint_set) << ',' << num(t.rotation_magnitude) << ','
        << num(t.translation_magnitude) << ',' << t.trial << ',' << (t.certified ? 1 : 0) << ',' << num(t.gap)
        << ',' << num(t.rotation_error) << '\n';
  }
}

json ablation_summary(const sim::AblationReport& rep) {
  json cells = json::array();
  for (const auto& c : rep.cells) {
    cells.push_back({{"variant", c.variant},
                     {"constraint_set", to_string(c.constraint_set)},
                     {"rotation_magnitude", c.rotation_magnitude},
                     {"translation_magnitude", c.translation_magnitude},
                     {"trials", c.trials},
                     {"certified", c.certified},
                     {"percent", c.percent()}});
  }
  return {{"schema_version", kSchemaVersion},
          {"experiment", "ablation"},
          {"theta", transform_to_json(rep.theta)},
          {"cells", cells}};
}

void write_trials_csv(std::ostream& out, const std::vector<sim::TrialRecord>& trials, const ReportOptions& opts) {
  out << "seed,sigma_r,sigma_t,n,method,constraint_set,rotation_error,translation_error,cost,certified,wall_time\n";
  for (const auto& t : trials) {
    out << t.seed << ',' << num(t.sigma_r) << ',' << num(t.sigma_t) << ',' << t.n << ',' << t.method << ','
        << to_string(t.constraint_set) << ',' << num(t.rotation_error) << ',' << num(t.translation_error) << ','
        << num(t.cost) << ',' << (t.certified ? 1 : 0) << ',' << num(opts.include_timing ? t.wall_time : 0.0)
        << '\n';
  }
}

json sweep_summary(const sim::SweepReport& rep) {
  json cells = json::array();
  for (const auto& c : rep.cells) {
    cells.push_back({{"sigma_r", c.sigma_r},
                     {"sigma_t", c.sigma_t},
                     {"trials", c.trials},
                     {"certified", c.certified},
                     {"dominance_violations", c.dominance_violations},
                     {"max_cost_excess", c.max_cost_excess},
                     {"convex", {{"rotation_error", quantiles_to_json(c.convex_rotation)},
                                 {"translation_error", quantiles_to_json(c.convex_translation)}}},
                     {"local", {{"rotation_error", quantiles_to_json(c.local_rotation)},
                                {"translation_error", quantiles_to_json(c.local_translation)}}}});
  }
  return {{"schema_version", kSchemaVersion}, {"experiment", "noise-sweep"}, {"cells", cells}};
}

void write_heatmap_csv(std::ostream& out, const sim::HeatmapReport& rep) {
  out << "angle,distance,max_rotation_diff,max_translation_diff,max_cost_diff\n";
  for (const auto& c : rep.cells) {
    out << num(c.angle) << ',' << num(c.distance) << ',' << num(c.max_rotation_diff) << ','
        << num(c.max_translation_diff) << ',' << num(c.max_cost_diff) << '\n';
  }
}

json heatmap_summary(const sim::HeatmapReport& rep) {
  json cells = json::array();
  double worst = -std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : rep.cells) {
    cells.push_back({{"angle", c.angle},
                     {"distance", c.distance},
                     {"max_rotation_diff", c.max_rotation_diff},
                     {"max_translation_diff", c.max_translation_diff},
                     {"max_cost_diff", c.max_cost_diff}});
    worst = std::max({worst, c.max_rotation_diff, c.max_translation_diff});
    best = std::min({best, c.max_rotation_diff, c.max_translation_diff});
  }
  return {{"schema_version", kSchemaVersion},
          {"experiment", "heatmap"},
          {"theta", transform_to_json(rep.theta)},
          {"convex",
           {{"rotation_error", rep.convex_rotation_error},
            {"translation_error", rep.convex_translation_error},
            {"cost", rep.convex_cost},
            {"certified", rep.convex_certified}}},
          {"largest_difference", finite_or_null(worst)},
          {"smallest_difference", finite_or_null(best)},
          {"cells", cells}};
}

void write_runtime_csv(std::ostream& out, const sim::RuntimeReport& rep, const ReportOptions& opts) {
  write_trials_csv(out, rep.trials, opts);
}

json runtime_summary(const sim::RuntimeReport& rep, const ReportOptions& opts) {
  json rows = json::array();
  for (const auto& r : rep.rows) {
    if (opts.include_timing) {
      rows.push_back({{"n", r.n},
                      {"convex_seconds", quantiles_to_json(r.convex_seconds)},
                      {"local_seconds", quantiles_to_json(r.local_seconds)}});
    } else {
      rows.push_back({{"n", r.n}, {"convex_seconds", nullptr}, {"local_seconds", nullptr}});
    }
  }
  return {{"schema_version", kSchemaVersion}, {"experiment", "runtime"}, {"rows", rows}};
}

}  // namespace certcal
