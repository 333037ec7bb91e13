#pragma once

#include <iosfwd>

#include <json.hpp>

#include "certcal/sim.hpp"
#include "certcal/solver.hpp"

namespace certcal {

inline constexpr int kSchemaVersion = 1;

/// Controls whether wall-clock fields are written. With timing off they are
/// emitted as 0 so that two runs with the same seed compare byte for byte.
struct ReportOptions {
  bool include_timing = true;
};

nlohmann::json observability_to_json(const ObservabilityReport& obs);
nlohmann::json certificate_to_json(const Certificate& cert);
nlohmann::json calibration_report(const CalibrationResult& r, ConstraintKind set, const ReportOptions& opts = {});
nlohmann::json candidate_report(const CandidateCheck& c, ConstraintKind set);

/// Ground-truth metadata written next to simulated measurements.
nlohmann::json ground_truth_report(const Extrinsic& theta, const sim::PathParams& path, const sim::NoiseModel& noise,
                                   const ObservabilityReport& obs);

/// iter,primal_obj,dual_obj,primal_residual,dual_residual,mu,step_primal,step_dual,sigma
void write_sdp_trace_csv(std::ostream& out, const std::vector<sdp::Iterate>& history);

/// step,x,y,z,r11,...,r33 with the rotation row-major.
void write_path_csv(std::ostream& out, const sim::TerrainPath& path);

void write_ablation_csv(std::ostream& out, const sim::AblationReport& rep);
nlohmann::json ablation_summary(const sim::AblationReport& rep);

/// One row per trial: seed, sigma_r, sigma_t, n, method, constraint_set,
/// rotation_error, translation_error, cost, certified, wall_time.
void write_trials_csv(std::ostream& out, const std::vector<sim::TrialRecord>& trials, const ReportOptions& opts = {});
nlohmann::json sweep_summary(const sim::SweepReport& rep);

void write_heatmap_csv(std::ostream& out, const sim::HeatmapReport& rep);
nlohmann::json heatmap_summary(const sim::HeatmapReport& rep);

void write_runtime_csv(std::ostream& out, const sim::RuntimeReport& rep, const ReportOptions& opts = {});
nlohmann::json runtime_summary(const sim::RuntimeReport& rep, const ReportOptions& opts = {});

}  // namespace certcal
