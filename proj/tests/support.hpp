#pragma once

#include <cstdint>

#include "certcal/geom.hpp"
#include "certcal/problem.hpp"
#include "certcal/sim.hpp"

namespace certcal::test {

struct Instance {
  MeasurementSet m;
  Extrinsic theta;
};

/// Terrain-path instance with a random extrinsic, both derived from `seed`.
inline Instance terrain_instance(std::uint64_t seed, int n, double sigma_r = 0.0, double sigma_t = 0.0,
                                 double amplitude = 1.5) {
  sim::PathParams p;
  p.n_steps = n;
  p.amplitude = amplitude;
  p.seed = sim::trial_seed(seed, 0);
  const sim::TerrainPath path = sim::generate_path(p);
  Instance out;
  out.theta = sim::random_extrinsic(sim::trial_seed(seed, 1));
  const auto [pa, pb] = sim::sensor_trajectories(path, out.theta);
  out.m = sim::corrupt(relative_motions_from_trajectories(pa, pb), {sigma_r, sigma_t, sim::trial_seed(seed, 2)});
  return out;
}

/// Four hand-written motions consistent with a fixed extrinsic, then
/// corrupted by fixed offsets. The reference optimum below was computed by an
/// independent dense least-squares assembly, an off-the-shelf conic solver
/// for the relaxation, and a 50-start quasi-Newton search on the full cost.
inline MeasurementSet reference_noisy_set() {
  const Rotation th_r = exp_so3(Vec3(0.3, -0.2, 0.5));
  const Vec3 th_t(0.4, -0.1, 0.25);
  const Vec3 rb[4] = {{0.5, 0, 0.1}, {0, 0.6, -0.2}, {0.2, -0.3, 0.7}, {0.4, 0.4, 0}};
  const Vec3 tb[4] = {{1, 0, 0.2}, {0, 1, -0.3}, {0.5, 0.5, 0.5}, {-0.3, 0.2, 1}};
  const Vec3 eps[4] = {{0.05, -0.03, 0.02}, {-0.04, 0.02, 0.06}, {0.03, 0.05, -0.02}, {-0.06, -0.01, 0.03}};
  const Vec3 dt[4] = {{0.05, -0.02, 0.01}, {0.0, 0.04, -0.03}, {-0.05, 0.02, 0.02}, {0.03, 0.03, -0.04}};
  MeasurementSet m;
  for (int i = 0; i < 4; ++i) {
    const Rotation r_b = exp_so3(rb[i]);
    const Mat3 r_a = th_r.matrix().transpose() * r_b.matrix() * th_r.matrix();
    const Vec3 t_a = th_r.matrix().transpose() * (r_b * th_t + tb[i] - th_t);
    RelativeMotionPair p;
    p.v_b = {r_b, tb[i]};
    p.v_a = {Rotation::from_matrix_unchecked(r_a * exp_so3(eps[i]).matrix()), t_a + dt[i]};
    m.pairs.push_back(p);
  }
  return m;
}

inline constexpr double kReferenceTraceQ = 36.04204072693003;
inline constexpr double kReferenceCostAtTruth = 0.047786435459237664;
inline constexpr double kReferenceOptimalCost = 0.0444921966693331;

inline Extrinsic reference_optimum() {
  Mat3 r;
  r << 0.8713943819041616, -0.4782726852907632, -0.1092111243904504,  //
      0.4218531391470725, 0.8441463675112078, -0.3308426200014024,    //
      0.2504231622227156, 0.24222334470978218, 0.9373452358122811;
  return {Rotation::from_matrix(r, 1e-9), Vec3(0.4102478499330268, -0.08411488873686869, 0.26022589452851586)};
}

}  // namespace certcal::test
