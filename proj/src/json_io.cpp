#include "certcal/json_io.hpp"

#include <cmath>

#include "certcal/errors.hpp"

namespace certcal {

using nlohmann::json;

json transform_to_json(const Transform& tf) {
  const Mat3& r = tf.rotation.matrix();
  json rows = json::array();
  for (int i = 0; i < 3; ++i) {
    rows.push_back({r(i, 0), r(i, 1), r(i, 2)});
  }
  return {{"R", rows}, {"t", {tf.translation.x(), tf.translation.y(), tf.translation.z()}}};
}

Transform transform_from_json(const json& j, double rotation_tol) {
  const json& rows = j.at("R");
  const json& t = j.at("t");
  if (!rows.is_array() || rows.size() != 3) {
    throw Error("\"R\" must be a 3x3 array");
  }
  if (!t.is_array() || t.size() != 3) {
    throw Error("\"t\" must be a 3-vector");
  }
  Mat3 m;
  for (int i = 0; i < 3; ++i) {
    const json& row = rows.at(i);
    if (!row.is_array() || row.size() != 3) {
      throw Error("\"R\" must be a 3x3 array");
    }
    for (int k = 0; k < 3; ++k) {
      m(i, k) = row.at(k).get<double>();
    }
  }
  Vec3 tv(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>());
  if (!m.allFinite() || !tv.allFinite()) {
    throw Error("non-finite value in transform");
  }
  // Tolerate serialization round-off: accept within tolerance, then snap to SO(3).
  Rotation::from_matrix(m, rotation_tol);
  return {project_to_so3(m), tv};
}

}  // namespace certcal
