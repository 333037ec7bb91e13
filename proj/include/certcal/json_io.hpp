#pragma once

#include <json.hpp>

#include "certcal/geom.hpp"

namespace certcal {

/// {"R": [[r11, r12, r13], [...], [...]], "t": [x, y, z]}; R is row-major.
nlohmann::json transform_to_json(const Transform& tf);

/// Inverse of transform_to_json. Rotation must satisfy the SO(3) invariants to
/// rotation_tol, otherwise InvalidRotation. Shape errors surface as
/// nlohmann::json exceptions or certcal::Error.
Transform transform_from_json(const nlohmann::json& j, double rotation_tol = 1e-6);

}  // namespace certcal
