// Copyright 2026 The moimit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "moimit/motion_io.hpp"

namespace moimit {

/// Target link lengths for the three arm links (p0-p1, p1-p2, p2-p3) and the
/// world vertical used for base matching.
struct RetargetConfig {
  std::array<double, 3> scale{0.34, 0.40, 0.40};
  Vec3 up_axis = Vec3::UnitZ();

  void validate() const {
    for (double k : scale) {
      if (!(std::isfinite(k) && k > 0.0)) throw InvalidArgument("retarget: scale factors must be positive");
    }
    if (std::abs(up_axis.norm() - 1.0) > 1e-9) throw InvalidArgument("retarget: up_axis must be a unit vector");
  }
};

/// Rotation taking unit vector `from` onto unit vector `to` (Rodrigues).
/// Anti-parallel inputs rotate by pi about an axis orthogonal to `to`.
inline Eigen::Matrix3d rotation_between(const Vec3& from, const Vec3& to) {
  const Vec3 a = from.normalized();
  const Vec3 b = to.normalized();
  const Vec3 axis = a.cross(b);
  const double s = axis.norm();
  const double c = a.dot(b);
  if (s < 1e-12) {
    if (c > 0.0) return Eigen::Matrix3d::Identity();
    // Any axis orthogonal to b; pick the coordinate axis least aligned with it.
    Eigen::Index i = 0;
    b.cwiseAbs().minCoeff(&i);
    const Vec3 u = b.cross(Vec3::Unit(i)).normalized();
    return 2.0 * u * u.transpose() - Eigen::Matrix3d::Identity();
  }
  const Vec3 k = axis / s;
  Eigen::Matrix3d K;
  K << 0.0, -k.z(), k.y(), k.z(), 0.0, -k.x(), -k.y(), k.x(), 0.0;
  return Eigen::Matrix3d::Identity() + s * K + (1.0 - c) * K * K;
}

/// Rotates every frame by the single rotation that aligns frame 0's base
/// segment p1->p0 with the up axis.
inline ArmMotion match_base(const ArmMotion& arm, const RetargetConfig& cfg) {
  cfg.validate();
  if (arm.frames.empty()) throw InvalidArgument("match_base: empty arm motion");
  const Vec3 base = arm.frames.front()[0] - arm.frames.front()[1];
  if (base.norm() < 1e-9) throw InvalidArgument("match_base: degenerate base segment in frame 0");
  const Eigen::Matrix3d R = rotation_between(base, cfg.up_axis);

  ArmMotion out = arm;
  for (auto& f : out.frames) {
    for (auto& p : f) p = R * p;
    f[1] = Vec3::Zero();
  }
  return out;
}

/// Replaces each link by scale[i] times its unit direction, rebuilt outward
/// from the shoulder at the origin.
inline ArmMotion rescale_links(const ArmMotion& arm, const RetargetConfig& cfg) {
  cfg.validate();
  ArmMotion out = arm;
  for (std::size_t t = 0; t < arm.frames.size(); ++t) {
    const ArmFrame& in = arm.frames[t];
    std::array<Vec3, 3> dir;
    for (std::size_t i = 0; i < 3; ++i) {
      const Vec3 link = in[i + 1] - in[i];
      const double len = link.norm();
      if (!(len > 1e-12)) {
        throw InvalidArgument("rescale_links: zero-length link " + std::to_string(i) + " in frame " +
                              std::to_string(t));
      }
      dir[i] = link / len;
    }
    ArmFrame& f = out.frames[t];
    f[1] = Vec3::Zero();
    f[0] = f[1] - cfg.scale[0] * dir[0];
    f[2] = f[1] + cfg.scale[1] * dir[1];
    f[3] = f[2] + cfg.scale[2] * dir[2];
  }
  return out;
}

}  // namespace moimit
