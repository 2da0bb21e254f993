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

#include <fstream>
#include <sstream>

#include "moimit/common.hpp"

namespace moimit {

/// One revolute joint: rotation about `axis` (parent frame) followed by the
/// fixed translation `offset` to the next frame origin.
struct Joint {
  Vec3 axis = Vec3::UnitZ();
  Vec3 offset = Vec3::Zero();
  double lower = -M_PI;
  double upper = M_PI;
  double damping = 0.1;
  double rest = 0.0;

  double range() const { return upper - lower; }
  double midpoint() const { return 0.5 * (lower + upper); }
};

struct KinematicChain {
  std::array<Joint, kNumJoints> joints;
  Vec3 base_position = Vec3::Zero();
  Eigen::Quaterniond base_orientation = Eigen::Quaterniond::Identity();

  JointVector lower() const {
    JointVector v;
    for (std::size_t j = 0; j < kNumJoints; ++j) v[j] = joints[j].lower;
    return v;
  }
  JointVector upper() const {
    JointVector v;
    for (std::size_t j = 0; j < kNumJoints; ++j) v[j] = joints[j].upper;
    return v;
  }
  JointVector midpoint() const { return 0.5 * (lower() + upper()); }

  /// Sum of link offset lengths; an upper bound on reach from the base.
  double total_length() const {
    double s = 0.0;
    for (const auto& j : joints) s += j.offset.norm();
    return s;
  }
};

/// Model format: a base-pose line `px py pz qx qy qz qw`, then one line per
/// joint `ax ay az ox oy oz lower upper damping`. `#` starts a comment.
inline KinematicChain parse_chain(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = std::string_view(line).substr(0, line.find('#'));
    auto tokens = detail::split_ws(body);
    if (tokens.empty()) continue;
    std::vector<double> row;
    for (auto tok : tokens) {
      double v = 0.0;
      if (!detail::parse_double(tok, v) || !std::isfinite(v)) {
        throw ParseError("chain line " + std::to_string(lineno) + ": bad number '" + std::string(tok) + "'");
      }
      row.push_back(v);
    }
    const std::size_t expected = rows.empty() ? 7 : 9;
    if (row.size() != expected) {
      throw ParseError("chain line " + std::to_string(lineno) + ": expected " + std::to_string(expected) +
                       " values, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("chain: missing base-pose line");
  if (rows.size() - 1 != kNumJoints) {
    throw ParseError("chain: expected 7 joints, got " + std::to_string(rows.size() - 1));
  }

  KinematicChain chain;
  const auto& b = rows[0];
  chain.base_position = Vec3(b[0], b[1], b[2]);
  Eigen::Quaterniond q(b[6], b[3], b[4], b[5]);
  if (q.norm() < 1e-12) throw ParseError("chain: zero base quaternion");
  chain.base_orientation = q.normalized();
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    const auto& r = rows[j + 1];
    Joint& jt = chain.joints[j];
    Vec3 axis(r[0], r[1], r[2]);
    if (axis.norm() < 1e-12) throw ParseError("chain: joint j" + std::to_string(j) + " has a zero axis");
    jt.axis = axis.normalized();
    jt.offset = Vec3(r[3], r[4], r[5]);
    jt.lower = r[6];
    jt.upper = r[7];
    jt.damping = r[8];
    if (!(jt.lower < jt.upper)) {
      throw ParseError("chain: joint j" + std::to_string(j) + " has lower limit >= upper limit");
    }
    if (jt.damping < 0.0) throw ParseError("chain: joint j" + std::to_string(j) + " has negative damping");
    jt.rest = jt.midpoint();
  }
  return chain;
}

inline KinematicChain load_chain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open chain model '" + path + "'");
  return parse_chain(in);
}

/// World-frame origins and rotation axes of every joint for one configuration.
struct ChainPose {
  FramePositions positions;               // base, then frame after each joint
  std::array<Vec3, kNumJoints> axes;      // world rotation axis of each joint
};

inline ChainPose chain_pose(const KinematicChain& chain, const JointVector& q) {
  ChainPose pose;
  Eigen::Matrix3d R = chain.base_orientation.toRotationMatrix();
  Vec3 p = chain.base_position;
  pose.positions[0] = p;
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    const Joint& jt = chain.joints[j];
    pose.axes[j] = R * jt.axis;
    R = R * Eigen::AngleAxisd(q[j], jt.axis).toRotationMatrix();
    p += R * jt.offset;
    pose.positions[j + 1] = p;
  }
  return pose;
}

/// Base plus the 7 frame origins; the last entry is the end effector.
inline FramePositions forward_kinematics(const KinematicChain& chain, const JointVector& q) {
  return chain_pose(chain, q).positions;
}

inline Vec3 end_effector(const KinematicChain& chain, const JointVector& q) {
  return forward_kinematics(chain, q).back();
}

using PositionJacobian = Eigen::Matrix<double, 3, kNumJoints>;

/// Positional Jacobian of the end effector: column j is axis_j x (x_ee - x_j).
inline PositionJacobian jacobian(const KinematicChain& chain, const JointVector& q) {
  const ChainPose pose = chain_pose(chain, q);
  const Vec3& ee = pose.positions.back();
  PositionJacobian J;
  for (std::size_t j = 0; j < kNumJoints; ++j) J.col(j) = pose.axes[j].cross(ee - pose.positions[j]);
  return J;
}

inline JointVector clamp_to_limits(const KinematicChain& chain, const JointVector& q) {
  return q.cwiseMax(chain.lower()).cwiseMin(chain.upper());
}

inline bool within_limits(const KinematicChain& chain, const JointVector& q) {
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    if (q[j] < chain.joints[j].lower || q[j] > chain.joints[j].upper) return false;
  }
  return true;
}

}  // namespace moimit
