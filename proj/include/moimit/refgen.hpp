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

#include <algorithm>
#include <fstream>
#include <span>
#include <sstream>

#include <Eigen/Dense>

#include "moimit/kinematics.hpp"
#include "moimit/motion_io.hpp"

namespace moimit {

/// Joint-space reference trajectory plus the FK positions of every frame.
struct ReferenceMotion {
  std::vector<JointVector> q;
  std::vector<FramePositions> x;
  double dt = 1.0 / kDefaultFps;

  std::size_t size() const { return q.size(); }
};

/// Builds a reference from joint angles, filling positions by FK.
inline ReferenceMotion make_reference(const KinematicChain& chain, std::vector<JointVector> q, double dt) {
  ReferenceMotion ref;
  ref.q = std::move(q);
  ref.dt = dt;
  ref.x.reserve(ref.q.size());
  for (const auto& qt : ref.q) ref.x.push_back(forward_kinematics(chain, qt));
  return ref;
}

struct InterpSmoothConfig {
  double gap_threshold = 0.1;     // rad, joint-space L2 distance between frames
  double step = 0.01;             // rad, target spacing of inserted frames
  double lowess_bandwidth = 0.05; // fraction of the sequence length

  void validate() const {
    if (!(gap_threshold > 0.0 && step > 0.0 && lowess_bandwidth > 0.0)) {
      throw InvalidArgument("refgen: gap_threshold, step and lowess_bandwidth must be positive");
    }
    if (!(step < gap_threshold)) throw InvalidArgument("refgen: step must be smaller than gap_threshold");
  }
};

// ---------------------------------------------------------------------------
// Inverse kinematics
// ---------------------------------------------------------------------------

struct IkOptions {
  double tolerance = 1e-4;     // m
  int max_iterations = 200;
  double nullspace_gain = 0.5; // fraction of the rest-pose error removed per iteration
  double max_step = 0.5;       // rad, largest joint update per iteration
};

struct IkResult {
  JointVector q;
  double residual = 0.0;  // end-effector distance to target, m
  int iterations = 0;
};

/// Damped least squares on the end-effector position with a null-space pull
/// toward `rest_pose`. Joint damping from the chain regularizes the task
/// step; the iterate is clamped to the joint limits after every update.
inline IkResult solve_ik_frame(const KinematicChain& chain, const Vec3& target, const JointVector& rest_pose,
                               const JointVector& warm_start, const IkOptions& opt = {}) {
  if (!target.allFinite()) throw InvalidArgument("solve_ik_frame: non-finite target");
  using Mat7 = Eigen::Matrix<double, kNumJoints, kNumJoints>;
  Mat7 damping = Mat7::Zero();
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    damping(j, j) = chain.joints[j].damping * chain.joints[j].damping;
  }

  JointVector q = clamp_to_limits(chain, warm_start);
  IkResult best{q, (target - end_effector(chain, q)).norm(), 0};
  for (int it = 0; it < opt.max_iterations; ++it) {
    const ChainPose pose = chain_pose(chain, q);
    const Vec3 err = target - pose.positions.back();
    const double norm = err.norm();
    if (norm < best.residual) best = {q, norm, it};
    if (norm < opt.tolerance) break;

    PositionJacobian J;
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      J.col(j) = pose.axes[j].cross(pose.positions.back() - pose.positions[j]);
    }
    // Joints pinned at a limit and pushed further out are dropped from the
    // step so the remaining joints take over the task.
    JointVector dq = JointVector::Zero();
    std::array<bool, kNumJoints> locked{};
    for (int pass = 0; pass < 3; ++pass) {
      PositionJacobian Ja = J;
      for (std::size_t j = 0; j < kNumJoints; ++j) {
        if (locked[j]) Ja.col(j).setZero();
      }
      dq = (Ja.transpose() * Ja + damping).ldlt().solve(Ja.transpose() * err);
      Eigen::CompleteOrthogonalDecomposition<PositionJacobian> cod(Ja);
      cod.setThreshold(1e-8);
      Mat7 nullspace = Mat7::Identity() - cod.pseudoInverse() * Ja;
      for (std::size_t j = 0; j < kNumJoints; ++j) {
        if (locked[j]) nullspace.row(j).setZero();
      }
      dq += nullspace * (opt.nullspace_gain * (rest_pose - q));
      bool changed = false;
      for (std::size_t j = 0; j < kNumJoints; ++j) {
        const bool at_lower = q[j] <= chain.joints[j].lower && dq[j] < 0.0;
        const bool at_upper = q[j] >= chain.joints[j].upper && dq[j] > 0.0;
        if (!locked[j] && (at_lower || at_upper)) locked[j] = changed = true;
      }
      if (!changed) break;
    }

    const double largest = dq.cwiseAbs().maxCoeff();
    if (largest > opt.max_step) dq *= opt.max_step / largest;
    q = clamp_to_limits(chain, q + dq);
    best.iterations = it + 1;
  }
  const double final_residual = (target - end_effector(chain, q)).norm();
  if (final_residual < best.residual) best.q = q, best.residual = final_residual;
  return best;
}

struct GeneratedReference {
  ReferenceMotion motion;
  std::vector<double> residuals;  // per-frame IK residual, m
};

/// World position the arm's shoulder (p1) is pinned to: the origin of the
/// frame after joint 0, which does not move with q0.
inline Vec3 shoulder_anchor(const KinematicChain& chain) {
  return forward_kinematics(chain, JointVector::Zero())[1];
}

/// Solves IK for the wrist p3 of every frame. Frame 0 starts from the
/// mid-range pose; each later frame uses the previous solution as both warm
/// start and rest pose.
inline GeneratedReference generate_reference(const KinematicChain& chain, const ArmMotion& arm,
                                             const IkOptions& opt = {}) {
  if (arm.frames.empty()) throw InvalidArgument("generate_reference: empty arm motion");
  const Vec3 anchor = shoulder_anchor(chain);
  GeneratedReference out;
  std::vector<JointVector> q;
  q.reserve(arm.frames.size());
  JointVector prev = chain.midpoint();
  for (const auto& f : arm.frames) {
    IkResult r = solve_ik_frame(chain, anchor + f[3], prev, prev, opt);
    q.push_back(r.q);
    out.residuals.push_back(r.residual);
    prev = r.q;
  }
  out.motion = make_reference(chain, std::move(q), 1.0 / arm.fps);
  return out;
}

// ---------------------------------------------------------------------------
// Natural cubic spline
// ---------------------------------------------------------------------------

/// S_i(x) = a_i + b_i (x - x_i) + c_i (x - x_i)^2 + d_i (x - x_i)^3 with
/// S'' = 0 at both ends.
class NaturalCubicSpline {
 public:
  NaturalCubicSpline(std::span<const double> x, std::span<const double> y) : x_(x.begin(), x.end()) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw InvalidArgument("NaturalCubicSpline: need >= 2 matching knots");
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (!(x[i + 1] > x[i])) throw InvalidArgument("NaturalCubicSpline: knots must increase");
    }
    const std::size_t segs = n - 1;
    a_.assign(y.begin(), y.begin() + segs);
    b_.resize(segs);
    c_.assign(n, 0.0);
    d_.resize(segs);

    std::vector<double> h(segs);
    for (std::size_t i = 0; i < segs; ++i) h[i] = x[i + 1] - x[i];

    // Thomas algorithm on the interior second-derivative system (c = S''/2).
    if (n > 2) {
      const std::size_t m = n - 2;
      std::vector<double> diag(m), upper(m), rhs(m);
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t i = k + 1;
        diag[k] = 2.0 * (h[i - 1] + h[i]);
        upper[k] = h[i];
        rhs[k] = 3.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
      }
      for (std::size_t k = 1; k < m; ++k) {
        const double w = h[k] / diag[k - 1];
        diag[k] -= w * upper[k - 1];
        rhs[k] -= w * rhs[k - 1];
      }
      c_[m] = rhs[m - 1] / diag[m - 1];
      for (std::size_t k = m - 1; k-- > 0;) c_[k + 1] = (rhs[k] - upper[k] * c_[k + 2]) / diag[k];
    }
    for (std::size_t i = 0; i < segs; ++i) {
      b_[i] = (y[i + 1] - y[i]) / h[i] - h[i] * (2.0 * c_[i] + c_[i + 1]) / 3.0;
      d_[i] = (c_[i + 1] - c_[i]) / (3.0 * h[i]);
    }
    c_.pop_back();
  }

  double operator()(double x) const {
    const std::size_t i = segment(x);
    const double u = x - x_[i];
    return a_[i] + u * (b_[i] + u * (c_[i] + u * d_[i]));
  }

  double second_derivative(double x) const {
    const std::size_t i = segment(x);
    return 2.0 * c_[i] + 6.0 * d_[i] * (x - x_[i]);
  }

 private:
  std::size_t segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, a_.size() - 1);
  }

  std::vector<double> x_, a_, b_, c_, d_;
};

/// Number of frames inserted into a gap of joint-space length `gap`.
inline std::size_t interpolation_count(double gap, const InterpSmoothConfig& cfg) {
  if (!(gap > cfg.gap_threshold)) return 0;
  // The 1e-9 slack keeps exact multiples of `step` from rounding up.
  const double n = std::ceil(gap / cfg.step - 1e-9);
  return n > 1.0 ? static_cast<std::size_t>(n) - 1 : 0;
}

/// Fills gaps wider than `gap_threshold` with samples from a per-joint
/// natural cubic spline over frame index. Original frames are kept as-is.
inline ReferenceMotion interpolate(const KinematicChain& chain, const ReferenceMotion& ref,
                                   const InterpSmoothConfig& cfg) {
  cfg.validate();
  const std::size_t T = ref.size();
  if (T < 2) throw InvalidArgument("interpolate: need at least 2 frames");

  std::vector<double> knots(T);
  for (std::size_t t = 0; t < T; ++t) knots[t] = static_cast<double>(t);
  std::vector<NaturalCubicSpline> splines;
  splines.reserve(kNumJoints);
  std::vector<double> values(T);
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    for (std::size_t t = 0; t < T; ++t) values[t] = ref.q[t][j];
    splines.emplace_back(knots, values);
  }

  std::vector<JointVector> q;
  q.reserve(T);
  for (std::size_t t = 0; t + 1 < T; ++t) {
    q.push_back(ref.q[t]);
    const std::size_t n = interpolation_count((ref.q[t + 1] - ref.q[t]).norm(), cfg);
    for (std::size_t k = 1; k <= n; ++k) {
      const double s = static_cast<double>(t) + static_cast<double>(k) / static_cast<double>(n + 1);
      JointVector qs;
      for (std::size_t j = 0; j < kNumJoints; ++j) qs[j] = splines[j](s);
      q.push_back(clamp_to_limits(chain, qs));
    }
  }
  q.push_back(ref.q.back());
  return make_reference(chain, std::move(q), ref.dt);
}

// ---------------------------------------------------------------------------
// LOWESS smoothing
// ---------------------------------------------------------------------------

/// Tricube-weighted local average of one series. Weights fall off with
/// frame-index distance over a half-width of `half_width` frames.
inline std::vector<double> lowess_series(std::span<const double> y, double half_width) {
  const std::size_t n = y.size();
  std::vector<double> out(y.begin(), y.end());
  if (!(half_width > 1.0)) return out;
  const auto reach = static_cast<std::ptrdiff_t>(std::ceil(half_width));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, ii - reach);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, ii + reach);
    double wsum = 0.0;
    double acc = 0.0;
    for (std::ptrdiff_t k = lo; k <= hi; ++k) {
      const double u = std::abs(static_cast<double>(k - ii)) / half_width;
      if (u >= 1.0) continue;
      const double t = 1.0 - u * u * u;
      const double w = t * t * t;
      wsum += w;
      acc += w * (y[static_cast<std::size_t>(k)] - y[i]);
    }
    // Averaging offsets from the center keeps constant stretches exact.
    out[i] = y[i] + acc / wsum;
  }
  return out;
}

inline ReferenceMotion smooth_lowess(const KinematicChain& chain, const ReferenceMotion& ref,
                                     const InterpSmoothConfig& cfg) {
  cfg.validate();
  const std::size_t T = ref.size();
  if (T < 3) throw InvalidArgument("smooth_lowess: need at least 3 frames");
  const double half_width = cfg.lowess_bandwidth * static_cast<double>(T);

  std::vector<JointVector> q(T);
  std::vector<double> series(T);
  for (std::size_t j = 0; j < kNumJoints; ++j) {
    for (std::size_t t = 0; t < T; ++t) series[t] = ref.q[t][j];
    const auto smoothed = lowess_series(series, half_width);
    for (std::size_t t = 0; t < T; ++t) q[t][j] = smoothed[t];
  }
  for (auto& qt : q) qt = clamp_to_limits(chain, qt);
  return make_reference(chain, std::move(q), ref.dt);
}

// ---------------------------------------------------------------------------
// Synthetic references
// ---------------------------------------------------------------------------

/// One period of a two-joint sinusoid (shoulder j1 and elbow j3) around a
/// bent nominal pose; the other joints stay at their nominal value.
inline ReferenceMotion sinusoid_reference(const KinematicChain& chain, std::size_t frames = 200,
                                          double phase = 0.0, double amplitude = 0.5) {
  JointVector nominal;
  nominal << 0.0, 0.6, 0.0, -1.2, 0.0, 0.6, 0.0;
  std::vector<JointVector> q(frames, nominal);
  for (std::size_t t = 0; t < frames; ++t) {
    const double w = 2.0 * M_PI * static_cast<double>(t) / static_cast<double>(frames) + phase;
    q[t][1] += amplitude * std::sin(w);
    q[t][3] += amplitude * std::sin(w + 0.5 * M_PI);
    q[t] = clamp_to_limits(chain, q[t]);
  }
  return make_reference(chain, std::move(q), 1.0 / 240.0);
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

/// Header `dt=<f> n_joints=7 n_frames=<T>`, then one line of 7 angles per
/// frame. Positions are recomputed by FK on load.
inline ReferenceMotion parse_reference(std::istream& in, const KinematicChain& chain) {
  std::string line;
  double dt = 0.0;
  long frames = -1;
  bool header = false;
  std::vector<JointVector> q;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    auto tokens = detail::split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (!header) {
      header = true;
      for (auto tok : tokens) {
        auto eq = tok.find('=');
        double v = 0.0;
        if (eq == std::string_view::npos || !detail::parse_double(tok.substr(eq + 1), v)) {
          throw ParseError("reference header: malformed token '" + std::string(tok) + "'");
        }
        auto key = tok.substr(0, eq);
        if (key == "dt") dt = v;
        else if (key == "n_joints" && v != static_cast<double>(kNumJoints)) {
          throw ParseError("reference header: n_joints must be 7");
        } else if (key == "n_frames") frames = static_cast<long>(v);
      }
      if (!(dt > 0.0)) throw ParseError("reference header: dt must be positive");
      continue;
    }
    if (tokens.size() != kNumJoints) {
      throw ParseError("reference frame " + std::to_string(row) + ": expected 7 values");
    }
    JointVector qt;
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      if (!detail::parse_double(tokens[j], qt[j]) || !std::isfinite(qt[j])) {
        throw ParseError("reference frame " + std::to_string(row) + ": bad value");
      }
    }
    q.push_back(qt);
    ++row;
  }
  if (!header) throw ParseError("reference: missing header");
  if (frames >= 0 && static_cast<std::size_t>(frames) != q.size()) {
    throw ParseError("reference: header says " + std::to_string(frames) + " frames, found " +
                     std::to_string(q.size()));
  }
  if (q.size() < 2) throw ParseError("reference: need at least 2 frames");
  return make_reference(chain, std::move(q), dt);
}

inline ReferenceMotion load_reference(const std::string& path, const KinematicChain& chain) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open reference file '" + path + "'");
  return parse_reference(in, chain);
}

inline void write_reference(std::ostream& out, const ReferenceMotion& ref) {
  out << "dt=" << detail::format_double(ref.dt) << " n_joints=7 n_frames=" << ref.size() << '\n';
  for (const auto& qt : ref.q) {
    for (std::size_t j = 0; j < kNumJoints; ++j) out << (j ? " " : "") << detail::format_double(qt[j]);
    out << '\n';
  }
}

inline void write_reference_positions(std::ostream& out, const ReferenceMotion& ref) {
  for (const auto& xt : ref.x) {
    bool first = true;
    for (const auto& p : xt) {
      for (int c = 0; c < 3; ++c) {
        out << (first ? "" : " ") << detail::format_double(p[c]);
        first = false;
      }
    }
    out << '\n';
  }
}

inline void save_reference(const std::string& path, const ReferenceMotion& ref) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write reference file '" + path + "'");
  write_reference(out, ref);
}

}  // namespace moimit
