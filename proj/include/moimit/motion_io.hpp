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
#include <limits>
#include <map>
#include <sstream>
#include <string>

#include "moimit/common.hpp"

namespace moimit {

inline constexpr std::size_t kNumKeypoints = 17;
inline constexpr std::size_t kNumArmPoints = 4;
inline constexpr double kDefaultFps = 30.0;

using KeypointFrame = std::array<Vec3, kNumKeypoints>;

/// Per-frame 3D positions of 17 body keypoints, in meters.
struct KeypointSequence {
  std::vector<KeypointFrame> frames;
  double fps = kDefaultFps;
};

enum class Side { kLeft, kRight };

inline Side parse_side(std::string_view name) {
  if (name == "left") return Side::kLeft;
  if (name == "right") return Side::kRight;
  throw InvalidArgument("unknown arm side '" + std::string(name) + "' (expected left|right)");
}

inline std::string_view to_string(Side side) { return side == Side::kLeft ? "left" : "right"; }

using ArmFrame = std::array<Vec3, kNumArmPoints>;

/// Arm sub-skeleton p0..p3 with the shoulder p1 as local origin.
///
/// p0 is the torso anchor that defines the vertical base segment, p2 the
/// elbow and p3 the wrist, which becomes the end-effector target.
struct ArmMotion {
  std::vector<ArmFrame> frames;
  Side side = Side::kRight;
  double fps = kDefaultFps;
};

/// Names of the keypoints used for p0..p3, in order.
inline constexpr std::array<std::string_view, kNumArmPoints> kArmPointNames = {"base", "shoulder",
                                                                                "elbow", "wrist"};

/// Maps `<side>_<name>` keys (e.g. `right_elbow`) to keypoint indices.
class KeypointIndexMap {
 public:
  KeypointIndexMap() = default;
  explicit KeypointIndexMap(std::map<std::string, int> entries) : entries_(std::move(entries)) {
    for (const auto& [key, idx] : entries_) {
      if (idx < 0 || idx >= static_cast<int>(kNumKeypoints)) {
        throw InvalidArgument("index map entry '" + key + "' = " + std::to_string(idx) +
                              " is outside [0, 16]");
      }
    }
  }

  int index(Side side, std::string_view name) const {
    std::string key = std::string(to_string(side)) + "_" + std::string(name);
    auto it = entries_.find(key);
    if (it == entries_.end()) throw InvalidArgument("index map has no entry for '" + key + "'");
    return it->second;
  }

  const std::map<std::string, int>& entries() const { return entries_; }

 private:
  std::map<std::string, int> entries_;
};

/// Human3.6M ordering: 0 hip, 1-3 right leg, 4-6 left leg, 7 spine, 8 thorax,
/// 9 neck, 10 head, 11-13 left arm, 14-16 right arm. The neck is used as
/// the base anchor for both sides.
inline KeypointIndexMap human36m_index_map() {
  return KeypointIndexMap({{"left_base", 9},
                           {"left_shoulder", 11},
                           {"left_elbow", 12},
                           {"left_wrist", 13},
                           {"right_base", 9},
                           {"right_shoulder", 14},
                           {"right_elbow", 15},
                           {"right_wrist", 16}});
}

inline KeypointIndexMap parse_index_map(std::istream& in) {
  std::map<std::string, int> entries;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto body = detail::trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("index map line " + std::to_string(lineno) + ": expected name=index");
    }
    auto key = detail::trim(body.substr(0, eq));
    auto value = detail::trim(body.substr(eq + 1));
    int idx = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), idx);
    if (key.empty() || ec != std::errc() || ptr != value.data() + value.size()) {
      throw ParseError("index map line " + std::to_string(lineno) + ": malformed entry '" +
                       std::string(body) + "'");
    }
    entries[std::string(key)] = idx;
  }
  return KeypointIndexMap(std::move(entries));
}

inline KeypointIndexMap load_index_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open index map '" + path + "'");
  return parse_index_map(in);
}

/// Reads the keypoint text format: an optional `fps=<f> n_keypoints=17`
/// header followed by one line of 51 numbers per frame.
inline KeypointSequence parse_keypoints(std::istream& in) {
  KeypointSequence seq;
  std::string line;
  bool header_seen = false;
  std::size_t frame = 0;
  while (std::getline(in, line)) {
    auto tokens = detail::split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (!header_seen && frame == 0 && std::isalpha(static_cast<unsigned char>(tokens[0][0])) &&
        tokens[0].find('=') != std::string_view::npos) {
      header_seen = true;
      for (auto tok : tokens) {
        auto eq = tok.find('=');
        if (eq == std::string_view::npos) throw ParseError("header: malformed token '" + std::string(tok) + "'");
        auto key = tok.substr(0, eq);
        auto value = tok.substr(eq + 1);
        double v = 0.0;
        if (!detail::parse_double(value, v)) {
          throw ParseError("header: malformed value for '" + std::string(key) + "'");
        }
        if (key == "fps") {
          if (!(std::isfinite(v) && v > 0.0)) throw ParseError("header: fps must be positive");
          seq.fps = v;
        } else if (key == "n_keypoints") {
          if (v != static_cast<double>(kNumKeypoints)) {
            throw ParseError("header: n_keypoints must be 17, got " + std::string(value));
          }
        }
      }
      continue;
    }
    if (tokens.size() != 3 * kNumKeypoints) {
      throw ParseError("frame " + std::to_string(frame) + ": expected 17 keypoints (51 values), got " +
                       std::to_string(tokens.size()) + " values");
    }
    KeypointFrame kp;
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
      for (int c = 0; c < 3; ++c) {
        double v = 0.0;
        if (!detail::parse_double(tokens[3 * k + c], v)) {
          throw ParseError("frame " + std::to_string(frame) + ", keypoint " + std::to_string(k) +
                           ": malformed number '" + std::string(tokens[3 * k + c]) + "'");
        }
        if (!std::isfinite(v)) {
          throw ParseError("frame " + std::to_string(frame) + ", keypoint " + std::to_string(k) +
                           ": non-finite coordinate");
        }
        kp[k][c] = v;
      }
    }
    seq.frames.push_back(kp);
    ++frame;
  }
  return seq;
}

inline KeypointSequence load_keypoints(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open keypoint file '" + path + "'");
  return parse_keypoints(in);
}

inline void write_keypoints(std::ostream& out, const KeypointSequence& seq) {
  out << "fps=" << detail::format_double(seq.fps) << " n_keypoints=17\n";
  for (const auto& kp : seq.frames) {
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
      for (int c = 0; c < 3; ++c) {
        if (k + c > 0) out << ' ';
        out << detail::format_double(kp[k][c]);
      }
    }
    out << '\n';
  }
}

inline void save_keypoints(const std::string& path, const KeypointSequence& seq) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write keypoint file '" + path + "'");
  write_keypoints(out, seq);
}

/// Subtracts one constant offset along `vertical_axis` so the lowest
/// coordinate over the whole clip becomes zero.
inline KeypointSequence ground_sequence(const KeypointSequence& seq, int vertical_axis = 2) {
  if (seq.frames.empty()) throw InvalidArgument("ground_sequence: empty sequence");
  if (vertical_axis < 0 || vertical_axis > 2) throw InvalidArgument("ground_sequence: bad vertical axis");
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& kp : seq.frames) {
    for (const auto& p : kp) lowest = std::min(lowest, p[vertical_axis]);
  }
  KeypointSequence out = seq;
  if (lowest == 0.0) return out;
  for (auto& kp : out.frames) {
    for (auto& p : kp) p[vertical_axis] -= lowest;
  }
  return out;
}

/// Selects p0..p3 for one side and translates every frame so the shoulder
/// sits at the origin.
inline ArmMotion extract_arm(const KeypointSequence& seq, Side side, const KeypointIndexMap& map) {
  std::array<int, kNumArmPoints> idx{};
  for (std::size_t i = 0; i < kNumArmPoints; ++i) idx[i] = map.index(side, kArmPointNames[i]);

  ArmMotion arm;
  arm.side = side;
  arm.fps = seq.fps;
  arm.frames.reserve(seq.frames.size());
  for (const auto& kp : seq.frames) {
    const Vec3 shoulder = kp[idx[1]];
    ArmFrame f;
    for (std::size_t i = 0; i < kNumArmPoints; ++i) f[i] = kp[idx[i]] - shoulder;
    f[1] = Vec3::Zero();
    arm.frames.push_back(f);
  }
  return arm;
}

inline ArmMotion extract_arm(const KeypointSequence& seq, std::string_view side,
                             const KeypointIndexMap& map) {
  return extract_arm(seq, parse_side(side), map);
}

}  // namespace moimit
