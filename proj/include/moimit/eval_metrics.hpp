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

#include <filesystem>
#include <fstream>
#include <span>

#include "moimit/imitation_env.hpp"
#include "moimit/kinematics.hpp"
#include "moimit/svg_plot.hpp"

namespace moimit {

/// Scalar summary (mean over frames) plus the per-frame values.
struct MetricSeries {
  double mean = 0.0;
  std::vector<double> per_frame;
};

namespace detail {

inline MetricSeries summarize(std::vector<double> per_frame) {
  MetricSeries m;
  if (!per_frame.empty()) {
    double s = 0.0;
    for (double v : per_frame) s += v;
    m.mean = s / static_cast<double>(per_frame.size());
  }
  m.per_frame = std::move(per_frame);
  return m;
}

inline void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw InvalidArgument(std::string(what) + ": series lengths differ (" + std::to_string(a) + " vs " +
                          std::to_string(b) + ")");
  }
}

}  // namespace detail

/// Signed sum over joints of q_ref - q_rbt per frame; no absolute value, so
/// opposite errors cancel.
template <typename JointVec>
MetricSeries similarity(std::span<const JointVec> q_ref, std::span<const JointVec> q_rbt) {
  detail::require_same_length(q_ref.size(), q_rbt.size(), "similarity");
  std::vector<double> per_frame;
  per_frame.reserve(q_ref.size());
  for (std::size_t t = 0; t < q_ref.size(); ++t) {
    detail::require_same_length(q_ref[t].size(), q_rbt[t].size(), "similarity joint count");
    per_frame.push_back((q_ref[t] - q_rbt[t]).sum());
  }
  return detail::summarize(std::move(per_frame));
}

/// Euclidean end-effector distance per frame, in meters.
inline MetricSeries end_effector_error(std::span<const Vec3> x_ref, std::span<const Vec3> x_rbt) {
  detail::require_same_length(x_ref.size(), x_rbt.size(), "end_effector_error");
  std::vector<double> per_frame;
  per_frame.reserve(x_ref.size());
  for (std::size_t t = 0; t < x_ref.size(); ++t) per_frame.push_back((x_ref[t] - x_rbt[t]).norm());
  return detail::summarize(std::move(per_frame));
}

/// Mean per-joint position error: (1/N) sum_i |x_ref_i - x_rbt_i| per frame.
/// `Frame` is any indexable range of Vec3 (array, vector, ...).
template <typename Frame>
MetricSeries mpjpe(std::span<const Frame> x_ref, std::span<const Frame> x_rbt) {
  detail::require_same_length(x_ref.size(), x_rbt.size(), "mpjpe");
  std::vector<double> per_frame;
  per_frame.reserve(x_ref.size());
  for (std::size_t t = 0; t < x_ref.size(); ++t) {
    const std::size_t n = std::size(x_ref[t]);
    detail::require_same_length(n, std::size(x_rbt[t]), "mpjpe joint count");
    if (n == 0) throw InvalidArgument("mpjpe: frame without joints");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += (x_ref[t][i] - x_rbt[t][i]).norm();
    per_frame.push_back(s / static_cast<double>(n));
  }
  return detail::summarize(std::move(per_frame));
}

struct MetricsReport {
  MetricSeries similarity;     // rad, signed
  MetricSeries end_effector;   // m
  MetricSeries mpjpe;          // m
  std::size_t n_frames = 0;
};

/// Joint-space series and FK positions extracted from an episode log.
struct EpisodeSeries {
  std::vector<JointVector> q_ref, q_rbt;
  std::vector<FramePositions> x_ref, x_rbt;
  std::vector<Vec3> ee_ref, ee_rbt;
};

inline EpisodeSeries episode_series(std::span<const EpisodeRecord> log, const KinematicChain& chain) {
  EpisodeSeries s;
  for (const auto& rec : log) {
    s.q_ref.push_back(rec.q_ref);
    s.q_rbt.push_back(rec.q_rbt);
    s.x_ref.push_back(forward_kinematics(chain, rec.q_ref));
    s.x_rbt.push_back(forward_kinematics(chain, rec.q_rbt));
    s.ee_ref.push_back(s.x_ref.back().back());
    s.ee_rbt.push_back(s.x_rbt.back().back());
  }
  return s;
}

inline MetricsReport compute_metrics(std::span<const EpisodeRecord> log, const KinematicChain& chain) {
  if (log.empty()) throw InvalidArgument("compute_metrics: empty episode log");
  const EpisodeSeries s = episode_series(log, chain);
  MetricsReport r;
  r.similarity = similarity<JointVector>(s.q_ref, s.q_rbt);
  r.end_effector = end_effector_error(s.ee_ref, s.ee_rbt);
  r.mpjpe = mpjpe<FramePositions>(s.x_ref, s.x_rbt);
  r.n_frames = log.size();
  return r;
}

/// `metric,name,value` rows. `extra` rows are appended verbatim as
/// (metric, name, value) triples.
inline void write_metrics_csv(std::ostream& out, const MetricsReport& r,
                              const std::vector<std::array<std::string, 3>>& extra = {}) {
  out << "metric,name,value\n";
  out << "delta_similarity,rad," << ::moimit::detail::format_double(r.similarity.mean) << '\n';
  out << "delta_end_eff,m," << ::moimit::detail::format_double(r.end_effector.mean) << '\n';
  out << "delta_mpjpe,m," << ::moimit::detail::format_double(r.mpjpe.mean) << '\n';
  out << "n_frames,count," << r.n_frames << '\n';
  for (const auto& row : extra) out << row[0] << ',' << row[1] << ',' << row[2] << '\n';
}

inline void write_metric_series_csv(std::ostream& out, const MetricsReport& r) {
  out << "frame,similarity,end_eff,mpjpe\n";
  for (std::size_t t = 0; t < r.n_frames; ++t) {
    out << t << ',' << ::moimit::detail::format_double(r.similarity.per_frame[t]) << ','
        << ::moimit::detail::format_double(r.end_effector.per_frame[t]) << ','
        << ::moimit::detail::format_double(r.mpjpe.per_frame[t]) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Episode logs
// ---------------------------------------------------------------------------

inline void write_episode_log(std::ostream& out, std::span<const EpisodeRecord> log) {
  out << "frame";
  for (std::size_t j = 0; j < kNumJoints; ++j) out << ",q_ref" << j;
  for (std::size_t j = 0; j < kNumJoints; ++j) out << ",q_rbt" << j;
  out << ",x_ref_ee_x,x_ref_ee_y,x_ref_ee_z,x_rbt_ee_x,x_rbt_ee_y,x_rbt_ee_z,reward,r_p,r_v,r_e\n";
  using ::moimit::detail::format_double;
  for (const auto& rec : log) {
    out << rec.frame;
    for (std::size_t j = 0; j < kNumJoints; ++j) out << ',' << format_double(rec.q_ref[j]);
    for (std::size_t j = 0; j < kNumJoints; ++j) out << ',' << format_double(rec.q_rbt[j]);
    for (int c = 0; c < 3; ++c) out << ',' << format_double(rec.x_ref_ee[c]);
    for (int c = 0; c < 3; ++c) out << ',' << format_double(rec.x_rbt_ee[c]);
    out << ',' << format_double(rec.reward.total) << ',' << format_double(rec.reward.position) << ','
        << format_double(rec.reward.velocity) << ',' << format_double(rec.reward.end_effector) << '\n';
  }
}

inline std::vector<EpisodeRecord> parse_episode_log(std::istream& in) {
  std::vector<EpisodeRecord> log;
  std::string line;
  if (!std::getline(in, line) || line.rfind("frame", 0) != 0) throw ParseError("episode log: missing header");
  constexpr std::size_t kCols = 1 + 2 * kNumJoints + 6 + 4;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (::moimit::detail::trim(line).empty()) continue;
    std::vector<double> v;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) comma = line.size();
      double x = 0.0;
      if (!::moimit::detail::parse_double(::moimit::detail::trim(std::string_view(line).substr(start, comma - start)), x)) {
        throw ParseError("episode log row " + std::to_string(row) + ": bad number");
      }
      v.push_back(x);
      start = comma + 1;
    }
    if (v.size() != kCols) throw ParseError("episode log row " + std::to_string(row) + ": wrong column count");
    EpisodeRecord rec;
    rec.frame = static_cast<std::size_t>(v[0]);
    for (std::size_t j = 0; j < kNumJoints; ++j) rec.q_ref[j] = v[1 + j];
    for (std::size_t j = 0; j < kNumJoints; ++j) rec.q_rbt[j] = v[1 + kNumJoints + j];
    const std::size_t o = 1 + 2 * kNumJoints;
    rec.x_ref_ee = Vec3(v[o], v[o + 1], v[o + 2]);
    rec.x_rbt_ee = Vec3(v[o + 3], v[o + 4], v[o + 5]);
    rec.reward = {v[o + 6], v[o + 7], v[o + 8], v[o + 9]};
    log.push_back(rec);
    ++row;
  }
  return log;
}

inline std::vector<EpisodeRecord> load_episode_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open episode log '" + path + "'");
  return parse_episode_log(in);
}

// ---------------------------------------------------------------------------
// Episodic difference curves
// ---------------------------------------------------------------------------

struct EpisodicCurves {
  std::vector<std::size_t> frames;
  std::vector<std::vector<double>> joint_angle_diff;    // [joint][t], q_ref - q_rbt
  std::vector<std::vector<double>> link_position_diff;  // [frame origin][t], |x_ref - x_rbt|
};

inline EpisodicCurves episodic_curves(std::span<const EpisodeRecord> log, const KinematicChain& chain) {
  if (log.empty()) throw InvalidArgument("episodic_curves: empty episode log");
  const EpisodeSeries s = episode_series(log, chain);
  EpisodicCurves c;
  c.joint_angle_diff.assign(kNumJoints, {});
  c.link_position_diff.assign(kNumFrames, {});
  for (std::size_t t = 0; t < log.size(); ++t) {
    c.frames.push_back(log[t].frame);
    for (std::size_t j = 0; j < kNumJoints; ++j) c.joint_angle_diff[j].push_back(s.q_ref[t][j] - s.q_rbt[t][j]);
    for (std::size_t i = 0; i < kNumFrames; ++i) {
      c.link_position_diff[i].push_back((s.x_ref[t][i] - s.x_rbt[t][i]).norm());
    }
  }
  return c;
}

/// Writes joint_angle_diff.csv/.svg and link_position_diff.csv/.svg into `dir`.
inline void write_episodic_curves(const EpisodicCurves& c, const std::filesystem::path& dir,
                                  const std::string& label = "") {
  std::filesystem::create_directories(dir);
  auto emit = [&](const std::string& stem, const std::vector<std::vector<double>>& series, const char* prefix,
                  const std::string& title, const std::string& unit) {
    std::ofstream csv(dir / (stem + ".csv"));
    if (!csv) throw Error("cannot write " + (dir / (stem + ".csv")).string());
    csv << "frame";
    for (std::size_t k = 0; k < series.size(); ++k) csv << ',' << prefix << k;
    csv << '\n';
    for (std::size_t t = 0; t < c.frames.size(); ++t) {
      csv << c.frames[t];
      for (const auto& s : series) csv << ',' << ::moimit::detail::format_double(s[t]);
      csv << '\n';
    }
    plot::LineChart chart{title + (label.empty() ? "" : " (" + label + ")"), "frame", unit, {}};
    std::vector<double> xs(c.frames.begin(), c.frames.end());
    for (std::size_t k = 0; k < series.size(); ++k) chart.series.push_back({prefix + std::to_string(k), xs, series[k]});
    plot::write_svg((dir / (stem + ".svg")).string(), chart);
  };
  emit("joint_angle_diff", c.joint_angle_diff, "j", "Joint angle difference, reference - robot", "rad");
  emit("link_position_diff", c.link_position_diff, "x", "Link position difference |reference - robot|", "m");
}

}  // namespace moimit
