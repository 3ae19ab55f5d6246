#include "evline/triangulate.hpp"

#include <algorithm>
#include <cmath>

#include "evline/io.hpp"
#include "evline/pose.hpp"

namespace evline::mapping {

namespace {

struct CameraRows {
  Eigen::RowVector3d lateral;  // P[0,:]
  Eigen::RowVector3d depth;    // P[1,:]
};

CameraRows camera_rows(const core::Pose2& pose, const TriangulationConfig& cfg) {
  double ct = std::cos(pose.theta);
  double st = std::sin(pose.theta);
  double cx = pose.x + ct * cfg.ext_x - st * cfg.ext_y;
  double cy = pose.y + st * cfg.ext_x + ct * cfg.ext_y;
  double theta = pose.theta + cfg.ext_theta;
  double lx = std::cos(theta), ly = std::sin(theta);   // image-lateral axis
  double dx = -std::sin(theta), dy = std::cos(theta);  // viewing/depth axis
  CameraRows rows;
  rows.lateral << lx, ly, -(lx * cx + ly * cy);
  rows.depth << dx, dy, -(dx * cx + dy * cy);
  return rows;
}

std::vector<std::size_t> pick_samples(std::size_t n, int max_samples) {
  std::vector<std::size_t> idx;
  if (max_samples < 2) max_samples = 2;
  if (n <= std::size_t(max_samples)) {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    return idx;
  }
  idx.reserve(max_samples);
  for (int j = 0; j < max_samples; ++j) {
    idx.push_back(std::size_t(core::round_half_up(double(j) * double(n - 1) /
                                                  double(max_samples - 1))));
  }
  return idx;
}

Eigen::Matrix<double, Eigen::Dynamic, 3> build_rows(const track::Track& tr,
                                                    const core::PoseLog& poses,
                                                    const core::CameraIntrinsics& intr,
                                                    const TriangulationConfig& cfg,
                                                    std::vector<CameraRows>* rows_out) {
  if (tr.samples.size() < 2) {
    throw TooShort("track has " + std::to_string(tr.samples.size()) + " samples, need 2");
  }
  auto idx = pick_samples(tr.samples.size(), cfg.max_samples);
  Eigen::Matrix<double, Eigen::Dynamic, 3> a(idx.size(), 3);
  if (rows_out) rows_out->reserve(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const track::TimedPos& sp = tr.samples[idx[k]];
    core::Pose2 pose = core::interpolate_pose(poses, sp.t);
    CameraRows rows = camera_rows(pose, cfg);
    double s = (sp.x - intr.u0) / intr.alpha_x;
    a.row(k) = s * rows.depth - rows.lateral;
    if (rows_out) rows_out->push_back(rows);
  }
  return a;
}

}  // namespace

Eigen::Matrix<double, Eigen::Dynamic, 3> build_dlt_matrix(const track::Track& tr,
                                                          const core::PoseLog& poses,
                                                          const core::CameraIntrinsics& intr,
                                                          const TriangulationConfig& cfg) {
  return build_rows(tr, poses, intr, cfg, nullptr);
}

Landmark triangulate(const track::Track& tr, const core::PoseLog& poses,
                     const core::CameraIntrinsics& intr, const TriangulationConfig& cfg) {
  std::vector<CameraRows> rows;
  auto a = build_rows(tr, poses, intr, cfg, &rows);
  Eigen::JacobiSVD<Eigen::Matrix<double, Eigen::Dynamic, 3>> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(1) <= sv(0) * 1e-12) {
    throw DegenerateGeometry("system matrix rank below 2");
  }
  Eigen::Vector3d xh = svd.matrixV().col(2);  // unit norm
  if (std::abs(xh(2)) < 1e-9) throw DegenerateGeometry("point at infinity");
  Eigen::Vector3d x = xh / xh(2);

  std::size_t behind = 0;
  double depth_sum = 0.0;
  for (const CameraRows& r : rows) {
    double depth = r.depth.dot(x);
    depth_sum += depth;
    if (depth <= 0.0) ++behind;
  }
  if (2 * behind > rows.size()) throw BehindCamera("structure behind the camera");
  if (depth_sum / double(rows.size()) < cfg.min_depth) {
    throw BehindCamera("mean depth below min_depth");
  }

  Landmark lm;
  lm.x = x(0);
  lm.y = x(1);
  lm.n_obs = int(rows.size());
  lm.t_first = tr.samples.front().t;
  lm.t_last = tr.samples.back().t;
  lm.residual = sv(2);
  return lm;
}

void accumulate_map(LandmarkMap& map, Landmark lm) {
  while (true) {
    int best = -1;
    double best_d2 = map.merge_radius * map.merge_radius;
    for (std::size_t i = 0; i < map.landmarks.size(); ++i) {
      double dx = map.landmarks[i].x - lm.x;
      double dy = map.landmarks[i].y - lm.y;
      double d2 = dx * dx + dy * dy;
      if (d2 <= best_d2 && (best < 0 || d2 < best_d2)) {
        best = int(i);
        best_d2 = d2;
      }
    }
    if (best < 0) {
      map.landmarks.push_back(lm);
      return;
    }
    const Landmark& other = map.landmarks[best];
    double w = double(lm.n_obs) + double(other.n_obs);
    lm.x = (lm.x * lm.n_obs + other.x * other.n_obs) / w;
    lm.y = (lm.y * lm.n_obs + other.y * other.n_obs) / w;
    lm.residual = (lm.residual * lm.n_obs + other.residual * other.n_obs) / w;
    lm.t_first = std::min(lm.t_first, other.t_first);
    lm.t_last = std::max(lm.t_last, other.t_last);
    lm.n_obs += other.n_obs;
    map.landmarks.erase(map.landmarks.begin() + best);
  }
}

EvalReport match_and_rmse(const LandmarkMap& map, const std::vector<GroundTruthPole>& gt,
                          double reject_radius, const core::PoseLog* poses) {
  if (map.landmarks.empty() || gt.empty()) throw EmptyInput("need landmarks and ground truth");
  struct Pair {
    double d2;
    std::size_t lm, gt;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < map.landmarks.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) {
      double dx = map.landmarks[i].x - gt[j].x;
      double dy = map.landmarks[i].y - gt[j].y;
      double d2 = dx * dx + dy * dy;
      if (d2 <= reject_radius * reject_radius) pairs.push_back({d2, i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    if (a.gt != b.gt) return a.gt < b.gt;
    return a.lm < b.lm;
  });
  std::vector<char> used_lm(map.landmarks.size(), 0), used_gt(gt.size(), 0);
  EvalReport rep;
  double sq_sum = 0.0, lon_sum = 0.0, lat_sum = 0.0;
  for (const Pair& p : pairs) {
    if (used_lm[p.lm] || used_gt[p.gt]) continue;
    used_lm[p.lm] = 1;
    used_gt[p.gt] = 1;
    ++rep.true_positives;
    sq_sum += p.d2;
    const Landmark& lm = map.landmarks[p.lm];
    double heading = 0.0;
    if (poses && !poses->empty()) {
      std::int64_t mid = lm.t_first + (lm.t_last - lm.t_first) / 2;
      mid = std::clamp(mid, poses->front().t, poses->back().t);
      heading = core::interpolate_pose(*poses, mid).theta;
    }
    double dx = lm.x - gt[p.gt].x;
    double dy = lm.y - gt[p.gt].y;
    lon_sum += std::abs(dx * std::cos(heading) + dy * std::sin(heading));
    lat_sum += std::abs(-dx * std::sin(heading) + dy * std::cos(heading));
  }
  rep.false_negatives = int(gt.size()) - rep.true_positives;
  rep.false_positives = int(map.landmarks.size()) - rep.true_positives;
  if (rep.true_positives > 0) {
    rep.rmse = std::sqrt(sq_sum / rep.true_positives);
    rep.longitudinal_mean = lon_sum / rep.true_positives;
    rep.lateral_mean = lat_sum / rep.true_positives;
  }
  return rep;
}

void write_map_csv(const std::string& path, const LandmarkMap& map) {
  std::string out;
  for (std::size_t i = 0; i < map.landmarks.size(); ++i) {
    const Landmark& lm = map.landmarks[i];
    out += std::to_string(i);
    out += ',';
    out += core::format_double(lm.x);
    out += ',';
    out += core::format_double(lm.y);
    out += ',';
    out += std::to_string(lm.n_obs);
    out += ',';
    out += std::to_string(lm.t_first);
    out += ',';
    out += std::to_string(lm.t_last);
    out += '\n';
  }
  core::write_file(path, out);
}

namespace {

std::vector<std::vector<std::string>> csv_rows(const std::string& path, std::size_t fields) {
  std::string text = core::read_file(path);
  std::vector<std::vector<std::string>> rows;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) {
        row.push_back(line.substr(pos));
        break;
      }
      row.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    if (row.size() != fields) {
      throw core::ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(fields) + " fields");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

LandmarkMap load_map_csv(const std::string& path) {
  LandmarkMap map;
  for (const auto& row : csv_rows(path, 6)) {
    Landmark lm;
    lm.x = core::parse_double(row[1], "x");
    lm.y = core::parse_double(row[2], "y");
    lm.n_obs = int(core::parse_int(row[3], "n_obs"));
    lm.t_first = core::parse_int(row[4], "t_first");
    lm.t_last = core::parse_int(row[5], "t_last");
    map.landmarks.push_back(lm);
  }
  return map;
}

void write_gt_csv(const std::string& path, const std::vector<GroundTruthPole>& gt) {
  std::string out;
  for (const GroundTruthPole& p : gt) {
    out += std::to_string(p.id);
    out += ',';
    out += core::format_double(p.x);
    out += ',';
    out += core::format_double(p.y);
    out += '\n';
  }
  core::write_file(path, out);
}

std::vector<GroundTruthPole> load_gt_csv(const std::string& path) {
  std::vector<GroundTruthPole> gt;
  for (const auto& row : csv_rows(path, 3)) {
    GroundTruthPole p;
    p.id = int(core::parse_int(row[0], "id"));
    p.x = core::parse_double(row[1], "x");
    p.y = core::parse_double(row[2], "y");
    gt.push_back(p);
  }
  return gt;
}

std::string format_eval_report(const EvalReport& report) {
  std::string out;
  out += "true_positives=" + std::to_string(report.true_positives) + "\n";
  out += "false_negatives=" + std::to_string(report.false_negatives) + "\n";
  out += "false_positives=" + std::to_string(report.false_positives) + "\n";
  out += "rmse_m=" + core::format_double(report.rmse) + "\n";
  out += "longitudinal_m=" + core::format_double(report.longitudinal_mean) + "\n";
  out += "lateral_m=" + core::format_double(report.lateral_mean) + "\n";
  return out;
}

}  // namespace evline::mapping
