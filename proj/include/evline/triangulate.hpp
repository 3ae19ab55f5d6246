#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "evline/tracker.hpp"
#include "evline/types.hpp"

namespace evline::mapping {

struct TriangulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateGeometry : TriangulationError {
  using TriangulationError::TriangulationError;
};
struct BehindCamera : TriangulationError {
  using TriangulationError::TriangulationError;
};
struct TooShort : TriangulationError {
  using TriangulationError::TriangulationError;
};
struct EmptyInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Landmark {
  double x = 0.0;
  double y = 0.0;
  int n_obs = 0;
  std::int64_t t_first = 0;
  std::int64_t t_last = 0;
  double residual = 0.0;  // smallest singular value of the system matrix
};

struct LandmarkMap {
  std::vector<Landmark> landmarks;
  double merge_radius = 1.0;
};

struct GroundTruthPole {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
};

struct EvalReport {
  int true_positives = 0;
  int false_negatives = 0;
  int false_positives = 0;
  double rmse = 0.0;
  double longitudinal_mean = 0.0;
  double lateral_mean = 0.0;
};

struct TriangulationConfig {
  int max_samples = 50;
  double min_depth = 1.0;  // meters; mean depth below this rejects the track
  // Camera pose in the vehicle frame (odometry gives the vehicle pose).
  double ext_x = 0.0;
  double ext_y = 0.0;
  double ext_theta = 0.0;
};

// Linear system rows: s_i * P_i[1,:] - P_i[0,:], with s_i = (D_i - u0) / alpha_x
// and P_i the world-to-camera 2x3 matrix (row 0 image-lateral, row 1 depth) at
// the interpolated pose. At most max_samples evenly spaced samples are used.
Eigen::Matrix<double, Eigen::Dynamic, 3> build_dlt_matrix(
    const track::Track& tr, const core::PoseLog& poses, const core::CameraIntrinsics& intr,
    const TriangulationConfig& cfg = {});

Landmark triangulate(const track::Track& tr, const core::PoseLog& poses,
                     const core::CameraIntrinsics& intr, const TriangulationConfig& cfg = {});

// Merges the landmark into any map entry within merge_radius (observation
// count weighted), cascading so the pairwise spacing invariant holds.
void accumulate_map(LandmarkMap& map, Landmark lm);

// Greedy closest-pair-first matching inside reject_radius; the error of each
// match is split along/across the interpolated heading at the midpoint of the
// landmark's observation span (heading 0 without a pose log).
EvalReport match_and_rmse(const LandmarkMap& map, const std::vector<GroundTruthPole>& gt,
                          double reject_radius = 4.0, const core::PoseLog* poses = nullptr);

void write_map_csv(const std::string& path, const LandmarkMap& map);
LandmarkMap load_map_csv(const std::string& path);
void write_gt_csv(const std::string& path, const std::vector<GroundTruthPole>& gt);
std::vector<GroundTruthPole> load_gt_csv(const std::string& path);
std::string format_eval_report(const EvalReport& report);

}  // namespace evline::mapping
