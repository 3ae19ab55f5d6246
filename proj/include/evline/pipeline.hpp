#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evline/hough.hpp"
#include "evline/tracker.hpp"
#include "evline/triangulate.hpp"
#include "evline/types.hpp"

namespace evline::pipeline {

struct PipelineConfig {
  hough::HoughConfig hough;
  track::TrackerConfig tracker;
  mapping::TriangulationConfig triangulation;
  double merge_radius = 1.0;   // meters
  double reject_radius = 4.0;  // meters, evaluation gate
  double subsample = 0.0;      // drop probability in [0, 1]
  std::uint64_t seed = 0;
  std::int64_t extract_period = 100'000;   // us between track harvests
  std::int64_t quiesce_margin = 150'000;   // us a line must be idle before harvest

  void validate() const;
};

// Flat key=value file; unknown keys are rejected. The tracker x range is tied
// to the detector r range afterwards.
PipelineConfig load_pipeline_config(const std::string& path);
void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value);

struct PipelineResult {
  std::vector<hough::Detection> detections;
  std::vector<track::Track> tracks;
  mapping::LandmarkMap map;
  std::uint64_t events_in = 0;
  std::uint64_t events_used = 0;
  std::uint64_t dropped_subsample = 0;
  std::uint64_t dropped_invalid = 0;  // rectified outside the frame
  std::uint64_t polarity_tracks = 0;
  std::uint64_t unpaired_tracks = 0;
  std::uint64_t rejected_tracks = 0;  // failed triangulation
};

// events must be time ordered; poses may be empty when only detection and
// tracking output is wanted (every triangulation then fails pose lookup).
PipelineResult run_pipeline(const std::vector<core::Event>& events,
                            const core::PoseLog& poses, const core::CameraIntrinsics& intr,
                            const PipelineConfig& cfg);

std::string format_detections_csv(const std::vector<hough::Detection>& dets);
std::vector<hough::Detection> load_detections_csv(const std::string& path);
std::string format_tracks_csv(const std::vector<track::Track>& tracks);
// Samples grouped by track id, ids taken in file order.
std::vector<std::vector<track::TimedPos>> load_tracks_csv(const std::string& path);

}  // namespace evline::pipeline
