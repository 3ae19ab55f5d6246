#pragma once

#include <string>
#include <vector>

#include "evline/hough.hpp"
#include "evline/tracker.hpp"
#include "evline/triangulate.hpp"

namespace evline::pipeline {

// Detections over (xpos, t) with paired track polylines on top; positive
// polarity blue, negative red.
std::string xt_plot_svg(const std::vector<hough::Detection>& dets,
                        const std::vector<track::Track>& tracks,
                        const hough::HoughConfig& cfg);

// Landmarks as filled circles, ground truth as crosses, world meters.
std::string map_plot_svg(const mapping::LandmarkMap& map,
                         const std::vector<mapping::GroundTruthPole>& gt);

}  // namespace evline::pipeline
