#pragma once

#include "evline/types.hpp"

namespace evline::core {

// Linear in x and y, shortest arc in theta; exact at the log samples.
Pose2 interpolate_pose(const PoseLog& log, std::int64_t t);

}  // namespace evline::core
