#include "evline/pose.hpp"

#include <algorithm>

namespace evline::core {

Pose2 interpolate_pose(const PoseLog& log, std::int64_t t) {
  if (log.empty()) throw OutOfRange("pose log is empty");
  if (t < log.front().t || t > log.back().t) {
    throw OutOfRange("t=" + std::to_string(t) + " outside pose log [" +
                     std::to_string(log.front().t) + ", " + std::to_string(log.back().t) +
                     "]");
  }
  auto it = std::lower_bound(log.begin(), log.end(), t,
                             [](const Pose2& p, std::int64_t v) { return p.t < v; });
  if (it->t == t) return *it;
  const Pose2& b = *it;
  const Pose2& a = *(it - 1);
  double alpha = double(t - a.t) / double(b.t - a.t);
  Pose2 out;
  out.t = t;
  out.x = a.x + alpha * (b.x - a.x);
  out.y = a.y + alpha * (b.y - a.y);
  out.theta = wrap_angle(a.theta + alpha * wrap_angle(b.theta - a.theta));
  return out;
}

}  // namespace evline::core
