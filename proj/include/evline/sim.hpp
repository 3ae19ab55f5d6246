#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "evline/triangulate.hpp"
#include "evline/types.hpp"

namespace evline::sim {

struct Pole {
  double x = 0.0;      // meters, along the travel axis
  double y = 0.0;      // meters, depth from the travel axis; must be > 0
  double width = 0.2;  // meters
};

// Dark poles on a bright background; every pole paints pixel rows
// [v_top, v_bot].
struct Scene {
  std::vector<Pole> poles;
  int v_top = 40;
  int v_bot = 139;
};

// Piecewise-linear speed along the world x axis.
struct VelocityProfile {
  std::vector<std::pair<std::int64_t, double>> knots;  // (t_us, speed_mps)
};

// Position is the exact integral of the piecewise-linear speed from the first
// knot; returns (position_m, speed_mps).
std::pair<double, double> profile_eval(const VelocityProfile& profile, std::int64_t t);

struct SensorConfig {
  core::CameraIntrinsics intrinsics;
  double noise_rate = 0.0;      // events per second, uniform pixels
  std::int64_t sim_step = 100;  // microseconds
  std::uint64_t seed = 0;
};

struct SimResult {
  std::vector<core::Event> events;
  core::PoseLog poses;  // every 10 ms plus the final instant
  std::vector<mapping::GroundTruthPole> gt;
};

// Side-looking camera at (position, 0) heading 0: a pole edge at world x_e and
// depth y projects to column u0 + alpha_x * (x_e - position) / y. An event is
// emitted per pixel row whenever an edge's projected column crosses a column
// boundary; pole side determines polarity (leading edge darkens, trailing
// edge brightens).
SimResult simulate(const Scene& scene, const VelocityProfile& profile,
                   const SensorConfig& sensor);

struct SimJob {
  Scene scene;
  VelocityProfile profile;
  SensorConfig sensor;
};

// Flat key=value scene file: repeated `pole=x,y,width` and `knot=t_us,v_mps`
// lines plus v_top, v_bot, noise_rate, sim_step, seed.
SimJob load_scene(const std::string& path);

}  // namespace evline::sim
