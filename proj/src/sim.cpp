#include "evline/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "evline/io.hpp"
#include "evline/undistort.hpp"

namespace evline::sim {
namespace {

void validate_profile(const VelocityProfile& profile) {
  if (profile.knots.empty()) throw core::ConfigError("velocity profile has no knots");
  for (std::size_t i = 0; i < profile.knots.size(); ++i) {
    if (profile.knots[i].second < 0.0)
      throw core::ConfigError("velocity profile speed must be >= 0");
    if (i > 0 && profile.knots[i].first <= profile.knots[i - 1].first)
      throw core::ConfigError("velocity profile knots must be strictly increasing in time");
  }
}

void validate_scene(const Scene& scene, const core::CameraIntrinsics& intr) {
  for (const Pole& p : scene.poles) {
    if (p.y <= 0.0) throw core::ConfigError("pole depth must be > 0");
    if (p.width <= 0.0) throw core::ConfigError("pole width must be > 0");
  }
  if (scene.v_top < 0 || scene.v_bot >= intr.height || scene.v_top > scene.v_bot)
    throw core::ConfigError("pole rows must satisfy 0 <= v_top <= v_bot < height");
}

// Exponential inter-arrival sampling; (x >> 11) keeps the 53 high bits so the
// stream is identical across platforms.
double unit_open(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::pair<double, double> profile_eval(const VelocityProfile& profile, std::int64_t t) {
  validate_profile(profile);
  const auto& k = profile.knots;
  if (t < k.front().first || t > k.back().first)
    throw core::OutOfRange("time outside velocity profile span");

  double pos = 0.0;
  for (std::size_t i = 0; i + 1 < k.size(); ++i) {
    const double dt_full = static_cast<double>(k[i + 1].first - k[i].first) * 1e-6;
    if (t >= k[i + 1].first) {
      pos += 0.5 * (k[i].second + k[i + 1].second) * dt_full;
      continue;
    }
    const double dt = static_cast<double>(t - k[i].first) * 1e-6;
    const double v = k[i].second + (k[i + 1].second - k[i].second) * dt / dt_full;
    pos += 0.5 * (k[i].second + v) * dt;
    return {pos, v};
  }
  return {pos, k.back().second};
}

SimResult simulate(const Scene& scene, const VelocityProfile& profile,
                   const SensorConfig& sensor) {
  const core::CameraIntrinsics& intr = sensor.intrinsics;
  intr.validate();
  validate_profile(profile);
  validate_scene(scene, intr);
  if (sensor.sim_step <= 0) throw core::ConfigError("sim_step must be > 0");
  if (sensor.noise_rate < 0.0) throw core::ConfigError("noise_rate must be >= 0");

  const std::int64_t t0 = profile.knots.front().first;
  const std::int64_t t_end = profile.knots.back().first;
  const bool distorted =
      intr.k1 != 0.0 || intr.k2 != 0.0 || intr.p1 != 0.0 || intr.p2 != 0.0;

  auto column_of = [&](double x_edge, double cam_x, double depth) {
    double xn = (x_edge - cam_x) / depth;
    if (distorted) xn = core::distort_normalized(xn, 0.0, intr).first;
    return intr.u0 + intr.alpha_x * xn;
  };

  SimResult out;

  // Each pole has two vertical edges; the rig moves toward +x, so projected
  // columns only decrease and the pole's image slides toward lower u. The
  // world-left edge leads: when it drops through an integer column center the
  // pole reaches that pixel (darkens, p=0). The world-right edge trails past
  // the same centers uncovering them (brightens, p=1).
  const std::size_t n_edges = scene.poles.size() * 2;
  std::vector<double> prev_u(n_edges);
  double cam_prev = profile_eval(profile, t0).first;
  for (std::size_t i = 0; i < scene.poles.size(); ++i) {
    const Pole& p = scene.poles[i];
    prev_u[2 * i] = column_of(p.x - 0.5 * p.width, cam_prev, p.y);
    prev_u[2 * i + 1] = column_of(p.x + 0.5 * p.width, cam_prev, p.y);
  }

  std::int64_t t_prev = t0;
  while (t_prev < t_end) {
    const std::int64_t t_cur = std::min(t_prev + sensor.sim_step, t_end);
    const double cam_cur = profile_eval(profile, t_cur).first;
    for (std::size_t i = 0; i < scene.poles.size(); ++i) {
      const Pole& p = scene.poles[i];
      for (int side = 0; side < 2; ++side) {
        const double x_edge = p.x + (side == 0 ? -0.5 : 0.5) * p.width;
        const double ua = prev_u[2 * i + side];
        const double ub = column_of(x_edge, cam_cur, p.y);
        prev_u[2 * i + side] = ub;
        if (!(ua > ub)) continue;
        // integer boundaries in (ub, ua], descending so times ascend
        const long hi = static_cast<long>(std::floor(ua));
        const long lo = static_cast<long>(std::floor(ub)) + 1;
        for (long m = hi; m >= lo; --m) {
          const double b = static_cast<double>(m);
          const int col = static_cast<int>(m);
          if (col < 0 || col >= intr.width) continue;
          const double f = (ua - b) / (ua - ub);
          std::int64_t te =
              t_prev + core::round_half_up_i64(f * static_cast<double>(t_cur - t_prev));
          te = std::clamp(te, t_prev, t_cur);
          const std::uint8_t pol = side == 0 ? 0 : 1;
          for (int v = scene.v_top; v <= scene.v_bot; ++v)
            out.events.push_back({te, col, v, pol});
        }
      }
    }
    t_prev = t_cur;
  }

  if (sensor.noise_rate > 0.0) {
    std::mt19937_64 rng(sensor.seed);
    std::int64_t tn = t0;
    for (;;) {
      const double dt_us = -std::log(unit_open(rng)) * 1e6 / sensor.noise_rate;
      tn += std::max<std::int64_t>(core::round_half_up_i64(dt_us), 0);
      if (tn > t_end) break;
      const int x = static_cast<int>(rng() % static_cast<std::uint64_t>(intr.width));
      const int y = static_cast<int>(rng() % static_cast<std::uint64_t>(intr.height));
      const std::uint8_t pol = static_cast<std::uint8_t>(rng() & 1u);
      out.events.push_back({tn, x, y, pol});
    }
  }

  // signal events were generated per (step, pole, edge) block; a stable sort
  // makes the stream time ordered while keeping that order for equal stamps
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const core::Event& a, const core::Event& b) { return a.t < b.t; });

  for (std::int64_t tp = t0; tp < t_end; tp += 10'000)
    out.poses.push_back({tp, profile_eval(profile, tp).first, 0.0, 0.0});
  out.poses.push_back({t_end, profile_eval(profile, t_end).first, 0.0, 0.0});

  for (std::size_t i = 0; i < scene.poles.size(); ++i)
    out.gt.push_back({static_cast<int>(i), scene.poles[i].x, scene.poles[i].y});
  return out;
}

SimJob load_scene(const std::string& path) {
  SimJob job;
  for (const auto& [key, value] : core::load_key_values(path)) {
    if (key == "pole") {
      const auto parts = core::split_fields(value);
      if (parts.size() != 3) throw core::ParseError("pole wants x,y,width: " + value);
      job.scene.poles.push_back({core::parse_double(parts[0], "pole x"),
                                 core::parse_double(parts[1], "pole y"),
                                 core::parse_double(parts[2], "pole width")});
    } else if (key == "knot") {
      const auto parts = core::split_fields(value);
      if (parts.size() != 2) throw core::ParseError("knot wants t_us,v_mps: " + value);
      job.profile.knots.emplace_back(core::parse_int(parts[0], "knot time"),
                                     core::parse_double(parts[1], "knot speed"));
    } else if (key == "v_top") {
      job.scene.v_top = static_cast<int>(core::parse_int(value, "v_top"));
    } else if (key == "v_bot") {
      job.scene.v_bot = static_cast<int>(core::parse_int(value, "v_bot"));
    } else if (key == "noise_rate") {
      job.sensor.noise_rate = core::parse_double(value, "noise_rate");
    } else if (key == "sim_step") {
      job.sensor.sim_step = core::parse_int(value, "sim_step");
    } else if (key == "seed") {
      job.sensor.seed = static_cast<std::uint64_t>(core::parse_int(value, "seed"));
    } else {
      throw core::ParseError("unknown scene key: " + key);
    }
  }
  return job;
}

}  // namespace evline::sim
