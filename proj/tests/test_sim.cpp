#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "evline/io.hpp"
#include "evline/sim.hpp"
#include "evline/types.hpp"

using namespace evline;

namespace {

std::string tmp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "evline_sim_test";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

sim::Scene one_pole_scene() {
  sim::Scene scene;
  scene.poles = {{6.0, 5.0, 0.2}};
  return scene;
}

sim::VelocityProfile constant_profile(double speed, std::int64_t t_end) {
  return {{{0, speed}, {t_end, speed}}};
}

}  // namespace

TEST_CASE("velocity profile integration") {
  // ramp 0 to 10 m/s over 1 s, then hold: trapezoid areas
  sim::VelocityProfile prof{{{0, 0.0}, {1'000'000, 10.0}, {2'000'000, 10.0}}};

  auto [p0, v0] = sim::profile_eval(prof, 0);
  CHECK(p0 == doctest::Approx(0.0).scale(1.0));
  CHECK(v0 == doctest::Approx(0.0).scale(1.0));

  auto [p_half, v_half] = sim::profile_eval(prof, 500'000);
  CHECK(v_half == doctest::Approx(5.0));
  CHECK(p_half == doctest::Approx(1.25));

  auto [p1, v1] = sim::profile_eval(prof, 1'000'000);
  CHECK(p1 == doctest::Approx(5.0));
  CHECK(v1 == doctest::Approx(10.0));

  auto [p2, v2] = sim::profile_eval(prof, 2'000'000);
  CHECK(p2 == doctest::Approx(15.0));
  CHECK(v2 == doctest::Approx(10.0));

  CHECK_THROWS_AS(sim::profile_eval(prof, -1), core::OutOfRange);
  CHECK_THROWS_AS(sim::profile_eval(prof, 2'000'001), core::OutOfRange);
}

TEST_CASE("scene and profile validation") {
  sim::SensorConfig sensor;
  auto profile = constant_profile(10.0, 1'000'000);

  sim::Scene bad = one_pole_scene();
  bad.poles[0].y = 0.0;  // on the camera plane
  CHECK_THROWS_AS(sim::simulate(bad, profile, sensor), core::ConfigError);

  bad = one_pole_scene();
  bad.poles[0].width = 0.0;
  CHECK_THROWS_AS(sim::simulate(bad, profile, sensor), core::ConfigError);

  bad = one_pole_scene();
  bad.v_top = 100;
  bad.v_bot = 50;
  CHECK_THROWS_AS(sim::simulate(bad, profile, sensor), core::ConfigError);

  sim::VelocityProfile unsorted{{{0, 1.0}, {0, 2.0}}};
  CHECK_THROWS_AS(sim::simulate(one_pole_scene(), unsorted, sensor), core::ConfigError);
}

TEST_CASE("empty scene produces no events but a full pose log") {
  sim::Scene scene;
  sim::SensorConfig sensor;
  auto profile = constant_profile(10.0, 100'000);
  auto sr = sim::simulate(scene, profile, sensor);
  CHECK(sr.events.empty());
  CHECK(sr.gt.empty());
  REQUIRE(sr.poses.size() == 11);  // every 10 ms plus the final instant
  CHECK(sr.poses.front().t == 0);
  CHECK(sr.poses.back().t == 100'000);
  for (const auto& p : sr.poses) {
    auto [pos, speed] = sim::profile_eval(profile, p.t);
    CHECK(p.x == doctest::Approx(pos).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(0.0).scale(1.0));
    CHECK(p.theta == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("single pole traverse: counts, polarity balance, projection") {
  auto scene = one_pole_scene();
  auto profile = constant_profile(10.0, 2'000'000);
  sim::SensorConfig sensor;
  auto sr = sim::simulate(scene, profile, sensor);
  const auto& intr = sensor.intrinsics;
  const int rows = scene.v_bot - scene.v_top + 1;

  REQUIRE(!sr.events.empty());
  REQUIRE(sr.gt.size() == 1);
  CHECK(sr.gt[0].x == doctest::Approx(6.0));
  CHECK(sr.gt[0].y == doctest::Approx(5.0));

  SUBCASE("each edge paints every column once, one event per row") {
    std::map<std::pair<int, int>, int> per_edge_col;  // (polarity, column) -> rows
    for (const auto& e : sr.events) {
      CHECK(e.y >= scene.v_top);
      CHECK(e.y <= scene.v_bot);
      ++per_edge_col[{int(e.p), int(e.x)}];
    }
    for (const auto& [key, n] : per_edge_col) CHECK(n == rows);
    // a full traverse sweeps both edges across all 240 columns
    CHECK(per_edge_col.size() == std::size_t(2 * intr.width));
    CHECK(sr.events.size() == std::size_t(2 * intr.width * rows));
  }

  SUBCASE("polarity balance over a full traverse") {
    std::size_t pos = 0;
    for (const auto& e : sr.events) pos += e.p;
    CHECK(pos * 2 == sr.events.size());
  }

  SUBCASE("timestamps are sorted and events match the closed-form projection") {
    std::int64_t last = -1;
    for (const auto& e : sr.events) {
      REQUIRE(e.t >= last);
      last = e.t;
      auto [cam, speed] = sim::profile_eval(profile, e.t);
      // p=0 tracks the world-left edge covering pixels, p=1 the right edge
      double edge = e.p == 0 ? 6.0 - 0.1 : 6.0 + 0.1;
      double u = intr.u0 + intr.alpha_x * (edge - cam) / 5.0;
      REQUIRE(std::abs(u - double(e.x)) < 0.01);
    }
  }

  SUBCASE("per-edge columns never increase over time") {
    std::map<int, std::int32_t> last_col;
    for (const auto& e : sr.events) {
      auto it = last_col.find(int(e.p));
      if (it != last_col.end()) CHECK(e.x <= it->second);
      last_col[int(e.p)] = e.x;
    }
  }
}

TEST_CASE("events lie within the pole's analytic visibility window") {
  auto scene = one_pole_scene();
  auto profile = constant_profile(10.0, 2'000'000);
  sim::SensorConfig sensor;
  auto sr = sim::simulate(scene, profile, sensor);
  const auto& intr = sensor.intrinsics;

  // first event: left edge reaches column width-1; last: right edge leaves column 0
  double enter_cam = 5.9 - (intr.width - 1 - intr.u0) * 5.0 / intr.alpha_x;
  double exit_cam = 6.1 + intr.u0 * 5.0 / intr.alpha_x;
  std::int64_t t_enter = std::int64_t(enter_cam / 10.0 * 1e6) - 1000;
  std::int64_t t_exit = std::int64_t(exit_cam / 10.0 * 1e6) + 1000;
  REQUIRE(!sr.events.empty());
  for (const auto& e : sr.events) {
    REQUIRE(e.t >= t_enter);
    REQUIRE(e.t <= t_exit);
  }
}

TEST_CASE("same seed gives byte-identical event files") {
  auto scene = one_pole_scene();
  auto profile = constant_profile(10.0, 1'500'000);
  sim::SensorConfig sensor;
  sensor.noise_rate = 20'000.0;
  sensor.seed = 77;

  auto a = sim::simulate(scene, profile, sensor);
  auto b = sim::simulate(scene, profile, sensor);
  auto pa = tmp_path("a.bin");
  auto pb = tmp_path("b.bin");
  core::write_events(pa, a.events, core::EventFormat::binary);
  core::write_events(pb, b.events, core::EventFormat::binary);
  CHECK(core::read_file(pa) == core::read_file(pb));

  sensor.seed = 78;
  auto c = sim::simulate(scene, profile, sensor);
  CHECK(c.events != a.events);
}

TEST_CASE("noise adds roughly rate times duration events inside the frame") {
  sim::Scene scene;  // no poles: only noise
  auto profile = constant_profile(10.0, 2'000'000);
  sim::SensorConfig sensor;
  sensor.noise_rate = 50'000.0;
  sensor.seed = 3;
  auto sr = sim::simulate(scene, profile, sensor);

  double expected = 50'000.0 * 2.0;
  double sigma = std::sqrt(expected);
  CHECK(std::abs(double(sr.events.size()) - expected) < 5.0 * sigma);
  for (const auto& e : sr.events) {
    REQUIRE(e.x >= 0);
    REQUIRE(e.x < sensor.intrinsics.width);
    REQUIRE(e.y >= 0);
    REQUIRE(e.y < sensor.intrinsics.height);
    REQUIRE(e.t >= 0);
    REQUIRE(e.t <= 2'000'000);
  }
}

TEST_CASE("scene files parse into jobs") {
  auto path = tmp_path("scene.txt");
  core::write_file(path,
                   "# two poles\n"
                   "pole=6.0,5.0,0.2\n"
                   "pole=9.0,7.5,0.2\n"
                   "knot=0,10\n"
                   "knot=2000000,10\n"
                   "v_top=40\n"
                   "v_bot=139\n"
                   "noise_rate=1000\n"
                   "sim_step=100\n"
                   "seed=42\n");
  auto job = sim::load_scene(path);
  REQUIRE(job.scene.poles.size() == 2);
  CHECK(job.scene.poles[1].x == doctest::Approx(9.0));
  CHECK(job.scene.poles[1].y == doctest::Approx(7.5));
  REQUIRE(job.profile.knots.size() == 2);
  CHECK(job.profile.knots[1].first == 2'000'000);
  CHECK(job.scene.v_top == 40);
  CHECK(job.sensor.noise_rate == doctest::Approx(1000.0));
  CHECK(job.sensor.seed == 42);

  core::write_file(path, "pole=1,2,0.2\nknot=0,1\nknot=9,1\nwidgets=3\n");
  CHECK_THROWS_AS(sim::load_scene(path), core::ParseError);
  core::write_file(path, "pole=1,2\nknot=0,1\nknot=9,1\n");
  CHECK_THROWS_AS(sim::load_scene(path), core::ParseError);
}

TEST_CASE("forward distortion shifts the event stream") {
  auto scene = one_pole_scene();
  auto profile = constant_profile(10.0, 2'000'000);
  sim::SensorConfig plain;
  sim::SensorConfig warped;
  warped.intrinsics.k1 = -0.05;
  auto a = sim::simulate(scene, profile, plain);
  auto b = sim::simulate(scene, profile, warped);
  REQUIRE(!a.events.empty());
  REQUIRE(!b.events.empty());
  CHECK(a.events != b.events);
}
