#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "evline/tracker.hpp"
#include "evline/types.hpp"

using namespace evline;
using track::PolarityTrack;
using track::TimedPos;
using track::Tracker;
using track::TrackerConfig;

namespace {

hough::Detection det(std::int64_t t, double xpos, int polarity) {
  hough::Detection d;
  d.t = t;
  d.r = xpos;
  d.polarity = polarity;
  d.votes = 60;
  return d;
}

// Points exactly on x = x0 - tan(phi) * (t / bin_duration).
std::vector<hough::Detection> collinear(double x0, double phi_deg, int n,
                                        std::int64_t t0, std::int64_t dt, int polarity) {
  std::vector<hough::Detection> out;
  double slope = std::tan(core::deg_to_rad(phi_deg));
  for (int i = 0; i < n; ++i) {
    std::int64_t t = t0 + i * dt;
    out.push_back(det(t, x0 - slope * (double(t) / 6250.0), polarity));
  }
  return out;
}

std::vector<std::int32_t> recount(const Tracker& tr, int polarity) {
  std::vector<std::int32_t> acc(tr.accumulator(polarity).size(), 0);
  for (const auto& p : tr.window(polarity)) {
    for (std::size_t cell : tr.vote_cells(p.xpos, p.t)) ++acc[cell];
  }
  return acc;
}

std::multiset<std::int64_t> sample_times(const PolarityTrack& tr) {
  std::multiset<std::int64_t> out;
  for (const auto& s : tr.samples) out.insert(s.t);
  return out;
}

PolarityTrack make_polarity_track(double rho, double phi_deg, int polarity,
                                  std::int64_t t0, std::int64_t dt, int n) {
  PolarityTrack tr;
  tr.polarity = polarity;
  tr.line = {rho, phi_deg, 0, 6250.0};
  for (int i = 0; i < n; ++i) {
    std::int64_t t = t0 + i * dt;
    tr.samples.push_back({t, tr.line.x_at(t)});
  }
  return tr;
}

}  // namespace

TEST_CASE("tracker config validation") {
  TrackerConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.min_track_span = cfg.window_duration;
  CHECK_THROWS_AS(cfg.validate(), core::ConfigError);
  cfg = {};
  cfg.phi_min_deg = 0.0;
  CHECK_THROWS_AS(cfg.validate(), core::ConfigError);
  cfg = {};
  cfg.phi_max_deg = 90.0;
  CHECK_THROWS_AS(cfg.validate(), core::ConfigError);
  cfg = {};
  cfg.assoc_tolerance = 0.0;
  CHECK_THROWS_AS(cfg.validate(), core::ConfigError);
  cfg = {};
  cfg.x_min = cfg.x_max;
  CHECK_THROWS_AS(cfg.validate(), core::ConfigError);
}

TEST_CASE("single detection votes once per phi bin") {
  TrackerConfig cfg;
  Tracker tr(cfg);
  tr.ingest_detection(det(0, 130.0, 0));
  auto cells = tr.vote_cells(130.0, 0);
  CHECK(cells.size() <= std::size_t(cfg.phi_bins()));
  CHECK(cells.size() >= 1);
  std::int64_t total = 0;
  for (auto v : tr.accumulator(0)) total += v;
  CHECK(total == std::int64_t(cells.size()));
  // one vote per phi bin at most
  std::set<std::size_t> phis;
  for (auto c : cells) phis.insert(c / cfg.rho_bins);
  CHECK(phis.size() == cells.size());
}

TEST_CASE("stationary structures cannot accumulate: same xpos, far-apart times share no cell") {
  TrackerConfig cfg;
  Tracker tr(cfg);
  tr.ingest_detection(det(0, 130.0, 0));
  auto a = tr.vote_cells(130.0, 0);
  auto b = tr.vote_cells(130.0, 500'000);
  std::vector<std::size_t> shared;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(shared));
  CHECK(shared.empty());
}

TEST_CASE("detection timestamps must be non-decreasing") {
  Tracker tr(TrackerConfig{});
  tr.ingest_detection(det(1000, 50.0, 0));
  CHECK_THROWS_AS(tr.ingest_detection(det(999, 50.0, 0)), core::OrderError);
  CHECK_NOTHROW(tr.ingest_detection(det(1000, 60.0, 1)));
}

TEST_CASE("accumulator equals brute-force recount of live window points") {
  TrackerConfig cfg;
  Tracker tr(cfg);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> xd(0.0, 260.0);
  std::int64_t t = 0;
  for (int i = 0; i < 3000; ++i) {
    t += std::int64_t(rng() % 4000);  // spans several windows: expiry + re-anchor
    tr.ingest_detection(det(t, xd(rng), int(rng() % 2)));
    if (i % 250 == 0 || i == 2999) {
      CHECK(tr.accumulator(0) == recount(tr, 0));
      CHECK(tr.accumulator(1) == recount(tr, 1));
    }
  }
  // expiry really removed old points
  CHECK(tr.window(0).size() + tr.window(1).size() < 3000);
}

TEST_CASE("extraction on an empty window") {
  Tracker tr(TrackerConfig{});
  CHECK(tr.extract_tracks(1'000'000).empty());
}

TEST_CASE("twenty collinear points become exactly one track") {
  Tracker tr(TrackerConfig{});
  auto dets = collinear(120.0, 60.0, 20, 0, 15'000, 0);
  for (const auto& d : dets) tr.ingest_detection(d);
  auto tracks = tr.extract_tracks(400'000);
  REQUIRE(tracks.size() == 1);
  const auto& tk = tracks[0];
  CHECK(tk.polarity == 0);
  REQUIRE(tk.samples.size() == 20);
  for (std::size_t i = 1; i < tk.samples.size(); ++i) {
    CHECK(tk.samples[i].t > tk.samples[i - 1].t);
  }
  CHECK(tk.line.phi_deg == doctest::Approx(60.0).epsilon(0.03));
  CHECK(tk.samples.back().t - tk.samples.front().t >= TrackerConfig{}.min_track_span);
  // collected points left the window
  CHECK(tr.window(0).empty());
}

TEST_CASE("parallel groups farther than the tolerance split into two tracks") {
  Tracker tr(TrackerConfig{});
  // 8 px apart in x = 4 px perpendicular at phi 60, tolerance is 3
  auto a = collinear(120.0, 60.0, 20, 0, 15'000, 0);
  auto b = collinear(128.0, 60.0, 20, 0, 15'000, 0);
  for (int i = 0; i < 20; ++i) {
    tr.ingest_detection(a[i]);
    tr.ingest_detection(b[i]);
  }
  auto tracks = tr.extract_tracks(400'000);
  REQUIRE(tracks.size() == 2);
  CHECK(tracks[0].samples.size() == 20);
  CHECK(tracks[1].samples.size() == 20);
  std::set<double> xs0, xs1;
  for (const auto& s : tracks[0].samples) xs0.insert(s.x);
  for (const auto& s : tracks[1].samples) xs1.insert(s.x);
  std::vector<double> shared;
  std::set_intersection(xs0.begin(), xs0.end(), xs1.begin(), xs1.end(),
                        std::back_inserter(shared));
  CHECK(shared.empty());
}

TEST_CASE("extraction order does not depend on arrival order of disjoint lines") {
  auto a = collinear(120.0, 60.0, 20, 0, 15'000, 0);
  auto b = collinear(180.0, 60.0, 20, 0, 15'000, 0);

  Tracker ab(TrackerConfig{});
  Tracker ba(TrackerConfig{});
  for (int i = 0; i < 20; ++i) {
    ab.ingest_detection(a[i]);
    ab.ingest_detection(b[i]);
    ba.ingest_detection(b[i]);
    ba.ingest_detection(a[i]);
  }
  auto t1 = ab.extract_tracks(400'000);
  auto t2 = ba.extract_tracks(400'000);
  REQUIRE(t1.size() == 2);
  REQUIRE(t2.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(sample_times(t1[i]) == sample_times(t2[i]));
    CHECK(t1[i].line.phi_deg == doctest::Approx(t2[i].line.phi_deg));
    CHECK(t1[i].line.rho == doctest::Approx(t2[i].line.rho));
  }
}

TEST_CASE("quiescence gate holds back still-active lines") {
  TrackerConfig cfg;
  Tracker tr(cfg);
  auto dets = collinear(120.0, 60.0, 20, 0, 15'000, 0);
  for (const auto& d : dets) tr.ingest_detection(d);
  std::int64_t last = dets.back().t;

  // newest point only 100 ms old, margin 150 ms: untouched
  auto early = tr.extract_completed(last + 100'000, 150'000);
  CHECK(early.empty());
  CHECK(tr.window(0).size() == 20);

  auto late = tr.extract_completed(last + 200'000, 150'000);
  REQUIRE(late.size() == 1);
  CHECK(late[0].samples.size() == 20);
}

TEST_CASE("short spans are consumed but not reported") {
  TrackerConfig cfg;
  Tracker tr(cfg);
  // 20 points over 150 ms < min_track_span of 200 ms
  auto dets = collinear(120.0, 60.0, 20, 0, 7'800, 0);
  for (const auto& d : dets) tr.ingest_detection(d);
  auto tracks = tr.extract_tracks(300'000);
  CHECK(tracks.empty());
  CHECK(tr.window(0).empty());  // points still left the window
}

TEST_CASE("pairing merges matching polarity tracks at the line midpoint") {
  TrackerConfig cfg;
  auto pos = make_polarity_track(50.0, 60.0, 1, 0, 15'000, 20);
  auto neg = make_polarity_track(52.0, 60.0, 0, 15'000, 15'000, 15);  // 4 px right

  std::vector<char> used_pos, used_neg;
  auto tracks = track::pair_tracks({pos}, {neg}, cfg, &used_pos, &used_neg);
  REQUIRE(tracks.size() == 1);
  CHECK(used_pos == std::vector<char>{1});
  CHECK(used_neg == std::vector<char>{1});

  const auto& tk = tracks[0];
  REQUIRE(tk.samples.size() == 20);  // longer track's timestamps
  for (std::size_t i = 0; i < tk.samples.size(); ++i) {
    const auto& s = tk.samples[i];
    if (i > 0) CHECK(s.t > tk.samples[i - 1].t);
    CHECK(s.x == doctest::Approx(0.5 * (pos.line.x_at(s.t) + neg.line.x_at(s.t))));
    CHECK(s.x >= cfg.x_min);
    CHECK(s.x <= cfg.x_max);
  }
  CHECK(tk.pos_line.rho == doctest::Approx(50.0));
  CHECK(tk.neg_line.rho == doctest::Approx(52.0));
}

TEST_CASE("pairing gates") {
  TrackerConfig cfg;
  auto pos = make_polarity_track(50.0, 60.0, 1, 0, 15'000, 20);

  SUBCASE("a lone track is discarded") {
    CHECK(track::pair_tracks({}, {pos}, cfg).empty());
    CHECK(track::pair_tracks({pos}, {}, cfg).empty());
  }

  SUBCASE("slope difference above pair_max_dphi") {
    auto neg = make_polarity_track(50.0, 63.0, 0, 0, 15'000, 20);
    CHECK(track::pair_tracks({pos}, {neg}, cfg).empty());
  }

  SUBCASE("horizontal gap above pair_max_dx") {
    // parallel lines 25 px apart in x: perpendicular rho gap 12.5 at phi 60
    auto neg = make_polarity_track(62.5, 60.0, 0, 0, 15'000, 20);
    CHECK(track::pair_tracks({pos}, {neg}, cfg).empty());
  }

  SUBCASE("no time overlap") {
    auto neg = make_polarity_track(52.0, 60.0, 0, 400'000, 15'000, 20);
    CHECK(track::pair_tracks({pos}, {neg}, cfg).empty());
  }

  SUBCASE("nearest gap wins when two candidates compete") {
    auto near = make_polarity_track(51.0, 60.0, 0, 0, 15'000, 20);
    auto far = make_polarity_track(55.0, 60.0, 0, 0, 15'000, 20);
    std::vector<char> used_pos, used_neg;
    auto tracks = track::pair_tracks({pos}, {near, far}, cfg, &used_pos, &used_neg);
    REQUIRE(tracks.size() == 1);
    CHECK(used_neg == std::vector<char>{1, 0});
    CHECK(tracks[0].neg_line.rho == doctest::Approx(51.0));
  }
}

TEST_CASE("end-to-end extraction and pairing of a synthetic pole signature") {
  TrackerConfig cfg;
  Tracker tr(cfg);
  // two polarity-opposed collinear streams 6 px apart, interleaved in time
  auto pos = collinear(126.0, 62.0, 30, 0, 10'000, 1);
  auto neg = collinear(120.0, 62.0, 30, 0, 10'000, 0);
  for (int i = 0; i < 30; ++i) {
    tr.ingest_detection(neg[i]);
    tr.ingest_detection(pos[i]);
  }
  auto polarity_tracks = tr.extract_tracks(500'000);
  REQUIRE(polarity_tracks.size() == 2);
  std::vector<PolarityTrack> ps, ns;
  for (auto& t : polarity_tracks) (t.polarity == 1 ? ps : ns).push_back(t);
  REQUIRE(ps.size() == 1);
  REQUIRE(ns.size() == 1);
  auto tracks = track::pair_tracks(ps, ns, cfg);
  REQUIRE(tracks.size() == 1);
  // midpoint runs 3 px inside either polarity line
  for (const auto& s : tracks[0].samples) {
    CHECK(std::abs(s.x - 0.5 * (ps[0].line.x_at(s.t) + ns[0].line.x_at(s.t))) < 1e-9);
  }
}
