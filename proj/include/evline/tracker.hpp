#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "evline/hough.hpp"
#include "evline/types.hpp"

namespace evline::track {

struct TrackerConfig {
  std::int64_t window_duration = 1'500'000;  // microseconds
  int time_bins = 240;
  int rho_bins = 261;
  double phi_min_deg = 5.0;         // 1 degree bins
  double phi_max_deg = 85.0;
  bool mirrored = false;            // use [-phi_max, -phi_min] for reverse travel
  int track_threshold = 15;
  double assoc_tolerance = 3.0;     // pixels, perpendicular in normalized space
  std::int64_t min_track_span = 200'000;
  double pair_max_dx = 20.0;        // pixels
  double pair_max_dphi = 2.0;       // bins (= degrees)
  double x_min = 0.0;               // horizontal position range fed by detection
  double x_max = 260.0;

  int phi_bins() const { return int(phi_max_deg - phi_min_deg + 1e-9) + 1; }
  double phi_lo_deg() const { return mirrored ? -phi_max_deg : phi_min_deg; }
  double bin_duration_us() const { return double(window_duration) / double(time_bins); }
  void validate() const;
};

struct SpatioTemporalPoint {
  double xpos = 0.0;
  std::int64_t t = 0;
  int polarity = 0;
};

struct TimedPos {
  std::int64_t t = 0;
  double x = 0.0;
  friend bool operator==(const TimedPos&, const TimedPos&) = default;
};

// Line in the (xpos, tau) plane, tau = (t - t_origin) / bin_duration:
// xpos * cos(phi) + tau * sin(phi) = rho.
struct StLine {
  double rho = 0.0;
  double phi_deg = 0.0;
  std::int64_t t_origin = 0;
  double bin_duration_us = 6250.0;

  double x_at(std::int64_t t) const;
};

struct PolarityTrack {
  int polarity = 0;
  std::vector<TimedPos> samples;  // time-ordered collected detections
  StLine line;
};

struct Track {
  std::vector<TimedPos> samples;  // strictly increasing timestamps
  StLine pos_line;
  StLine neg_line;
};

class Tracker {
 public:
  explicit Tracker(const TrackerConfig& cfg);

  // Votes the detection into its polarity accumulator over all phi bins and
  // expires window points older than window_duration.
  void ingest_detection(const hough::Detection& d);

  // Greedy maximum-then-remove extraction: strongest cell above threshold,
  // collect window points within assoc_tolerance of its line, remove their
  // votes, repeat. Collected sets spanning at least min_track_span become
  // tracks; collected points always leave the window.
  std::vector<PolarityTrack> extract_tracks(std::int64_t now);

  // Same, but a maximum whose newest collected point is younger than
  // now - quiesce_margin is left untouched, so structures still crossing the
  // field of view are not split.
  std::vector<PolarityTrack> extract_completed(std::int64_t now, std::int64_t quiesce_margin);

  const TrackerConfig& config() const { return cfg_; }
  const std::vector<std::int32_t>& accumulator(int polarity) const { return acc_[polarity]; }
  const std::deque<SpatioTemporalPoint>& window(int polarity) const { return pts_[polarity]; }
  std::int64_t t_origin() const { return t_origin_; }
  // Flat accumulator indices (phi * rho_bins + rho) a point votes into.
  std::vector<std::size_t> vote_cells(double x, std::int64_t t) const;

 private:
  double tau(std::int64_t t) const { return double(t - t_origin_) / bin_dur_; }
  void vote(const SpatioTemporalPoint& p, int sign);
  void expire(std::int64_t now);
  void reanchor(std::int64_t now);
  std::vector<PolarityTrack> harvest(std::int64_t now, std::int64_t quiesce_margin);

  TrackerConfig cfg_;
  double bin_dur_;
  std::vector<double> cos_phi_;
  std::vector<double> sin_phi_;
  double rho_lo_ = 0.0;
  double rho_step_ = 1.0;
  std::int64_t t_origin_ = 0;
  bool anchored_ = false;
  std::int64_t last_t_ = 0;
  std::deque<SpatioTemporalPoint> pts_[2];
  std::vector<std::int32_t> acc_[2];
};

// Greedy pairing of positive with negative tracks by mean horizontal gap over
// their time overlap, gated by pair_max_dphi and pair_max_dx. Each accepted
// pair becomes one Track sampled at the longer track's timestamps with the
// midpoint of the two lines. used_pos/used_neg, when given, are resized to the
// inputs and flag which entries were consumed.
std::vector<Track> pair_tracks(const std::vector<PolarityTrack>& pos,
                               const std::vector<PolarityTrack>& neg,
                               const TrackerConfig& cfg,
                               std::vector<char>* used_pos = nullptr,
                               std::vector<char>* used_neg = nullptr);

}  // namespace evline::track
