#include "evline/pipeline.hpp"

#include <limits>
#include <random>
#include <utility>

#include "evline/io.hpp"
#include "evline/undistort.hpp"

namespace evline::pipeline {
namespace {

bool parse_bool(const std::string& value, const std::string& what) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw core::ParseError("cannot parse " + what + " from '" + value + "'");
}

}  // namespace

void PipelineConfig::validate() const {
  hough.validate();
  tracker.validate();
  if (triangulation.max_samples < 2)
    throw core::ConfigError("max_samples must be >= 2");
  if (triangulation.min_depth <= 0.0) throw core::ConfigError("min_depth must be > 0");
  if (merge_radius < 0.0) throw core::ConfigError("merge_radius must be >= 0");
  if (reject_radius <= 0.0) throw core::ConfigError("reject_radius must be > 0");
  if (subsample < 0.0 || subsample > 1.0)
    throw core::ConfigError("subsample must be in [0, 1]");
  if (extract_period <= 0) throw core::ConfigError("extract_period must be > 0");
  if (quiesce_margin < 0) throw core::ConfigError("quiesce_margin must be >= 0");
}

void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                        const std::string& value) {
  auto d = [&] { return core::parse_double(value, key); };
  auto i = [&] { return core::parse_int(value, key); };
  auto ii = [&] { return static_cast<int>(core::parse_int(value, key)); };

  if (key == "theta_min") cfg.hough.theta_min_deg = d();
  else if (key == "theta_max") cfg.hough.theta_max_deg = d();
  else if (key == "theta_step") cfg.hough.theta_step_deg = d();
  else if (key == "r_min") cfg.hough.r_min = d();
  else if (key == "r_max") cfg.hough.r_max = d();
  else if (key == "window_size") cfg.hough.window_size = ii();
  else if (key == "threshold") cfg.hough.threshold = ii();
  else if (key == "suppression_radius") cfg.hough.suppression_radius = ii();
  else if (key == "chebyshev") cfg.hough.chebyshev = parse_bool(value, key);
  else if (key == "emit_stride") cfg.hough.emit_stride = ii();
  else if (key == "window_duration") cfg.tracker.window_duration = i();
  else if (key == "time_bins") cfg.tracker.time_bins = ii();
  else if (key == "rho_bins") cfg.tracker.rho_bins = ii();
  else if (key == "phi_min") cfg.tracker.phi_min_deg = d();
  else if (key == "phi_max") cfg.tracker.phi_max_deg = d();
  else if (key == "mirrored") cfg.tracker.mirrored = parse_bool(value, key);
  else if (key == "track_threshold") cfg.tracker.track_threshold = ii();
  else if (key == "assoc_tolerance") cfg.tracker.assoc_tolerance = d();
  else if (key == "min_track_span") cfg.tracker.min_track_span = i();
  else if (key == "pair_max_dx") cfg.tracker.pair_max_dx = d();
  else if (key == "pair_max_dphi") cfg.tracker.pair_max_dphi = d();
  else if (key == "max_samples") cfg.triangulation.max_samples = ii();
  else if (key == "min_depth") cfg.triangulation.min_depth = d();
  else if (key == "ext_x") cfg.triangulation.ext_x = d();
  else if (key == "ext_y") cfg.triangulation.ext_y = d();
  else if (key == "ext_theta") cfg.triangulation.ext_theta = d();
  else if (key == "merge_radius") cfg.merge_radius = d();
  else if (key == "reject_radius") cfg.reject_radius = d();
  else if (key == "subsample") cfg.subsample = d();
  else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(i());
  else if (key == "extract_period") cfg.extract_period = i();
  else if (key == "quiesce_margin") cfg.quiesce_margin = i();
  else throw core::ConfigError("unknown config key: " + key);
}

PipelineConfig load_pipeline_config(const std::string& path) {
  PipelineConfig cfg;
  for (const auto& [key, value] : core::load_key_values(path))
    apply_config_entry(cfg, key, value);
  cfg.tracker.x_min = cfg.hough.r_min;
  cfg.tracker.x_max = cfg.hough.r_max;
  cfg.validate();
  return cfg;
}

PipelineResult run_pipeline(const std::vector<core::Event>& events,
                            const core::PoseLog& poses, const core::CameraIntrinsics& intr,
                            const PipelineConfig& cfg) {
  cfg.validate();
  intr.validate();

  const core::UndistortionLUT lut = core::build_undistortion_lut(intr);
  hough::HoughState state(cfg.hough);
  track::Tracker tracker(cfg.tracker);
  std::vector<track::PolarityTrack> pending[2];
  std::mt19937_64 rng(cfg.seed);
  PipelineResult res;
  res.map.merge_radius = cfg.merge_radius;

  auto triangulate_paired = [&](std::vector<track::Track>&& paired) {
    for (track::Track& tr : paired) {
      try {
        mapping::Landmark lm = mapping::triangulate(tr, poses, intr, cfg.triangulation);
        mapping::accumulate_map(res.map, lm);
      } catch (const mapping::TriangulationError&) {
        ++res.rejected_tracks;
      } catch (const core::OutOfRange&) {
        ++res.rejected_tracks;
      }
      res.tracks.push_back(std::move(tr));
    }
  };

  auto flush = [&](std::int64_t now, bool final_flush) {
    auto harvested = final_flush ? tracker.extract_tracks(now)
                                 : tracker.extract_completed(now, cfg.quiesce_margin);
    for (track::PolarityTrack& pt : harvested) {
      ++res.polarity_tracks;
      pending[pt.polarity ? 1 : 0].push_back(std::move(pt));
    }
    std::vector<char> used_pos, used_neg;
    triangulate_paired(
        track::pair_tracks(pending[1], pending[0], cfg.tracker, &used_pos, &used_neg));
    for (int pol = 0; pol < 2; ++pol) {
      const std::vector<char>& used = pol ? used_pos : used_neg;
      std::vector<track::PolarityTrack> keep;
      for (std::size_t k = 0; k < pending[pol].size(); ++k) {
        if (used[k]) continue;
        // a mate can still come from a later harvest while the line is recent
        const bool stale =
            final_flush ||
            pending[pol][k].samples.back().t < now - cfg.tracker.window_duration;
        if (stale) {
          ++res.unpaired_tracks;
        } else {
          keep.push_back(std::move(pending[pol][k]));
        }
      }
      pending[pol].swap(keep);
    }
  };

  const bool sub = cfg.subsample > 0.0;
  std::int64_t next_extract = std::numeric_limits<std::int64_t>::min();
  std::int64_t last_t = 0;

  for (const core::Event& e : events) {
    ++res.events_in;
    if (res.events_in == 1) next_extract = e.t + cfg.extract_period;
    last_t = e.t;
    if (sub) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      if (u < cfg.subsample) {
        ++res.dropped_subsample;
        continue;
      }
    }
    if (e.x < 0 || e.x >= lut.width || e.y < 0 || e.y >= lut.height)
      throw core::BoundsError("event outside sensor frame");
    const auto rectified = core::undistort_event(e, lut);
    if (!rectified) {
      ++res.dropped_invalid;
      continue;
    }
    ++res.events_used;
    for (const hough::Detection& det : hough::detect_step(state, *rectified)) {
      res.detections.push_back(det);
      tracker.ingest_detection(det);
    }
    if (e.t >= next_extract) {
      flush(e.t, false);
      next_extract = e.t + cfg.extract_period;
    }
  }
  if (res.events_in > 0) flush(last_t, true);
  return res;
}

// columns: t_us,r_px,theta_deg,polarity,votes; header-free like all CSVs here
std::string format_detections_csv(const std::vector<hough::Detection>& dets) {
  std::string out;
  for (const hough::Detection& d : dets) {
    out += std::to_string(d.t);
    out += ',';
    out += core::format_double(d.r);
    out += ',';
    out += core::format_double(d.theta_deg);
    out += ',';
    out += std::to_string(d.polarity);
    out += ',';
    out += std::to_string(d.votes);
    out += '\n';
  }
  return out;
}

std::vector<hough::Detection> load_detections_csv(const std::string& path) {
  std::vector<hough::Detection> out;
  const std::string text = core::read_file(path);
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = core::split_fields(line);
    if (f.size() != 5)
      throw core::ParseError("line " + std::to_string(line_no) + ": expected 5 fields");
    hough::Detection d;
    d.t = core::parse_int(f[0], "t_us");
    d.r = core::parse_double(f[1], "r_px");
    d.theta_deg = core::parse_double(f[2], "theta_deg");
    d.polarity = static_cast<int>(core::parse_int(f[3], "polarity"));
    d.votes = static_cast<int>(core::parse_int(f[4], "votes"));
    out.push_back(d);
  }
  return out;
}

std::vector<std::vector<track::TimedPos>> load_tracks_csv(const std::string& path) {
  std::vector<std::vector<track::TimedPos>> out;
  const std::string text = core::read_file(path);
  std::size_t start = 0;
  std::size_t line_no = 0;
  std::int64_t last_id = -1;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = core::split_fields(line);
    if (f.size() != 3)
      throw core::ParseError("line " + std::to_string(line_no) + ": expected 3 fields");
    std::int64_t id = core::parse_int(f[0], "track_id");
    if (id != last_id) {
      if (id != last_id + 1)
        throw core::ParseError("line " + std::to_string(line_no) + ": track ids must be contiguous");
      out.emplace_back();
      last_id = id;
    }
    out.back().push_back({core::parse_int(f[1], "t_us"), core::parse_double(f[2], "xpos_px")});
  }
  return out;
}

// columns: track_id,t_us,xpos_px, one row per sample
std::string format_tracks_csv(const std::vector<track::Track>& tracks) {
  std::string out;
  for (std::size_t id = 0; id < tracks.size(); ++id) {
    for (const track::TimedPos& s : tracks[id].samples) {
      out += std::to_string(id);
      out += ',';
      out += std::to_string(s.t);
      out += ',';
      out += core::format_double(s.x);
      out += '\n';
    }
  }
  return out;
}

}  // namespace evline::pipeline
