#include <cstdio>
#include <filesystem>
#include <string>
#include <system_error>
#include <vector>

#include "CLI11.hpp"
#include "evline/bench.hpp"
#include "evline/io.hpp"
#include "evline/pipeline.hpp"
#include "evline/sim.hpp"
#include "evline/svg.hpp"
#include "evline/triangulate.hpp"

namespace fs = std::filesystem;
using namespace evline;

namespace {

struct Args {
  std::string events;
  std::string poses;
  std::string calib;
  std::string config;
  std::string gt;
  std::string out = "out";
  bool plot = false;
  double subsample = -1.0;  // negative: keep config value
  std::int64_t seed = -1;
  std::string format = "csv";
};

// Writes land one by one; any failure removes everything written so a broken
// run leaves no partial outputs.
class OutputSet {
 public:
  void add(fs::path path, std::string content) {
    files_.emplace_back(std::move(path), std::move(content));
  }
  void commit() {
    std::vector<fs::path> written;
    try {
      for (const auto& [path, content] : files_) {
        core::write_file(path.string(), content);
        written.push_back(path);
      }
    } catch (...) {
      for (const fs::path& p : written) {
        std::error_code ec;
        fs::remove(p, ec);
      }
      throw;
    }
  }

 private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

pipeline::PipelineConfig make_config(const Args& a) {
  pipeline::PipelineConfig cfg;
  if (!a.config.empty()) cfg = pipeline::load_pipeline_config(a.config);
  if (a.subsample >= 0.0) cfg.subsample = a.subsample;
  if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
  cfg.validate();
  return cfg;
}

std::string format_map_csv(const mapping::LandmarkMap& map) {
  std::string out;
  for (std::size_t i = 0; i < map.landmarks.size(); ++i) {
    const mapping::Landmark& lm = map.landmarks[i];
    out += std::to_string(i);
    out += ',';
    out += core::format_double(lm.x);
    out += ',';
    out += core::format_double(lm.y);
    out += ',';
    out += std::to_string(lm.n_obs);
    out += ',';
    out += std::to_string(lm.t_first);
    out += ',';
    out += std::to_string(lm.t_last);
    out += '\n';
  }
  return out;
}

std::string format_gt_csv(const std::vector<mapping::GroundTruthPole>& gt) {
  std::string out;
  for (const mapping::GroundTruthPole& p : gt) {
    out += std::to_string(p.id);
    out += ',';
    out += core::format_double(p.x);
    out += ',';
    out += core::format_double(p.y);
    out += '\n';
  }
  return out;
}

std::string format_calib(const core::CameraIntrinsics& intr) {
  std::string out;
  auto put = [&](const char* k, double v) {
    out += k;
    out += '=';
    out += core::format_double(v);
    out += '\n';
  };
  out += "width=" + std::to_string(intr.width) + "\n";
  out += "height=" + std::to_string(intr.height) + "\n";
  put("alpha_x", intr.alpha_x);
  put("alpha_y", intr.alpha_y);
  put("u0", intr.u0);
  put("v0", intr.v0);
  put("k1", intr.k1);
  put("k2", intr.k2);
  put("p1", intr.p1);
  put("p2", intr.p2);
  return out;
}

int cmd_run(const Args& a) {
  const pipeline::PipelineConfig cfg = make_config(a);
  const core::CameraIntrinsics intr = core::load_calibration(a.calib);
  const auto events = core::load_events(a.events, core::parse_event_format(a.format),
                                        intr.width, intr.height);
  const core::PoseLog poses = core::load_poses(a.poses);

  const pipeline::PipelineResult res = pipeline::run_pipeline(events, poses, intr, cfg);

  fs::create_directories(a.out);
  OutputSet outs;
  const fs::path dir(a.out);
  outs.add(dir / "detections.csv", pipeline::format_detections_csv(res.detections));
  outs.add(dir / "tracks.csv", pipeline::format_tracks_csv(res.tracks));
  outs.add(dir / "map.csv", format_map_csv(res.map));
  if (a.plot) {
    std::vector<hough::Detection> pos, neg;
    for (const auto& d : res.detections) (d.polarity ? pos : neg).push_back(d);
    outs.add(dir / "xt_pos.svg", pipeline::xt_plot_svg(pos, res.tracks, cfg.hough));
    outs.add(dir / "xt_neg.svg", pipeline::xt_plot_svg(neg, res.tracks, cfg.hough));
    std::vector<mapping::GroundTruthPole> gt;
    if (!a.gt.empty()) gt = mapping::load_gt_csv(a.gt);
    outs.add(dir / "map.svg", pipeline::map_plot_svg(res.map, gt));
  }
  outs.commit();

  std::printf("events_in=%llu\n", (unsigned long long)res.events_in);
  std::printf("events_used=%llu\n", (unsigned long long)res.events_used);
  std::printf("dropped_subsample=%llu\n", (unsigned long long)res.dropped_subsample);
  std::printf("dropped_invalid=%llu\n", (unsigned long long)res.dropped_invalid);
  std::printf("detections=%zu\n", res.detections.size());
  std::printf("polarity_tracks=%llu\n", (unsigned long long)res.polarity_tracks);
  std::printf("tracks=%zu\n", res.tracks.size());
  std::printf("unpaired_tracks=%llu\n", (unsigned long long)res.unpaired_tracks);
  std::printf("rejected_tracks=%llu\n", (unsigned long long)res.rejected_tracks);
  std::printf("landmarks=%zu\n", res.map.landmarks.size());
  return 0;
}

int cmd_simulate(const Args& a) {
  sim::SimJob job = sim::load_scene(a.config);
  if (!a.calib.empty()) job.sensor.intrinsics = core::load_calibration(a.calib);
  if (a.seed >= 0) job.sensor.seed = static_cast<std::uint64_t>(a.seed);

  const sim::SimResult res = sim::simulate(job.scene, job.profile, job.sensor);
  const core::EventFormat format = core::parse_event_format(a.format);

  fs::create_directories(a.out);
  const fs::path dir(a.out);
  const fs::path event_path =
      dir / (format == core::EventFormat::csv ? "events.csv" : "events.bin");
  OutputSet outs;
  outs.add(dir / "calib.txt", format_calib(job.sensor.intrinsics));
  outs.add(dir / "gt.csv", format_gt_csv(res.gt));
  outs.commit();
  // event/pose writers stream straight to disk; remove them on failure too
  try {
    core::write_events(event_path.string(), res.events, format);
    core::write_poses((dir / "poses.csv").string(), res.poses);
  } catch (...) {
    for (const char* name : {"calib.txt", "gt.csv", "poses.csv"}) {
      std::error_code ec;
      fs::remove(dir / name, ec);
    }
    std::error_code ec;
    fs::remove(event_path, ec);
    throw;
  }

  std::printf("events=%zu\n", res.events.size());
  std::printf("poses=%zu\n", res.poses.size());
  std::printf("poles=%zu\n", res.gt.size());
  return 0;
}

int cmd_bench(const Args& a) {
  const pipeline::PipelineConfig cfg = make_config(a);
  core::CameraIntrinsics intr;
  if (!a.calib.empty()) intr = core::load_calibration(a.calib);
  const auto events = core::load_events(a.events, core::parse_event_format(a.format),
                                        intr.width, intr.height);
  const pipeline::BenchReport rep = pipeline::run_bench(events, cfg.hough, true);
  std::fputs(pipeline::format_bench_report(rep).c_str(), stdout);
  return 0;
}

int cmd_eval(const Args& a) {
  fs::path map_path(a.out);
  if (fs::is_directory(map_path)) map_path /= "map.csv";
  const mapping::LandmarkMap map = mapping::load_map_csv(map_path.string());
  const auto gt = mapping::load_gt_csv(a.gt);
  core::PoseLog poses;
  if (!a.poses.empty()) poses = core::load_poses(a.poses);
  const pipeline::PipelineConfig cfg = make_config(a);
  const mapping::EvalReport rep = mapping::match_and_rmse(
      map, gt, cfg.reject_radius, poses.empty() ? nullptr : &poses);
  std::fputs(mapping::format_eval_report(rep).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"near-vertical line detection, tracking and landmark mapping "
               "for event-camera streams"};
  app.require_subcommand(1);
  Args args;

  CLI::App* run = app.add_subcommand("run", "full pipeline on an event file");
  run->add_option("--events", args.events, "event stream file")->required();
  run->add_option("--poses", args.poses, "odometry pose log CSV")->required();
  run->add_option("--calib", args.calib, "camera calibration file")->required();
  run->add_option("--config", args.config, "pipeline config file");
  run->add_option("--out", args.out, "output directory");
  run->add_flag("--plot", args.plot, "emit SVG plots");
  run->add_option("--subsample", args.subsample, "event drop probability in [0,1]");
  run->add_option("--seed", args.seed, "subsampling seed");
  run->add_option("--format", args.format, "event file format: csv|binary");

  CLI::App* simulate = app.add_subcommand("simulate", "render a synthetic pole scene");
  simulate->add_option("--config", args.config, "scene description file")->required();
  simulate->add_option("--calib", args.calib, "camera calibration file");
  simulate->add_option("--out", args.out, "output directory");
  simulate->add_option("--seed", args.seed, "noise seed");
  simulate->add_option("--format", args.format, "event file format: csv|binary");

  CLI::App* bench = app.add_subcommand(
      "bench", "time incremental vs full-recompute detection on an event file");
  bench->add_option("--events", args.events, "event stream file")->required();
  bench->add_option("--calib", args.calib, "camera calibration file");
  bench->add_option("--config", args.config, "pipeline config file");
  bench->add_option("--format", args.format, "event file format: csv|binary");

  CLI::App* eval = app.add_subcommand("eval", "score a map against ground truth");
  eval->add_option("--out", args.out, "run output directory or map CSV path");
  eval->add_option("--gt", args.gt, "ground truth map CSV")->required();
  eval->add_option("--poses", args.poses, "pose log for heading decomposition");
  eval->add_option("--config", args.config, "pipeline config file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(args);
    if (simulate->parsed()) return cmd_simulate(args);
    if (bench->parsed()) return cmd_bench(args);
    if (eval->parsed()) return cmd_eval(args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
