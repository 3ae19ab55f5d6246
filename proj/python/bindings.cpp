#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "evline/io.hpp"
#include "evline/pipeline.hpp"
#include "evline/sim.hpp"
#include "evline/triangulate.hpp"
#include "evline/types.hpp"

namespace py = pybind11;
using namespace evline;

namespace {

using EventTuple = std::tuple<std::int64_t, int, int, int>;
using PoseTuple = std::tuple<std::int64_t, double, double, double>;
using GtTuple = std::tuple<int, double, double>;
using LandmarkTuple = std::tuple<double, double, int, std::int64_t, std::int64_t>;

std::vector<core::Event> to_events(const std::vector<EventTuple>& in) {
  std::vector<core::Event> out;
  out.reserve(in.size());
  for (const auto& [t, x, y, p] : in)
    out.push_back({t, x, y, static_cast<std::uint8_t>(p != 0)});
  return out;
}

std::vector<EventTuple> from_events(const std::vector<core::Event>& in) {
  std::vector<EventTuple> out;
  out.reserve(in.size());
  for (const core::Event& e : in) out.emplace_back(e.t, e.x, e.y, int(e.p));
  return out;
}

core::PoseLog to_poses(const std::vector<PoseTuple>& in) {
  core::PoseLog out;
  out.reserve(in.size());
  for (const auto& [t, x, y, th] : in) out.push_back({t, x, y, th});
  return out;
}

std::vector<PoseTuple> from_poses(const core::PoseLog& in) {
  std::vector<PoseTuple> out;
  out.reserve(in.size());
  for (const core::Pose2& p : in) out.emplace_back(p.t, p.x, p.y, p.theta);
  return out;
}

// flat string-to-string mapping, same keys as the config files
pipeline::PipelineConfig config_from_dict(const py::dict& d) {
  pipeline::PipelineConfig cfg;
  for (auto item : d)
    pipeline::apply_config_entry(cfg, py::str(item.first).cast<std::string>(),
                                 py::str(item.second).cast<std::string>());
  cfg.tracker.x_min = cfg.hough.r_min;
  cfg.tracker.x_max = cfg.hough.r_max;
  cfg.validate();
  return cfg;
}

py::dict simulate_scene(const std::string& scene_path, std::int64_t seed,
                        const std::string& calib_path) {
  sim::SimJob job = sim::load_scene(scene_path);
  if (!calib_path.empty()) job.sensor.intrinsics = core::load_calibration(calib_path);
  if (seed >= 0) job.sensor.seed = static_cast<std::uint64_t>(seed);
  sim::SimResult res = sim::simulate(job.scene, job.profile, job.sensor);

  std::vector<GtTuple> gt;
  for (const mapping::GroundTruthPole& p : res.gt) gt.emplace_back(p.id, p.x, p.y);

  py::dict out;
  out["events"] = from_events(res.events);
  out["poses"] = from_poses(res.poses);
  out["gt"] = gt;
  out["intrinsics"] = job.sensor.intrinsics;
  return out;
}

py::dict run(const std::vector<EventTuple>& events, const std::vector<PoseTuple>& poses,
             const core::CameraIntrinsics* intrinsics, const py::dict& config) {
  const core::CameraIntrinsics intr = intrinsics ? *intrinsics : core::CameraIntrinsics{};
  pipeline::PipelineResult res =
      pipeline::run_pipeline(to_events(events), to_poses(poses), intr,
                             config_from_dict(config));

  std::vector<std::tuple<std::int64_t, double, double, int, int>> dets;
  dets.reserve(res.detections.size());
  for (const hough::Detection& d : res.detections)
    dets.emplace_back(d.t, d.r, d.theta_deg, d.polarity, d.votes);

  std::vector<std::vector<std::pair<std::int64_t, double>>> tracks;
  tracks.reserve(res.tracks.size());
  for (const track::Track& tr : res.tracks) {
    std::vector<std::pair<std::int64_t, double>> samples;
    samples.reserve(tr.samples.size());
    for (const track::TimedPos& s : tr.samples) samples.emplace_back(s.t, s.x);
    tracks.push_back(std::move(samples));
  }

  std::vector<LandmarkTuple> landmarks;
  for (const mapping::Landmark& lm : res.map.landmarks)
    landmarks.emplace_back(lm.x, lm.y, lm.n_obs, lm.t_first, lm.t_last);

  py::dict out;
  out["detections"] = std::move(dets);
  out["tracks"] = std::move(tracks);
  out["landmarks"] = std::move(landmarks);
  out["events_in"] = res.events_in;
  out["events_used"] = res.events_used;
  out["dropped_subsample"] = res.dropped_subsample;
  out["dropped_invalid"] = res.dropped_invalid;
  out["polarity_tracks"] = res.polarity_tracks;
  out["unpaired_tracks"] = res.unpaired_tracks;
  out["rejected_tracks"] = res.rejected_tracks;
  return out;
}

py::dict evaluate(const std::vector<LandmarkTuple>& landmarks,
                  const std::vector<GtTuple>& gt, double reject_radius,
                  const std::vector<PoseTuple>& poses) {
  mapping::LandmarkMap map;
  for (const auto& [x, y, n_obs, t_first, t_last] : landmarks)
    map.landmarks.push_back({x, y, n_obs, t_first, t_last, 0.0});
  std::vector<mapping::GroundTruthPole> poles;
  for (const auto& [id, x, y] : gt) poles.push_back({id, x, y});
  core::PoseLog log = to_poses(poses);

  mapping::EvalReport rep =
      mapping::match_and_rmse(map, poles, reject_radius, log.empty() ? nullptr : &log);
  py::dict out;
  out["true_positives"] = rep.true_positives;
  out["false_negatives"] = rep.false_negatives;
  out["false_positives"] = rep.false_positives;
  out["rmse"] = rep.rmse;
  out["longitudinal_mean"] = rep.longitudinal_mean;
  out["lateral_mean"] = rep.lateral_mean;
  return out;
}

}  // namespace

PYBIND11_MODULE(_evline, m) {
  m.doc() = "line detection, tracking and landmark mapping for event-camera streams";
  m.attr("__version__") = "0.1.0";

  py::class_<core::CameraIntrinsics>(m, "CameraIntrinsics")
      .def(py::init<>())
      .def_readwrite("width", &core::CameraIntrinsics::width)
      .def_readwrite("height", &core::CameraIntrinsics::height)
      .def_readwrite("alpha_x", &core::CameraIntrinsics::alpha_x)
      .def_readwrite("alpha_y", &core::CameraIntrinsics::alpha_y)
      .def_readwrite("u0", &core::CameraIntrinsics::u0)
      .def_readwrite("v0", &core::CameraIntrinsics::v0)
      .def_readwrite("k1", &core::CameraIntrinsics::k1)
      .def_readwrite("k2", &core::CameraIntrinsics::k2)
      .def_readwrite("p1", &core::CameraIntrinsics::p1)
      .def_readwrite("p2", &core::CameraIntrinsics::p2)
      .def("validate", &core::CameraIntrinsics::validate);

  m.def("load_calibration", &core::load_calibration, py::arg("path"));

  m.def(
      "load_events",
      [](const std::string& path, const std::string& format, int width, int height) {
        return from_events(
            core::load_events(path, core::parse_event_format(format), width, height));
      },
      py::arg("path"), py::arg("format") = "csv", py::arg("width") = 240,
      py::arg("height") = 180, "events as (t_us, x, y, polarity) tuples");

  m.def(
      "write_events",
      [](const std::string& path, const std::vector<EventTuple>& events,
         const std::string& format) {
        core::write_events(path, to_events(events), core::parse_event_format(format));
      },
      py::arg("path"), py::arg("events"), py::arg("format") = "csv");

  m.def(
      "load_poses",
      [](const std::string& path) { return from_poses(core::load_poses(path)); },
      py::arg("path"), "poses as (t_us, x_m, y_m, theta_rad) tuples");

  m.def("simulate", &simulate_scene, py::arg("scene"), py::arg("seed") = -1,
        py::arg("calib") = std::string(),
        "render a scene file; returns events, poses, gt and intrinsics");

  m.def("run", &run, py::arg("events"), py::arg("poses"),
        py::arg("intrinsics") = nullptr, py::arg("config") = py::dict(),
        "full pipeline; config takes the same keys as the config files");

  m.def("evaluate", &evaluate, py::arg("landmarks"), py::arg("gt"),
        py::arg("reject_radius") = 4.0,
        py::arg("poses") = std::vector<PoseTuple>(),
        "match landmarks against ground truth poles");
}
