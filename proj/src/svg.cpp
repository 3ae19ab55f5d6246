#include "evline/svg.hpp"

#include <algorithm>
#include <cmath>

#include "evline/io.hpp"

namespace evline::pipeline {
namespace {

constexpr double kW = 900.0;
constexpr double kH = 600.0;
constexpr double kPad = 40.0;

struct Axis {
  double lo = 0.0, hi = 1.0, span_px = 1.0;
  double px(double v) const { return kPad + (v - lo) / (hi - lo) * span_px; }
};

Axis make_axis(double lo, double hi, double span_px) {
  if (hi <= lo) hi = lo + 1.0;
  return {lo, hi, span_px};
}

std::string num(double v) { return core::format_double(std::round(v * 100.0) / 100.0); }

void open_svg(std::string& s) {
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kW) + "\" height=\"" +
       num(kH) + "\" viewBox=\"0 0 " + num(kW) + " " + num(kH) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void circle(std::string& s, double cx, double cy, double r, const char* fill) {
  s += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) +
       "\" fill=\"" + fill + "\"/>\n";
}

}  // namespace

std::string xt_plot_svg(const std::vector<hough::Detection>& dets,
                        const std::vector<track::Track>& tracks,
                        const hough::HoughConfig& cfg) {
  std::int64_t t_lo = 0, t_hi = 1;
  bool any = false;
  auto stretch = [&](std::int64_t t) {
    if (!any) {
      t_lo = t_hi = t;
      any = true;
    }
    t_lo = std::min(t_lo, t);
    t_hi = std::max(t_hi, t);
  };
  for (const auto& d : dets) stretch(d.t);
  for (const auto& tr : tracks)
    for (const auto& s : tr.samples) stretch(s.t);

  Axis ax = make_axis(cfg.r_min, cfg.r_max, kW - 2 * kPad);
  Axis ay = make_axis(double(t_lo) * 1e-6, double(t_hi) * 1e-6, kH - 2 * kPad);

  std::string s;
  open_svg(s);
  for (const auto& d : dets) {
    circle(s, ax.px(d.r), ay.px(double(d.t) * 1e-6), 1.2,
           d.polarity ? "#4477cc" : "#cc5544");
  }
  for (const auto& tr : tracks) {
    std::string pts;
    for (const auto& sp : tr.samples) {
      pts += num(ax.px(sp.x)) + "," + num(ay.px(double(sp.t) * 1e-6)) + " ";
    }
    s += "<polyline points=\"" + pts +
         "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"1.5\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string map_plot_svg(const mapping::LandmarkMap& map,
                         const std::vector<mapping::GroundTruthPole>& gt) {
  double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  bool any = false;
  auto stretch = [&](double x, double y) {
    if (!any) {
      x_lo = x_hi = x;
      y_lo = y_hi = y;
      any = true;
      return;
    }
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
    y_lo = std::min(y_lo, y);
    y_hi = std::max(y_hi, y);
  };
  for (const auto& lm : map.landmarks) stretch(lm.x, lm.y);
  for (const auto& g : gt) stretch(g.x, g.y);

  Axis ax = make_axis(x_lo - 1.0, x_hi + 1.0, kW - 2 * kPad);
  Axis ay = make_axis(y_lo - 1.0, y_hi + 1.0, kH - 2 * kPad);

  std::string s;
  open_svg(s);
  for (const auto& g : gt) {
    const double cx = ax.px(g.x);
    // svg y grows downward; flip so larger world y is higher
    const double cy = kH - ay.px(g.y);
    s += "<path d=\"M" + num(cx - 4) + " " + num(cy) + " H" + num(cx + 4) + " M" +
         num(cx) + " " + num(cy - 4) + " V" + num(cy + 4) +
         "\" stroke=\"#118833\" stroke-width=\"1.5\"/>\n";
  }
  for (const auto& lm : map.landmarks) {
    circle(s, ax.px(lm.x), kH - ay.px(lm.y), 3.0, "#a05522");
  }
  s += "</svg>\n";
  return s;
}

}  // namespace evline::pipeline
