#include "evline/undistort.hpp"

namespace evline::core {

std::pair<double, double> distort_normalized(double x, double y,
                                             const CameraIntrinsics& intr) {
  double r2 = x * x + y * y;
  double radial = 1.0 + intr.k1 * r2 + intr.k2 * r2 * r2;
  double xd = x * radial + 2.0 * intr.p1 * x * y + intr.p2 * (r2 + 2.0 * x * x);
  double yd = y * radial + intr.p1 * (r2 + 2.0 * y * y) + 2.0 * intr.p2 * x * y;
  return {xd, yd};
}

std::pair<double, double> undistort_normalized(double xd, double yd,
                                               const CameraIntrinsics& intr) {
  double x = xd;
  double y = yd;
  for (int i = 0; i < 8; ++i) {
    double r2 = x * x + y * y;
    double icdist = 1.0 / (1.0 + intr.k1 * r2 + intr.k2 * r2 * r2);
    double dx = 2.0 * intr.p1 * x * y + intr.p2 * (r2 + 2.0 * x * x);
    double dy = intr.p1 * (r2 + 2.0 * y * y) + 2.0 * intr.p2 * x * y;
    x = (xd - dx) * icdist;
    y = (yd - dy) * icdist;
  }
  return {x, y};
}

UndistortionLUT build_undistortion_lut(const CameraIntrinsics& intr) {
  intr.validate();
  UndistortionLUT lut;
  lut.width = intr.width;
  lut.height = intr.height;
  lut.map.resize(std::size_t(intr.width) * intr.height);
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      double xd = (u - intr.u0) / intr.alpha_x;
      double yd = (v - intr.v0) / intr.alpha_y;
      auto [x, y] = undistort_normalized(xd, yd, intr);
      int ux = round_half_up(intr.alpha_x * x + intr.u0);
      int uy = round_half_up(intr.alpha_y * y + intr.v0);
      auto& cell = lut.map[std::size_t(v) * intr.width + u];
      if (ux >= 0 && ux < intr.width && uy >= 0 && uy < intr.height) {
        cell.x = static_cast<std::int16_t>(ux);
        cell.y = static_cast<std::int16_t>(uy);
      }
    }
  }
  return lut;
}

std::optional<Event> undistort_event(const Event& e, const UndistortionLUT& lut) {
  const auto& cell = lut.at(e.x, e.y);
  if (cell.x < 0) return std::nullopt;
  Event out = e;
  out.x = cell.x;
  out.y = cell.y;
  return out;
}

}  // namespace evline::core
