#pragma once

#include <cstdint>
#include <vector>

#include "evline/types.hpp"

namespace evline::hough {

struct HoughConfig {
  double theta_min_deg = -10.0;
  double theta_max_deg = 10.0;
  double theta_step_deg = 1.0;
  double r_min = 0.0;  // r bins are 1 px wide
  double r_max = 260.0;
  int window_size = 300;
  int threshold = 15;
  int suppression_radius = 10;
  bool chebyshev = false;  // suppression metric; default Euclidean
  int emit_stride = 30;

  int theta_bins() const {
    return int((theta_max_deg - theta_min_deg) / theta_step_deg + 1e-9) + 1;
  }
  int r_bins() const { return int(r_max - r_min + 1e-9) + 1; }
  void validate() const;
};

struct Cell {
  std::int32_t r = 0;
  std::int32_t th = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct CellUpdateSet {
  int polarity = 0;
  std::vector<Cell> plus;
  std::vector<Cell> minus;
};

struct Detection {
  std::int64_t t = 0;
  double r = 0.0;          // bin center, pixels
  double theta_deg = 0.0;  // bin center, degrees
  int polarity = 0;
  int votes = 0;
};

// Accumulator cells the incremental path reads beyond the per-update
// neighbour sweeps: disc scans, candidate validation, suppression checks.
struct NmsStats {
  std::uint64_t events = 0;
  std::uint64_t extra_cells = 0;
  double mean_extra_cells() const { return events ? double(extra_cells) / double(events) : 0.0; }
};

struct PolarityGrid {
  std::vector<std::uint16_t> acc;  // theta-major: index = th * r_bins + r
  std::vector<core::Event> ring;
  std::size_t head = 0;
  std::size_t count = 0;
  std::vector<Cell> maxima;  // current global maxima, in suppression order
};

struct HoughState {
  HoughConfig cfg;
  int nr = 0;
  int nth = 0;
  std::vector<double> cos_t;
  std::vector<double> sin_t;
  PolarityGrid pol[2];
  mutable NmsStats stats;
  std::uint64_t applied = 0;
  // scratch reused across iterative_nms calls
  std::vector<Cell> pool_buf, pending_buf, accepted_buf, reopened_buf;
  CellUpdateSet update_buf;

  explicit HoughState(const HoughConfig& config);
  int votes(int polarity, Cell c) const {
    return pol[polarity].acc[std::size_t(c.th) * nr + c.r];
  }
};

// One cell per theta bin; bins whose rounded r falls outside the grid are
// omitted.
std::vector<Cell> hypothesis_cells(double u, double v, const HoughConfig& cfg);

// Pushes the event into its polarity window, evicting the oldest when full,
// and applies the vote deltas. The returned sets drive iterative_nms. The
// into-form reuses the caller's buffers on the hot path.
CellUpdateSet apply_event(HoughState& st, const core::Event& e);
void apply_event(HoughState& st, const core::Event& e, CellUpdateSet& out);

bool is_local_maximum(const HoughState& st, int polarity, Cell c);

std::vector<Cell> local_maxima_in_radius(const HoughState& st, int polarity, Cell center,
                                         int radius);

// Incremental replacement of the polarity's global maxima set; exact against
// full_nms_oracle after every event.
void iterative_nms(HoughState& st, const CellUpdateSet& updates);

// Full-grid recompute: collect local maxima, sort (votes desc, theta asc,
// r asc), greedily keep maxima farther than the suppression radius.
std::vector<Cell> full_nms_oracle(const HoughState& st, int polarity);

// apply_event + iterative_nms; emits the polarity's maxima as detections
// every emit_stride applied events.
std::vector<Detection> detect_step(HoughState& st, const core::Event& e);

Detection make_detection(const HoughState& st, Cell c, int polarity, std::int64_t t);

}  // namespace evline::hough
