#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "evline/hough.hpp"
#include "evline/types.hpp"

namespace evline::pipeline {

// The incremental maxima diverged from the recompute oracle.
struct EquivalenceFailure : std::runtime_error {
  explicit EquivalenceFailure(std::uint64_t event_index)
      : std::runtime_error("maxima diverged from full recompute at event " +
                           std::to_string(event_index)),
        index(event_index) {}
  std::uint64_t index = 0;
};

struct BenchVariant {
  double mean_us = 0.0;
  double max_us = 0.0;
  double std_us = 0.0;
};

struct BenchReport {
  std::uint64_t events = 0;
  BenchVariant iterative;
  BenchVariant full;
  double speedup = 0.0;  // full mean over iterative mean
  // input rate over 33 ms slices of the stream's own timestamps
  double rate_mean = 0.0;
  double rate_max = 0.0;
  double rate_std = 0.0;
  double real_time_factor = 0.0;   // iterative mean_us * rate_mean / 1e6
  double delayed_fraction = 0.0;   // slices whose summed iterative time > 33 ms
};

// Feeds the stream through two detector states, timing every event on the
// incremental path and on the full-recompute path. With check set, compares
// the updated polarity's maxima after every event and throws
// EquivalenceFailure on the first difference.
BenchReport run_bench(const std::vector<core::Event>& events,
                      const hough::HoughConfig& cfg, bool check = true);

std::string format_bench_report(const BenchReport& report);

}  // namespace evline::pipeline
