#include "evline/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "evline/io.hpp"

namespace evline::pipeline {
namespace {

using clock_type = std::chrono::steady_clock;

double elapsed_us(clock_type::time_point a, clock_type::time_point b) {
  return std::chrono::duration<double, std::micro>(b - a).count();
}

BenchVariant summarize(const std::vector<double>& samples) {
  BenchVariant v;
  if (samples.empty()) return v;
  double sum = 0.0;
  for (double s : samples) {
    sum += s;
    v.max_us = std::max(v.max_us, s);
  }
  v.mean_us = sum / double(samples.size());
  double var = 0.0;
  for (double s : samples) var += (s - v.mean_us) * (s - v.mean_us);
  v.std_us = std::sqrt(var / double(samples.size()));
  return v;
}

}  // namespace

BenchReport run_bench(const std::vector<core::Event>& events,
                      const hough::HoughConfig& cfg, bool check) {
  cfg.validate();
  BenchReport rep;
  rep.events = events.size();
  if (events.empty()) return rep;

  hough::HoughState inc(cfg);
  hough::HoughState ref(cfg);
  std::vector<double> inc_us(events.size());
  std::vector<double> ref_us(events.size());

  for (std::size_t i = 0; i < events.size(); ++i) {
    const core::Event& e = events[i];
    const int polarity = e.p ? 1 : 0;

    auto a0 = clock_type::now();
    hough::apply_event(inc, e, inc.update_buf);
    hough::iterative_nms(inc, inc.update_buf);
    auto a1 = clock_type::now();
    inc_us[i] = elapsed_us(a0, a1);

    auto b0 = clock_type::now();
    hough::apply_event(ref, e, ref.update_buf);
    const std::vector<hough::Cell> oracle = hough::full_nms_oracle(ref, polarity);
    auto b1 = clock_type::now();
    ref_us[i] = elapsed_us(b0, b1);

    if (check && oracle != inc.pol[polarity].maxima) throw EquivalenceFailure(i);
  }

  rep.iterative = summarize(inc_us);
  rep.full = summarize(ref_us);
  if (rep.iterative.mean_us > 0.0) rep.speedup = rep.full.mean_us / rep.iterative.mean_us;

  // bucket by the stream's own 33 ms slices
  const std::int64_t t0 = events.front().t;
  const std::int64_t slice = 33'000;
  const std::size_t n_slices =
      std::size_t((events.back().t - t0) / slice) + 1;
  std::vector<double> counts(n_slices, 0.0);
  std::vector<double> busy_us(n_slices, 0.0);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const std::size_t b = std::size_t((events[i].t - t0) / slice);
    counts[b] += 1.0;
    busy_us[b] += inc_us[i];
  }
  double rate_sum = 0.0;
  double delayed = 0.0;
  for (std::size_t b = 0; b < n_slices; ++b) {
    const double rate = counts[b] / 0.033;
    rate_sum += rate;
    rep.rate_max = std::max(rep.rate_max, rate);
    if (busy_us[b] > double(slice)) delayed += 1.0;
  }
  rep.rate_mean = rate_sum / double(n_slices);
  double var = 0.0;
  for (std::size_t b = 0; b < n_slices; ++b) {
    const double rate = counts[b] / 0.033;
    var += (rate - rep.rate_mean) * (rate - rep.rate_mean);
  }
  rep.rate_std = std::sqrt(var / double(n_slices));
  rep.real_time_factor = rep.iterative.mean_us * rep.rate_mean / 1e6;
  rep.delayed_fraction = delayed / double(n_slices);
  return rep;
}

std::string format_bench_report(const BenchReport& r) {
  std::string out;
  auto put = [&](const char* key, double v) {
    out += key;
    out += '=';
    out += core::format_double(v);
    out += '\n';
  };
  out += "events=" + std::to_string(r.events) + "\n";
  put("iterative_mean_us", r.iterative.mean_us);
  put("iterative_max_us", r.iterative.max_us);
  put("iterative_std_us", r.iterative.std_us);
  put("full_mean_us", r.full.mean_us);
  put("full_max_us", r.full.max_us);
  put("full_std_us", r.full.std_us);
  put("speedup", r.speedup);
  put("event_rate_mean", r.rate_mean);
  put("event_rate_max", r.rate_max);
  put("event_rate_std", r.rate_std);
  put("real_time_factor", r.real_time_factor);
  put("delayed_fraction", r.delayed_fraction);
  return out;
}

}  // namespace evline::pipeline
