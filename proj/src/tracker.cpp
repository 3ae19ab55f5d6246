#include "evline/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace evline::track {

void TrackerConfig::validate() const {
  if (window_duration <= 0) throw core::ConfigError("window_duration must be positive");
  if (!(window_duration > min_track_span && min_track_span > 0)) {
    throw core::ConfigError("need window_duration > min_track_span > 0");
  }
  if (time_bins < 1 || rho_bins < 2) throw core::ConfigError("grid too small");
  if (!(phi_min_deg > 0.0 && phi_max_deg < 90.0 && phi_min_deg < phi_max_deg)) {
    throw core::ConfigError("phi range must lie strictly inside (0, 90) degrees");
  }
  if (track_threshold < 1) throw core::ConfigError("track_threshold must be >= 1");
  if (assoc_tolerance <= 0.0) throw core::ConfigError("assoc_tolerance must be positive");
  if (pair_max_dx < 0.0 || pair_max_dphi < 0.0) throw core::ConfigError("negative pair gate");
  if (!(x_min < x_max)) throw core::ConfigError("x range is empty");
}

double StLine::x_at(std::int64_t t) const {
  double phi = core::deg_to_rad(phi_deg);
  double tau = double(t - t_origin) / bin_duration_us;
  return (rho - tau * std::sin(phi)) / std::cos(phi);
}

Tracker::Tracker(const TrackerConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  bin_dur_ = cfg_.bin_duration_us();
  int m = cfg_.phi_bins();
  cos_phi_.resize(m);
  sin_phi_.resize(m);
  for (int i = 0; i < m; ++i) {
    double a = core::deg_to_rad(cfg_.phi_lo_deg() + i);
    cos_phi_[i] = std::cos(a);
    sin_phi_[i] = std::sin(a);
  }
  // rho bounds from the corners of the (x, tau) box the grid can hold.
  double tau_max = 2.0 * cfg_.time_bins;
  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  for (int i = 0; i < m; ++i) {
    for (double x : {cfg_.x_min, cfg_.x_max}) {
      for (double tv : {0.0, tau_max}) {
        double rho = x * cos_phi_[i] + tv * sin_phi_[i];
        lo = std::min(lo, rho);
        hi = std::max(hi, rho);
      }
    }
  }
  rho_lo_ = lo;
  rho_step_ = (hi - lo) / double(cfg_.rho_bins - 1);
  for (auto& a : acc_) a.assign(std::size_t(cfg_.rho_bins) * m, 0);
}

void Tracker::vote(const SpatioTemporalPoint& p, int sign) {
  double tv = tau(p.t);
  auto& acc = acc_[p.polarity];
  int nrho = cfg_.rho_bins;
  for (std::size_t i = 0; i < cos_phi_.size(); ++i) {
    double rho = p.xpos * cos_phi_[i] + tv * sin_phi_[i];
    int bin = core::round_half_up((rho - rho_lo_) / rho_step_);
    if (bin >= 0 && bin < nrho) acc[i * nrho + bin] += sign;
  }
}

std::vector<std::size_t> Tracker::vote_cells(double x, std::int64_t t) const {
  std::vector<std::size_t> out;
  double tv = tau(t);
  int nrho = cfg_.rho_bins;
  for (std::size_t i = 0; i < cos_phi_.size(); ++i) {
    double rho = x * cos_phi_[i] + tv * sin_phi_[i];
    int bin = core::round_half_up((rho - rho_lo_) / rho_step_);
    if (bin >= 0 && bin < nrho) out.push_back(i * nrho + bin);
  }
  return out;
}

void Tracker::expire(std::int64_t now) {
  std::int64_t cutoff = now - cfg_.window_duration;
  for (auto& pts : pts_) {
    while (!pts.empty() && pts.front().t < cutoff) {
      vote(pts.front(), -1);
      pts.pop_front();
    }
  }
}

void Tracker::reanchor(std::int64_t now) {
  t_origin_ = now - cfg_.window_duration;
  for (auto& a : acc_) std::fill(a.begin(), a.end(), 0);
  for (const auto& pts : pts_) {
    for (const auto& p : pts) vote(p, +1);
  }
}

void Tracker::ingest_detection(const hough::Detection& d) {
  if (d.t < last_t_) {
    throw core::OrderError("detection timestamps must be non-decreasing");
  }
  last_t_ = d.t;
  if (!anchored_) {
    t_origin_ = d.t;
    anchored_ = true;
  }
  expire(d.t);
  if (tau(d.t) >= 2.0 * cfg_.time_bins) reanchor(d.t);
  SpatioTemporalPoint p{d.r, d.t, d.polarity & 1};
  pts_[p.polarity].push_back(p);
  vote(p, +1);
}

namespace {

// Orthogonal regression through (x, tau) samples; falls back to the seed line
// when the fit is degenerate or pushes a sample beyond the tolerance.
StLine refit_line(const std::vector<TimedPos>& samples, const StLine& seed, double tol) {
  std::size_t n = samples.size();
  if (n < 2) return seed;
  double mx = 0.0, mt = 0.0;
  std::vector<double> taus(n);
  for (std::size_t i = 0; i < n; ++i) {
    taus[i] = double(samples[i].t - seed.t_origin) / seed.bin_duration_us;
    mx += samples[i].x;
    mt += taus[i];
  }
  mx /= double(n);
  mt /= double(n);
  double sxx = 0.0, sxt = 0.0, stt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = samples[i].x - mx;
    double dt = taus[i] - mt;
    sxx += dx * dx;
    sxt += dx * dt;
    stt += dt * dt;
  }
  double axis = 0.5 * std::atan2(2.0 * sxt, sxx - stt);  // major axis direction
  double nx = -std::sin(axis);
  double nt = std::cos(axis);
  if (nx < 0.0) {
    nx = -nx;
    nt = -nt;
  }
  if (nx < 0.05) return seed;  // near-constant tau; keep the accumulator line
  StLine line = seed;
  line.phi_deg = core::rad_to_deg(std::atan2(nt, nx));
  line.rho = nx * mx + nt * mt;
  // keep the refit only if it explains the samples at least as well as the
  // coarse accumulator line
  double worst_fit = 0.0, worst_seed = 0.0;
  const double sc = std::cos(core::deg_to_rad(seed.phi_deg));
  const double ss = std::sin(core::deg_to_rad(seed.phi_deg));
  for (std::size_t i = 0; i < n; ++i) {
    worst_fit = std::max(worst_fit,
                         std::abs(nx * samples[i].x + nt * taus[i] - line.rho));
    worst_seed = std::max(worst_seed,
                          std::abs(sc * samples[i].x + ss * taus[i] - seed.rho));
  }
  return worst_fit <= std::max(worst_seed, tol) ? line : seed;
}

}  // namespace

std::vector<PolarityTrack> Tracker::harvest(std::int64_t now, std::int64_t quiesce_margin) {
  expire(now);
  std::vector<PolarityTrack> out;
  int nrho = cfg_.rho_bins;
  for (int pol = 0; pol < 2; ++pol) {
    auto& acc = acc_[pol];
    auto& pts = pts_[pol];
    std::vector<char> skipped(acc.size(), 0);
    // Points claimed by a still-active line stay off limits for weaker cells
    // this round, so clutter lines crossing an unfinished track cannot eat
    // its history.
    std::vector<char> reserved(pts.size(), 0);
    while (true) {
      int best = -1;
      std::int32_t best_votes = 0;
      for (int i = 0; i < int(acc.size()); ++i) {
        if (!skipped[i] && acc[i] > best_votes) {
          best = i;
          best_votes = acc[i];
        }
      }
      if (best < 0 || best_votes < cfg_.track_threshold) break;
      int phi_bin = best / nrho;
      int rho_bin = best % nrho;
      double phi = core::deg_to_rad(cfg_.phi_lo_deg() + phi_bin);
      double rho = rho_lo_ + rho_bin * rho_step_;
      double c = std::cos(phi);
      double s = std::sin(phi);

      std::vector<std::size_t> picked;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (reserved[i]) continue;
        double d = pts[i].xpos * c + tau(pts[i].t) * s - rho;
        if (std::abs(d) <= cfg_.assoc_tolerance) picked.push_back(i);
      }
      if (picked.empty()) {
        // Tolerance narrower than a rho cell: fall back to the exact voters
        // so the loop always consumes something.
        for (std::size_t i = 0; i < pts.size(); ++i) {
          if (reserved[i]) continue;
          double rv = pts[i].xpos * c + tau(pts[i].t) * s;
          if (core::round_half_up((rv - rho_lo_) / rho_step_) == rho_bin) picked.push_back(i);
        }
      }
      if (picked.empty()) {
        skipped[best] = 1;
        continue;
      }
      if (quiesce_margin >= 0) {
        std::int64_t newest = 0;
        for (std::size_t i : picked) newest = std::max(newest, pts[i].t);
        if (newest > now - quiesce_margin) {
          skipped[best] = 1;
          for (std::size_t i : picked) reserved[i] = 1;
          continue;
        }
      }

      PolarityTrack tr;
      tr.polarity = pol;
      tr.samples.reserve(picked.size());
      for (std::size_t i : picked) tr.samples.push_back({pts[i].t, pts[i].xpos});
      // Remove collected points from the window and the accumulator.
      std::deque<SpatioTemporalPoint> rest;
      std::vector<char> rest_reserved;
      rest_reserved.reserve(reserved.size());
      std::size_t k = 0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (k < picked.size() && picked[k] == i) {
          vote(pts[i], -1);
          ++k;
        } else {
          rest.push_back(pts[i]);
          rest_reserved.push_back(reserved[i]);
        }
      }
      pts.swap(rest);
      reserved.swap(rest_reserved);

      std::int64_t span = tr.samples.back().t - tr.samples.front().t;
      if (span >= cfg_.min_track_span && tr.samples.size() >= 2) {
        StLine seed{rho, cfg_.phi_lo_deg() + phi_bin, t_origin_, bin_dur_};
        tr.line = refit_line(tr.samples, seed, cfg_.assoc_tolerance);
        out.push_back(std::move(tr));
      }
    }
  }
  return out;
}

std::vector<PolarityTrack> Tracker::extract_tracks(std::int64_t now) {
  return harvest(now, -1);
}

std::vector<PolarityTrack> Tracker::extract_completed(std::int64_t now,
                                                      std::int64_t quiesce_margin) {
  return harvest(now, std::max<std::int64_t>(0, quiesce_margin));
}

namespace {

// Mean of |f| over [a, b] for linear f with endpoint values fa, fb.
double mean_abs_linear(double fa, double fb) {
  if ((fa >= 0.0) == (fb >= 0.0)) return std::abs(fa + fb) / 2.0;
  return (fa * fa + fb * fb) / (2.0 * (std::abs(fa) + std::abs(fb)));
}

}  // namespace

std::vector<Track> pair_tracks(const std::vector<PolarityTrack>& pos,
                               const std::vector<PolarityTrack>& neg,
                               const TrackerConfig& cfg, std::vector<char>* out_used_pos,
                               std::vector<char>* out_used_neg) {
  struct Cand {
    double gap;
    std::size_t i, j;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    for (std::size_t j = 0; j < neg.size(); ++j) {
      const auto& a = pos[i];
      const auto& b = neg[j];
      if (a.samples.empty() || b.samples.empty()) continue;
      if (std::abs(a.line.phi_deg - b.line.phi_deg) > cfg.pair_max_dphi) continue;
      std::int64_t lo = std::max(a.samples.front().t, b.samples.front().t);
      std::int64_t hi = std::min(a.samples.back().t, b.samples.back().t);
      if (lo > hi) continue;
      double da = a.line.x_at(lo) - b.line.x_at(lo);
      double db = a.line.x_at(hi) - b.line.x_at(hi);
      double gap = (lo == hi) ? std::abs(da) : mean_abs_linear(da, db);
      if (gap > cfg.pair_max_dx) continue;
      cands.push_back({gap, i, j});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.gap != b.gap) return a.gap < b.gap;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<char> used_pos(pos.size(), 0), used_neg(neg.size(), 0);
  std::vector<Track> out;
  for (const Cand& c : cands) {
    if (used_pos[c.i] || used_neg[c.j]) continue;
    const auto& a = pos[c.i];
    const auto& b = neg[c.j];
    const auto& longer = a.samples.size() >= b.samples.size() ? a : b;
    Track tr;
    tr.pos_line = a.line;
    tr.neg_line = b.line;
    for (const TimedPos& sp : longer.samples) {
      if (!tr.samples.empty() && sp.t <= tr.samples.back().t) continue;
      double mid = 0.5 * (a.line.x_at(sp.t) + b.line.x_at(sp.t));
      tr.samples.push_back({sp.t, mid});
    }
    if (tr.samples.size() < 2) continue;
    used_pos[c.i] = 1;
    used_neg[c.j] = 1;
    out.push_back(std::move(tr));
  }
  if (out_used_pos) *out_used_pos = used_pos;
  if (out_used_neg) *out_used_neg = used_neg;
  return out;
}

}  // namespace evline::track
