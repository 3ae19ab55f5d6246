#include "evline/hough.hpp"

#include <algorithm>
#include <cmath>

namespace evline::hough {

namespace {

void fill_trig(const HoughConfig& cfg, std::vector<double>& cos_t, std::vector<double>& sin_t) {
  int m = cfg.theta_bins();
  cos_t.resize(m);
  sin_t.resize(m);
  for (int i = 0; i < m; ++i) {
    double a = core::deg_to_rad(cfg.theta_min_deg + i * cfg.theta_step_deg);
    cos_t[i] = std::cos(a);
    sin_t[i] = std::sin(a);
  }
}

// Shared by the public helper and the hot path so both round identically.
inline void hyp_cells(double u, double v, const std::vector<double>& cos_t,
                      const std::vector<double>& sin_t, double r_min, int nr,
                      std::vector<Cell>& out) {
  out.clear();
  int m = int(cos_t.size());
  for (int i = 0; i < m; ++i) {
    double r = u * cos_t[i] + v * sin_t[i];
    int bin = core::round_half_up(r - r_min);
    if (bin >= 0 && bin < nr) out.push_back({bin, i});
  }
}

inline bool within_radius(const HoughConfig& cfg, Cell a, Cell b) {
  int dr = a.r - b.r;
  int dt = a.th - b.th;
  int rad = cfg.suppression_radius;
  if (cfg.chebyshev) return std::max(std::abs(dr), std::abs(dt)) <= rad;
  return dr * dr + dt * dt <= rad * rad;
}

struct VoteOrder {
  const HoughState& st;
  int polarity;
  bool operator()(Cell a, Cell b) const {
    int va = st.votes(polarity, a);
    int vb = st.votes(polarity, b);
    if (va != vb) return va > vb;
    if (a.th != b.th) return a.th < b.th;
    return a.r < b.r;
  }
};

void append_unique(std::vector<Cell>& cells, Cell c) {
  if (std::find(cells.begin(), cells.end(), c) == cells.end()) cells.push_back(c);
}

void scan_maxima_in_radius(const HoughState& st, int polarity, Cell center, int radius,
                           std::vector<Cell>& out) {
  const auto& acc = st.pol[polarity].acc;
  const int threshold = st.cfg.threshold;
  const int rad2 = radius * radius;
  for (int dt = -radius; dt <= radius; ++dt) {
    int th = center.th + dt;
    if (th < 0 || th >= st.nth) continue;
    int span = radius;
    if (!st.cfg.chebyshev) {
      span = int(std::sqrt(double(rad2 - dt * dt)));
      while (span * span + dt * dt > rad2) --span;
    }
    int r_lo = std::max(0, center.r - span);
    int r_hi = std::min(st.nr - 1, center.r + span);
    const auto* row = acc.data() + std::size_t(th) * st.nr;
    const auto* rowm = th > 0 ? row - st.nr : nullptr;
    const auto* rowp = th + 1 < st.nth ? row + st.nr : nullptr;
    for (int r = r_lo; r <= r_hi; ++r) {
      ++st.stats.extra_cells;
      int v = row[r];
      if (v < threshold) continue;
      // same strict-maximum test as is_local_maximum, on hoisted row pointers
      int lo = r > 0 ? r - 1 : r;
      int hi = r + 1 < st.nr ? r + 1 : r;
      bool ok = (r == lo || row[lo] < v) && (r == hi || row[hi] < v);
      for (int k = lo; ok && k <= hi; ++k) {
        if (rowm && rowm[k] >= v) ok = false;
        if (rowp && rowp[k] >= v) ok = false;
      }
      if (ok) append_unique(out, Cell{r, th});
    }
  }
}

}  // namespace

void HoughConfig::validate() const {
  if (!(theta_min_deg < theta_max_deg)) throw core::ConfigError("theta range is empty");
  if (theta_step_deg <= 0.0) throw core::ConfigError("theta_step must be positive");
  if (!(r_min < r_max)) throw core::ConfigError("r range is empty");
  if (window_size < 1) throw core::ConfigError("window_size must be >= 1");
  if (threshold < 1) throw core::ConfigError("threshold must be >= 1");
  if (suppression_radius < 1) throw core::ConfigError("suppression_radius must be >= 1");
  if (emit_stride < 1) throw core::ConfigError("emit_stride must be >= 1");
}

HoughState::HoughState(const HoughConfig& config) : cfg(config) {
  cfg.validate();
  nr = cfg.r_bins();
  nth = cfg.theta_bins();
  fill_trig(cfg, cos_t, sin_t);
  for (auto& g : pol) {
    g.acc.assign(std::size_t(nr) * nth, 0);
    g.ring.resize(cfg.window_size);
  }
}

std::vector<Cell> hypothesis_cells(double u, double v, const HoughConfig& cfg) {
  std::vector<double> cos_t, sin_t;
  fill_trig(cfg, cos_t, sin_t);
  std::vector<Cell> out;
  hyp_cells(u, v, cos_t, sin_t, cfg.r_min, cfg.r_bins(), out);
  return out;
}

void apply_event(HoughState& st, const core::Event& e, CellUpdateSet& cu) {
  PolarityGrid& g = st.pol[e.p & 1];
  cu.polarity = e.p & 1;
  cu.minus.clear();
  hyp_cells(e.x, e.y, st.cos_t, st.sin_t, st.cfg.r_min, st.nr, cu.plus);
  for (Cell c : cu.plus) ++g.acc[std::size_t(c.th) * st.nr + c.r];
  std::size_t cap = st.cfg.window_size;
  if (g.count == cap) {
    const core::Event old = g.ring[g.head];
    hyp_cells(old.x, old.y, st.cos_t, st.sin_t, st.cfg.r_min, st.nr, cu.minus);
    for (Cell c : cu.minus) --g.acc[std::size_t(c.th) * st.nr + c.r];
    g.ring[g.head] = e;
    g.head = (g.head + 1) % cap;
  } else {
    g.ring[(g.head + g.count) % cap] = e;
    ++g.count;
  }
  ++st.applied;
}

CellUpdateSet apply_event(HoughState& st, const core::Event& e) {
  CellUpdateSet cu;
  apply_event(st, e, cu);
  return cu;
}

bool is_local_maximum(const HoughState& st, int polarity, Cell c) {
  const auto& acc = st.pol[polarity].acc;
  int nr = st.nr;
  int v = acc[std::size_t(c.th) * nr + c.r];
  if (v < st.cfg.threshold) return false;
  for (int dt = -1; dt <= 1; ++dt) {
    int th = c.th + dt;
    if (th < 0 || th >= st.nth) continue;
    for (int dr = -1; dr <= 1; ++dr) {
      if (dr == 0 && dt == 0) continue;
      int r = c.r + dr;
      if (r < 0 || r >= nr) continue;
      if (acc[std::size_t(th) * nr + r] >= v) return false;
    }
  }
  return true;
}

std::vector<Cell> local_maxima_in_radius(const HoughState& st, int polarity, Cell center,
                                         int radius) {
  std::vector<Cell> out;
  scan_maxima_in_radius(st, polarity, center, radius, out);
  return out;
}

void iterative_nms(HoughState& st, const CellUpdateSet& updates) {
  int pol = updates.polarity;
  PolarityGrid& g = st.pol[pol];
  const std::vector<Cell>& prev = g.maxima;  // untouched until the final move
  ++st.stats.events;

  auto in_prev = [&](Cell c) { return std::find(prev.begin(), prev.end(), c) != prev.end(); };

  // Candidate pool: only cells that are local maxima right now ever enter.
  // The pool only grows within a call, so any disc needs scanning at most
  // once; reopened remembers the scanned centres.
  std::vector<Cell>& pool = st.pool_buf;
  std::vector<Cell>& reopened = st.reopened_buf;
  pool.clear();
  reopened.clear();

  auto add_validated = [&](Cell c) {
    if (std::find(pool.begin(), pool.end(), c) != pool.end()) return;
    ++st.stats.extra_cells;
    if (is_local_maximum(st, pol, c)) pool.push_back(c);
  };
  auto reopen_disc = [&](Cell center, std::vector<Cell>& out) {
    if (std::find(reopened.begin(), reopened.end(), center) != reopened.end()) return;
    reopened.push_back(center);
    scan_maxima_in_radius(st, pol, center, st.cfg.suppression_radius, out);
  };

  for (Cell m : prev) add_validated(m);

  const auto& acc = g.acc;
  auto votes_at = [&](Cell c) { return int(acc[std::size_t(c.th) * st.nr + c.r]); };

  // Raised cells: a cell that just became a strict local maximum is a new
  // candidate. Equality with any neighbour rules it out; if that neighbour
  // was a global maximum it has just been levelled, so its disc is reopened.
  // A single +-1 step never leapfrogs a maximum, so cells more than one vote
  // below threshold can neither qualify nor touch one; skip their scans.
  for (Cell p : updates.plus) {
    int v = votes_at(p);
    if (v < st.cfg.threshold - 1) continue;
    bool levelled = false;
    bool beaten = false;
    for (int dt = -1; dt <= 1; ++dt) {
      int th = p.th + dt;
      if (th < 0 || th >= st.nth) continue;
      for (int dr = -1; dr <= 1; ++dr) {
        if (dr == 0 && dt == 0) continue;
        int r = p.r + dr;
        if (r < 0 || r >= st.nr) continue;
        Cell n{r, th};
        int w = votes_at(n);
        if (w == v) {
          levelled = true;
          if (in_prev(n)) reopen_disc(n, pool);
        } else if (w > v) {
          beaten = true;
        }
      }
    }
    if (!levelled && !beaten && v >= st.cfg.threshold &&
        std::find(pool.begin(), pool.end(), p) == pool.end()) {
      pool.push_back(p);
    }
  }

  // Lowered cells: a neighbour now exceeding the lowered cell by exactly one
  // vote just rose to local-maximum status. A lowered previous global maximum
  // may have lost its rank, so its disc is reopened.
  for (Cell p : updates.minus) {
    int v = votes_at(p);
    if (v < st.cfg.threshold - 1) continue;
    for (int dt = -1; dt <= 1; ++dt) {
      int th = p.th + dt;
      if (th < 0 || th >= st.nth) continue;
      for (int dr = -1; dr <= 1; ++dr) {
        if (dr == 0 && dt == 0) continue;
        int r = p.r + dr;
        if (r < 0 || r >= st.nr) continue;
        Cell n{r, th};
        if (votes_at(n) == v + 1) add_validated(n);
      }
    }
    if (in_prev(p)) reopen_disc(p, pool);
  }

  // Greedy suppression over the pool. Suppressing a former global maximum can
  // expose local maxima it was shadowing, so its disc is reopened and the
  // pass repeats; each disc is reopened at most once per call.
  std::vector<Cell>& accepted = st.accepted_buf;
  std::vector<Cell>& pending = st.pending_buf;
  while (true) {
    std::sort(pool.begin(), pool.end(), VoteOrder{st, pol});
    accepted.clear();
    pending.clear();
    for (Cell c : pool) {
      bool suppressed = false;
      for (Cell a : accepted) {
        ++st.stats.extra_cells;
        if (within_radius(st.cfg, a, c)) {
          suppressed = true;
          break;
        }
      }
      if (!suppressed) {
        accepted.push_back(c);
      } else if (in_prev(c)) {
        reopen_disc(c, pending);
      }
    }
    bool grew = false;
    for (Cell c : pending) {
      if (std::find(pool.begin(), pool.end(), c) == pool.end()) {
        pool.push_back(c);
        grew = true;
      }
    }
    if (!grew) break;
  }
  g.maxima.assign(accepted.begin(), accepted.end());
}

std::vector<Cell> full_nms_oracle(const HoughState& st, int polarity) {
  const auto& acc = st.pol[polarity].acc;
  int nr = st.nr;
  int nth = st.nth;
  int threshold = st.cfg.threshold;
  std::vector<Cell> locals;
  for (int th = 0; th < nth; ++th) {
    for (int r = 0; r < nr; ++r) {
      int v = acc[std::size_t(th) * nr + r];
      if (v < threshold) continue;
      Cell c{r, th};
      if (is_local_maximum(st, polarity, c)) locals.push_back(c);
    }
  }
  std::sort(locals.begin(), locals.end(), VoteOrder{st, polarity});
  std::vector<Cell> accepted;
  for (Cell c : locals) {
    bool suppressed = false;
    for (Cell a : accepted) {
      if (within_radius(st.cfg, a, c)) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) accepted.push_back(c);
  }
  return accepted;
}

Detection make_detection(const HoughState& st, Cell c, int polarity, std::int64_t t) {
  Detection d;
  d.t = t;
  d.r = st.cfg.r_min + c.r;
  d.theta_deg = st.cfg.theta_min_deg + c.th * st.cfg.theta_step_deg;
  d.polarity = polarity;
  d.votes = st.votes(polarity, c);
  return d;
}

std::vector<Detection> detect_step(HoughState& st, const core::Event& e) {
  apply_event(st, e, st.update_buf);
  iterative_nms(st, st.update_buf);
  std::vector<Detection> out;
  if (st.applied % st.cfg.emit_stride == 0) {
    int pol = e.p & 1;
    for (Cell c : st.pol[pol].maxima) out.push_back(make_detection(st, c, pol, e.t));
  }
  return out;
}

}  // namespace evline::hough
