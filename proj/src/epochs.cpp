#include "jtenso/epochs.hpp"

#include <algorithm>
#include <cmath>

#include "jtenso/error.hpp"
#include "jtenso/sde.hpp"

namespace jtenso {

ObservableSeries observable_series(const Trajectory<3>& traj, const Vec3& direction) {
  ObservableSeries s;
  s.t = traj.times;
  s.g.reserve(traj.states.size());
  for (const auto& x : traj.states) s.g.push_back(dot(direction, x));
  return s;
}

CrossingTracker::CrossingTracker(double hi, double lo) {
  if (!(hi > lo)) throw Error(ErrorCode::InvalidArgument, "upper threshold must exceed the lower one");
  out_.hi_level = hi;
  out_.lo_level = lo;
}

void CrossingTracker::add(double t, double g) {
  if (has_prev_) {
    for (auto [level, list] : {std::pair{out_.hi_level, &out_.hi}, std::pair{out_.lo_level, &out_.lo}}) {
      if (g_prev_ > level && g <= level) {
        const double w = (g_prev_ - level) / (g_prev_ - g);
        list->push_back(t_prev_ + w * (t - t_prev_));
      }
    }
  }
  has_prev_ = true;
  t_prev_ = t;
  g_prev_ = g;
}

ThresholdCrossings downward_crossings(const ObservableSeries& series, double hi, double lo) {
  CrossingTracker tracker(hi, lo);
  for (std::size_t i = 0; i < series.t.size(); ++i) tracker.add(series.t[i], series.g[i]);
  return tracker.crossings();
}

const char* to_string(EpochKind k) { return k == EpochKind::Chaotic ? "chaotic" : "MMO"; }

std::vector<Epoch> segment_epochs(const ThresholdCrossings& c, double span_start, double span_end, double min_gap,
                                  bool allow_empty) {
  if (!(span_end > span_start)) throw Error(ErrorCode::InvalidArgument, "empty span");
  // Merge into one time-ordered stream and pair each upper crossing with
  // the first lower crossing that follows it.
  std::vector<std::pair<double, double>> chaotic;
  std::size_t j = 0;
  for (std::size_t i = 0; i < c.hi.size(); ++i) {
    const double h = c.hi[i];
    while (j < c.lo.size() && c.lo[j] <= h) ++j;
    if (j == c.lo.size()) break;
    const double l = c.lo[j];
    // Only the last upper crossing before l can open the pair.
    if (i + 1 < c.hi.size() && c.hi[i + 1] < l) continue;
    if (l - h > min_gap) chaotic.emplace_back(std::max(h, span_start), std::min(l, span_end));
  }
  if (chaotic.empty() && !allow_empty) throw Error(ErrorCode::NoEpochs, "no crossing pair brackets a chaotic epoch");

  std::vector<Epoch> out;
  double cursor = span_start;
  for (const auto& [a, b] : chaotic) {
    if (a > cursor) out.push_back({EpochKind::MMO, cursor, a});
    out.push_back({EpochKind::Chaotic, a, b});
    cursor = b;
  }
  if (cursor < span_end) out.push_back({EpochKind::MMO, cursor, span_end});
  return out;
}

EpochStatistics epoch_statistics(const std::vector<Epoch>& epochs, double bin_width, double cutoff,
                                 bool drop_boundary_epochs) {
  if (epochs.size() < 2 + (drop_boundary_epochs ? 2u : 0u))
    throw Error(ErrorCode::NoEpochs, "need at least two complete epochs");
  const std::size_t first = drop_boundary_epochs ? 1 : 0;
  const std::size_t last = drop_boundary_epochs ? epochs.size() - 1 : epochs.size();
  EpochStatistics st;
  std::vector<double> d;
  for (std::size_t i = first; i < last; ++i) {
    d.push_back(epochs[i].duration());
    (epochs[i].kind == EpochKind::Chaotic ? st.chaotic : st.mmo)++;
    st.longest = std::max(st.longest, epochs[i].duration());
  }
  st.histogram = make_histogram(d, bin_width, 0.0, cutoff);
  std::vector<double> a, b;
  for (std::size_t i = 0; i + 1 < d.size(); ++i) {
    st.pairs.emplace_back(d[i], d[i + 1]);
    a.push_back(d[i]);
    b.push_back(d[i + 1]);
  }
  st.rank_correlation = a.size() >= 2 ? spearman(a, b) : 0.0;
  return st;
}

ForcedRun forced_run(const ModelParams& p, const Forcing& f, const State& s0, const ForcedRunOptions& opts,
                     const IntegratorConfig& cfg) {
  f.validate();
  if (!(opts.years > 0.0) || !(opts.sample_dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "bad run length");
  ForcedRun run;
  run.params = p;
  run.params.a = f.a0;
  run.forcing = f;
  const auto eq = saddle_focus(run.params);
  run.direction = eq.observable_direction;
  const double year = year_length(run.params);
  const double t_end = opts.years * year;
  run.span_years = opts.years;

  CrossingTracker tracker(opts.hi, opts.lo);
  long counter = 0;
  auto record = [&](double t, const State& s) {
    const double g = dot(run.direction, s);
    const double ty = t / year;
    tracker.add(ty, g);
    if (opts.store_every > 0 && counter % opts.store_every == 0) {
      run.series.t.push_back(ty);
      run.series.g.push_back(g);
    }
    ++counter;
  };

  const JtField field(run.params, f);
  if (f.noise_sigma > 0.0) {
    const auto stride = std::max(1L, std::lround(opts.sample_dt / opts.noise_dt));
    GaussianSource normal(f.seed);
    const double sq = std::sqrt(opts.noise_dt);
    State s = s0;
    record(0.0, s);
    const auto n = static_cast<long>(std::ceil(t_end / opts.noise_dt));
    for (long i = 0; i < n; ++i) {
      const double t = i * opts.noise_dt;
      const Vec3 v = field(t, s);
      for (int c = 0; c < 3; ++c) s[c] += opts.noise_dt * v[c] + f.noise_sigma * sq * normal();
      if (!all_finite(s)) throw Error(ErrorCode::NonFiniteState, "forced run became non-finite");
      if ((i + 1) % stride == 0) record((i + 1) * opts.noise_dt, s);
    }
    run.final_state = s;
  } else {
    double next = 0.0;
    State end{};
    integrate_steps<3>(
        field, s0, 0.0, t_end, cfg,
        [&](const DenseSegment<3>& seg) {
          while (next <= seg.t1() && next <= t_end) {
            record(next, seg(next));
            next = static_cast<double>(counter) * opts.sample_dt;
          }
          return true;
        },
        &end);
    run.final_state = end;
  }
  run.crossings = tracker.crossings();
  return run;
}

}  // namespace jtenso
