#include "whits/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "parallel.hpp"
#include "whits/geo.hpp"

namespace whits {

void SimulationParams::validate() const {
  if (n_years < 0) throw InputError("n_years must be non-negative");
  if (!(jump_probability >= 0.0 && jump_probability <= 1.0)) {
    throw InputError("jump_probability must lie in [0, 1]");
  }
  if (smoothing_window < 3 || smoothing_window % 2 == 0) {
    throw InputError("smoothing_window must be odd and at least 3");
  }
  if (reserved_steps < 0) throw InputError("reserved_steps must be non-negative");
}

CatalogStats& CatalogStats::operator+=(const CatalogStats& o) {
  tracks += o.tracks;
  points += o.points;
  joins += o.joins;
  forced_joins += o.forced_joins;
  early_terminations += o.early_terminations;
  widened_starts += o.widened_starts;
  latitude_rejections += o.latitude_rejections;
  dead_end_rejections += o.dead_end_rejections;
  return *this;
}

std::vector<int> sample_annual_counts(const EmpiricalDistributions& dists, int n_years, Rng& rng) {
  if (dists.annual_counts.empty()) throw InputError("no empirical annual counts");
  std::vector<int> out(static_cast<std::size_t>(std::max(n_years, 0)));
  for (auto& c : out) c = dists.annual_counts[rng.uniform_index(dists.annual_counts.size())];
  return out;
}

GenesisEvent sample_genesis(const EmpiricalDistributions& dists, Rng& rng) {
  if (dists.genesis.empty()) throw InputError("no empirical genesis events");
  return dists.genesis[rng.uniform_index(dists.genesis.size())];
}

int sample_lifetime(const EmpiricalDistributions& dists, Rng& rng) {
  if (dists.lifetimes.empty()) throw InputError("no empirical lifetimes");
  return dists.lifetimes[rng.uniform_index(dists.lifetimes.size())];
}

std::size_t select_transition(std::span<const Candidate> candidates, Rng& rng) {
  if (candidates.empty()) throw InvariantError("select_transition called with no candidates");
  double total = 0.0;
  std::size_t last_positive = candidates.size();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    total += candidates[i].weight;
    if (candidates[i].weight > 0.0) last_positive = i;
  }
  if (last_positive == candidates.size()) throw InvariantError("select_transition called with zero total weight");
  const double u = rng.uniform01() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    acc += candidates[i].weight;
    if (candidates[i].weight > 0.0 && u < acc) return i;
  }
  return last_positive;
}

std::vector<TrackPoint> translate_segment(std::span<const TrackPoint> suffix, GeoPoint current) {
  std::vector<TrackPoint> out;
  if (suffix.empty()) return out;
  const GeoPoint origin{suffix[0].lat, suffix[0].lon};
  out.reserve(suffix.size());
  for (const auto& p : suffix) out.push_back(translate_point(p, origin, current));
  return out;
}

void smooth_join(std::vector<TrackPoint>& points, int join, int window) {
  if (window < 3 || window % 2 == 0) throw InputError("smoothing window must be odd and at least 3");
  const int half = window / 2;
  const int lo = join - half;
  const int hi = join + half;
  if (lo < 0 || hi >= static_cast<int>(points.size())) {
    throw InputError("smoothing window around join " + std::to_string(join) + " leaves the track");
  }
  const TrackPoint a = points[static_cast<std::size_t>(lo)];
  const TrackPoint b = points[static_cast<std::size_t>(hi)];
  for (int m = 1; m < window - 1; ++m) {
    const double t = static_cast<double>(m) / static_cast<double>(window - 1);
    auto& p = points[static_cast<std::size_t>(lo + m)];
    p.lat = a.lat + (b.lat - a.lat) * t;
    p.lon = a.lon + (b.lon - a.lon) * t;
    p.wind_u10 = a.wind_u10 + (b.wind_u10 - a.wind_u10) * t;
  }
}

namespace {

int effective_reserved(const TransitionTable& table, const SimulationParams& params) {
  const int reserved = table.header().reserved_steps;
  if (params.reserved_steps != 0 && params.reserved_steps != reserved) {
    throw InputError("reserved_steps " + std::to_string(params.reserved_steps) +
                     " differs from the transition table's " + std::to_string(reserved));
  }
  if (reserved < (params.smoothing_window + 1) / 2) {
    throw InputError("reserved_steps must be at least half the smoothing window, rounded up");
  }
  return reserved;
}

bool latitude_stays_valid(const HistoricalTrack& dest, std::uint32_t from, GeoPoint origin, GeoPoint anchor) {
  for (std::size_t k = from; k < dest.points.size(); ++k) {
    if (std::abs(anchor.lat + (dest.points[k].lat - origin.lat)) > 90.0) return false;
  }
  return true;
}

bool try_jump(WalkState& walk, std::span<const Candidate> row, bool forced, int reserved,
              const SegmentLibrary& library, Rng& rng, CatalogStats* stats) {
  std::vector<Candidate> pool(row.begin(), row.end());
  const auto s = static_cast<std::size_t>(walk.index());
  const GeoPoint anchor{walk.points[s].lat, walk.points[s].lon};
  const std::int64_t remaining = walk.lifetime - walk.index();
  auto drop = [&](std::size_t pick) {
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    return std::any_of(pool.begin(), pool.end(), [](const Candidate& c) { return c.weight > 0.0; });
  };
  while (!pool.empty()) {
    const std::size_t pick = select_transition(pool, rng);
    const auto target = pool[pick].target;
    const auto& dest = library.track(target.track);
    const auto& start = dest.points[target.step];
    const GeoPoint origin{start.lat, start.lon};
    if (!latitude_stays_valid(dest, target.step, origin, anchor)) {
      if (stats) ++stats->latitude_rejections;
      if (!drop(pick)) break;
      continue;
    }
    // A destination on its last transition point could neither jump again nor finish the lifetime.
    const auto n_dest = static_cast<std::int64_t>(dest.points.size());
    const std::int64_t d = target.step;
    if (d + 1 > n_dest - 1 - reserved && n_dest - 1 - d < remaining) {
      if (stats) ++stats->dead_end_rejections;
      if (!drop(pick)) break;
      continue;
    }
    walk.segments.back().source_end_step = walk.host.step - 1;
    walk.segments.push_back({target, target.step, walk.index(), anchor, forced});
    auto joined = translate_point(start, origin, anchor);
    joined.step_index = walk.index();
    walk.points[s] = joined;
    walk.joins.push_back(walk.index());
    walk.last_join = walk.index();
    walk.host = target;
    walk.origin = origin;
    walk.anchor = anchor;
    if (stats) {
      ++stats->joins;
      if (forced) ++stats->forced_joins;
    }
    return true;
  }
  return false;
}

}  // namespace

bool is_genesis_host(const SegmentLibrary& library, PointRef ref, int reserved_steps, int smoothing_window) {
  const auto n = static_cast<std::int64_t>(library.track(ref.track).points.size());
  return static_cast<std::int64_t>(ref.step) + smoothing_window / 2 <= n - 1 - reserved_steps;
}

WalkState start_track(GeoPoint genesis, int lifetime, const SegmentLibrary& library, const TransitionTable& table,
                      const SimulationParams& params, CatalogStats* stats) {
  const int reserved = effective_reserved(table, params);
  std::optional<PointRef> best;
  double best_d = 0.0;
  auto consider = [&](PointRef ref, bool require_host) {
    if (require_host && !is_genesis_host(library, ref, reserved, params.smoothing_window)) return;
    const auto& p = library.point(ref);
    const double d = great_circle_deg(genesis, {p.lat, p.lon});
    if (!best) {
      best = ref, best_d = d;
      return;
    }
    const auto& cur_id = library.track(best->track).storm_id;
    const auto& new_id = library.track(ref.track).storm_id;
    if (std::tie(d, new_id, ref.step, ref.track) < std::tie(best_d, cur_id, best->step, best->track)) {
      best = ref, best_d = d;
    }
  };
  for (const auto& ref : library.within(genesis, table.header().kernel.radius_deg)) consider(ref, true);
  if (!best) {
    if (stats) ++stats->widened_starts;
    for (bool require_host : {true, false}) {
      for (std::uint32_t t = 0; t < library.track_count(); ++t) {
        for (std::uint32_t k = 0; k < library.track(t).points.size(); ++k) consider({t, k}, require_host);
      }
      if (best) break;
    }
  }

  WalkState walk;
  walk.host = *best;
  const auto& p = library.point(walk.host);
  walk.origin = {p.lat, p.lon};
  walk.anchor = genesis;
  walk.lifetime = std::max(lifetime, 0);
  auto first = translate_point(p, walk.origin, walk.anchor);
  first.step_index = 0;
  walk.points.push_back(first);
  walk.segments.push_back({walk.host, walk.host.step, 0, genesis, false});
  walk.finished = walk.lifetime == 0;
  return walk;
}

void step(WalkState& walk, const SegmentLibrary& library, const TransitionTable& table,
          const SimulationParams& params, Rng& rng, CatalogStats* stats) {
  if (walk.finished) return;
  const int s = walk.index();
  const int remaining = walk.lifetime - s;
  if (remaining <= 0) {
    walk.finished = true;
    return;
  }
  const int reserved = effective_reserved(table, params);
  const int half = params.smoothing_window / 2;
  const auto& host_track = library.track(walk.host.track);
  const auto n = static_cast<std::int64_t>(host_track.points.size());
  const std::int64_t k = walk.host.step;

  const bool can_jump = s >= half && remaining >= half && s > walk.last_join &&
                        is_transition_point(library, walk.host, reserved);
  const bool host_can_finish = n - 1 - k >= remaining;
  const bool host_exhausted = k + 1 > n - 1 - reserved;

  if (can_jump) {
    const auto row = table.row(library, walk.host);
    if (host_exhausted && !host_can_finish) {
      if (try_jump(walk, row, true, reserved, library, rng, stats)) return;
      walk.early_terminated = true;
    } else if (!row.empty() && rng.bernoulli(params.jump_probability)) {
      if (try_jump(walk, row, false, reserved, library, rng, stats)) return;
    }
  }

  if (k + 1 >= n) {
    walk.early_terminated = true;
    walk.finished = true;
    return;
  }
  walk.host.step = static_cast<std::uint32_t>(k + 1);
  auto next = translate_point(host_track.points[static_cast<std::size_t>(k + 1)], walk.origin, walk.anchor);
  next.step_index = s + 1;
  walk.points.push_back(next);
  if (s + 1 >= walk.lifetime) walk.finished = true;
}

SyntheticTrack finish_track(WalkState walk, const SimulationParams& params) {
  SyntheticTrack track;
  track.lifetime = walk.lifetime;
  track.early_terminated = walk.early_terminated;
  walk.segments.back().source_end_step = walk.host.step;
  const int half = params.smoothing_window / 2;
  for (int j : walk.joins) {
    if (j - half < 0 || j + half >= static_cast<int>(walk.points.size())) {
      throw InvariantError("join " + std::to_string(j) + " has no room for its smoothing window");
    }
    smooth_join(walk.points, j, params.smoothing_window);
  }
  track.points = std::move(walk.points);
  track.segments = std::move(walk.segments);
  track.joins = std::move(walk.joins);
  return track;
}

SyntheticTrack simulate_track(GeoPoint genesis, int lifetime, const SegmentLibrary& library,
                              const TransitionTable& table, const SimulationParams& params, Rng& rng,
                              CatalogStats* stats) {
  auto walk = start_track(genesis, lifetime, library, table, params, stats);
  while (!walk.finished) step(walk, library, table, params, rng, stats);
  auto track = finish_track(std::move(walk), params);
  if (stats) {
    ++stats->tracks;
    stats->points += track.points.size();
    if (track.early_terminated) ++stats->early_terminations;
  }
  return track;
}

std::vector<SyntheticTrack> simulate_year(int year, const SegmentLibrary& library, const TransitionTable& table,
                                          const EmpiricalDistributions& dists, const SimulationParams& params,
                                          CatalogStats* stats) {
  Rng rng(params.seed, static_cast<std::uint64_t>(year));
  const int count = sample_annual_counts(dists, 1, rng).front();
  std::vector<SyntheticTrack> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const auto genesis = sample_genesis(dists, rng);
    const int lifetime = sample_lifetime(dists, rng);
    auto track = simulate_track({genesis.lat, genesis.lon}, lifetime, library, table, params, rng, stats);
    track.year = year;
    track.storm_index = i + 1;
    track.genesis_day_of_year = genesis.day_of_year;
    out.push_back(std::move(track));
  }
  return out;
}

SyntheticCatalog generate_catalog(const SegmentLibrary& library, const TransitionTable& table,
                                  const EmpiricalDistributions& dists, const SimulationParams& params,
                                  unsigned threads) {
  params.validate();
  SyntheticCatalog catalog;
  catalog.basin = library.basin();
  catalog.n_years = params.n_years;
  catalog.params = params;
  catalog.reserved_steps = effective_reserved(table, params);
  catalog.library_checksum = library.checksum();
  catalog.table_checksum = table.checksum();
  if (table.header().library_checksum != library.checksum()) {
    throw InputError("transition table was built for a different segment library");
  }

  const auto n = static_cast<std::size_t>(params.n_years);
  std::vector<std::vector<SyntheticTrack>> years(n);
  std::vector<CatalogStats> year_stats(n);
  detail::parallel_for(n, threads, [&](std::size_t y) {
    years[y] = simulate_year(static_cast<int>(y) + 1, library, table, dists, params, &year_stats[y]);
  });

  for (std::size_t y = 0; y < n; ++y) {
    catalog.stats += year_stats[y];
    for (auto& t : years[y]) catalog.tracks.push_back(std::move(t));
  }
  return catalog;
}

}  // namespace whits
