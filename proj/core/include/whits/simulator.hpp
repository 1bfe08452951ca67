/**
 * @file simulator.hpp
 * @brief Segment-resampling track walk and catalog generation.
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "whits/kernel.hpp"
#include "whits/library.hpp"
#include "whits/random.hpp"
#include "whits/transition_table.hpp"

namespace whits {

inline constexpr const char* kGeneratorVersion = "whits 1.0.0";

struct SimulationParams {
  int n_years{1};
  std::uint64_t seed{0};
  double jump_probability{0.1};
  int smoothing_window{5};
  /// 0 means "use the value the transition table was built with".
  int reserved_steps{0};

  /// Throws InputError on out-of-range values.
  void validate() const;
};

/// One contiguous piece of a historical track reused by a synthetic track.
struct SegmentUse {
  PointRef source;                 // first source point used
  std::uint32_t source_end_step{}; // last source step used, inclusive
  int synthetic_start{};           // synthetic index that `source` maps onto
  GeoPoint anchor;                 // pre-smoothing synthetic position of that index
  bool forced{false};              // transition forced by segment exhaustion

  bool operator==(const SegmentUse&) const = default;
};

struct SyntheticTrack {
  int year{};
  int storm_index{};
  int genesis_day_of_year{};
  int lifetime{};                  // sampled lifetime in steps
  bool early_terminated{false};
  std::vector<TrackPoint> points;  // unwrapped longitudes, smoothed joins
  std::vector<SegmentUse> segments;
  std::vector<int> joins;          // synthetic indices of segment joins, ascending

  bool operator==(const SyntheticTrack&) const = default;
};

struct CatalogStats {
  std::uint64_t tracks{};
  std::uint64_t points{};
  std::uint64_t joins{};
  std::uint64_t forced_joins{};
  std::uint64_t early_terminations{};
  std::uint64_t widened_starts{};
  std::uint64_t latitude_rejections{};
  std::uint64_t dead_end_rejections{};

  CatalogStats& operator+=(const CatalogStats& other);
  bool operator==(const CatalogStats&) const = default;
};

struct SyntheticCatalog {
  Basin basin{Basin::NA};
  int n_years{};
  SimulationParams params{};
  int reserved_steps{};
  std::uint64_t library_checksum{};
  std::uint64_t table_checksum{};
  std::string generator_version{kGeneratorVersion};
  CatalogStats stats{};
  std::vector<SyntheticTrack> tracks;
};

/// n_years draws with replacement from the modern annual counts.
std::vector<int> sample_annual_counts(const EmpiricalDistributions& dists, int n_years, Rng& rng);

/// Uniform draw of one modern genesis event (position and date stay paired).
GenesisEvent sample_genesis(const EmpiricalDistributions& dists, Rng& rng);

/// Uniform draw from the modern lifetimes.
int sample_lifetime(const EmpiricalDistributions& dists, Rng& rng);

/// Index of a categorical draw proportional to the candidate weights. Throws InvariantError when empty.
std::size_t select_transition(std::span<const Candidate> candidates, Rng& rng);

/// Rigid shift of a source point so that `origin` lands on `anchor` (unwrapped longitudes).
inline TrackPoint translate_point(const TrackPoint& p, GeoPoint origin, GeoPoint anchor) {
  return TrackPoint{p.step_index, anchor.lat + (p.lat - origin.lat), anchor.lon + (p.lon - origin.lon),
                    p.wind_u10};
}

/**
 * @brief Translates a destination suffix so its first point coincides with `current`.
 *
 * The first output point equals `current` exactly. Winds are unchanged.
 */
std::vector<TrackPoint> translate_segment(std::span<const TrackPoint> suffix, GeoPoint current);

/**
 * @brief Replaces the interior of the window centred on `join` by linear interpolation
 * between its two end points (lat, unwrapped lon, wind).
 *
 * Interior point m of a w-point window becomes a + (b - a) * (m / (w - 1)).
 * Throws InputError for an even or too small window or one that leaves the track.
 */
void smooth_join(std::vector<TrackPoint>& points, int join, int window);

/// In-progress synthetic track. Points hold raw (unsmoothed) positions until finish_track.
struct WalkState {
  PointRef host;
  GeoPoint origin;   // source position of the current segment's first point
  GeoPoint anchor;   // synthetic position that origin maps onto
  int lifetime{};
  int last_join{-1};
  bool finished{false};
  bool early_terminated{false};
  std::vector<TrackPoint> points;
  std::vector<SegmentUse> segments;
  std::vector<int> joins;

  int index() const { return static_cast<int>(points.size()) - 1; }
};

/// Points whose track still has room for a join before its reserved tail.
bool is_genesis_host(const SegmentLibrary& library, PointRef ref, int reserved_steps, int smoothing_window);

/**
 * @brief Attaches a new walk to the nearest genesis-host point and translates it onto `genesis`.
 *
 * Ties break on lower storm id, then lower step. Without a host inside the
 * kernel radius the search widens to the nearest host (counted in `stats`).
 */
WalkState start_track(GeoPoint genesis, int lifetime, const SegmentLibrary& library,
                      const TransitionTable& table, const SimulationParams& params,
                      CatalogStats* stats = nullptr);

/**
 * @brief Advances the walk by one decision: a transition or one step along the host.
 *
 * A transition is possible at synthetic index s when s is at least half a
 * window past genesis and past the last join, at least half a window of
 * lifetime remains, and the host point is outside its reserved tail. It fires
 * with probability jump_probability when the table row is non-empty, and is
 * forced at the last transition point of a host that cannot finish the
 * lifetime. A forced transition without candidates flags early termination;
 * the walk then runs out the host and stops at its end.
 */
void step(WalkState& walk, const SegmentLibrary& library, const TransitionTable& table,
          const SimulationParams& params, Rng& rng, CatalogStats* stats = nullptr);

/// Applies join smoothing in join order and closes the provenance record.
SyntheticTrack finish_track(WalkState walk, const SimulationParams& params);

SyntheticTrack simulate_track(GeoPoint genesis, int lifetime, const SegmentLibrary& library,
                              const TransitionTable& table, const SimulationParams& params, Rng& rng,
                              CatalogStats* stats = nullptr);

/// All storms of one synthetic year, drawn from the (seed, year) substream.
std::vector<SyntheticTrack> simulate_year(int year, const SegmentLibrary& library,
                                          const TransitionTable& table,
                                          const EmpiricalDistributions& dists,
                                          const SimulationParams& params, CatalogStats* stats = nullptr);

/// Years 1..n_years, bit-identical for any thread count.
SyntheticCatalog generate_catalog(const SegmentLibrary& library, const TransitionTable& table,
                                  const EmpiricalDistributions& dists, const SimulationParams& params,
                                  unsigned threads = 1);

}  // namespace whits
