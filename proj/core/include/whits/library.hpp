/**
 * @file library.hpp
 * @brief Immutable per-basin segment library and its modern-era empirical distributions.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "whits/ingest.hpp"
#include "whits/motion.hpp"
#include "whits/spatial_index.hpp"
#include "whits/types.hpp"

namespace whits {

/// Basin maxima used to standardize the comparative-vector, age and wind covariates.
struct Normalizers {
  double max_v{};   // knots
  double max_t{};   // 3-h steps
  double max_dw{};  // knots

  bool operator==(const Normalizers&) const = default;
};

struct LibraryOptions {
  /// Pair population radius for the normalizers; must match the kernel radius.
  double radius_deg{2.5};
  /// Used only when both the radius-restricted and the all-pairs maxima are zero.
  Normalizers floors{1.0, 1.0, 1.0};
};

/**
 * @brief Maxima over every ordered pair of distinct points within `radius_deg`.
 *
 * Components that come out zero fall back to the all-pairs maximum and then
 * to `options.floors`.
 */
Normalizers compute_normalizers(std::span<const HistoricalTrack> tracks,
                                std::span<const std::vector<MotionVector>> motion,
                                const SpatialIndex& index, const LibraryOptions& options, unsigned threads = 1);

class SegmentLibrary {
 public:
  /// Throws InputError for an empty track set, a track from another basin or an unconverted track.
  static SegmentLibrary build(std::vector<HistoricalTrack> tracks, const BasinConfig& config,
                              const LibraryOptions& options = {}, unsigned threads = 1);

  /// Throws InputError when unreadable and FormatError when truncated, corrupt or of another schema.
  static SegmentLibrary load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  Basin basin() const { return config_.basin; }
  const BasinConfig& config() const { return config_; }
  const LibraryOptions& options() const { return options_; }

  std::span<const HistoricalTrack> tracks() const { return tracks_; }
  const HistoricalTrack& track(std::uint32_t i) const { return tracks_[i]; }
  std::size_t track_count() const { return tracks_.size(); }
  std::size_t point_count() const { return point_offset_.back(); }

  bool is_modern(std::uint32_t track) const { return modern_[track] != 0; }
  std::size_t modern_count() const;

  const Normalizers& normalizers() const { return normalizers_; }
  double max_v() const { return normalizers_.max_v; }
  double max_t() const { return normalizers_.max_t; }
  double max_dw() const { return normalizers_.max_dw; }

  const TrackPoint& point(PointRef ref) const { return tracks_[ref.track].points[ref.step]; }
  const MotionVector& motion(PointRef ref) const { return motion_[ref.track][ref.step]; }

  /// Dense id of a point in (track, step) order.
  std::uint64_t global_id(PointRef ref) const { return point_offset_[ref.track] + ref.step; }
  PointRef ref_of(std::uint64_t global_id) const;

  /// All library points within `radius_deg` great-circle degrees, sorted by (track, step).
  std::vector<PointRef> within(GeoPoint center, double radius_deg) const {
    return index_.within(center, radius_deg);
  }

  /// Mean track length in 3-h steps (points - 1) over the full record.
  double mean_track_steps() const;

  /// FNV-1a 64 over the canonical serialization; identifies the library in downstream headers.
  std::uint64_t checksum() const { return checksum_; }

 private:
  SegmentLibrary() = default;
  void finalize();

  BasinConfig config_{};
  LibraryOptions options_{};
  std::vector<HistoricalTrack> tracks_;
  std::vector<std::uint8_t> modern_;
  Normalizers normalizers_{};
  std::vector<std::vector<MotionVector>> motion_;
  std::vector<std::uint64_t> point_offset_{0};
  SpatialIndex index_;
  std::uint64_t checksum_{};
};

struct GenesisEvent {
  double lat{};
  double lon{};
  int day_of_year{};
  std::uint32_t track{};
};

/// Modern observing-era sampling pools.
struct EmpiricalDistributions {
  std::vector<GenesisEvent> genesis;   // paired position and date of each modern genesis
  std::vector<int> lifetimes;          // steps (points - 1) of each modern track
  std::vector<int> annual_counts;      // storms per year, first entry is `first_year`
  int first_year{};

  std::vector<GeoPoint> genesis_points() const;
  std::vector<int> genesis_days() const;
  double mean_annual_count() const;
};

/// Throws InputError when the library has no modern track.
EmpiricalDistributions empirical_distributions(const SegmentLibrary& library);

}  // namespace whits
