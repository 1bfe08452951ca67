#include "whits/library.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parallel.hpp"
#include "serialization.hpp"
#include "whits/geo.hpp"

namespace whits {

namespace {

constexpr char kLibraryMagic[8] = {'W', 'H', 'I', 'T', 'S', 'L', 'I', 'B'};
constexpr std::uint32_t kLibrarySchemaVersion = 1;

double vector_gap(const MotionVector& a, const MotionVector& b) { return std::hypot(b.vx - a.vx, b.vy - a.vy); }

struct FlatPoint {
  const TrackPoint* point;
  const MotionVector* motion;
};

std::vector<FlatPoint> flatten(std::span<const HistoricalTrack> tracks,
                               std::span<const std::vector<MotionVector>> motion) {
  std::vector<FlatPoint> flat;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    for (std::size_t k = 0; k < tracks[t].points.size(); ++k) flat.push_back({&tracks[t].points[k], &motion[t][k]});
  }
  return flat;
}

void write_body(detail::BinaryWriter& w, const BasinConfig& config, const LibraryOptions& options,
                const Normalizers& norm, std::span<const HistoricalTrack> tracks,
                std::span<const std::uint8_t> modern) {
  w.put(static_cast<std::uint8_t>(config.basin));
  w.put(static_cast<std::int32_t>(config.record_start_year));
  w.put(static_cast<std::int32_t>(config.modern_cutoff_year));
  w.put(static_cast<std::int32_t>(config.record_end_year));
  w.put(static_cast<std::uint8_t>(config.wind_convention));
  w.put(config.conversion_factor);
  w.put(options.radius_deg);
  w.put(options.floors.max_v);
  w.put(options.floors.max_t);
  w.put(options.floors.max_dw);
  w.put(norm.max_v);
  w.put(norm.max_t);
  w.put(norm.max_dw);
  w.put(static_cast<std::uint64_t>(tracks.size()));
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    const auto& track = tracks[t];
    w.put_string(track.storm_id);
    w.put(static_cast<std::int32_t>(track.genesis_year));
    w.put(static_cast<std::int32_t>(track.genesis_day_of_year));
    w.put(static_cast<std::uint8_t>((track.wind_filled ? 1 : 0) | (track.wind_converted ? 2 : 0)));
    w.put(modern[t]);
    w.put(static_cast<std::uint64_t>(track.points.size()));
    for (const auto& p : track.points) {
      w.put(static_cast<std::int32_t>(p.step_index));
      w.put(p.lat);
      w.put(p.lon);
      w.put(p.wind_u10);
    }
  }
}

}  // namespace

Normalizers compute_normalizers(std::span<const HistoricalTrack> tracks,
                                std::span<const std::vector<MotionVector>> motion, const SpatialIndex& index,
                                const LibraryOptions& options, unsigned threads) {
  std::vector<Normalizers> per_track(tracks.size());
  detail::parallel_for(tracks.size(), threads, [&](std::size_t ti) {
    const auto t = static_cast<std::uint32_t>(ti);
    const auto& points = tracks[t].points;
    auto& m = per_track[t];
    for (std::uint32_t k = 0; k < points.size(); ++k) {
      const auto& a = points[k];
      for (const auto& ref : index.within({a.lat, a.lon}, options.radius_deg)) {
        if (ref.track == t && ref.step == k) continue;
        const auto& b = tracks[ref.track].points[ref.step];
        m.max_v = std::max(m.max_v, vector_gap(motion[t][k], motion[ref.track][ref.step]));
        m.max_t = std::max(m.max_t, std::abs(static_cast<double>(b.step_index - a.step_index)));
        m.max_dw = std::max(m.max_dw, std::abs(b.wind_u10 - a.wind_u10));
      }
    }
  });
  Normalizers near{};
  for (const auto& m : per_track) {
    near.max_v = std::max(near.max_v, m.max_v);
    near.max_t = std::max(near.max_t, m.max_t);
    near.max_dw = std::max(near.max_dw, m.max_dw);
  }
  if (near.max_v > 0.0 && near.max_t > 0.0 && near.max_dw > 0.0) return near;

  // Degenerate radius population: all distinct pairs, then the configured floors.
  const auto flat = flatten(tracks, motion);
  Normalizers all{};
  if (flat.size() >= 2) {
    auto [tmin, tmax] = std::minmax_element(flat.begin(), flat.end(), [](const auto& x, const auto& y) {
      return x.point->step_index < y.point->step_index;
    });
    all.max_t = static_cast<double>(tmax->point->step_index - tmin->point->step_index);
    auto [wmin, wmax] = std::minmax_element(flat.begin(), flat.end(), [](const auto& x, const auto& y) {
      return x.point->wind_u10 < y.point->wind_u10;
    });
    all.max_dw = wmax->point->wind_u10 - wmin->point->wind_u10;
    if (near.max_v == 0.0) {
      for (std::size_t i = 0; i < flat.size(); ++i) {
        for (std::size_t j = i + 1; j < flat.size(); ++j) {
          all.max_v = std::max(all.max_v, vector_gap(*flat[i].motion, *flat[j].motion));
        }
      }
    }
  }
  auto pick = [](double radius_value, double all_value, double floor) {
    if (radius_value > 0.0) return radius_value;
    if (all_value > 0.0) return all_value;
    return floor;
  };
  return {pick(near.max_v, all.max_v, options.floors.max_v), pick(near.max_t, all.max_t, options.floors.max_t),
          pick(near.max_dw, all.max_dw, options.floors.max_dw)};
}

SegmentLibrary SegmentLibrary::build(std::vector<HistoricalTrack> tracks, const BasinConfig& config,
                                     const LibraryOptions& options, unsigned threads) {
  config.validate();
  if (tracks.empty()) throw InputError("cannot build a segment library from an empty track set");
  if (!(options.radius_deg > 0.0)) throw InputError("library radius must be positive");
  for (const auto& track : tracks) {
    if (track.basin != config.basin) throw InputError("track " + track.storm_id + " belongs to another basin");
    if (!track.wind_converted) throw InputError("track " + track.storm_id + " has unconverted winds");
    if (track.points.size() < 2) throw InputError("track " + track.storm_id + " has fewer than 2 points");
    for (std::size_t k = 0; k < track.points.size(); ++k) {
      if (track.points[k].step_index != static_cast<int>(k)) {
        throw InputError("track " + track.storm_id + " has non-consecutive step indices");
      }
      if (!(track.points[k].wind_u10 >= 0.0)) throw InputError("track " + track.storm_id + " has negative wind");
    }
  }
  SegmentLibrary lib;
  lib.config_ = config;
  lib.options_ = options;
  lib.tracks_ = std::move(tracks);
  lib.modern_.resize(lib.tracks_.size());
  const int modern_start = config.modern_start_year();
  for (std::size_t t = 0; t < lib.tracks_.size(); ++t) {
    const int y = lib.tracks_[t].genesis_year;
    lib.modern_[t] = (y >= modern_start && y <= config.record_end_year) ? 1 : 0;
  }
  lib.finalize();
  lib.normalizers_ = compute_normalizers(lib.tracks_, lib.motion_, lib.index_, options, threads);
  detail::BinaryWriter body;
  write_body(body, lib.config_, lib.options_, lib.normalizers_, lib.tracks_, lib.modern_);
  lib.checksum_ = detail::fnv1a(body.bytes().data(), body.bytes().size());
  return lib;
}

void SegmentLibrary::finalize() {
  motion_.clear();
  point_offset_.assign(1, 0);
  std::vector<GeoPoint> points;
  std::vector<PointRef> refs;
  for (std::uint32_t t = 0; t < tracks_.size(); ++t) {
    motion_.push_back(track_motion_vectors(tracks_[t].points));
    point_offset_.push_back(point_offset_.back() + tracks_[t].points.size());
    for (std::uint32_t k = 0; k < tracks_[t].points.size(); ++k) {
      points.push_back({tracks_[t].points[k].lat, tracks_[t].points[k].lon});
      refs.push_back({t, k});
    }
  }
  index_ = SpatialIndex(points, refs, options_.radius_deg);
}

void SegmentLibrary::save(const std::filesystem::path& path) const {
  detail::BinaryWriter body;
  write_body(body, config_, options_, normalizers_, tracks_, modern_);
  detail::BinaryWriter file;
  file.put_raw(std::string_view(kLibraryMagic, sizeof(kLibraryMagic)));
  file.put(kLibrarySchemaVersion);
  file.bytes().insert(file.bytes().end(), body.bytes().begin(), body.bytes().end());
  file.put(detail::fnv1a(body.bytes().data(), body.bytes().size()));
  detail::write_file_atomic(path, file.bytes().data(), file.bytes().size());
}

SegmentLibrary SegmentLibrary::load(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  const std::string what = "segment library " + path.string();
  detail::BinaryReader header(bytes.data(), bytes.size(), what);
  if (header.get_raw(sizeof(kLibraryMagic)) != std::string_view(kLibraryMagic, sizeof(kLibraryMagic))) {
    throw FormatError(what + ": not a segment library file");
  }
  const auto version = header.get<std::uint32_t>();
  if (version != kLibrarySchemaVersion) {
    throw FormatError(what + ": schema version " + std::to_string(version) + ", expected " +
                      std::to_string(kLibrarySchemaVersion));
  }
  if (header.remaining() < sizeof(std::uint64_t)) throw FormatError(what + ": truncated file");
  const std::size_t body_start = header.position();
  const std::size_t body_size = bytes.size() - body_start - sizeof(std::uint64_t);
  detail::BinaryReader r(bytes.data() + body_start, body_size, what);

  SegmentLibrary lib;
  const auto basin = r.get<std::uint8_t>();
  if (basin > static_cast<std::uint8_t>(Basin::SP)) throw FormatError(what + ": bad basin code");
  lib.config_ = BasinConfig::defaults(static_cast<Basin>(basin));
  lib.config_.record_start_year = r.get<std::int32_t>();
  lib.config_.modern_cutoff_year = r.get<std::int32_t>();
  lib.config_.record_end_year = r.get<std::int32_t>();
  const auto convention = r.get<std::uint8_t>();
  if (convention > static_cast<std::uint8_t>(WindConvention::TenMinute)) {
    throw FormatError(what + ": bad wind convention");
  }
  lib.config_.wind_convention = static_cast<WindConvention>(convention);
  lib.config_.conversion_factor = r.get<double>();
  lib.options_.radius_deg = r.get<double>();
  lib.options_.floors.max_v = r.get<double>();
  lib.options_.floors.max_t = r.get<double>();
  lib.options_.floors.max_dw = r.get<double>();
  lib.normalizers_.max_v = r.get<double>();
  lib.normalizers_.max_t = r.get<double>();
  lib.normalizers_.max_dw = r.get<double>();
  const auto n_tracks = r.get<std::uint64_t>();
  // Each track needs at least its fixed-size fields, which bounds a corrupt count.
  if (n_tracks > r.remaining() / 18) throw FormatError(what + ": truncated file");
  lib.tracks_.resize(n_tracks);
  lib.modern_.resize(n_tracks);
  for (std::uint64_t t = 0; t < n_tracks; ++t) {
    auto& track = lib.tracks_[t];
    track.storm_id = r.get_string();
    track.basin = lib.config_.basin;
    track.genesis_year = r.get<std::int32_t>();
    track.genesis_day_of_year = r.get<std::int32_t>();
    const auto flags = r.get<std::uint8_t>();
    track.wind_filled = (flags & 1) != 0;
    track.wind_converted = (flags & 2) != 0;
    lib.modern_[t] = r.get<std::uint8_t>();
    const auto n_points = r.get<std::uint64_t>();
    if (n_points > r.remaining() / 28) throw FormatError(what + ": truncated file");
    track.points.resize(n_points);
    for (auto& p : track.points) {
      p.step_index = r.get<std::int32_t>();
      p.lat = r.get<double>();
      p.lon = r.get<double>();
      p.wind_u10 = r.get<double>();
    }
  }
  if (r.remaining() != 0) throw FormatError(what + ": trailing bytes");
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body_start + body_size, sizeof(stored));
  const auto actual = detail::fnv1a(bytes.data() + body_start, body_size);
  if (stored != actual) throw FormatError(what + ": checksum mismatch (corrupt file)");
  if (lib.tracks_.empty()) throw FormatError(what + ": no tracks");
  lib.checksum_ = actual;
  lib.finalize();
  return lib;
}

std::size_t SegmentLibrary::modern_count() const {
  return static_cast<std::size_t>(std::count(modern_.begin(), modern_.end(), std::uint8_t{1}));
}

PointRef SegmentLibrary::ref_of(std::uint64_t global_id) const {
  const auto it = std::upper_bound(point_offset_.begin(), point_offset_.end(), global_id);
  const auto track = static_cast<std::uint32_t>(std::distance(point_offset_.begin(), it) - 1);
  return {track, static_cast<std::uint32_t>(global_id - point_offset_[track])};
}

double SegmentLibrary::mean_track_steps() const {
  double total = 0.0;
  for (const auto& t : tracks_) total += static_cast<double>(t.points.size() - 1);
  return total / static_cast<double>(tracks_.size());
}

std::vector<GeoPoint> EmpiricalDistributions::genesis_points() const {
  std::vector<GeoPoint> out;
  for (const auto& g : genesis) out.push_back({g.lat, g.lon});
  return out;
}

std::vector<int> EmpiricalDistributions::genesis_days() const {
  std::vector<int> out;
  for (const auto& g : genesis) out.push_back(g.day_of_year);
  return out;
}

double EmpiricalDistributions::mean_annual_count() const {
  if (annual_counts.empty()) return 0.0;
  return std::accumulate(annual_counts.begin(), annual_counts.end(), 0.0) /
         static_cast<double>(annual_counts.size());
}

EmpiricalDistributions empirical_distributions(const SegmentLibrary& library) {
  EmpiricalDistributions d;
  const auto& config = library.config();
  d.first_year = config.modern_start_year();
  d.annual_counts.assign(static_cast<std::size_t>(config.modern_window_years()), 0);
  for (std::uint32_t t = 0; t < library.track_count(); ++t) {
    if (!library.is_modern(t)) continue;
    const auto& track = library.track(t);
    d.genesis.push_back({track.points[0].lat, track.points[0].lon, track.genesis_day_of_year, t});
    d.lifetimes.push_back(static_cast<int>(track.points.size()) - 1);
    ++d.annual_counts[static_cast<std::size_t>(track.genesis_year - d.first_year)];
  }
  if (d.genesis.empty()) throw InputError("segment library has no modern observing-era track");
  return d;
}

}  // namespace whits
