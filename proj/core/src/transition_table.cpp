#include "whits/transition_table.hpp"

#include <algorithm>

#include "parallel.hpp"
#include "serialization.hpp"

namespace whits {

namespace {

constexpr char kTableMagic[8] = {'W', 'H', 'I', 'T', 'S', 'T', 'B', 'L'};

}  // namespace

TransitionTable TransitionTable::build(const SegmentLibrary& library, const KernelParams& params,
                                       int reserved_steps, unsigned threads) {
  params.validate();
  if (reserved_steps < 0) throw InputError("reserved_steps must be non-negative");
  if (params.radius_deg != library.options().radius_deg) {
    throw InputError("kernel radius differs from the radius the library normalizers were computed with");
  }
  const std::size_t n = library.point_count();
  std::vector<std::vector<Candidate>> rows(n);
  detail::parallel_for(
      n, threads,
      [&](std::size_t id) { rows[id] = transition_weights(library.ref_of(id), library, params, reserved_steps); },
      256);

  TransitionTable table;
  table.header_.kernel = params;
  table.header_.reserved_steps = reserved_steps;
  table.header_.library_checksum = library.checksum();
  table.header_.point_count = n;
  table.offsets_.reserve(n + 1);
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  table.candidates_.reserve(total);
  for (auto& r : rows) {
    table.candidates_.insert(table.candidates_.end(), r.begin(), r.end());
    table.offsets_.push_back(table.candidates_.size());
    std::vector<Candidate>().swap(r);
  }
  const auto body = table.serialize();
  table.checksum_ = detail::fnv1a(body.data(), body.size());
  return table;
}

std::vector<std::uint8_t> TransitionTable::serialize() const {
  detail::BinaryWriter w;
  w.put(header_.kernel.alpha_dist);
  w.put(header_.kernel.alpha_age);
  w.put(header_.kernel.alpha_vec);
  w.put(header_.kernel.alpha_wind);
  w.put(header_.kernel.radius_deg);
  w.put(header_.reserved_steps);
  w.put(header_.library_checksum);
  w.put(header_.point_count);
  for (auto off : offsets_) w.put(static_cast<std::uint64_t>(off));
  for (const auto& c : candidates_) {
    w.put(c.target.track);
    w.put(c.target.step);
    w.put(c.weight);
  }
  return std::move(w.bytes());
}

void TransitionTable::save(const std::filesystem::path& path) const {
  const auto body = serialize();
  detail::BinaryWriter file;
  file.put_raw(std::string_view(kTableMagic, sizeof(kTableMagic)));
  file.put(header_.schema_version);
  file.bytes().insert(file.bytes().end(), body.begin(), body.end());
  file.put(detail::fnv1a(body.data(), body.size()));
  detail::write_file_atomic(path, file.bytes().data(), file.bytes().size());
}

TransitionTable TransitionTable::load(const std::filesystem::path& path, const SegmentLibrary& library) {
  const auto bytes = detail::read_file(path);
  const std::string what = "transition table " + path.string();
  detail::BinaryReader head(bytes.data(), bytes.size(), what);
  if (head.get_raw(sizeof(kTableMagic)) != std::string_view(kTableMagic, sizeof(kTableMagic))) {
    throw FormatError(what + ": not a transition table file");
  }
  const auto version = head.get<std::uint32_t>();
  if (version != kTableSchemaVersion) {
    throw FormatError(what + ": schema version " + std::to_string(version) + ", expected " +
                      std::to_string(kTableSchemaVersion));
  }
  if (head.remaining() < sizeof(std::uint64_t)) throw FormatError(what + ": truncated file");
  const std::size_t body_start = head.position();
  const std::size_t body_size = bytes.size() - body_start - sizeof(std::uint64_t);
  detail::BinaryReader r(bytes.data() + body_start, body_size, what);

  TransitionTable table;
  auto& h = table.header_;
  h.schema_version = version;
  h.kernel.alpha_dist = r.get<double>();
  h.kernel.alpha_age = r.get<double>();
  h.kernel.alpha_vec = r.get<double>();
  h.kernel.alpha_wind = r.get<double>();
  h.kernel.radius_deg = r.get<double>();
  h.reserved_steps = r.get<std::int32_t>();
  h.library_checksum = r.get<std::uint64_t>();
  h.point_count = r.get<std::uint64_t>();
  if (h.point_count >= r.remaining() / sizeof(std::uint64_t)) throw FormatError(what + ": truncated file");
  table.offsets_.resize(h.point_count + 1);
  for (auto& off : table.offsets_) off = r.get<std::uint64_t>();
  if (table.offsets_.front() != 0 || !std::is_sorted(table.offsets_.begin(), table.offsets_.end())) {
    throw FormatError(what + ": corrupt row offsets");
  }
  const auto n_candidates = table.offsets_.back();
  if (n_candidates != r.remaining() / 16 || r.remaining() % 16 != 0) throw FormatError(what + ": truncated file");
  table.candidates_.resize(n_candidates);
  for (auto& c : table.candidates_) {
    c.target.track = r.get<std::uint32_t>();
    c.target.step = r.get<std::uint32_t>();
    c.weight = r.get<double>();
  }
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body_start + body_size, sizeof(stored));
  const auto actual = detail::fnv1a(bytes.data() + body_start, body_size);
  if (stored != actual) throw FormatError(what + ": checksum mismatch (corrupt file)");
  table.checksum_ = actual;

  if (h.library_checksum != library.checksum() || h.point_count != library.point_count()) {
    throw FormatError(what + ": stale table, built for library " + detail::hex64(h.library_checksum) +
                      " but the loaded library is " + detail::hex64(library.checksum()));
  }
  for (const auto& c : table.candidates_) {
    if (c.target.track >= library.track_count() ||
        c.target.step >= library.track(c.target.track).points.size()) {
      throw FormatError(what + ": candidate outside the library");
    }
  }
  return table;
}

std::span<const Candidate> TransitionTable::row(const SegmentLibrary& library, PointRef source) const {
  return row(library.global_id(source));
}

std::span<const Candidate> TransitionTable::row(std::uint64_t global_id) const {
  const auto begin = offsets_[global_id];
  const auto end = offsets_[global_id + 1];
  return std::span<const Candidate>(candidates_).subspan(begin, end - begin);
}

bool TransitionTable::operator==(const TransitionTable& other) const {
  return header_ == other.header_ && offsets_ == other.offsets_ && candidates_ == other.candidates_;
}

}  // namespace whits
