/**
 * @file transition_table.hpp
 * @brief Precomputed transition lookup table and its on-disk container.
 */
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "whits/kernel.hpp"
#include "whits/library.hpp"

namespace whits {

inline constexpr std::uint32_t kTableSchemaVersion = 1;

struct TableHeader {
  std::uint32_t schema_version{kTableSchemaVersion};
  KernelParams kernel{};
  std::int32_t reserved_steps{};
  std::uint64_t library_checksum{};
  std::uint64_t point_count{};

  bool operator==(const TableHeader&) const = default;
};

/// CSR layout: one row per library point, empty for points in a reserved tail.
class TransitionTable {
 public:
  /// Builds every row with transition_weights. Output is identical for any thread count.
  static TransitionTable build(const SegmentLibrary& library, const KernelParams& params,
                               int reserved_steps, unsigned threads = 1);

  /**
   * @brief Loads a table and checks it against `library`.
   *
   * Throws InputError when unreadable and FormatError on a schema mismatch,
   * truncation, corruption or a library checksum mismatch (stale table).
   */
  static TransitionTable load(const std::filesystem::path& path, const SegmentLibrary& library);

  /// Writes through a temporary file; on failure nothing is left at `path`.
  void save(const std::filesystem::path& path) const;

  const TableHeader& header() const { return header_; }
  std::span<const Candidate> row(const SegmentLibrary& library, PointRef source) const;
  std::span<const Candidate> row(std::uint64_t global_id) const;

  std::size_t candidate_count() const { return candidates_.size(); }
  std::size_t row_count() const { return offsets_.size() - 1; }

  /// FNV-1a 64 of the serialized body.
  std::uint64_t checksum() const { return checksum_; }

  bool operator==(const TransitionTable& other) const;

 private:
  TransitionTable() = default;
  std::vector<std::uint8_t> serialize() const;

  TableHeader header_{};
  std::vector<std::uint64_t> offsets_{0};
  std::vector<Candidate> candidates_;
  std::uint64_t checksum_{};
};

}  // namespace whits
