#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "synthetic_archive.hpp"
#include "whits/geo.hpp"
#include "whits/kernel.hpp"
#include "whits/transition_table.hpp"

using namespace whits;
using whits::testing::straight_track;

namespace {

BasinConfig ni() { return BasinConfig::defaults(Basin::NI); }

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "whits_test_kernel";
  std::filesystem::create_directories(dir);
  return dir / name;
}

SegmentLibrary wiggly_library(std::uint64_t seed, int n_tracks, int n_points) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<HistoricalTrack> tracks;
  for (int t = 0; t < n_tracks; ++t) {
    auto track = straight_track("W" + std::to_string(t), 2000, 0, 0, 0, 0, 0, 0);
    double lat = 12 + 2 * u(gen), lon = 85 + 2 * u(gen), wind = 30 + 40 * u(gen);
    for (int k = 0; k < n_points; ++k) {
      track.points.push_back({k, lat, lon, wind});
      lat += 0.3 * u(gen);
      lon += 0.4 * (u(gen) - 0.5);
      wind = std::max(0.0, wind + 8 * (u(gen) - 0.5));
    }
    tracks.push_back(std::move(track));
  }
  return SegmentLibrary::build(std::move(tracks), ni());
}

}  // namespace

TEST_CASE("bisquare values") {
  CHECK(bisquare(0.0, 2.0) == 1.0);
  CHECK(bisquare(1.0, 2.0) == 0.0);
  CHECK(bisquare(1.5, 2.0) == 0.0);
  CHECK(bisquare(0.5, 2.0) == doctest::Approx(0.5625));
  CHECK(bisquare(0.5, 4.0) == doctest::Approx(0.31640625));
  CHECK(bisquare(0.5, 1.0) == doctest::Approx(0.75));
}

TEST_CASE("bisquare is decreasing in u and sharpens with alpha") {
  for (double a : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    double prev = bisquare(0.0, a);
    for (double u = 0.01; u <= 1.0; u += 0.01) {
      const double k = bisquare(u, a);
      CHECK(k <= prev);
      CHECK(k >= 0.0);
      CHECK(bisquare(u, a * 2) <= k);
      prev = k;
    }
  }
}

TEST_CASE("kernel parameter validation") {
  KernelParams p;
  CHECK_NOTHROW(p.validate());
  p.alpha_age = 0.0;
  CHECK_THROWS_AS(p.validate(), InputError);
  p = {};
  p.radius_deg = -1;
  CHECK_THROWS_AS(p.validate(), InputError);
}

TEST_CASE("covariate examples") {
  std::vector tracks{straight_track("A", 2000, 4, 15, 85, 0.1, 0, 40), straight_track("B", 2000, 4, 15, 85, 0.1, 0, 50),
                     straight_track("C", 2000, 4, 15, 85, 0.1, 0, 90),
                     straight_track("D", 2000, 4, 16.25, 85, 0.1, 0, 40)};
  const auto lib = SegmentLibrary::build(tracks, ni());
  REQUIRE(lib.max_dw() == 50.0);
  REQUIRE(lib.max_t() == 3.0);
  const KernelParams params;

  const auto self = covariates({0, 1}, {0, 1}, lib, params);
  CHECK(self.u1 == 0.0);
  CHECK(self.u2 == 0.0);
  CHECK(self.u3 == 0.0);
  CHECK(self.u4 == 0.0);

  const auto ab = covariates({0, 1}, {1, 1}, lib, params);
  CHECK(ab.u1 == 0.0);
  CHECK(ab.u4 == doctest::Approx(0.2));
  CHECK(ab.u3 == 0.0);

  const auto ad = covariates({0, 0}, {3, 0}, lib, params);
  CHECK(ad.u1 == doctest::Approx(0.5));
  CHECK(ad.u2 == 0.0);
  CHECK(ad.u4 == 0.0);

  const auto age = covariates({0, 0}, {0, 3}, lib, params);
  CHECK(age.u3 == 1.0);

  for (std::uint32_t i = 0; i < 4; ++i) {
    for (std::uint32_t j = 0; j < 4; ++j) {
      const auto x = covariates({i, 1}, {j, 2}, lib, params);
      const auto y = covariates({j, 2}, {i, 1}, lib, params);
      CHECK(x.u1 == y.u1);
      CHECK(x.u2 == doctest::Approx(y.u2));
      CHECK(x.u3 == y.u3);
      CHECK(x.u4 == y.u4);
      for (double u : {x.u1, x.u2, x.u3, x.u4}) {
        CHECK(u >= 0.0);
        CHECK(u <= 1.0);
      }
    }
  }
}

TEST_CASE("single and tied candidates") {
  // Points 5 degrees apart so only the co-located partner is in range.
  const auto a = straight_track("A", 2000, 2, 10, 80, 5, 0, 40);
  auto b = a;
  b.storm_id = "B";
  auto c = a;
  c.storm_id = "C";
  const auto two = SegmentLibrary::build({a, b}, ni());
  const auto w = transition_weights({0, 0}, two, {}, 0);
  REQUIRE(w.size() == 1);
  CHECK(w[0].target == PointRef{1, 0});
  CHECK(w[0].weight == 1.0);

  const auto three = SegmentLibrary::build({a, b, c}, ni());
  const auto w3 = transition_weights({0, 0}, three, {}, 0);
  REQUIRE(w3.size() == 2);
  CHECK(w3[0].weight == 0.5);
  CHECK(w3[1].weight == 0.5);

  CHECK(transition_weights({0, 1}, three, {}, 1).empty());
  CHECK(transition_weights({0, 0}, three, {}, 1).size() == 2);
}

TEST_CASE("isolated track has empty rows") {
  const auto lib = SegmentLibrary::build({straight_track("A", 2000, 8, 0, 80, 3, 0, 40)}, ni());
  const auto table = TransitionTable::build(lib, {}, 0);
  CHECK(table.candidate_count() == 0);
  for (std::uint64_t id = 0; id < lib.point_count(); ++id) CHECK(table.row(id).empty());
}

TEST_CASE("weights match a direct evaluation of the product kernel") {
  const auto lib = wiggly_library(11, 3, 25);
  KernelParams params{1.5, 2.5, 3.0, 4.5, 2.5};
  for (std::uint64_t id = 0; id < lib.point_count(); ++id) {
    const auto src = lib.ref_of(id);
    const auto got = transition_weights(src, lib, params, 2);
    if (!is_transition_point(lib, src, 2)) {
      CHECK(got.empty());
      continue;
    }
    std::vector<Candidate> expected;
    double total = 0;
    const auto& p = lib.point(src);
    const auto& vp = lib.motion(src);
    for (std::uint64_t j = 0; j < lib.point_count(); ++j) {
      const auto ref = lib.ref_of(j);
      if (ref == src || ref.step + 2 >= lib.track(ref.track).points.size()) continue;
      const auto& q = lib.point(ref);
      const auto& vq = lib.motion(ref);
      const double d = great_circle_deg({p.lat, p.lon}, {q.lat, q.lon});
      if (d > 2.5) continue;
      auto k = [](double u, double a) { return u >= 1 ? 0.0 : std::pow(1 - u * u, a); };
      const double w = k(d / 2.5, 1.5) * k(std::min(1.0, std::hypot(vq.vx - vp.vx, vq.vy - vp.vy) / lib.max_v()), 3.0) *
                       k(std::min(1.0, std::abs(double(q.step_index - p.step_index)) / lib.max_t()), 2.5) *
                       k(std::min(1.0, std::abs(q.wind_u10 - p.wind_u10) / lib.max_dw()), 4.5);
      if (w > 0) {
        expected.push_back({ref, w});
        total += w;
      }
    }
    REQUIRE(got.size() == expected.size());
    double sum = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].target == expected[i].target);
      CHECK(got[i].weight == doctest::Approx(expected[i].weight / total).epsilon(1e-12));
      CHECK(got[i].weight > 0.0);
      sum += got[i].weight;
    }
    if (!got.empty()) CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("default reserved steps") {
  const auto short_lib = SegmentLibrary::build({straight_track("A", 2000, 11, 0, 80, 0.1, 0, 40)}, ni());
  CHECK(default_reserved_steps(short_lib) == 3);
  CHECK(default_reserved_steps(short_lib, 9) == 5);
  const auto long_lib = SegmentLibrary::build({straight_track("A", 2000, 201, 0, 80, 0.1, 0, 40)}, ni());
  CHECK(default_reserved_steps(long_lib) == 10);
}

TEST_CASE("table rows equal per-point weights for any thread count") {
  const auto lib = wiggly_library(3, 12, 40);
  const KernelParams params;
  const auto t1 = TransitionTable::build(lib, params, 3, 1);
  const auto t3 = TransitionTable::build(lib, params, 3, 3);
  CHECK(t1 == t3);
  CHECK(t1.checksum() == t3.checksum());
  CHECK(t1.row_count() == lib.point_count());
  CHECK(t1.header().reserved_steps == 3);
  CHECK(t1.header().library_checksum == lib.checksum());
  for (std::uint64_t id = 0; id < lib.point_count(); ++id) {
    const auto expected = transition_weights(lib.ref_of(id), lib, params, 3);
    const auto row = t1.row(id);
    REQUIRE(row.size() == expected.size());
    for (std::size_t i = 0; i < row.size(); ++i) CHECK(row[i] == expected[i]);
  }
}

TEST_CASE("table build argument checks") {
  const auto lib = wiggly_library(3, 2, 10);
  KernelParams wide;
  wide.radius_deg = 3.0;
  CHECK_THROWS_AS(TransitionTable::build(lib, wide, 3), InputError);
  CHECK_THROWS_AS(TransitionTable::build(lib, {}, -1), InputError);
}

TEST_CASE("table save, load and stale detection") {
  const auto lib = wiggly_library(5, 6, 30);
  const auto other = wiggly_library(6, 6, 30);
  const auto table = TransitionTable::build(lib, {}, 3);
  const auto path = temp_file("table.bin");
  table.save(path);
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  const auto back = TransitionTable::load(path, lib);
  CHECK(back == table);
  CHECK(back.checksum() == table.checksum());
  CHECK_THROWS_AS(TransitionTable::load(path, other), FormatError);

  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), {});
  const auto bad = temp_file("bad.bin");
  auto write = [&](const std::string& b) { std::ofstream(bad, std::ios::binary) << b; };
  write(bytes.substr(0, bytes.size() - 20));
  CHECK_THROWS_AS(TransitionTable::load(bad, lib), FormatError);
  write(bytes.substr(0, 9));
  CHECK_THROWS_AS(TransitionTable::load(bad, lib), FormatError);
  auto flipped = bytes;
  flipped[bytes.size() - 12] ^= 0x01;
  write(flipped);
  CHECK_THROWS_AS(TransitionTable::load(bad, lib), FormatError);
  CHECK_THROWS_AS(TransitionTable::load(temp_file("none.bin"), lib), InputError);
}
