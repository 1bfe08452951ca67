#include <benchmark/benchmark.h>

#include <filesystem>
#include <optional>

#include "synthetic_archive.hpp"
#include "whits/diagnostics.hpp"
#include "whits/geo.hpp"
#include "whits/ingest.hpp"
#include "whits/kernel.hpp"
#include "whits/library.hpp"
#include "whits/simulator.hpp"
#include "whits/transition_table.hpp"

namespace fs = std::filesystem;
using namespace whits;

namespace {

struct Fixture {
  fs::path archive;
  BasinConfig config = BasinConfig::defaults(Basin::NI);
  std::optional<SegmentLibrary> library;
  std::optional<TransitionTable> table;
  std::optional<EmpiricalDistributions> dists;
  SyntheticCatalog catalog;
  std::vector<TrackView> views;
};

Fixture& fixture() {
  static Fixture f = [] {
    Fixture f;
    f.archive = fs::temp_directory_path() / "whits_bench_ni.csv";
    testing::ArchiveOptions o;
    o.seed = 5;
    testing::write_synthetic_archive(o, f.archive);
    auto parsed = parse_archive(f.archive, f.config);
    f.library.emplace(SegmentLibrary::build(assemble_tracks(parsed.rows, f.config).tracks, f.config));
    f.table.emplace(TransitionTable::build(*f.library, {}, default_reserved_steps(*f.library)));
    f.dists.emplace(empirical_distributions(*f.library));
    SimulationParams p;
    p.n_years = 500;
    p.seed = 1;
    f.catalog = generate_catalog(*f.library, *f.table, *f.dists, p);
    for (const auto& t : f.catalog.tracks) f.views.push_back({t.year, t.points});
    return f;
  }();
  return f;
}

void BM_GreatCircle(benchmark::State& state) {
  GeoPoint a{15.0, 85.0}, b{16.2, 86.9};
  for (auto _ : state) {
    benchmark::DoNotOptimize(great_circle_deg(a, b));
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_GreatCircle);

void BM_ParseArchive(benchmark::State& state) {
  auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(parse_archive(f.archive, f.config));
}
BENCHMARK(BM_ParseArchive)->Unit(benchmark::kMillisecond);

void BM_TransitionWeights(benchmark::State& state) {
  auto& f = fixture();
  const KernelParams kp;
  const int reserved = f.table->header().reserved_steps;
  std::uint64_t id = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(transition_weights(f.library->ref_of(id), *f.library, kp, reserved));
    id = (id + 7919) % f.library->point_count();
  }
}
BENCHMARK(BM_TransitionWeights)->Unit(benchmark::kMicrosecond);

void BM_TableBuild(benchmark::State& state) {
  auto& f = fixture();
  const int reserved = f.table->header().reserved_steps;
  for (auto _ : state) benchmark::DoNotOptimize(TransitionTable::build(*f.library, {}, reserved));
}
BENCHMARK(BM_TableBuild)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_SimulateYear(benchmark::State& state) {
  auto& f = fixture();
  SimulationParams p;
  p.n_years = 1;
  int year = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate_year(year++, *f.library, *f.table, *f.dists, p));
}
BENCHMARK(BM_SimulateYear)->Unit(benchmark::kMicrosecond);

void BM_TrackDensity(benchmark::State& state) {
  auto& f = fixture();
  const auto grid = GridSpec::for_basin(Basin::NI);
  for (auto _ : state) benchmark::DoNotOptimize(track_density(f.views, grid, 500));
}
BENCHMARK(BM_TrackDensity)->Unit(benchmark::kMillisecond);

void BM_P64Field(benchmark::State& state) {
  auto& f = fixture();
  const auto grid = GridSpec::for_basin(Basin::NI);
  for (auto _ : state) benchmark::DoNotOptimize(p64_field(f.views, grid, 500));
}
BENCHMARK(BM_P64Field)->Unit(benchmark::kMillisecond);

void BM_MedianField(benchmark::State& state) {
  auto& f = fixture();
  const auto grid = GridSpec::for_basin(Basin::NI);
  const auto metric = state.range(0) == 0 ? Metric::TrackDensity : Metric::P64;
  for (auto _ : state) benchmark::DoNotOptimize(median_field(f.views, 500, grid, 74, 100, metric, 3));
}
BENCHMARK(BM_MedianField)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
