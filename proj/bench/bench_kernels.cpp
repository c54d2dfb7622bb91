// Serial reference vs OpenMP kernels on the unit square.
//
//   ./build/bench/polyscat_bench --benchmark_counters_tabular=true

#include <benchmark/benchmark.h>

#include <vector>

#include "polyscat/kernels.hpp"

using namespace polyscat;
using kernels::Execution;

namespace {

struct Fixture {
    BoundaryMesh mesh;
    kernels::Layer layer;
    Eigen::VectorXcd density;
    std::vector<Vec2> points, dirs;

    explicit Fixture(int nodes)
        : mesh(Scatterer2D({axis_square(1.0)}), nodes, 4.0), layer{&mesh, 1.0, 1.0},
          density(Eigen::VectorXcd::Ones(Eigen::Index(mesh.size()))) {
        for (int i = 0; i < 4096; ++i) {
            const double a = 2.0 * pi * i / 4096;
            points.push_back((2.0 + 2.0 * (i % 7) / 7.0) * unit_from_angle(a));
            dirs.push_back(unit_from_angle(a));
        }
    }
};

Execution mode(const benchmark::State &st) { return st.range(1) ? Execution::parallel : Execution::serial; }

void BM_assemble(benchmark::State &st) {
    const Fixture f(int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(kernels::assemble(f.layer, 1.0, mode(st)));
    st.SetLabel(st.range(1) ? "parallel" : "serial");
}

void BM_potential_batch(benchmark::State &st) {
    const Fixture f(int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(kernels::potential_batch(f.layer, f.density, f.points, mode(st)));
    st.SetLabel(st.range(1) ? "parallel" : "serial");
}

void BM_far_field_batch(benchmark::State &st) {
    const Fixture f(int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(kernels::far_field_batch(f.layer, f.density, f.dirs, mode(st)));
    st.SetLabel(st.range(1) ? "parallel" : "serial");
}

}  // namespace

BENCHMARK(BM_assemble)->ArgsProduct({{256, 512, 1024}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_potential_batch)->ArgsProduct({{512, 1024}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_far_field_batch)->ArgsProduct({{512, 1024}, {0, 1}})->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
