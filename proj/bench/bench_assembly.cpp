// Serial reference vs OpenMP element loops for the per-step operators.

#include <cmath>
#include <map>
#include <random>

#include <benchmark/benchmark.h>

#include "nudge/assembly.hpp"

using namespace nudge;

namespace {

struct Setup {
  DofMapPtr velocity;
  DofMapPtr pressure;
  Field advecting;
};

const Setup& setup(int n) {
  static std::map<int, Setup> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    const MeshPtr mesh = build_unit_square_mesh(n);
    Setup s{build_dofmap(mesh, ElementKind::p2_vector), build_dofmap(mesh, ElementKind::p1_scalar), {}};
    std::mt19937 gen(1);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    Eigen::VectorXd a(s.velocity->dof_count());
    for (Index i = 0; i < a.size(); ++i) a[i] = d(gen);
    s.advecting = Field(s.velocity, a);
    it = cache.emplace(n, std::move(s)).first;
  }
  return it->second;
}

Execution exec_of(const benchmark::State& state) {
  return state.range(1) ? Execution::parallel : Execution::serial;
}

void label(benchmark::State& state) { state.SetLabel(state.range(1) ? "parallel" : "serial"); }

void BM_Convection(benchmark::State& state) {
  const Setup& s = setup(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_convection(s.advecting, *s.velocity, exec_of(state)));
  label(state);
}

void BM_Stiffness(benchmark::State& state) {
  const Setup& s = setup(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_stiffness(*s.velocity, 1.0, exec_of(state)));
  label(state);
}

void BM_Divergence(benchmark::State& state) {
  const Setup& s = setup(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_divergence(*s.velocity, *s.pressure, exec_of(state)));
  label(state);
}

void BM_Forcing(benchmark::State& state) {
  const Setup& s = setup(static_cast<int>(state.range(0)));
  const VectorFunction f = [](double x, double y, double t) { return Vec2(std::sin(x + t), std::cos(y)); };
  for (auto _ : state) benchmark::DoNotOptimize(assemble_forcing(f, 0.5, *s.velocity, exec_of(state)));
  label(state);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int n : {16, 32, 64})
    for (int par : {0, 1}) b->Args({n, par});
  b->Unit(benchmark::kMillisecond);
}

}  // namespace

BENCHMARK(BM_Convection)->Apply(sizes);
BENCHMARK(BM_Stiffness)->Apply(sizes);
BENCHMARK(BM_Divergence)->Apply(sizes);
BENCHMARK(BM_Forcing)->Apply(sizes);

BENCHMARK_MAIN();
