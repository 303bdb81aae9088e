#include <benchmark/benchmark.h>

#include <random>

#include "contopt/contact.hpp"
#include "contopt/elasticity.hpp"
#include "contopt/filters.hpp"
#include "contopt/narrowband.hpp"
#include "contopt/projection.hpp"
#include "contopt/solver.hpp"

using namespace contopt;

namespace {

DensityField random_field(const Grid2D& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.2, 1.0);
  DensityField f(g.cell_count(), 0.0);
  for (int c = 0; c < g.cell_count(); ++c) f.rho[c] = uni(rng);
  return f;
}

struct AssemblyFixture {
  Grid2D grid{96, 48, 0.01};
  std::shared_ptr<ElasticEnergy> elastic;
  Vec u;

  AssemblyFixture() {
    std::vector<int> cells(grid.cell_count());
    std::vector<double> stiff(grid.cell_count());
    for (int c = 0; c < grid.cell_count(); ++c) {
      cells[c] = c;
      stiff[c] = 40.0 + (c % 17);
    }
    elastic = std::make_shared<ElasticEnergy>(grid, cells, stiff, LameParams::plane_strain(1.0, 0.3));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-0.3 * grid.h, 0.3 * grid.h);
    u = Vec::Zero(grid.dof_count());
    for (int i = 0; i < u.size(); ++i) u[i] = uni(rng);
  }
};

}  // namespace

static void BM_DensityFilter(benchmark::State& state) {
  Grid2D g(180, 80, 0.01);
  const DensityField f = random_field(g, 1);
  const FilterParams fp{2.0, 1e-3};
  for (auto _ : state) {
    auto out = density_filter(f, g, fp);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_DensityFilter);

static void BM_BoundaryExtraction(benchmark::State& state) {
  Grid2D g(180, 80, 0.01);
  DensityField f = random_field(g, 2);
  for (int c = 0; c < g.cell_count(); ++c) f.rho[c] = f.rho[c] > 0.55 ? 0.9 : 0.0;
  f.rho[0] = 0.9;
  for (auto _ : state) {
    try {
      const ComponentSet cs = detect_components(f, g, {0}, 0.01);
      auto mesh = extract_boundary(cs, g);
      benchmark::DoNotOptimize(mesh);
    } catch (const std::runtime_error&) {
    }
  }
}
BENCHMARK(BM_BoundaryExtraction);

static void BM_ElasticGradient(benchmark::State& state) {
  AssemblyFixture fx;
  Vec grad = Vec::Zero(fx.grid.dof_count());
  for (auto _ : state) {
    grad.setZero();
    fx.elastic->add_gradient(fx.u, grad);
    benchmark::DoNotOptimize(grad);
  }
}
BENCHMARK(BM_ElasticGradient);

static void BM_ElasticHessianProjected(benchmark::State& state) {
  AssemblyFixture fx;
  std::vector<Triplet> trips;
  for (auto _ : state) {
    trips.clear();
    fx.elastic->add_hessian(fx.u, trips, true);
    benchmark::DoNotOptimize(trips);
  }
}
BENCHMARK(BM_ElasticHessianProjected);

static void BM_ContactSet(benchmark::State& state) {
  // two long parallel boundaries a fraction of d_hat apart
  const int n = 256;
  std::vector<Vec2> pos;
  std::vector<std::array<int, 2>> edges;
  for (int i = 0; i <= n; ++i) pos.push_back(Vec2(0.01 * i, 0.0));
  for (int i = 0; i <= n; ++i) pos.push_back(Vec2(0.01 * i + 0.003, 0.0006));
  for (int i = 0; i < n; ++i) {
    edges.push_back({i, i + 1});
    edges.push_back({n + 1 + i, n + 2 + i});
  }
  BoundaryMesh mesh;
  mesh.vertex_nodes.resize(pos.size());
  mesh.rest_positions = pos;
  mesh.vertex_edges.assign(pos.size(), {});
  for (std::size_t v = 0; v < pos.size(); ++v) {
    mesh.vertex_nodes[v] = int(v);
    mesh.node_to_vertex.emplace(int(v), int(v));
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    mesh.edges.push_back(edges[e]);
    mesh.vertex_edges[edges[e][0]].push_back(int(e));
    mesh.vertex_edges[edges[e][1]].push_back(int(e));
    int a = edges[e][0], b = edges[e][1];
    if (a > b) std::swap(a, b);
    mesh.edge_keys.insert((std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b));
  }
  const BarrierParams bp{0.001, 1.0};
  for (auto _ : state) {
    auto pairs = build_contact_set(mesh, pos, bp, 0.01);
    benchmark::DoNotOptimize(pairs);
  }
}
BENCHMARK(BM_ContactSet);

BENCHMARK_MAIN();
