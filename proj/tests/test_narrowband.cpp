#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "contopt/narrowband.hpp"
#include "testutil.hpp"

using namespace contopt;

TEST_CASE("all-solid field gives one component covering everything") {
  Grid2D g(6, 4, 1.0);
  DensityField f(g.cell_count(), 1.0);
  const ComponentSet cs = detect_components(f, g, {g.cell_id(3, 2)}, 0.01);
  CHECK(cs.components.size() == 1);
  CHECK(cs.components[0].size() == std::size_t(g.cell_count()));
  for (int c = 0; c < g.cell_count(); ++c) CHECK(cs.is_active(c));
}

TEST_CASE("only the seeded blob survives") {
  Grid2D g(9, 3, 1.0);
  DensityField f(g.cell_count(), 0.0);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) f.rho[g.cell_id(i, j)] = 0.9;       // left blob
    for (int i = 6; i < 9; ++i) f.rho[g.cell_id(i, j)] = 0.9;       // right blob
  }
  const ComponentSet cs = detect_components(f, g, {g.cell_id(1, 1)}, 0.01);
  CHECK(cs.components.size() == 1);
  for (int j = 0; j < 3; ++j)
    for (int i = 6; i < 9; ++i) CHECK(!cs.is_active(g.cell_id(i, j)));
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) CHECK(cs.is_active(g.cell_id(i, j)));
}

TEST_CASE("checkerboard flood fill matches the hand enumeration") {
  // 4x4 checkerboard of 0.9 / 0.01 with eta = 0.02: bright cells touch only
  // diagonally, so the component from seed (0,0) is that single cell.
  Grid2D g(4, 4, 1.0);
  DensityField f(g.cell_count(), 0.0);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) f.rho[g.cell_id(i, j)] = ((i + j) % 2 == 0) ? 0.9 : 0.01;
  const ComponentSet cs = detect_components(f, g, {g.cell_id(0, 0)}, 0.02);
  CHECK(cs.components.size() == 1);
  CHECK(cs.components[0] == std::vector<int>{g.cell_id(0, 0)});
  int active = 0;
  for (int c = 0; c < g.cell_count(); ++c) active += cs.is_active(c) ? 1 : 0;
  CHECK(active == 1);
}

TEST_CASE("empty result raises") {
  Grid2D g(3, 3, 1.0);
  DensityField f(g.cell_count(), 0.001);
  CHECK_THROWS_AS(detect_components(f, g, {0}, 0.01), std::runtime_error);
}

TEST_CASE("region overrides the threshold") {
  Grid2D g(3, 1, 1.0);
  DensityField f(g.cell_count(), 0.5);
  f.region[1] = Region::AlwaysVoid;
  f.region[2] = Region::AlwaysSolid;
  f.enforce_regions();
  const ComponentSet cs = detect_components(f, g, {0, 2}, 0.01);
  CHECK(cs.components.size() == 2);  // void cell splits the strip
  CHECK(cs.is_active(0));
  CHECK(!cs.is_active(1));
  CHECK(cs.is_active(2));
}

TEST_CASE("single active cell boundary is its perimeter") {
  Grid2D g(3, 3, 1.0);
  DensityField f(g.cell_count(), 0.0);
  f.rho[g.cell_id(1, 1)] = 1.0;
  const ComponentSet cs = detect_components(f, g, {g.cell_id(1, 1)}, 0.01);
  const BoundaryMesh mesh = extract_boundary(cs, g);
  CHECK(mesh.vertex_count() == 4);
  CHECK(mesh.edge_count() == 4);
}

TEST_CASE("full block boundary is the domain perimeter") {
  Grid2D g(5, 3, 1.0);
  DensityField f(g.cell_count(), 1.0);
  const ComponentSet cs = detect_components(f, g, {0}, 0.01);
  const BoundaryMesh mesh = extract_boundary(cs, g);
  CHECK(mesh.edge_count() == 2 * (5 + 3));
  CHECK(mesh.vertex_count() == 2 * (5 + 3));
}

TEST_CASE("L-shaped component has 8 boundary edges") {
  // cells (0,0), (1,0), (0,1): hand enumeration of exposed faces gives 8.
  Grid2D g(3, 3, 1.0);
  DensityField f(g.cell_count(), 0.0);
  f.rho[g.cell_id(0, 0)] = 1.0;
  f.rho[g.cell_id(1, 0)] = 1.0;
  f.rho[g.cell_id(0, 1)] = 1.0;
  const ComponentSet cs = detect_components(f, g, {g.cell_id(0, 0)}, 0.01);
  const BoundaryMesh mesh = extract_boundary(cs, g);
  CHECK(mesh.edge_count() == 8);
  CHECK(mesh.vertex_count() == 8);
}

TEST_CASE("incidence queries") {
  Grid2D g(3, 3, 1.0);
  DensityField f(g.cell_count(), 0.0);
  f.rho[g.cell_id(1, 1)] = 1.0;
  const BoundaryMesh mesh = extract_boundary(detect_components(f, g, {g.cell_id(1, 1)}, 0.01), g);
  const int a = g.node_id(1, 1), b = g.node_id(2, 1), c = g.node_id(2, 2), d = g.node_id(1, 2);
  CHECK(incident(mesh, a, a, b));        // p is an endpoint
  CHECK(incident(mesh, a, b, c));        // (p, y) is a boundary edge
  CHECK(incident(mesh, d, b, c));        // (d, c) is a boundary edge
  CHECK(!incident(mesh, g.node_id(0, 0), b, c));  // unrelated node
}

TEST_CASE("boundary decomposes into closed loops (even vertex degree)") {
  auto rng = testutil::make_rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    Grid2D g(10, 8, 1.0);
    DensityField f(g.cell_count(), 0.0);
    for (int c = 0; c < g.cell_count(); ++c)
      f.rho[c] = testutil::uniform(rng, 0.0, 1.0) > 0.45 ? 0.9 : 0.0;
    f.rho[0] = 0.9;
    ComponentSet cs;
    try {
      cs = detect_components(f, g, {0}, 0.01);
    } catch (const std::runtime_error&) {
      continue;
    }
    const BoundaryMesh mesh = extract_boundary(cs, g);
    for (int v = 0; v < mesh.vertex_count(); ++v) CHECK(mesh.vertex_edges[v].size() % 2 == 0);
  }
}

TEST_CASE("components respect the threshold and the seed set") {
  auto rng = testutil::make_rng(22);
  Grid2D g(12, 9, 1.0);
  DensityField f(g.cell_count(), 0.0);
  for (int c = 0; c < g.cell_count(); ++c) f.rho[c] = testutil::uniform(rng, 0.0, 1.0);
  const double eta = 0.35;
  const std::vector<int> seeds = {g.cell_id(0, 0), g.cell_id(11, 8), g.cell_id(5, 4)};
  ComponentSet cs;
  try {
    cs = detect_components(f, g, seeds, eta);
  } catch (const std::runtime_error&) {
    return;
  }
  const std::set<int> seed_set(seeds.begin(), seeds.end());
  for (const auto& comp : cs.components) {
    bool has_seed = false;
    for (int c : comp) {
      CHECK(f.rho[c] > eta);
      if (seed_set.count(c)) has_seed = true;
    }
    CHECK(has_seed);
  }
}

TEST_CASE("re-extraction after removing a component avoids its interior") {
  Grid2D g(9, 3, 1.0);
  DensityField f(g.cell_count(), 0.0);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) f.rho[g.cell_id(i, j)] = 0.9;
    for (int i = 6; i < 9; ++i) f.rho[g.cell_id(i, j)] = 0.9;
  }
  const ComponentSet both =
      detect_components(f, g, {g.cell_id(0, 0), g.cell_id(8, 2)}, 0.01);
  CHECK(both.components.size() == 2);

  // interior faces of the right blob (faces between two of its cells)
  std::set<std::pair<int, int>> interior;
  const auto& removed = both.components[1];
  const std::set<int> removed_set(removed.begin(), removed.end());
  for (int c : removed) {
    auto [i, j] = g.cell_ij(c);
    if (removed_set.count(g.cell_id(i + 1, j)) && i + 1 < g.nx) {
      int a = g.node_id(i + 1, j), b = g.node_id(i + 1, j + 1);
      interior.insert({std::min(a, b), std::max(a, b)});
    }
    if (j + 1 < g.ny && removed_set.count(g.cell_id(i, j + 1))) {
      int a = g.node_id(i, j + 1), b = g.node_id(i + 1, j + 1);
      interior.insert({std::min(a, b), std::max(a, b)});
    }
  }

  for (int c : removed) f.rho[c] = 0.0;
  const ComponentSet left = detect_components(f, g, {g.cell_id(0, 0)}, 0.01);
  const BoundaryMesh mesh = extract_boundary(left, g);
  for (const auto& e : mesh.edges) {
    int a = mesh.vertex_nodes[e[0]], b = mesh.vertex_nodes[e[1]];
    if (a > b) std::swap(a, b);
    CHECK(!interior.count({a, b}));
  }
}
