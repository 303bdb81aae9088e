#include "contopt/narrowband.hpp"

#include <stdexcept>

namespace contopt {

namespace {

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b);
}

inline bool passes(const DensityField& f, int c, double eta) {
  if (f.region[c] == Region::AlwaysSolid) return true;
  if (f.region[c] == Region::AlwaysVoid) return false;
  return f.rho[c] > eta;
}

}  // namespace

bool BoundaryMesh::has_edge_between_nodes(int node_a, int node_b) const {
  return edge_keys.count(edge_key(node_a, node_b)) > 0;
}

std::vector<Vec2> BoundaryMesh::world_positions(const Vec& u) const {
  std::vector<Vec2> x(vertex_nodes.size());
  for (std::size_t v = 0; v < vertex_nodes.size(); ++v)
    x[v] = rest_positions[v] + u.segment<2>(2 * vertex_nodes[v]);
  return x;
}

ComponentSet detect_components(const DensityField& f, const Grid2D& g,
                               const std::vector<int>& seed_cells, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("detect_components: eta outside (0,1)");
  if (seed_cells.empty()) throw std::invalid_argument("detect_components: empty seed set");

  ComponentSet out;
  out.active.assign(g.cell_count(), 0);
  std::vector<std::uint8_t> visited(g.cell_count(), 0);

  // Iterative flood fill; recursion depth would be unbounded on large grids.
  std::vector<int> stack;
  for (int seed : seed_cells) {
    if (seed < 0 || seed >= g.cell_count()) throw std::invalid_argument("detect_components: seed out of range");
    if (visited[seed] || !passes(f, seed, eta)) continue;
    std::vector<int> comp;
    stack.clear();
    stack.push_back(seed);
    visited[seed] = 1;
    while (!stack.empty()) {
      const int c = stack.back();
      stack.pop_back();
      comp.push_back(c);
      out.active[c] = 1;
      auto [i, j] = g.cell_ij(c);
      const int ni[4] = {i - 1, i + 1, i, i};
      const int nj[4] = {j, j, j - 1, j + 1};
      for (int k = 0; k < 4; ++k) {
        if (!g.cell_in_bounds(ni[k], nj[k])) continue;
        const int n = g.cell_id(ni[k], nj[k]);
        if (visited[n] || !passes(f, n, eta)) continue;
        visited[n] = 1;
        stack.push_back(n);
      }
    }
    out.components.push_back(std::move(comp));
  }

  if (out.components.empty())
    throw std::runtime_error("detect_components: no seed cell passes the density threshold");
  return out;
}

BoundaryMesh extract_boundary(const ComponentSet& comps, const Grid2D& g) {
  BoundaryMesh mesh;

  auto vertex_of = [&](int node) {
    auto it = mesh.node_to_vertex.find(node);
    if (it != mesh.node_to_vertex.end()) return it->second;
    const int v = mesh.vertex_count();
    mesh.node_to_vertex.emplace(node, v);
    mesh.vertex_nodes.push_back(node);
    mesh.rest_positions.push_back(g.node_pos(node));
    mesh.vertex_edges.emplace_back();
    return v;
  };

  auto add_edge = [&](int node_a, int node_b) {
    const int va = vertex_of(node_a);
    const int vb = vertex_of(node_b);
    const int e = mesh.edge_count();
    mesh.edges.push_back({va, vb});
    mesh.vertex_edges[va].push_back(e);
    mesh.vertex_edges[vb].push_back(e);
    mesh.edge_keys.insert(edge_key(node_a, node_b));
  };

  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int c = g.cell_id(i, j);
      if (!comps.is_active(c)) continue;
      auto inactive = [&](int ii, int jj) {
        return !g.cell_in_bounds(ii, jj) || !comps.is_active(g.cell_id(ii, jj));
      };
      // Each face separating this cell from an inactive cell or the domain
      // exterior becomes one boundary edge, oriented with material on the
      // left.
      if (inactive(i, j - 1)) add_edge(g.node_id(i, j), g.node_id(i + 1, j));          // bottom
      if (inactive(i + 1, j)) add_edge(g.node_id(i + 1, j), g.node_id(i + 1, j + 1));  // right
      if (inactive(i, j + 1)) add_edge(g.node_id(i + 1, j + 1), g.node_id(i, j + 1));  // top
      if (inactive(i - 1, j)) add_edge(g.node_id(i, j + 1), g.node_id(i, j));          // left
    }
  }
  return mesh;
}

bool incident(const BoundaryMesh& mesh, int p_node, int y_node, int z_node) {
  if (p_node == y_node || p_node == z_node) return true;
  return mesh.has_edge_between_nodes(p_node, y_node) || mesh.has_edge_between_nodes(p_node, z_node);
}

}  // namespace contopt
