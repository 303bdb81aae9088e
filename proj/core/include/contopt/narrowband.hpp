#ifndef CONTOPT_NARROWBAND_HPP
#define CONTOPT_NARROWBAND_HPP

#include <array>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "contopt/density_field.hpp"
#include "contopt/grid.hpp"
#include "contopt/types.hpp"

namespace contopt {

// Seeded 4-connected components of cells above the density threshold.
// Cells outside every component are treated as void for the current solve.
struct ComponentSet {
  std::vector<std::vector<int>> components;
  std::vector<std::uint8_t> active;  // per cell

  bool is_active(int cell) const { return active[cell] != 0; }
};

// Codimension-1 contact surface: grid nodes plus axis-aligned unit edges on
// the interface between active and inactive/exterior cells.
struct BoundaryMesh {
  std::vector<int> vertex_nodes;               // grid node id per mesh vertex
  std::vector<Vec2> rest_positions;            // per mesh vertex
  std::vector<std::array<int, 2>> edges;       // mesh vertex index pairs
  std::vector<std::vector<int>> vertex_edges;  // incident edge ids per vertex
  std::unordered_map<int, int> node_to_vertex;
  std::unordered_set<std::uint64_t> edge_keys;  // normalized grid-node pairs

  int vertex_count() const { return static_cast<int>(vertex_nodes.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }

  bool has_edge_between_nodes(int node_a, int node_b) const;

  // World-space vertex positions for a nodal displacement vector.
  std::vector<Vec2> world_positions(const Vec& u) const;
};

// Flood fill over {rho > eta} from the seed cells; AlwaysSolid cells always
// pass the threshold, AlwaysVoid cells never do. Throws std::runtime_error
// when no seed cell passes (degenerate design).
ComponentSet detect_components(const DensityField& f, const Grid2D& g,
                               const std::vector<int>& seed_cells, double eta);

BoundaryMesh extract_boundary(const ComponentSet& comps, const Grid2D& g);

// True iff p coincides with an endpoint of (y, z) or forms a boundary edge
// with one; such pairs are excluded from the contact set.
bool incident(const BoundaryMesh& mesh, int p_node, int y_node, int z_node);

}  // namespace contopt

#endif
