#ifndef CONTOPT_GRID_HPP
#define CONTOPT_GRID_HPP

#include <array>
#include <utility>

#include "contopt/types.hpp"

namespace contopt {

// Regular grid of square cells. Cells are indexed by (i, j) with i fastest;
// nodes live on the (nx+1) x (ny+1) lattice. Displacement dofs are
// interleaved per node: dof(n, c) = 2n + c.
struct Grid2D {
  int nx = 0;
  int ny = 0;
  double h = 0.0;
  Vec2 origin = Vec2::Zero();

  Grid2D() = default;
  Grid2D(int nx_, int ny_, double h_, Vec2 origin_ = Vec2::Zero());

  int cell_count() const { return nx * ny; }
  int node_count() const { return (nx + 1) * (ny + 1); }
  int dof_count() const { return 2 * node_count(); }

  int cell_id(int i, int j) const { return j * nx + i; }
  int node_id(int i, int j) const { return j * (nx + 1) + i; }
  std::pair<int, int> cell_ij(int c) const { return {c % nx, c / nx}; }
  std::pair<int, int> node_ij(int n) const { return {n % (nx + 1), n / (nx + 1)}; }

  bool cell_in_bounds(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }

  Vec2 node_pos(int n) const;
  Vec2 cell_center(int c) const;

  // Corner nodes of cell c, counterclockwise from the lower-left:
  // (i,j), (i+1,j), (i+1,j+1), (i,j+1).
  std::array<int, 4> cell_nodes(int c) const;
};

}  // namespace contopt

#endif
