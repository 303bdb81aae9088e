#include "contopt/grid.hpp"

#include <stdexcept>

namespace contopt {

Grid2D::Grid2D(int nx_, int ny_, double h_, Vec2 origin_)
    : nx(nx_), ny(ny_), h(h_), origin(origin_) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("Grid2D: cell counts must be >= 1");
  if (!(h > 0.0)) throw std::invalid_argument("Grid2D: spacing must be positive");
}

Vec2 Grid2D::node_pos(int n) const {
  auto [i, j] = node_ij(n);
  return origin + h * Vec2(i, j);
}

Vec2 Grid2D::cell_center(int c) const {
  auto [i, j] = cell_ij(c);
  return origin + h * Vec2(i + 0.5, j + 0.5);
}

std::array<int, 4> Grid2D::cell_nodes(int c) const {
  auto [i, j] = cell_ij(c);
  return {node_id(i, j), node_id(i + 1, j), node_id(i + 1, j + 1), node_id(i, j + 1)};
}

}  // namespace contopt
