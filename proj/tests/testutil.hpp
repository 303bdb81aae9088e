#ifndef CONTOPT_TESTUTIL_HPP
#define CONTOPT_TESTUTIL_HPP

#include <random>

#include "contopt/contact.hpp"
#include "contopt/density_field.hpp"
#include "contopt/elasticity.hpp"
#include "contopt/energy_model.hpp"
#include "contopt/grid.hpp"
#include "contopt/narrowband.hpp"
#include "contopt/types.hpp"

namespace contopt::testutil {

inline std::mt19937_64 make_rng(std::uint64_t seed = 0x5eed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Directional finite-difference check of a term's gradient (and optionally
// its unprojected Hessian) at state u. Returns max relative errors.
struct FDResult {
  double grad_err = 0.0;
  double hess_err = 0.0;
};

inline FDResult fd_check_term(const EnergyTerm& term, const Vec& u, int trials, double dir_scale,
                              std::mt19937_64& rng, bool check_hessian = true,
                              double eps = 1e-6) {
  FDResult res;
  Vec g0 = Vec::Zero(u.size());
  term.add_gradient(u, g0);

  SpMat H;
  if (check_hessian) {
    std::vector<Triplet> trips;
    term.add_hessian(u, trips, /*project=*/false);
    H.resize(u.size(), u.size());
    H.setFromTriplets(trips.begin(), trips.end());
  }

  for (int t = 0; t < trials; ++t) {
    Vec v(u.size());
    for (int i = 0; i < v.size(); ++i) v[i] = uniform(rng, -1.0, 1.0);
    v *= dir_scale / v.cwiseAbs().maxCoeff();

    const double ep = term.value(u + eps * v);
    const double em = term.value(u - eps * v);
    const double fd = (ep - em) / (2.0 * eps);
    const double an = g0.dot(v);
    const double gscale = std::max({std::abs(fd), std::abs(an), 1e-10});
    res.grad_err = std::max(res.grad_err, std::abs(fd - an) / gscale);

    if (check_hessian) {
      Vec gp = Vec::Zero(u.size()), gm = Vec::Zero(u.size());
      term.add_gradient(u + eps * v, gp);
      term.add_gradient(u - eps * v, gm);
      const Vec fdv = (gp - gm) / (2.0 * eps);
      const Vec anv = H * v;
      const double hscale = std::max({fdv.cwiseAbs().maxCoeff(), anv.cwiseAbs().maxCoeff(), 1e-10});
      res.hess_err = std::max(res.hess_err, (fdv - anv).cwiseAbs().maxCoeff() / hscale);
    }
  }
  return res;
}

// Hand-built boundary mesh over synthetic vertices; vertex i doubles as grid
// node i, so a displacement vector has 2 * positions.size() entries.
inline BoundaryMesh make_mesh(const std::vector<Vec2>& positions,
                              const std::vector<std::array<int, 2>>& edges) {
  BoundaryMesh mesh;
  mesh.vertex_nodes.resize(positions.size());
  mesh.rest_positions = positions;
  mesh.vertex_edges.assign(positions.size(), {});
  for (std::size_t v = 0; v < positions.size(); ++v) {
    mesh.vertex_nodes[v] = static_cast<int>(v);
    mesh.node_to_vertex.emplace(static_cast<int>(v), static_cast<int>(v));
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    mesh.edges.push_back(edges[e]);
    mesh.vertex_edges[edges[e][0]].push_back(static_cast<int>(e));
    mesh.vertex_edges[edges[e][1]].push_back(static_cast<int>(e));
    int a = edges[e][0], b = edges[e][1];
    if (a > b) std::swap(a, b);
    mesh.edge_keys.insert((std::uint64_t(std::uint32_t(a)) << 32) | std::uint32_t(b));
  }
  return mesh;
}

// Two stacked blocks on an nx x ny grid separated by a void band, pushed
// together by a prescribed displacement of the top row. Densities are a
// deterministic mix so sensitivities are nontrivial.
struct TwoBlockScene {
  Grid2D grid;
  DensityField field;
  DisplacementField bc;  // mask + target values
  std::vector<int> seeds;
  double push = 0.0;
};

inline TwoBlockScene two_block_scene(int nx = 8, int ny = 8, double h = 0.1,
                                     double push_fraction = 0.9) {
  TwoBlockScene s;
  s.grid = Grid2D(nx, ny, h);
  s.field = DensityField(s.grid.cell_count(), 0.0);
  const int gap_lo = ny / 2 - 1, gap_hi = ny / 2 + 1;  // two void rows
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int c = s.grid.cell_id(i, j);
      if (j >= gap_lo && j < gap_hi) {
        s.field.rho[c] = 0.0;
      } else {
        // deterministic pseudo-random density in [0.5, 1.0]
        const unsigned k = unsigned(c) * 2654435761u;
        s.field.rho[c] = 0.5 + 0.5 * double((k >> 8) & 0xffff) / 65535.0;
      }
    }
  s.bc = DisplacementField::zero(s.grid);
  const double gap = 2.0 * h;
  s.push = push_fraction * gap;
  for (int i = 0; i <= nx; ++i) {
    const int nb = s.grid.node_id(i, 0);
    const int nt = s.grid.node_id(i, ny);
    s.bc.dirichlet_mask[nb] = 1;
    s.bc.dirichlet_mask[nt] = 1;
    s.bc.dirichlet_value[2 * nt + 1] = -s.push;
  }
  s.seeds = {s.grid.cell_id(0, 0), s.grid.cell_id(0, ny - 1)};
  return s;
}

}  // namespace contopt::testutil

#endif
