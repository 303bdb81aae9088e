#ifndef CONTOPT_ELASTICITY_HPP
#define CONTOPT_ELASTICITY_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "contopt/energy_model.hpp"
#include "contopt/grid.hpp"
#include "contopt/types.hpp"

namespace contopt {

// Lame coefficients at unit Young's modulus; cell stiffness enters as a
// separate multiplicative factor so the SIMP chain rule stays exact.
struct LameParams {
  double mu = 0.0;
  double lambda = 0.0;

  static LameParams plane_strain(double E, double nu);
  static LameParams plane_stress(double E, double nu);
};

struct DisplacementField {
  Vec u;                                      // 2 * node_count, interleaved
  std::vector<std::uint8_t> dirichlet_mask;   // per node; masks both components
  Vec dirichlet_value;                        // 2 * node_count

  static DisplacementField zero(const Grid2D& g);
  void apply_dirichlet();
};

struct QuadraturePoint {
  Vec2 X;                       // reference position
  double V_q = 0.0;             // integration weight (area)
  int cell = -1;
  std::array<int, 4> nodes{};   // incident grid nodes
  std::array<Vec2, 4> gradN{};  // shape gradients at X
};

// 2x2 Gauss quadrature of one cell; weights sum to h^2.
std::array<QuadraturePoint, 4> cell_quadrature(const Grid2D& g, int cell);

// F = I + sum_a u_a (grad N_a)^T.
Mat2 deformation_gradient(const Vec& u, const QuadraturePoint& q);

// Compressible neo-Hookean density in 2D,
//   Psi(F) = mu/2 (tr(F^T F) - 2) - mu log J + lambda/2 log^2 J,
// with optional first Piola stress and the 4x4 Hessian in row-major vec
// order (F00, F01, F10, F11). Throws std::domain_error when det F <= 0.
double neo_hookean(const Mat2& F, const LameParams& lame, Mat2* dPsi_dF = nullptr,
                   Mat4* d2Psi_dF2 = nullptr);

// Largest alpha in (0,1] with det(F + alpha dF) > 0 at this point, scaled by
// the 0.9 safety factor; 1 when the determinant never vanishes.
double det_positive_step_bound(const Mat2& F, const Mat2& dF);

// e = sum_c E_c sum_q Psi(F_q) V_q over the active cells, with E_c the
// SIMP-projected stiffness computed by the caller.
class ElasticEnergy final : public EnergyTerm {
 public:
  ElasticEnergy(const Grid2D& g, std::vector<int> active_cells, std::vector<double> cell_stiffness,
                LameParams lame);

  const char* name() const override { return "elastic"; }
  double value(const Vec& u) const override;
  void add_gradient(const Vec& u, Vec& grad) const override;
  void add_hessian(const Vec& u, std::vector<Triplet>& out, bool project) const override;
  double step_bound(const Vec& u, const Vec& du) const override;

  // Unit-modulus per-cell quantities for the sensitivity chain:
  // sum_q V_q Psi(F_q) and its displacement gradient, i.e. d e / d E_c and
  // d^2 e / d E_c d u restricted to the cell stencil.
  double cell_unit_energy(const Vec& u, int active_index) const;
  void add_cell_unit_gradient(const Vec& u, int active_index, Vec& out) const;
  // Same gradient on the 8-dof cell stencil (node order as cell_nodes).
  Eigen::Matrix<double, 8, 1> cell_unit_gradient_local(const Vec& u, int active_index) const;

  const std::vector<int>& active_cells() const { return active_; }
  const std::vector<double>& cell_stiffness() const { return stiffness_; }
  const Grid2D& grid() const { return grid_; }
  const LameParams& lame() const { return lame_; }

 private:
  Grid2D grid_;
  std::vector<int> active_;
  std::vector<double> stiffness_;  // E_c per active cell
  LameParams lame_;
};

}  // namespace contopt

#endif
