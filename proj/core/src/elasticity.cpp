#include "contopt/elasticity.hpp"

#include <cmath>
#include <stdexcept>

#include "contopt/spd.hpp"

namespace contopt {

namespace {

constexpr double kGaussLo = 0.21132486540518713;  // 1/2 - 1/(2 sqrt(3))
constexpr double kGaussHi = 0.78867513459481287;

struct GaussTable {
  // Unit-square coordinates and shape gradients (to be scaled by 1/h).
  std::array<Vec2, 4> xi;
  std::array<std::array<Vec2, 4>, 4> dN;  // [gauss point][node]
};

const GaussTable& gauss_table() {
  static const GaussTable t = [] {
    GaussTable t;
    const double q[2] = {kGaussLo, kGaussHi};
    int k = 0;
    for (int b = 0; b < 2; ++b) {
      for (int a = 0; a < 2; ++a, ++k) {
        const double xi = q[a], eta = q[b];
        t.xi[k] = Vec2(xi, eta);
        t.dN[k][0] = Vec2(-(1 - eta), -(1 - xi));
        t.dN[k][1] = Vec2(1 - eta, -xi);
        t.dN[k][2] = Vec2(eta, xi);
        t.dN[k][3] = Vec2(-eta, 1 - xi);
      }
    }
    return t;
  }();
  return t;
}

inline Mat2 def_grad(const Vec& u, const std::array<int, 4>& nodes,
                     const std::array<Vec2, 4>& gradN) {
  Mat2 F = Mat2::Identity();
  for (int a = 0; a < 4; ++a) {
    const Vec2 ua = u.segment<2>(2 * nodes[a]);
    F += ua * gradN[a].transpose();
  }
  return F;
}

}  // namespace

LameParams LameParams::plane_strain(double E, double nu) {
  return {E / (2.0 * (1.0 + nu)), E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))};
}

LameParams LameParams::plane_stress(double E, double nu) {
  return {E / (2.0 * (1.0 + nu)), E * nu / (1.0 - nu * nu)};
}

DisplacementField DisplacementField::zero(const Grid2D& g) {
  DisplacementField f;
  f.u = Vec::Zero(g.dof_count());
  f.dirichlet_mask.assign(g.node_count(), 0);
  f.dirichlet_value = Vec::Zero(g.dof_count());
  return f;
}

void DisplacementField::apply_dirichlet() {
  for (std::size_t n = 0; n < dirichlet_mask.size(); ++n) {
    if (!dirichlet_mask[n]) continue;
    u[2 * n] = dirichlet_value[2 * n];
    u[2 * n + 1] = dirichlet_value[2 * n + 1];
  }
}

std::array<QuadraturePoint, 4> cell_quadrature(const Grid2D& g, int cell) {
  const auto& t = gauss_table();
  std::array<QuadraturePoint, 4> out;
  auto [i, j] = g.cell_ij(cell);
  const Vec2 corner = g.origin + g.h * Vec2(i, j);
  const auto nodes = g.cell_nodes(cell);
  for (int k = 0; k < 4; ++k) {
    QuadraturePoint& q = out[k];
    q.X = corner + g.h * t.xi[k];
    q.V_q = 0.25 * g.h * g.h;
    q.cell = cell;
    q.nodes = nodes;
    for (int a = 0; a < 4; ++a) q.gradN[a] = t.dN[k][a] / g.h;
  }
  return out;
}

Mat2 deformation_gradient(const Vec& u, const QuadraturePoint& q) {
  return def_grad(u, q.nodes, q.gradN);
}

double neo_hookean(const Mat2& F, const LameParams& lame, Mat2* dPsi_dF, Mat4* d2Psi_dF2) {
  const double J = F.determinant();
  if (!(J > 0.0)) throw std::domain_error("neo_hookean: det F <= 0");
  const double logJ = std::log(J);
  const double mu = lame.mu, la = lame.lambda;
  const double psi = 0.5 * mu * (F.squaredNorm() - 2.0) - mu * logJ + 0.5 * la * logJ * logJ;

  if (!dPsi_dF && !d2Psi_dF2) return psi;

  Mat2 gJ;  // dJ/dF
  gJ << F(1, 1), -F(1, 0), -F(0, 1), F(0, 0);
  const double a = (la * logJ - mu) / J;
  if (dPsi_dF) *dPsi_dF = mu * F + a * gJ;

  if (d2Psi_dF2) {
    const double ap = (la * (1.0 - logJ) + mu) / (J * J);
    Eigen::Vector4d gv(gJ(0, 0), gJ(0, 1), gJ(1, 0), gJ(1, 1));
    Mat4& H = *d2Psi_dF2;
    H = mu * Mat4::Identity() + ap * (gv * gv.transpose());
    // d(gJ)/dF is constant: antidiagonal +-1 pattern in vec order.
    H(0, 3) += a;
    H(3, 0) += a;
    H(1, 2) -= a;
    H(2, 1) -= a;
  }
  return psi;
}

double det_positive_step_bound(const Mat2& F, const Mat2& dF) {
  const double J = F.determinant();
  const double b = F(1, 1) * dF(0, 0) + F(0, 0) * dF(1, 1) - F(0, 1) * dF(1, 0) - F(1, 0) * dF(0, 1);
  const double c = dF.determinant();

  double root = -1.0;
  if (std::abs(c) < 1e-14 * std::max(1.0, std::abs(b))) {
    if (b < 0.0) root = -J / b;
  } else {
    const double disc = b * b - 4.0 * c * J;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
      const double r1 = q / c;
      const double r2 = (q != 0.0) ? J / q : -1.0;
      for (double r : {r1, r2})
        if (r > 0.0 && (root < 0.0 || r < root)) root = r;
    }
  }
  if (root <= 0.0) return 1.0;
  return std::min(1.0, 0.9 * root);
}

ElasticEnergy::ElasticEnergy(const Grid2D& g, std::vector<int> active_cells,
                             std::vector<double> cell_stiffness, LameParams lame)
    : grid_(g), active_(std::move(active_cells)), stiffness_(std::move(cell_stiffness)), lame_(lame) {
  if (active_.size() != stiffness_.size())
    throw std::invalid_argument("ElasticEnergy: stiffness array size mismatch");
}

double ElasticEnergy::value(const Vec& u) const {
  const auto& t = gauss_table();
  const double Vq = 0.25 * grid_.h * grid_.h;
  double e = 0.0;
  for (std::size_t idx = 0; idx < active_.size(); ++idx) {
    const auto nodes = grid_.cell_nodes(active_[idx]);
    double cell_e = 0.0;
    for (int k = 0; k < 4; ++k) {
      std::array<Vec2, 4> gradN;
      for (int a = 0; a < 4; ++a) gradN[a] = t.dN[k][a] / grid_.h;
      cell_e += neo_hookean(def_grad(u, nodes, gradN), lame_) * Vq;
    }
    e += stiffness_[idx] * cell_e;
  }
  return e;
}

void ElasticEnergy::add_gradient(const Vec& u, Vec& grad) const {
  const auto& t = gauss_table();
  const double Vq = 0.25 * grid_.h * grid_.h;
  for (std::size_t idx = 0; idx < active_.size(); ++idx) {
    const auto nodes = grid_.cell_nodes(active_[idx]);
    const double s = stiffness_[idx] * Vq;
    for (int k = 0; k < 4; ++k) {
      std::array<Vec2, 4> gradN;
      for (int a = 0; a < 4; ++a) gradN[a] = t.dN[k][a] / grid_.h;
      Mat2 P;
      neo_hookean(def_grad(u, nodes, gradN), lame_, &P);
      for (int a = 0; a < 4; ++a) grad.segment<2>(2 * nodes[a]) += s * (P * gradN[a]);
    }
  }
}

void ElasticEnergy::add_hessian(const Vec& u, std::vector<Triplet>& out, bool project) const {
  const auto& t = gauss_table();
  const double Vq = 0.25 * grid_.h * grid_.h;
  Eigen::Matrix<double, 8, 8> K;
  for (std::size_t idx = 0; idx < active_.size(); ++idx) {
    const auto nodes = grid_.cell_nodes(active_[idx]);
    const double s = stiffness_[idx] * Vq;
    K.setZero();
    for (int k = 0; k < 4; ++k) {
      std::array<Vec2, 4> gradN;
      for (int a = 0; a < 4; ++a) gradN[a] = t.dN[k][a] / grid_.h;
      Mat4 M;
      neo_hookean(def_grad(u, nodes, gradN), lame_, nullptr, &M);
      if (project) project_spd_inplace(M);
      // dF rows (F00,F01,F10,F11) map from du_a via D_a; K_ab = D_a^T M D_b.
      std::array<Eigen::Matrix<double, 4, 2>, 4> D;
      for (int a = 0; a < 4; ++a) {
        D[a].setZero();
        D[a](0, 0) = gradN[a].x();
        D[a](1, 0) = gradN[a].y();
        D[a](2, 1) = gradN[a].x();
        D[a](3, 1) = gradN[a].y();
      }
      for (int a = 0; a < 4; ++a) {
        const Eigen::Matrix<double, 2, 4> DtM = D[a].transpose() * M;
        for (int b = 0; b < 4; ++b) K.block<2, 2>(2 * a, 2 * b) += s * (DtM * D[b]);
      }
    }
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int r = 0; r < 2; ++r)
          for (int c2 = 0; c2 < 2; ++c2)
            out.emplace_back(2 * nodes[a] + r, 2 * nodes[b] + c2, K(2 * a + r, 2 * b + c2));
  }
}

double ElasticEnergy::step_bound(const Vec& u, const Vec& du) const {
  const auto& t = gauss_table();
  double alpha = 1.0;
  for (std::size_t idx = 0; idx < active_.size(); ++idx) {
    const auto nodes = grid_.cell_nodes(active_[idx]);
    for (int k = 0; k < 4; ++k) {
      std::array<Vec2, 4> gradN;
      for (int a = 0; a < 4; ++a) gradN[a] = t.dN[k][a] / grid_.h;
      const Mat2 F = def_grad(u, nodes, gradN);
      Mat2 dF = Mat2::Zero();
      for (int a = 0; a < 4; ++a) dF += du.segment<2>(2 * nodes[a]) * gradN[a].transpose();
      alpha = std::min(alpha, det_positive_step_bound(F, dF));
    }
  }
  return alpha;
}

double ElasticEnergy::cell_unit_energy(const Vec& u, int active_index) const {
  const auto& t = gauss_table();
  const double Vq = 0.25 * grid_.h * grid_.h;
  const auto nodes = grid_.cell_nodes(active_[active_index]);
  double e = 0.0;
  for (int k = 0; k < 4; ++k) {
    std::array<Vec2, 4> gradN;
    for (int a = 0; a < 4; ++a) gradN[a] = t.dN[k][a] / grid_.h;
    e += neo_hookean(def_grad(u, nodes, gradN), lame_) * Vq;
  }
  return e;
}

void ElasticEnergy::add_cell_unit_gradient(const Vec& u, int active_index, Vec& out) const {
  const auto nodes = grid_.cell_nodes(active_[active_index]);
  const Eigen::Matrix<double, 8, 1> local = cell_unit_gradient_local(u, active_index);
  for (int a = 0; a < 4; ++a) out.segment<2>(2 * nodes[a]) += local.segment<2>(2 * a);
}

Eigen::Matrix<double, 8, 1> ElasticEnergy::cell_unit_gradient_local(const Vec& u,
                                                                    int active_index) const {
  const auto& t = gauss_table();
  const double Vq = 0.25 * grid_.h * grid_.h;
  const auto nodes = grid_.cell_nodes(active_[active_index]);
  Eigen::Matrix<double, 8, 1> out = Eigen::Matrix<double, 8, 1>::Zero();
  for (int k = 0; k < 4; ++k) {
    std::array<Vec2, 4> gradN;
    for (int a = 0; a < 4; ++a) gradN[a] = t.dN[k][a] / grid_.h;
    Mat2 P;
    neo_hookean(def_grad(u, nodes, gradN), lame_, &P);
    for (int a = 0; a < 4; ++a) out.segment<2>(2 * a) += Vq * (P * gradN[a]);
  }
  return out;
}

}  // namespace contopt
