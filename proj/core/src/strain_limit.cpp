#include "contopt/strain_limit.hpp"

#include <cmath>
#include <stdexcept>

#include "contopt/elasticity.hpp"

namespace contopt {

namespace {

constexpr double kSigmaGapGuard = 1e-8;

// psi and derivatives for one principal stretch, combining the upper barrier
// at s_bar with the reflected lower barrier at p_bar.
double sl_sigma(double sigma, const StrainLimitParams& p, double* d1, double* d2) {
  double v1 = 0.0, a1 = 0.0, b1 = 0.0;
  double v2 = 0.0, a2 = 0.0, b2 = 0.0;
  v1 = strain_limit_psi(sigma, p.s_hat, p.s_bar, &a1, &b1);
  v2 = strain_limit_psi(-sigma, -p.p_hat, -p.p_bar, &a2, &b2);
  if (d1) *d1 = a1 - a2;
  if (d2) *d2 = b1 + b2;
  return v1 + v2;
}

}  // namespace

double strain_limit_psi(double sigma, double s_hat, double s_bar, double* d1, double* d2) {
  if (sigma >= s_bar) throw std::domain_error("strain_limit_psi: stretch at or past the asymptote");
  if (sigma < s_hat) {
    if (d1) *d1 = 0.0;
    if (d2) *d2 = 0.0;
    return 0.0;
  }
  const double w = s_bar - s_hat;
  const double a = (s_hat - sigma) / w;  // <= 0 on the active branch
  const double r = (s_bar - sigma) / w;  // in (0, 1]
  const double lr = std::log(r);
  if (d1) *d1 = (2.0 * a / w) * lr + a * a / (r * w);
  if (d2) *d2 = (-2.0 / (w * w)) * lr - 4.0 * a / (r * w * w) + a * a / (r * r * w * w);
  return -a * a * lr;
}

void svd_rv_2x2(const Mat2& F, Mat2& U, Vec2& sigma, Mat2& V) {
  const double E = 0.5 * (F(0, 0) + F(1, 1));
  const double H = 0.5 * (F(0, 0) - F(1, 1));
  const double Fv = 0.5 * (F(0, 1) + F(1, 0));
  const double G = 0.5 * (F(1, 0) - F(0, 1));
  const double Q = std::hypot(E, G);
  const double R = std::hypot(H, Fv);
  sigma = Vec2(Q + R, Q - R);
  const double a1 = std::atan2(Fv, H);  // phi + theta
  const double a2 = std::atan2(G, E);   // phi - theta
  const double phi = 0.5 * (a1 + a2);
  const double theta = 0.5 * (a1 - a2);
  U << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  V << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
}

StrainLimitEnergy::StrainLimitEnergy(const Grid2D& g, std::vector<int> gated_cells,
                                     std::vector<double> gate_weights, StrainLimitParams params)
    : grid_(g), cells_(std::move(gated_cells)), weights_(std::move(gate_weights)), params_(params) {
  if (cells_.size() != weights_.size())
    throw std::invalid_argument("StrainLimitEnergy: weight array size mismatch");
  if (!(params_.p_bar < params_.p_hat && params_.p_hat <= 1.0 && 1.0 <= params_.s_hat &&
        params_.s_hat < params_.s_bar))
    throw std::invalid_argument("StrainLimitEnergy: require p_bar < p_hat <= 1 <= s_hat < s_bar");
}

double StrainLimitEnergy::value(const Vec& u) const {
  double e = 0.0;
  for (std::size_t idx = 0; idx < cells_.size(); ++idx) {
    for (const auto& q : cell_quadrature(grid_, cells_[idx])) {
      const Mat2 F = deformation_gradient(u, q);
      Mat2 U, V;
      Vec2 s;
      svd_rv_2x2(F, U, s, V);
      e += weights_[idx] * q.V_q *
           (sl_sigma(s[0], params_, nullptr, nullptr) + sl_sigma(s[1], params_, nullptr, nullptr));
    }
  }
  return e;
}

void StrainLimitEnergy::add_gradient(const Vec& u, Vec& grad) const {
  for (std::size_t idx = 0; idx < cells_.size(); ++idx) {
    for (const auto& q : cell_quadrature(grid_, cells_[idx])) {
      const Mat2 F = deformation_gradient(u, q);
      Mat2 U, V;
      Vec2 s;
      svd_rv_2x2(F, U, s, V);
      double d0, d1;
      sl_sigma(s[0], params_, &d0, nullptr);
      sl_sigma(s[1], params_, &d1, nullptr);
      const Mat2 P = U * Vec2(d0, d1).asDiagonal() * V.transpose();
      const double w = weights_[idx] * q.V_q;
      for (int a = 0; a < 4; ++a) grad.segment<2>(2 * q.nodes[a]) += w * (P * q.gradN[a]);
    }
  }
}

void StrainLimitEnergy::add_hessian(const Vec& u, std::vector<Triplet>& out, bool project) const {
  Eigen::Matrix<double, 8, 8> K;
  for (std::size_t idx = 0; idx < cells_.size(); ++idx) {
    K.setZero();
    const int cell = cells_[idx];
    std::array<int, 4> nodes{};
    for (const auto& q : cell_quadrature(grid_, cell)) {
      nodes = q.nodes;
      const Mat2 F = deformation_gradient(u, q);
      Mat2 U, V;
      Vec2 s;
      svd_rv_2x2(F, U, s, V);
      double g0, g1, h0, h1;
      sl_sigma(s[0], params_, &g0, &h0);
      sl_sigma(s[1], params_, &g1, &h1);

      // Eigen-modes of dP/dF for an isotropic stretch energy: two scaling
      // modes, one twist, one flip.
      const Mat2 S0 = U.col(0) * V.col(0).transpose();
      const Mat2 S1 = U.col(1) * V.col(1).transpose();
      const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
      const Mat2 Tw = inv_sqrt2 * (U.col(1) * V.col(0).transpose() - U.col(0) * V.col(1).transpose());
      const Mat2 Fl = inv_sqrt2 * (U.col(1) * V.col(0).transpose() + U.col(0) * V.col(1).transpose());

      double lam_s0 = h0, lam_s1 = h1;
      double lam_t, lam_l;
      if (std::abs(s[0] + s[1]) > kSigmaGapGuard)
        lam_t = (g0 + g1) / (s[0] + s[1]);
      else
        lam_t = 0.5 * (h0 + h1);
      if (std::abs(s[0] - s[1]) > kSigmaGapGuard)
        lam_l = (g0 - g1) / (s[0] - s[1]);
      else
        lam_l = 0.5 * (h0 + h1);
      if (project) {
        lam_s0 = std::max(lam_s0, 0.0);
        lam_s1 = std::max(lam_s1, 0.0);
        lam_t = std::max(lam_t, 0.0);
        lam_l = std::max(lam_l, 0.0);
      }

      auto vec4 = [](const Mat2& M) {
        return Eigen::Vector4d(M(0, 0), M(0, 1), M(1, 0), M(1, 1));
      };
      Mat4 HF = lam_s0 * vec4(S0) * vec4(S0).transpose() + lam_s1 * vec4(S1) * vec4(S1).transpose() +
                lam_t * vec4(Tw) * vec4(Tw).transpose() + lam_l * vec4(Fl) * vec4(Fl).transpose();

      const double w = weights_[idx] * q.V_q;
      std::array<Eigen::Matrix<double, 4, 2>, 4> D;
      for (int a = 0; a < 4; ++a) {
        D[a].setZero();
        D[a](0, 0) = q.gradN[a].x();
        D[a](1, 0) = q.gradN[a].y();
        D[a](2, 1) = q.gradN[a].x();
        D[a](3, 1) = q.gradN[a].y();
      }
      for (int a = 0; a < 4; ++a) {
        const Eigen::Matrix<double, 2, 4> DtH = D[a].transpose() * HF;
        for (int b = 0; b < 4; ++b) K.block<2, 2>(2 * a, 2 * b) += w * (DtH * D[b]);
      }
    }
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c)
            out.emplace_back(2 * nodes[a] + r, 2 * nodes[b] + c, K(2 * a + r, 2 * b + c));
  }
}

double StrainLimitEnergy::step_bound(const Vec& u, const Vec& du) const {
  // Weyl bound: singular values move by at most ||dF||, so the smallest
  // positive root of the linear envelope keeps sigma inside (p_bar, s_bar).
  double alpha = 1.0;
  for (std::size_t idx = 0; idx < cells_.size(); ++idx) {
    for (const auto& q : cell_quadrature(grid_, cells_[idx])) {
      const Mat2 F = deformation_gradient(u, q);
      Mat2 dF = Mat2::Zero();
      for (int a = 0; a < 4; ++a) dF += du.segment<2>(2 * q.nodes[a]) * q.gradN[a].transpose();
      const double rate = dF.norm();
      if (rate < 1e-300) continue;
      Mat2 U, V;
      Vec2 s;
      svd_rv_2x2(F, U, s, V);
      alpha = std::min(alpha, 0.9 * (params_.s_bar - s[0]) / rate);
      alpha = std::min(alpha, 0.9 * (s[1] - params_.p_bar) / rate);
    }
  }
  return std::max(alpha, 0.0);
}

}  // namespace contopt
