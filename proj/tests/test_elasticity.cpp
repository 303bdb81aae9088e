#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "contopt/elasticity.hpp"
#include "contopt/strain_limit.hpp"
#include "testutil.hpp"

using namespace contopt;

namespace {

// Bilinear interpolation of the world map on one cell, for FD of F.
Vec2 interp_map(const Grid2D& g, int cell, const Vec& u, const Vec2& X) {
  auto [i, j] = g.cell_ij(cell);
  const Vec2 corner = g.origin + g.h * Vec2(i, j);
  const double xi = (X.x() - corner.x()) / g.h;
  const double eta = (X.y() - corner.y()) / g.h;
  const auto nodes = g.cell_nodes(cell);
  const double N[4] = {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
  Vec2 x = X;
  for (int a = 0; a < 4; ++a) x += N[a] * Vec2(u[2 * nodes[a]], u[2 * nodes[a] + 1]);
  return x;
}

}  // namespace

TEST_CASE("deformation gradient is identity at rest") {
  Grid2D g(2, 2, 0.5);
  const Vec u = Vec::Zero(g.dof_count());
  for (const auto& q : cell_quadrature(g, 0))
    CHECK((deformation_gradient(u, q) - Mat2::Identity()).norm() == doctest::Approx(0.0));
}

TEST_CASE("affine displacement reproduces its gradient exactly") {
  Grid2D g(3, 2, 0.25);
  Vec u(g.dof_count());
  for (int n = 0; n < g.node_count(); ++n) {
    const Vec2 X = g.node_pos(n);
    u[2 * n] = 0.1 * X.x();
    u[2 * n + 1] = 0.0;
  }
  for (int c = 0; c < g.cell_count(); ++c)
    for (const auto& q : cell_quadrature(g, c)) {
      const Mat2 F = deformation_gradient(u, q);
      CHECK(F(0, 0) == doctest::Approx(1.1).epsilon(1e-14));
      CHECK(F(1, 1) == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(F(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
      CHECK(F(1, 0) == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("deformation gradient matches FD of the interpolated map") {
  Grid2D g(1, 1, 0.3);
  auto rng = testutil::make_rng(31);
  Vec u(g.dof_count());
  for (int i = 0; i < u.size(); ++i) u[i] = testutil::uniform(rng, -0.02, 0.02);
  const double eps = 1e-7;
  for (const auto& q : cell_quadrature(g, 0)) {
    const Mat2 F = deformation_gradient(u, q);
    for (int col = 0; col < 2; ++col) {
      Vec2 dX = Vec2::Zero();
      dX[col] = eps;
      const Vec2 fd = (interp_map(g, 0, u, q.X + dX) - interp_map(g, 0, u, q.X - dX)) / (2 * eps);
      CHECK(fd.x() == doctest::Approx(F(0, col)).epsilon(1e-6));
      CHECK(fd.y() == doctest::Approx(F(1, col)).epsilon(1e-6));
    }
  }
}

TEST_CASE("neo-Hookean rest state") {
  const LameParams lame{1.3, 0.7};
  Mat2 P;
  const double psi = neo_hookean(Mat2::Identity(), lame, &P);
  CHECK(psi == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(P.norm() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("neo-Hookean frozen value at diag(2,1), mu=lambda=1") {
  Mat2 F = Mat2::Identity();
  F(0, 0) = 2.0;
  CHECK(neo_hookean(F, {1.0, 1.0}) == doctest::Approx(1.0470793263991554029).epsilon(1e-14));
}

TEST_CASE("neo-Hookean rejects inverted configurations") {
  Mat2 F = Mat2::Identity();
  F(0, 0) = -0.5;
  CHECK_THROWS_AS(neo_hookean(F, {1.0, 1.0}), std::domain_error);
}

TEST_CASE("neo-Hookean derivatives match finite differences") {
  auto rng = testutil::make_rng(32);
  const LameParams lame{0.9, 1.7};
  int checked = 0;
  while (checked < 100) {
    Mat2 F;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) F(r, c) = (r == c ? 1.0 : 0.0) + testutil::uniform(rng, -0.4, 0.4);
    if (F.determinant() < 0.2) continue;
    ++checked;

    Mat2 P;
    Mat4 H;
    neo_hookean(F, lame, &P, &H);

    const double eps = 1e-6;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        Mat2 Fp = F, Fm = F;
        Fp(r, c) += eps;
        Fm(r, c) -= eps;
        const double fd = (neo_hookean(Fp, lame) - neo_hookean(Fm, lame)) / (2 * eps);
        CHECK(std::abs(fd - P(r, c)) / std::max({std::abs(fd), std::abs(P(r, c)), 1e-8}) < 1e-5);

        Mat2 Pp, Pm;
        neo_hookean(Fp, lame, &Pp);
        neo_hookean(Fm, lame, &Pm);
        const Mat2 fdH = (Pp - Pm) / (2 * eps);
        const int col = 2 * r + c;
        for (int rr = 0; rr < 2; ++rr)
          for (int cc = 0; cc < 2; ++cc) {
            const double an = H(2 * rr + cc, col);
            CHECK(std::abs(fdH(rr, cc) - an) /
                      std::max({std::abs(fdH(rr, cc)), std::abs(an), 1e-6}) < 1e-4);
          }
      }
  }
}

TEST_CASE("neo-Hookean Hessian at identity is PSD") {
  Mat4 H;
  neo_hookean(Mat2::Identity(), {1.0, 1.0}, nullptr, &H);
  Eigen::SelfAdjointEigenSolver<Mat4> es(H);
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
}

TEST_CASE("elastic energy at rest is zero") {
  Grid2D g(3, 3, 0.2);
  ElasticEnergy el(g, {0, 1, 2, 3}, {5.0, 5.0, 5.0, 5.0}, LameParams::plane_strain(1.0, 0.3));
  const Vec u = Vec::Zero(g.dof_count());
  CHECK(el.value(u) == doctest::Approx(0.0));
  Vec grad = Vec::Zero(g.dof_count());
  el.add_gradient(u, grad);
  CHECK(grad.norm() == doctest::Approx(0.0));
}

TEST_CASE("one-cell closed form under uniform stretch") {
  const double h = 0.2, E0 = 100.0, nu = 0.3;
  Grid2D g(1, 1, h);
  const LameParams lame = LameParams::plane_strain(1.0, nu);
  ElasticEnergy el(g, {0}, {E0}, lame);
  Vec u(g.dof_count());
  for (int n = 0; n < g.node_count(); ++n) {
    const Vec2 X = g.node_pos(n);
    u[2 * n] = 0.1 * X.x();
    u[2 * n + 1] = 0.0;
  }
  // direct scalar evaluation of the density at F = diag(1.1, 1)
  const double I1 = 1.1 * 1.1 + 1.0;
  const double J = 1.1;
  const double psi = 0.5 * lame.mu * (I1 - 2.0) - lame.mu * std::log(J) +
                     0.5 * lame.lambda * std::log(J) * std::log(J);
  CHECK(el.value(u) == doctest::Approx(h * h * E0 * psi).epsilon(1e-12));
}

TEST_CASE("elastic energy derivatives match finite differences") {
  Grid2D g(3, 2, 0.15);
  std::vector<int> cells;
  std::vector<double> stiff;
  for (int c = 0; c < g.cell_count(); ++c) {
    cells.push_back(c);
    stiff.push_back(10.0 + 3.0 * c);
  }
  ElasticEnergy el(g, cells, stiff, LameParams::plane_strain(1.0, 0.3));
  auto rng = testutil::make_rng(33);
  Vec u(g.dof_count());
  for (int i = 0; i < u.size(); ++i) u[i] = testutil::uniform(rng, -0.01, 0.01);
  const auto res = testutil::fd_check_term(el, u, 25, 0.01 * g.h, rng);
  CHECK(res.grad_err < 1e-4);
  CHECK(res.hess_err < 1e-3);
}

TEST_CASE("elastic energy is linear in the base modulus") {
  Grid2D g(2, 2, 0.1);
  std::vector<int> cells = {0, 1, 2, 3};
  std::vector<double> s1 = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> s2 = {2.0, 4.0, 6.0, 8.0};
  const LameParams lame = LameParams::plane_strain(1.0, 0.25);
  ElasticEnergy a(g, cells, s1, lame), b(g, cells, s2, lame);
  auto rng = testutil::make_rng(34);
  Vec u(g.dof_count());
  for (int i = 0; i < u.size(); ++i) u[i] = testutil::uniform(rng, -0.005, 0.005);
  CHECK(b.value(u) == doctest::Approx(2.0 * a.value(u)).epsilon(1e-12));
  Vec ga = Vec::Zero(u.size()), gb = Vec::Zero(u.size());
  a.add_gradient(u, ga);
  b.add_gradient(u, gb);
  CHECK((gb - 2.0 * ga).cwiseAbs().maxCoeff() < 1e-14 * gb.cwiseAbs().maxCoeff() + 1e-18);
}

TEST_CASE("determinant step bound") {
  Mat2 F = Mat2::Identity();
  SUBCASE("zero direction") { CHECK(det_positive_step_bound(F, Mat2::Zero()) == 1.0); }
  SUBCASE("linear root at one half") {
    Mat2 dF = Mat2::Zero();
    dF(0, 0) = -2.0;  // det(I + a dF) = 1 - 2a, root at 0.5
    const double b = det_positive_step_bound(F, dF);
    CHECK(b == doctest::Approx(0.45).epsilon(1e-12));
  }
  SUBCASE("expanding direction gives a full step") {
    Mat2 dF = Mat2::Identity();
    CHECK(det_positive_step_bound(F, dF) == 1.0);
  }
  SUBCASE("bound keeps the determinant positive on random data") {
    auto rng = testutil::make_rng(35);
    for (int t = 0; t < 200; ++t) {
      Mat2 Fr, dF;
      for (int k = 0; k < 4; ++k) {
        Fr(k / 2, k % 2) = (k == 0 || k == 3 ? 1.0 : 0.0) + testutil::uniform(rng, -0.3, 0.3);
        dF(k / 2, k % 2) = testutil::uniform(rng, -2.0, 2.0);
      }
      if (Fr.determinant() <= 0.05) continue;
      const double a = det_positive_step_bound(Fr, dF);
      CHECK((Fr + a * dF).determinant() > 0.0);
    }
  }
}

TEST_CASE("strain limit scalar barrier") {
  double d1, d2;
  SUBCASE("inactive below the activation") {
    CHECK(strain_limit_psi(0.9, 1.1, 1.5, &d1, &d2) == 0.0);
    CHECK(d1 == 0.0);
    CHECK(d2 == 0.0);
  }
  SUBCASE("C2 transition at the activation") {
    CHECK(strain_limit_psi(1.1, 1.1, 1.5, &d1, &d2) == doctest::Approx(0.0));
    CHECK(d1 == doctest::Approx(0.0));
    CHECK(d2 == doctest::Approx(0.0));
    const double eps = 1e-6;
    const double above = strain_limit_psi(1.1 + eps, 1.1, 1.5);
    CHECK(above < 1e-15);  // cubic-order takeoff
  }
  SUBCASE("frozen value") {
    CHECK(strain_limit_psi(1.3, 1.1, 1.5) == doctest::Approx(0.17328679513998632735).epsilon(1e-14));
  }
  SUBCASE("asymptote") {
    CHECK_THROWS_AS(strain_limit_psi(1.5, 1.1, 1.5), std::domain_error);
    CHECK(strain_limit_psi(1.499, 1.1, 1.5) > 5.0);
  }
  SUBCASE("derivatives match FD") {
    auto rng = testutil::make_rng(36);
    for (int t = 0; t < 100; ++t) {
      const double s = testutil::uniform(rng, 1.12, 1.45);
      strain_limit_psi(s, 1.1, 1.5, &d1, &d2);
      const double eps = 1e-7;
      const double fd1 =
          (strain_limit_psi(s + eps, 1.1, 1.5) - strain_limit_psi(s - eps, 1.1, 1.5)) / (2 * eps);
      CHECK(std::abs(fd1 - d1) / std::max(std::abs(d1), 1e-10) < 1e-5);
      double dp, dm;
      strain_limit_psi(s + eps, 1.1, 1.5, &dp, nullptr);
      strain_limit_psi(s - eps, 1.1, 1.5, &dm, nullptr);
      const double fd2 = (dp - dm) / (2 * eps);
      CHECK(std::abs(fd2 - d2) / std::max(std::abs(d2), 1e-10) < 1e-5);
    }
  }
}

TEST_CASE("rotation-variant SVD reconstructs with proper rotations") {
  auto rng = testutil::make_rng(37);
  for (int t = 0; t < 200; ++t) {
    Mat2 F;
    for (int k = 0; k < 4; ++k) F(k / 2, k % 2) = testutil::uniform(rng, -1.5, 1.5);
    Mat2 U, V;
    Vec2 s;
    svd_rv_2x2(F, U, s, V);
    CHECK((U * s.asDiagonal() * V.transpose() - F).norm() < 1e-12 * std::max(1.0, F.norm()));
    CHECK(U.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(V.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s[0] >= std::abs(s[1]) - 1e-14);
  }
}

TEST_CASE("strain limit energy basics") {
  Grid2D g(2, 1, 0.1);
  StrainLimitParams slp;  // s_hat 1.2, s_bar 2.0, p_hat 0.8, p_bar 0.1
  StrainLimitEnergy sl(g, {0}, {0.75}, slp);

  SUBCASE("rest state is inactive") {
    const Vec u = Vec::Zero(g.dof_count());
    CHECK(sl.value(u) == 0.0);
    Vec grad = Vec::Zero(g.dof_count());
    sl.add_gradient(u, grad);
    CHECK(grad.norm() == 0.0);
  }

  SUBCASE("uniform stretch composes the scalar barrier") {
    StrainLimitParams tight{1.1, 1.5, 0.8, 0.1, 0.02};
    StrainLimitEnergy sl2(g, {0}, {0.75}, tight);
    Vec u(g.dof_count());
    u.setZero();
    for (int n = 0; n < g.node_count(); ++n) u[2 * n] = 0.3 * g.node_pos(n).x();  // F = diag(1.3, 1)
    // per quadrature point: 0.75 * psi(1.3) * V_q, summed over the cell
    const double expected = 0.75 * 0.17328679513998632735 * g.h * g.h;
    CHECK(sl2.value(u) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("strain limit energy is rotation invariant") {
  Grid2D g(1, 1, 0.1);
  StrainLimitParams slp{1.05, 1.6, 0.9, 0.2, 0.02};
  StrainLimitEnergy sl(g, {0}, {1.0}, slp);
  auto rng = testutil::make_rng(38);
  for (int t = 0; t < 20; ++t) {
    // affine displacement with F = R * S for random stretch S within bounds
    const double th = testutil::uniform(rng, -1.0, 1.0);
    Mat2 R;
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    Mat2 S;
    S << testutil::uniform(rng, 1.1, 1.4), 0.05, 0.05, testutil::uniform(rng, 0.95, 1.2);
    auto affine_u = [&](const Mat2& F) {
      Vec u(g.dof_count());
      for (int n = 0; n < g.node_count(); ++n) {
        const Vec2 X = g.node_pos(n);
        const Vec2 x = F * X;
        u[2 * n] = x.x() - X.x();
        u[2 * n + 1] = x.y() - X.y();
      }
      return u;
    };
    CHECK(sl.value(affine_u(R * S)) == doctest::Approx(sl.value(affine_u(S))).epsilon(1e-10));
  }
}

TEST_CASE("strain limit derivatives match finite differences") {
  Grid2D g(2, 2, 0.12);
  StrainLimitParams slp{1.05, 1.8, 0.9, 0.2, 0.02};
  StrainLimitEnergy sl(g, {0, 1, 2, 3}, {1.0, 0.5, 0.8, 0.3}, slp);
  auto rng = testutil::make_rng(39);
  // biased stretch state so both barriers are active somewhere
  Vec u(g.dof_count());
  for (int n = 0; n < g.node_count(); ++n) {
    const Vec2 X = g.node_pos(n);
    u[2 * n] = 0.25 * X.x() + testutil::uniform(rng, -0.004, 0.004);
    u[2 * n + 1] = -0.14 * X.y() + testutil::uniform(rng, -0.004, 0.004);
  }
  const auto res = testutil::fd_check_term(sl, u, 30, 0.005 * g.h, rng);
  CHECK(res.grad_err < 1e-4);
  CHECK(res.hess_err < 1e-3);
}

TEST_CASE("strain limit step bound keeps stretches inside the bounds") {
  Grid2D g(1, 1, 0.1);
  StrainLimitParams slp{1.1, 1.5, 0.8, 0.3, 0.02};
  StrainLimitEnergy sl(g, {0}, {1.0}, slp);
  auto rng = testutil::make_rng(40);
  for (int t = 0; t < 100; ++t) {
    Vec u(g.dof_count()), du(g.dof_count());
    for (int i = 0; i < u.size(); ++i) {
      u[i] = testutil::uniform(rng, -0.002, 0.002);
      du[i] = testutil::uniform(rng, -0.05, 0.05);
    }
    const double a = sl.step_bound(u, du);
    CHECK(a > 0.0);
    const Vec ut = u + a * du;
    for (const auto& q : cell_quadrature(g, 0)) {
      Mat2 U, V;
      Vec2 s;
      svd_rv_2x2(deformation_gradient(ut, q), U, s, V);
      CHECK(s[0] < slp.s_bar);
      CHECK(s[1] > slp.p_bar);
    }
  }
}
