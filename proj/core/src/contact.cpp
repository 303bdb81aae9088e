#include "contopt/contact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "contopt/spd.hpp"

namespace contopt {

namespace {

inline std::uint64_t hash_key(long ix, long iy) {
  return (std::uint64_t(std::uint32_t(ix)) << 32) | std::uint32_t(iy);
}

// Uniform hash over edge AABBs; queries return a conservative candidate set.
class SpatialHash {
 public:
  SpatialHash(double cell_size) : cs_(cell_size) {}

  void insert(int id, const Vec2& lo, const Vec2& hi) {
    const long ix0 = cell_of(lo.x()), iy0 = cell_of(lo.y());
    const long ix1 = cell_of(hi.x()), iy1 = cell_of(hi.y());
    for (long iy = iy0; iy <= iy1; ++iy)
      for (long ix = ix0; ix <= ix1; ++ix) map_[hash_key(ix, iy)].push_back(id);
  }

  template <typename F>
  void query(const Vec2& lo, const Vec2& hi, F&& visit) const {
    const long ix0 = cell_of(lo.x()), iy0 = cell_of(lo.y());
    const long ix1 = cell_of(hi.x()), iy1 = cell_of(hi.y());
    for (long iy = iy0; iy <= iy1; ++iy)
      for (long ix = ix0; ix <= ix1; ++ix) {
        auto it = map_.find(hash_key(ix, iy));
        if (it == map_.end()) continue;
        for (int id : it->second) visit(id);
      }
  }

 private:
  long cell_of(double v) const { return static_cast<long>(std::floor(v / cs_)); }
  double cs_;
  std::unordered_map<std::uint64_t, std::vector<int>> map_;
};

struct PairDerivs {
  int n = 0;                                // involved vertices (2 for PP, 3 for PL)
  std::array<int, 3> verts{};               // mesh vertex indices
  Eigen::Matrix<double, 6, 1> grad;         // top 2n entries used
  Eigen::Matrix<double, 6, 6> hess;         // top-left 2n x 2n used
};

// Distance value and derivatives on the compact stencil of the pair.
PairDerivs pair_distance_derivs(const Vec2& p, const Vec2& y, const Vec2& z, int vp, int vy, int vz,
                                const PointEdgeDist& pe, bool want_hess) {
  PairDerivs out;
  out.grad.setZero();
  out.hess.setZero();
  if (pe.kind == PairKind::PP) {
    const bool at_y = pe.beta <= 0.0;
    const Vec2 w = at_y ? y : z;
    const Vec2 t = (p - w) / pe.d;
    out.n = 2;
    out.verts = {vp, at_y ? vy : vz, -1};
    out.grad.segment<2>(0) = t;
    out.grad.segment<2>(2) = -t;
    if (want_hess) {
      const Mat2 M = (Mat2::Identity() - t * t.transpose()) / pe.d;
      out.hess.block<2, 2>(0, 0) = M;
      out.hess.block<2, 2>(2, 2) = M;
      out.hess.block<2, 2>(0, 2) = -M;
      out.hess.block<2, 2>(2, 0) = -M;
    }
    return out;
  }

  // PL: d = s * cross(e, r) / |e| with e = z - y, r = p - y.
  const Vec2 e = z - y;
  const Vec2 r = p - y;
  const double c = cross2(e, r);
  const double L = e.norm();
  const double s = c >= 0.0 ? 1.0 : -1.0;
  const double d = s * c / L;
  const Vec2 ehat = e / L;

  Eigen::Matrix<double, 6, 1> gc, gL;
  gc.segment<2>(0) = perp(e);
  gc.segment<2>(2) = perp(p - z);
  gc.segment<2>(4) = -perp(r);
  gL.setZero();
  gL.segment<2>(2) = -ehat;
  gL.segment<2>(4) = ehat;

  out.n = 3;
  out.verts = {vp, vy, vz};
  out.grad = (s / L) * gc - (d / L) * gL;

  if (want_hess) {
    Eigen::Matrix<double, 6, 6> Hc = Eigen::Matrix<double, 6, 6>::Zero();
    Mat2 J;
    J << 0.0, -1.0, 1.0, 0.0;
    Hc.block<2, 2>(0, 2) = -J;
    Hc.block<2, 2>(2, 0) = J;
    Hc.block<2, 2>(0, 4) = J;
    Hc.block<2, 2>(4, 0) = -J;
    Hc.block<2, 2>(2, 4) = -J;
    Hc.block<2, 2>(4, 2) = J;

    const Mat2 M0 = (Mat2::Identity() - ehat * ehat.transpose()) / L;
    Eigen::Matrix<double, 6, 6> HL = Eigen::Matrix<double, 6, 6>::Zero();
    HL.block<2, 2>(2, 2) = M0;
    HL.block<2, 2>(4, 4) = M0;
    HL.block<2, 2>(2, 4) = -M0;
    HL.block<2, 2>(4, 2) = -M0;

    out.hess = (s / L) * Hc - (s / (L * L)) * (gc * gL.transpose() + gL * gc.transpose()) -
               (d / L) * HL + (2.0 * d / (L * L)) * (gL * gL.transpose());
  }
  return out;
}

double accd_pair(Vec2 p, Vec2 y, Vec2 z, const Vec2& dp, const Vec2& dy, const Vec2& dz,
                 double slack) {
  const Vec2 mean = 0.5 * (dp + 0.5 * (dy + dz));
  const double lp = (dp - mean).norm() + std::max((dy - mean).norm(), (dz - mean).norm());
  if (lp == 0.0) return 1.0;
  const double d0 = point_edge_distance(p, y, z).d;
  const double gap = slack * d0;
  double t = 0.0;
  double tl = (1.0 - slack) * d0 / lp;
  for (int it = 0; it < 64; ++it) {
    p += tl * dp;
    y += tl * dy;
    z += tl * dz;
    t += tl;
    if (t >= 1.0) return 1.0;
    const double d = point_edge_distance(p, y, z).d;
    tl = 0.9 * (d - gap) / lp;
    if (tl * lp <= 1e-14 * std::max(d0, 1e-30)) break;
  }
  return t;
}

}  // namespace

PointEdgeDist point_edge_distance(const Vec2& p, const Vec2& y, const Vec2& z) {
  const Vec2 e = z - y;
  const double L2 = e.squaredNorm();
  if (L2 == 0.0) throw std::invalid_argument("point_edge_distance: degenerate edge");
  const double beta = std::clamp((p - y).dot(e) / L2, 0.0, 1.0);
  if (beta <= 0.0) return {PairKind::PP, (p - y).norm(), 0.0};
  if (beta >= 1.0) return {PairKind::PP, (p - z).norm(), 1.0};
  return {PairKind::PL, std::abs(cross2(e, p - y)) / std::sqrt(L2), beta};
}

void point_edge_distance_grad(const Vec2& p, const Vec2& y, const Vec2& z, const PointEdgeDist& pe,
                              Eigen::Matrix<double, 6, 1>& grad, Eigen::Matrix<double, 6, 6>* hess) {
  const PairDerivs pd = pair_distance_derivs(p, y, z, 0, 1, 2, pe, hess != nullptr);
  grad.setZero();
  if (hess) hess->setZero();
  for (int a = 0; a < pd.n; ++a) {
    grad.segment<2>(2 * pd.verts[a]) = pd.grad.segment<2>(2 * a);
    if (hess)
      for (int b = 0; b < pd.n; ++b)
        hess->block<2, 2>(2 * pd.verts[a], 2 * pd.verts[b]) = pd.hess.block<2, 2>(2 * a, 2 * b);
  }
}

double barrier(double d, const BarrierParams& bp, double* db, double* d2b) {
  if (!(d > 0.0)) throw std::domain_error("barrier: nonpositive distance");
  if (d >= bp.d_hat) {
    if (db) *db = 0.0;
    if (d2b) *d2b = 0.0;
    return 0.0;
  }
  const double x = d / bp.d_hat;
  const double lx = std::log(x);
  const double xm = x - 1.0;
  if (db) *db = -bp.kappa * (2.0 * xm * lx + xm * xm / x) / bp.d_hat;
  if (d2b)
    *d2b = -bp.kappa * (2.0 * lx + 2.0 * xm / x + (x * x - 1.0) / (x * x)) / (bp.d_hat * bp.d_hat);
  return -bp.kappa * xm * xm * lx;
}

std::vector<ContactPair> build_contact_set(const BoundaryMesh& mesh, const std::vector<Vec2>& x,
                                           const BarrierParams& bp, double grid_h) {
  std::vector<ContactPair> pairs;
  if (mesh.edge_count() == 0) return pairs;
  const double cs = std::max(grid_h, bp.d_hat);
  SpatialHash hash(cs);
  const double inflate = bp.d_hat * (1.0 + 1e-12);
  const Vec2 pad(inflate, inflate);
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const Vec2& a = x[mesh.edges[e][0]];
    const Vec2& b = x[mesh.edges[e][1]];
    hash.insert(e, a.cwiseMin(b) - pad, a.cwiseMax(b) + pad);
  }
  std::vector<int> stamp(mesh.edge_count(), -1);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const Vec2& p = x[v];
    hash.query(p, p, [&](int e) {
      if (stamp[e] == v) return;
      stamp[e] = v;
      const int ny = mesh.edges[e][0], nz = mesh.edges[e][1];
      if (incident(mesh, mesh.vertex_nodes[v], mesh.vertex_nodes[ny], mesh.vertex_nodes[nz])) return;
      const PointEdgeDist pe = point_edge_distance(p, x[ny], x[nz]);
      if (pe.d < bp.d_hat) pairs.push_back({v, e, pe.kind, pe.d, pe.beta});
    });
  }
  // Hash iteration order is not deterministic across runs of the map; sort
  // for reproducible pair ordering.
  std::sort(pairs.begin(), pairs.end(), [](const ContactPair& a, const ContactPair& b) {
    return a.p != b.p ? a.p < b.p : a.edge < b.edge;
  });
  return pairs;
}

double min_pair_distance(const BoundaryMesh& mesh, const std::vector<Vec2>& x) {
  double dmin = std::numeric_limits<double>::infinity();
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    for (int e = 0; e < mesh.edge_count(); ++e) {
      const int ny = mesh.edges[e][0], nz = mesh.edges[e][1];
      if (incident(mesh, mesh.vertex_nodes[v], mesh.vertex_nodes[ny], mesh.vertex_nodes[nz]))
        continue;
      dmin = std::min(dmin, point_edge_distance(x[v], x[ny], x[nz]).d);
    }
  }
  return dmin;
}

double ccd_step_bound(const BoundaryMesh& mesh, const std::vector<Vec2>& x,
                      const std::vector<Vec2>& dx, double grid_h, double slack) {
  if (mesh.edge_count() == 0) return 1.0;
  const double cs = std::max(grid_h, 1e-12);
  SpatialHash hash(cs);
  const Vec2 pad(1e-9 * grid_h, 1e-9 * grid_h);
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const int ny = mesh.edges[e][0], nz = mesh.edges[e][1];
    const Vec2 lo = x[ny].cwiseMin(x[nz]).cwiseMin(x[ny] + dx[ny]).cwiseMin(x[nz] + dx[nz]);
    const Vec2 hi = x[ny].cwiseMax(x[nz]).cwiseMax(x[ny] + dx[ny]).cwiseMax(x[nz] + dx[nz]);
    hash.insert(e, lo - pad, hi + pad);
  }
  double alpha = 1.0;
  std::vector<int> stamp(mesh.edge_count(), -1);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const Vec2 lo = x[v].cwiseMin(x[v] + dx[v]);
    const Vec2 hi = x[v].cwiseMax(x[v] + dx[v]);
    hash.query(lo, hi, [&](int e) {
      if (stamp[e] == v) return;
      stamp[e] = v;
      const int ny = mesh.edges[e][0], nz = mesh.edges[e][1];
      if (incident(mesh, mesh.vertex_nodes[v], mesh.vertex_nodes[ny], mesh.vertex_nodes[nz])) return;
      alpha = std::min(alpha, accd_pair(x[v], x[ny], x[nz], dx[v], dx[ny], dx[nz], slack));
    });
  }
  return alpha;
}

ContactEnergy::ContactEnergy(const Grid2D& g, const BoundaryMesh& mesh, BarrierParams bp)
    : grid_(g), mesh_(mesh), bp_(bp) {
  if (!(bp_.d_hat > 0.0) || !(bp_.kappa > 0.0))
    throw std::invalid_argument("ContactEnergy: d_hat and kappa must be positive");
}

std::vector<ContactPair> ContactEnergy::active_pairs(const Vec& u) const {
  return build_contact_set(mesh_, mesh_.world_positions(u), bp_, grid_.h);
}

double ContactEnergy::min_distance(const Vec& u) const {
  return min_pair_distance(mesh_, mesh_.world_positions(u));
}

double ContactEnergy::value(const Vec& u) const {
  const auto x = mesh_.world_positions(u);
  const double w = 0.5 * grid_.h * bp_.d_hat;
  double e = 0.0;
  for (const auto& pr : build_contact_set(mesh_, x, bp_, grid_.h)) e += w * barrier(pr.d, bp_);
  return e;
}

void ContactEnergy::add_gradient(const Vec& u, Vec& grad) const {
  const auto x = mesh_.world_positions(u);
  const double w = 0.5 * grid_.h * bp_.d_hat;
  for (const auto& pr : build_contact_set(mesh_, x, bp_, grid_.h)) {
    const int vy = mesh_.edges[pr.edge][0], vz = mesh_.edges[pr.edge][1];
    const PointEdgeDist pe{pr.kind, pr.d, pr.beta};
    const PairDerivs pd = pair_distance_derivs(x[pr.p], x[vy], x[vz], pr.p, vy, vz, pe, false);
    double db;
    barrier(pr.d, bp_, &db);
    for (int a = 0; a < pd.n; ++a)
      grad.segment<2>(2 * mesh_.vertex_nodes[pd.verts[a]]) += w * db * pd.grad.segment<2>(2 * a);
  }
}

void ContactEnergy::add_hessian(const Vec& u, std::vector<Triplet>& out, bool project) const {
  const auto x = mesh_.world_positions(u);
  const double w = 0.5 * grid_.h * bp_.d_hat;
  for (const auto& pr : build_contact_set(mesh_, x, bp_, grid_.h)) {
    const int vy = mesh_.edges[pr.edge][0], vz = mesh_.edges[pr.edge][1];
    const PointEdgeDist pe{pr.kind, pr.d, pr.beta};
    const PairDerivs pd = pair_distance_derivs(x[pr.p], x[vy], x[vz], pr.p, vy, vz, pe, true);
    double db, d2b;
    barrier(pr.d, bp_, &db, &d2b);
    const int m = 2 * pd.n;
    Eigen::MatrixXd H = w * (d2b * pd.grad.head(m) * pd.grad.head(m).transpose() +
                             db * pd.hess.topLeftCorner(m, m));
    if (project) project_spd_inplace(H);
    for (int a = 0; a < pd.n; ++a)
      for (int b = 0; b < pd.n; ++b)
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c)
            out.emplace_back(2 * mesh_.vertex_nodes[pd.verts[a]] + r,
                             2 * mesh_.vertex_nodes[pd.verts[b]] + c, H(2 * a + r, 2 * b + c));
  }
}

double ContactEnergy::step_bound(const Vec& u, const Vec& du) const {
  const auto x = mesh_.world_positions(u);
  std::vector<Vec2> dx(mesh_.vertex_count());
  for (int v = 0; v < mesh_.vertex_count(); ++v) dx[v] = du.segment<2>(2 * mesh_.vertex_nodes[v]);
  return ccd_step_bound(mesh_, x, dx, grid_.h);
}

}  // namespace contopt
