#ifndef CONTOPT_TYPES_HPP
#define CONTOPT_TYPES_HPP

#include <Eigen/Core>
#include <Eigen/Sparse>

namespace contopt {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// 90-degree counterclockwise rotation, perp(a) = (-a.y, a.x).
inline Vec2 perp(const Vec2& a) { return Vec2(-a.y(), a.x()); }

// 2D scalar cross product a x b.
inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace contopt

#endif
