#ifndef CONTOPT_SPD_HPP
#define CONTOPT_SPD_HPP

#include <Eigen/Dense>

namespace contopt {

// Clamps negative eigenvalues of a symmetric block to a small positive
// floor (1e-12 x the dominant eigenvalue scale). Used on per-element and
// per-contact-pair Hessian blocks before assembly.
template <typename Derived>
void project_spd_inplace(Eigen::MatrixBase<Derived>& H) {
  using Mat = Eigen::Matrix<double, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
  Eigen::SelfAdjointEigenSolver<Mat> es(H);
  const auto& evals = es.eigenvalues();
  const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
  const double floor = 1e-12 * scale;
  if (evals.minCoeff() >= floor) return;
  Mat D = Mat::Zero(H.rows(), H.cols());
  for (int i = 0; i < evals.size(); ++i) D(i, i) = std::max(evals[i], floor);
  H = es.eigenvectors() * D * es.eigenvectors().transpose();
}

}  // namespace contopt

#endif
