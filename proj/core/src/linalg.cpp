#include "linalg.hpp"

namespace dualbill::detail {

Vector solve_min_norm(const Matrix& a, const Vector& b) {
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  return cod.solve(b);
}

double smallest_singular_value(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues().minCoeff();
}

int nullity(const Matrix& a, double threshold) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const auto& sv = svd.singularValues();
  int count = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) < threshold) ++count;
  }
  return count;
}

Matrix tangent_basis(const Vector& u) {
  const Eigen::Index n = u.size();
  // The Householder reflection sending e_k to u maps the remaining basis vectors onto u^perp.
  Eigen::Index k = 0;
  u.cwiseAbs().maxCoeff(&k);
  Vector w = u;
  w(k) -= (u(k) >= 0 ? 1.0 : -1.0);
  Matrix reflect = Matrix::Identity(n, n);
  const double wn = w.squaredNorm();
  if (wn > 0) reflect -= 2.0 * w * w.transpose() / wn;
  Matrix basis(n, n - 1);
  for (Eigen::Index j = 0, c = 0; j < n; ++j) {
    if (j == k) continue;
    basis.col(c++) = reflect.col(j);
  }
  return basis;
}

}  // namespace dualbill::detail
