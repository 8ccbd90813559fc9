#include "dualbill/symplectic.hpp"

#include <cmath>
#include <string>

namespace dualbill {

int half_dimension(const Vector& u) {
  if (u.size() == 0 || u.size() % 2 != 0) {
    throw DimensionMismatch("ambient vector must have even positive length, got " +
                            std::to_string(u.size()));
  }
  return static_cast<int>(u.size() / 2);
}

double omega(const Vector& u, const Vector& v) {
  const int m = half_dimension(u);
  if (v.size() != u.size()) {
    throw DimensionMismatch("omega: dimensions " + std::to_string(u.size()) + " and " +
                            std::to_string(v.size()));
  }
  return u.head(m).dot(v.tail(m)) - u.tail(m).dot(v.head(m));
}

Vector j_apply(const Vector& u) {
  const int m = half_dimension(u);
  Vector out(2 * m);
  out.head(m) = -u.tail(m);
  out.tail(m) = u.head(m);
  return out;
}

Vector cube_root_rotate(const Vector& u, int k) {
  k = ((k % 3) + 3) % 3;
  if (k == 0) return u;
  // lambda = -1/2 + (sqrt 3 / 2) i, lambda^2 = -1/2 - (sqrt 3 / 2) i
  const double s = (k == 1 ? 1.0 : -1.0) * std::sqrt(3.0) / 2.0;
  return -0.5 * u + s * j_apply(u);
}

Matrix omega_matrix(Dimension dim) {
  const int m = dim.m();
  Matrix w = Matrix::Zero(2 * m, 2 * m);
  w.topRightCorner(m, m).setIdentity();
  w.bottomLeftCorner(m, m) = -Matrix::Identity(m, m);
  return w;
}

Matrix j_matrix(Dimension dim) { return omega_matrix(dim).transpose(); }

Matrix tangent_projector(const Vector& u) {
  return Matrix::Identity(u.size(), u.size()) - u * u.transpose();
}

}  // namespace dualbill
