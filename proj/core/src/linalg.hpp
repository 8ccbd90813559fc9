#pragma once

#include "dualbill/types.hpp"

namespace dualbill::detail {

// Minimum-norm least-squares solution of A x = b (tolerates rank deficiency).
Vector solve_min_norm(const Matrix& a, const Vector& b);

double smallest_singular_value(const Matrix& a);

// Number of singular values below threshold.
int nullity(const Matrix& a, double threshold);

// Orthonormal basis (columns) of the complement of a unit vector u.
Matrix tangent_basis(const Vector& u);

}  // namespace dualbill::detail
