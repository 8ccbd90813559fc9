#pragma once

#include "dualbill/types.hpp"

namespace dualbill {

// Half-dimension of a vector in block layout; throws on odd or empty length.
int half_dimension(const Vector& u);

// Standard symplectic form omega = sum dx_i ^ dy_i.
double omega(const Vector& u, const Vector& v);

// Complex structure with omega(u, v) = J u . v; in block layout J(x, y) = (-y, x).
Vector j_apply(const Vector& u);

// Multiplication of u (as a point of C^m) by lambda^k, lambda = exp(2 pi i / 3).
Vector cube_root_rotate(const Vector& u, int k);

// Matrix of omega (omega(u, v) = u^T W v) and of J, both 2m x 2m.
Matrix omega_matrix(Dimension dim);
Matrix j_matrix(Dimension dim);

// Tangent projector I - u u^T at a unit vector u.
Matrix tangent_projector(const Vector& u);

}  // namespace dualbill
