#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dualbill/types.hpp"

namespace dualbill {

enum class SurfaceKind { sphere, ellipsoid, perturbed_sphere, custom };

std::string to_string(SurfaceKind kind);

// Parameters of the Z_3-invariant perturbation
//   f = sum a_i (x_i^2 + y_i^2) / 2 + eps * sum (x_i^3 - 3 x_i y_i^2) / 3
// and of the support function h = 1 + eps * f built from it.
struct PerturbationParams {
  std::vector<double> a;
  double eps = 0.0;

  int m() const { return static_cast<int>(a.size()); }
};

// min over eta and over index sets I with |I| >= 2 of sum_{i in I} (eta - a_i)^2.
// Equals min_{i<j} (a_i - a_j)^2 / 2; +infinity when m = 1 (no such I).
double delta_bound(const std::vector<double>& a);

// Throws SurfaceError unless the a_i are distinct and eps^2 < delta_bound(a).
void validate(const PerturbationParams& params);

// min(0.05, 0.5 sqrt(delta)), the eps used when a perturbed sphere omits it.
double default_perturbation_eps(const std::vector<double>& a);

// f(p) = sum a_i (x_i^2 + y_i^2) / 2 + eps sum (x_i^3 - 3 x_i y_i^2) / 3, invariant under
// p -> lambda p. The perturbed sphere has h = 1 + eps f.
double perturbation_f(const Vector& p, const PerturbationParams& params);
Vector perturbation_grad_f(const Vector& p, const PerturbationParams& params);
Matrix perturbation_hess_f(const Vector& p, const PerturbationParams& params);

// A smooth function on R^{2m} whose restriction to the unit sphere is a support function.
// Any extension works; gradient/hessian fall back to central differences when absent.
struct SupportExtension {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Matrix(const Vector&)> hessian;
};

struct ConvexityReport {
  bool passed = true;
  double min_curvature_radius = 0.0;  // smallest eigenvalue of dq on the tangent space
  double min_support = 0.0;           // smallest sampled h(u)
  double max_gradient_normal = 0.0;   // largest |grad_h(u) . u|
  Vector worst_direction;
  std::string message;
};

// Strictly convex closed hypersurface M described by its support function h on S^{2m-1}.
// Immutable after construction; parametrized throughout by the outward unit normal u.
class SupportSurface {
 public:
  static SupportSurface sphere(Dimension dim, double radius = 1.0);
  static SupportSurface ellipsoid(std::vector<double> semi_axes);
  static SupportSurface perturbed_sphere(PerturbationParams params);
  static SupportSurface custom(Dimension dim, SupportExtension extension);

  Dimension dimension() const { return dim_; }
  SurfaceKind kind() const { return kind_; }
  bool analytic_derivatives() const { return analytic_; }

  double radius() const { return radius_; }
  const std::vector<double>& semi_axes() const { return semi_axes_; }
  const PerturbationParams& perturbation() const { return perturbation_; }

  // Interior reference point: the origin shifted by any applied translation.
  const Vector& center() const { return offset_; }

  // Same surface translated by t (h(u) -> h(u) + t . u, q(u) -> q(u) + t).
  SupportSurface translated(const Vector& t) const;

  double h(const Vector& u) const;
  // q(u) without the unit-length check of point_on_surface.
  Vector point(const Vector& u) const;
  // Spherical gradient of h at u (tangent to the sphere).
  Vector grad_h(const Vector& u) const;
  // Differential of u -> q(u) as a symmetric 2m x 2m matrix annihilating u
  // (h + Hess h on the tangent space).
  Matrix point_jacobian(const Vector& u) const;

  // Width-based diameter estimate max_u h(u) + h(-u) over the certificate sample.
  double diameter() const { return diameter_; }

  // Sample-based certificate; also run at construction for the built-in kinds.
  ConvexityReport certify(int samples = 1000, std::uint64_t seed = 0x5eed) const;

 private:
  SupportSurface(Dimension dim, SurfaceKind kind, SupportExtension ext, bool analytic);

  double ext_value(const Vector& y) const;
  Vector ext_gradient(const Vector& y) const;
  Matrix ext_hessian(const Vector& y) const;
  void finish_construction();

  Dimension dim_;
  SurfaceKind kind_;
  std::shared_ptr<const SupportExtension> ext_;
  bool analytic_;
  Vector offset_;
  double radius_ = 0.0;
  std::vector<double> semi_axes_;
  PerturbationParams perturbation_;
  double diameter_ = 0.0;
};

// q(u) = h(u) u + grad h(u), the point of M with outward normal u.
Vector point_on_surface(const SupportSurface& s, const Vector& u);

// J u, spanning the characteristic line of M at q(u).
Vector characteristic_direction(const Vector& u);

// Throws DomainError if |u| differs from 1 by more than tol.
void require_unit(const Vector& u, double tol = 1e-12);

}  // namespace dualbill
