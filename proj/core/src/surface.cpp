#include "dualbill/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dualbill/symplectic.hpp"
#include "linalg.hpp"

namespace dualbill {

namespace {

constexpr double kGradientStep = 1e-5;
// Second differences of values alone lose ~eps_mach / h^2; a wider step keeps that below 1e-8.
constexpr double kHessianFromValueStep = 1e-4;
constexpr double kCurvatureFloor = 1e-8;

void check_size(const Vector& p, int m, const char* what) {
  if (p.size() != 2 * m) {
    throw DimensionMismatch(std::string(what) + ": expected length " + std::to_string(2 * m) +
                            ", got " + std::to_string(p.size()));
  }
}

std::string format_vector(const Vector& v) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v(i);
  os << ")";
  return os.str();
}

}  // namespace

std::string to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::sphere: return "sphere";
    case SurfaceKind::ellipsoid: return "ellipsoid";
    case SurfaceKind::perturbed_sphere: return "perturbed_sphere";
    case SurfaceKind::custom: return "custom";
  }
  return "unknown";
}

double delta_bound(const std::vector<double>& a) {
  if (a.empty()) throw SurfaceError("delta_bound: empty coefficient list");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i])) throw SurfaceError("delta_bound: non-finite coefficient");
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double d = a[i] - a[j];
      if (d == 0.0) {
        throw SurfaceError("delta_bound: coefficients a_" + std::to_string(i + 1) + " and a_" +
                           std::to_string(j + 1) + " coincide");
      }
      best = std::min(best, 0.5 * d * d);
    }
  }
  return best;
}

void validate(const PerturbationParams& params) {
  const double delta = delta_bound(params.a);
  if (!(params.eps > 0.0) || !std::isfinite(params.eps)) {
    throw SurfaceError("perturbation eps must be positive and finite");
  }
  if (params.eps * params.eps >= delta) {
    std::ostringstream os;
    os << "perturbation eps^2 = " << params.eps * params.eps << " is not below delta = " << delta;
    throw SurfaceError(os.str());
  }
}

double default_perturbation_eps(const std::vector<double>& a) {
  return std::min(0.05, 0.5 * std::sqrt(delta_bound(a)));
}

double perturbation_f(const Vector& p, const PerturbationParams& params) {
  const int m = params.m();
  check_size(p, m, "perturbation_f");
  double quadratic = 0.0;
  double cubic = 0.0;
  for (int i = 0; i < m; ++i) {
    const double x = p(i);
    const double y = p(m + i);
    quadratic += params.a[i] * (x * x + y * y) / 2.0;
    cubic += (x * x * x - 3.0 * x * y * y) / 3.0;
  }
  return quadratic + params.eps * cubic;
}

Vector perturbation_grad_f(const Vector& p, const PerturbationParams& params) {
  const int m = params.m();
  check_size(p, m, "perturbation_grad_f");
  Vector g(2 * m);
  for (int i = 0; i < m; ++i) {
    const double x = p(i);
    const double y = p(m + i);
    g(i) = params.a[i] * x + params.eps * (x * x - y * y);
    g(m + i) = params.a[i] * y - 2.0 * params.eps * x * y;
  }
  return g;
}

Matrix perturbation_hess_f(const Vector& p, const PerturbationParams& params) {
  const int m = params.m();
  check_size(p, m, "perturbation_hess_f");
  Matrix hess = Matrix::Zero(2 * m, 2 * m);
  for (int i = 0; i < m; ++i) {
    const double x = p(i);
    const double y = p(m + i);
    hess(i, i) = params.a[i] + 2.0 * params.eps * x;
    hess(m + i, m + i) = params.a[i] - 2.0 * params.eps * x;
    hess(i, m + i) = hess(m + i, i) = -2.0 * params.eps * y;
  }
  return hess;
}

SupportSurface::SupportSurface(Dimension dim, SurfaceKind kind, SupportExtension ext,
                               bool analytic)
    : dim_(dim),
      kind_(kind),
      ext_(std::make_shared<const SupportExtension>(std::move(ext))),
      analytic_(analytic),
      offset_(Vector::Zero(dim.ambient())) {}

SupportSurface SupportSurface::sphere(Dimension dim, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw SurfaceError("sphere radius must be positive and finite");
  }
  const int n = dim.ambient();
  SupportExtension ext{
      [radius](const Vector&) { return radius; },
      [n](const Vector&) { return Vector(Vector::Zero(n)); },
      [n](const Vector&) { return Matrix(Matrix::Zero(n, n)); },
  };
  SupportSurface s(dim, SurfaceKind::sphere, std::move(ext), true);
  s.radius_ = radius;
  s.finish_construction();
  return s;
}

SupportSurface SupportSurface::ellipsoid(std::vector<double> semi_axes) {
  if (semi_axes.empty() || semi_axes.size() % 2 != 0) {
    throw SurfaceError("ellipsoid needs 2m semi-axes, got " + std::to_string(semi_axes.size()));
  }
  for (double b : semi_axes) {
    if (!(b > 0.0) || !std::isfinite(b)) throw SurfaceError("ellipsoid semi-axes must be positive");
  }
  const Dimension dim(static_cast<int>(semi_axes.size() / 2));
  Vector b2(semi_axes.size());
  for (std::size_t k = 0; k < semi_axes.size(); ++k) b2(k) = semi_axes[k] * semi_axes[k];

  // h(y) = sqrt(sum b_k^2 y_k^2), homogeneous of degree one.
  SupportExtension ext{
      [b2](const Vector& y) { return std::sqrt(b2.dot(y.cwiseProduct(y))); },
      [b2](const Vector& y) {
        const double h = std::sqrt(b2.dot(y.cwiseProduct(y)));
        return Vector(b2.cwiseProduct(y) / h);
      },
      [b2](const Vector& y) {
        const double h = std::sqrt(b2.dot(y.cwiseProduct(y)));
        const Vector g = b2.cwiseProduct(y) / h;
        return Matrix((Matrix(b2.asDiagonal()) - g * g.transpose()) / h);
      },
  };
  SupportSurface s(dim, SurfaceKind::ellipsoid, std::move(ext), true);
  s.semi_axes_ = std::move(semi_axes);
  s.finish_construction();
  return s;
}

SupportSurface SupportSurface::perturbed_sphere(PerturbationParams params) {
  validate(params);
  const Dimension dim(params.m());
  const double eps = params.eps;
  SupportExtension ext{
      [params, eps](const Vector& y) { return 1.0 + eps * perturbation_f(y, params); },
      [params, eps](const Vector& y) { return Vector(eps * perturbation_grad_f(y, params)); },
      [params, eps](const Vector& y) { return Matrix(eps * perturbation_hess_f(y, params)); },
  };
  SupportSurface s(dim, SurfaceKind::perturbed_sphere, std::move(ext), true);
  s.perturbation_ = std::move(params);
  s.finish_construction();
  return s;
}

SupportSurface SupportSurface::custom(Dimension dim, SupportExtension extension) {
  if (!extension.value) throw SurfaceError("custom surface needs a support function value");
  const bool analytic = static_cast<bool>(extension.gradient) && static_cast<bool>(extension.hessian);
  SupportSurface s(dim, SurfaceKind::custom, std::move(extension), analytic);
  s.finish_construction();
  return s;
}

SupportSurface SupportSurface::translated(const Vector& t) const {
  check_size(t, dim_.m(), "translated");
  SupportSurface copy = *this;
  copy.offset_ += t;
  return copy;
}

double SupportSurface::ext_value(const Vector& y) const { return ext_->value(y); }

Vector SupportSurface::ext_gradient(const Vector& y) const {
  if (ext_->gradient) return ext_->gradient(y);
  Vector g(y.size());
  Vector probe = y;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    probe(k) = y(k) + kGradientStep;
    const double plus = ext_->value(probe);
    probe(k) = y(k) - kGradientStep;
    const double minus = ext_->value(probe);
    probe(k) = y(k);
    g(k) = (plus - minus) / (2.0 * kGradientStep);
  }
  return g;
}

Matrix SupportSurface::ext_hessian(const Vector& y) const {
  if (ext_->hessian) return ext_->hessian(y);
  const Eigen::Index n = y.size();
  Matrix hess(n, n);
  Vector probe = y;
  if (ext_->gradient) {
    for (Eigen::Index k = 0; k < n; ++k) {
      probe(k) = y(k) + kGradientStep;
      const Vector plus = ext_->gradient(probe);
      probe(k) = y(k) - kGradientStep;
      const Vector minus = ext_->gradient(probe);
      probe(k) = y(k);
      hess.col(k) = (plus - minus) / (2.0 * kGradientStep);
    }
  } else {
    const double step = kHessianFromValueStep;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        auto at = [&](double di, double dj) {
          probe = y;
          probe(i) += di;
          probe(j) += dj;
          return ext_->value(probe);
        };
        const double v = (at(step, step) - at(step, -step) - at(-step, step) + at(-step, -step)) /
                         (4.0 * step * step);
        hess(i, j) = hess(j, i) = v;
      }
    }
  }
  return 0.5 * (hess + hess.transpose());
}

double SupportSurface::h(const Vector& u) const { return ext_value(u) + offset_.dot(u); }

Vector SupportSurface::grad_h(const Vector& u) const {
  const Vector g = ext_gradient(u) + offset_;
  return g - g.dot(u) * u;
}

Vector SupportSurface::point(const Vector& u) const { return h(u) * u + grad_h(u); }

Matrix SupportSurface::point_jacobian(const Vector& u) const {
  // q = grad H for the degree-one extension H(x) = |x| h(x / |x|); its Hessian at a unit u is
  // P (Hess phi + (phi - grad phi . u) I) P for any extension phi of h off the sphere.
  const Matrix proj = tangent_projector(u);
  const double phi = ext_value(u);
  const double radial = ext_gradient(u).dot(u);
  Matrix inner = ext_hessian(u);
  inner.diagonal().array() += phi - radial;
  Matrix dq = proj * inner * proj;
  return 0.5 * (dq + dq.transpose());
}

ConvexityReport SupportSurface::certify(int samples, std::uint64_t seed) const {
  const int n = dim_.ambient();
  std::vector<Vector> directions;
  directions.reserve(static_cast<std::size_t>(samples + 2 * n));
  for (int k = 0; k < n; ++k) {
    directions.push_back(Vector::Unit(n, k));
    directions.push_back(-Vector::Unit(n, k));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int i = 0; i < samples; ++i) {
    Vector u(n);
    for (int k = 0; k < n; ++k) u(k) = normal(rng);
    directions.push_back(u.normalized());
  }

  ConvexityReport report;
  report.min_curvature_radius = std::numeric_limits<double>::infinity();
  report.min_support = std::numeric_limits<double>::infinity();
  for (const Vector& u : directions) {
    const double support = h(u) - offset_.dot(u);
    const double normal_part = std::abs(grad_h(u).dot(u));
    report.max_gradient_normal = std::max(report.max_gradient_normal, normal_part);
    const Matrix basis = detail::tangent_basis(u);
    const Matrix restricted = basis.transpose() * point_jacobian(u) * basis;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(restricted, Eigen::EigenvaluesOnly);
    const double radius = eig.eigenvalues().minCoeff();
    if (support < report.min_support) report.min_support = support;
    if (radius < report.min_curvature_radius) {
      report.min_curvature_radius = radius;
      report.worst_direction = u;
    }
    if (!std::isfinite(support) || !std::isfinite(radius)) {
      report.passed = false;
      report.worst_direction = u;
      report.message = "non-finite support function at direction " + format_vector(u);
      return report;
    }
  }
  if (!(report.min_support > 0.0)) {
    report.passed = false;
    report.message = "origin is not interior: h <= 0 in some direction";
  } else if (!(report.min_curvature_radius > kCurvatureFloor)) {
    report.passed = false;
    std::ostringstream os;
    os << "not strictly convex: curvature radius " << report.min_curvature_radius
       << " at direction " << format_vector(report.worst_direction);
    report.message = os.str();
  }
  return report;
}

void SupportSurface::finish_construction() {
  const ConvexityReport report = certify();
  if (!report.passed) throw SurfaceError(to_string(kind_) + " surface rejected: " + report.message);

  const int n = dim_.ambient();
  std::mt19937_64 rng(0xd1a3);
  std::normal_distribution<double> normal;
  double width = 0.0;
  for (int k = 0; k < n; ++k) {
    const Vector e = Vector::Unit(n, k);
    width = std::max(width, h(e) + h(-e));
  }
  for (int i = 0; i < 1000; ++i) {
    Vector u(n);
    for (int k = 0; k < n; ++k) u(k) = normal(rng);
    u.normalize();
    width = std::max(width, h(u) + h(-u));
  }
  diameter_ = width;
}

void require_unit(const Vector& u, double tol) {
  const double norm = u.norm();
  if (!(std::abs(norm - 1.0) <= tol)) {
    std::ostringstream os;
    os << "expected a unit vector, |u| = " << norm;
    throw DomainError(os.str());
  }
}

Vector point_on_surface(const SupportSurface& s, const Vector& u) {
  check_size(u, s.dimension().m(), "point_on_surface");
  require_unit(u);
  return s.point(u);
}

Vector characteristic_direction(const Vector& u) {
  require_unit(u);
  return j_apply(u);
}

}  // namespace dualbill
