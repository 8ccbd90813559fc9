#include "dualbill/dual_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "dualbill/symplectic.hpp"
#include "linalg.hpp"

namespace dualbill {

namespace {

constexpr int kAscentIterations = 200;

double sign_of(Direction d) { return d == Direction::forward ? 1.0 : -1.0; }

double excess_from(const SupportSurface& s, const Vector& z, Vector u) {
  // Projected gradient ascent of g(u) = z . u - h(u); its spherical gradient is P (z - q(u)).
  auto value = [&](const Vector& v) { return z.dot(v) - s.h(v); };
  double g = value(u);
  double step = 1.0;
  for (int it = 0; it < kAscentIterations; ++it) {
    Vector grad = z - s.point(u);
    grad -= grad.dot(u) * u;
    const double gnorm = grad.norm();
    if (gnorm < 1e-13 * std::max(1.0, z.norm())) break;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving) {
      const Vector trial = (u + step * grad).normalized();
      const double gt = value(trial);
      if (gt >= g + 1e-4 * step * gnorm * gnorm) {
        u = trial;
        g = gt;
        improved = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return g;
}

std::vector<Vector> ascent_starts(const SupportSurface& s, const Vector& z, int restarts,
                                  std::uint64_t seed) {
  const int n = s.dimension().ambient();
  std::vector<Vector> starts;
  const Vector d = z - s.center();
  starts.push_back(d.norm() > 0 ? Vector(d.normalized()) : Vector(Vector::Unit(n, 0)));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int r = 0; r < restarts; ++r) {
    Vector u(n);
    for (int k = 0; k < n; ++k) u(k) = normal(rng);
    starts.push_back(u.normalized());
  }
  return starts;
}

struct NewtonResult {
  Vector u;
  double s = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

Vector map_residual(const SupportSurface& surf, const Vector& z, const Vector& u, double s) {
  return surf.point(u) - z - s * j_apply(u);
}

NewtonResult newton(const SupportSurface& surf, const Vector& z, Vector u, double s,
                    const MapOptions& options, double target) {
  const int n = surf.dimension().ambient();
  u.normalize();
  Vector res = map_residual(surf, z, u, s);
  double r = res.norm();
  NewtonResult out;
  int extra = 0;
  int it = 0;
  int converged_at = -1;
  for (; it < options.max_iterations; ++it) {
    if (r <= target) {
      if (converged_at < 0) converged_at = it;
      // A couple of extra steps push the residual to roundoff; finite-difference
      // Jacobians of the map depend on it.
      if (++extra > 2) break;
    }
    Matrix a = Matrix::Zero(n + 1, n + 1);
    const Vector ju = j_apply(u);
    a.topLeftCorner(n, n) = surf.point_jacobian(u) - s * j_matrix(surf.dimension());
    a.topRightCorner(n, 1) = -ju;
    a.bottomLeftCorner(1, n) = u.transpose();
    Vector rhs = Vector::Zero(n + 1);
    rhs.head(n) = -res;
    const Vector delta = detail::solve_min_norm(a, rhs);

    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= options.max_halvings; ++halving, t *= 0.5) {
      const Vector u_trial = (u + t * delta.head(n)).normalized();
      const double s_trial = s + t * delta(n);
      const Vector res_trial = map_residual(surf, z, u_trial, s_trial);
      const double r_trial = res_trial.norm();
      if (r_trial < r) {
        u = u_trial;
        s = s_trial;
        res = res_trial;
        r = r_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  out.u = u;
  out.s = s;
  if (converged_at < 0 && r <= target) converged_at = it;
  out.residual = r;
  out.iterations = converged_at >= 0 ? converged_at : it;
  return out;
}

MapResult to_result(const SupportSurface& surf, const Vector& z, const NewtonResult& nr) {
  MapResult result;
  result.tangency_normal = nr.u;
  result.tangency_point = surf.point(nr.u);
  result.image = 2.0 * result.tangency_point - z;
  result.multiplier = nr.s;
  result.residual = nr.residual;
  result.iterations = nr.iterations;
  return result;
}

double target_residual(const SupportSurface& surf, const Vector& z, const MapOptions& options) {
  return options.tolerance * std::max(1.0, (z - surf.center()).norm());
}

void check_point(const SupportSurface& surf, const Vector& z) {
  if (z.size() != surf.dimension().ambient()) {
    throw DimensionMismatch("point has length " + std::to_string(z.size()) + ", surface lives in R^" +
                            std::to_string(surf.dimension().ambient()));
  }
  if (!z.allFinite()) throw DomainError("point has non-finite coordinates");
}

}  // namespace

std::string to_string(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

double support_excess(const SupportSurface& s, const Vector& z) {
  check_point(s, z);
  double best = -std::numeric_limits<double>::infinity();
  for (const Vector& u : ascent_starts(s, z, 8, 0xe7e1)) best = std::max(best, excess_from(s, z, u));
  return best;
}

bool is_exterior(const SupportSurface& s, const Vector& z, double margin) {
  check_point(s, z);
  for (const Vector& u : ascent_starts(s, z, 8, 0xe7e1)) {
    if (excess_from(s, z, u) > margin) return true;
  }
  return false;
}

MapResult dual_map(const SupportSurface& surf, const Vector& z, Direction direction,
                   const MapOptions& options) {
  check_point(surf, z);
  if (!is_exterior(surf, z)) throw DomainError("point is not exterior to the surface");

  const int n = surf.dimension().ambient();
  const double sign = sign_of(direction);
  const double target = target_residual(surf, z, options);

  // Coarse sweep: +-basis directions and 16 directions in the complex line through z.
  std::vector<Vector> sweep;
  for (int k = 0; k < n; ++k) {
    sweep.push_back(Vector::Unit(n, k));
    sweep.push_back(-Vector::Unit(n, k));
  }
  const Vector zhat = (z - surf.center()).normalized();
  const Vector jzhat = j_apply(zhat);
  for (int k = 0; k < 16; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / 16.0;
    sweep.push_back((std::cos(theta) * zhat + std::sin(theta) * jzhat).normalized());
  }

  struct Candidate {
    Vector u;
    double s;
    double score;
    bool sign_ok;
  };
  std::vector<Candidate> candidates;
  for (const Vector& u : sweep) {
    const Vector d = surf.point(u) - z;
    const double s = d.dot(j_apply(u));
    const double score = (d - s * j_apply(u)).norm() / std::max(d.norm(), 1e-300);
    candidates.push_back({u, s, score, s * sign > 0});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.sign_ok != b.sign_ok) return a.sign_ok;
    return a.score < b.score;
  });
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  for (int r = 0; r < options.random_restarts; ++r) {
    Vector u(n);
    for (int k = 0; k < n; ++k) u(k) = normal(rng);
    u.normalize();
    const double s = (surf.point(u) - z).dot(j_apply(u));
    candidates.push_back({u, s, 0.0, s * sign > 0});
  }

  double best = std::numeric_limits<double>::infinity();
  for (const Candidate& c : candidates) {
    const NewtonResult nr = newton(surf, z, c.u, c.s, options, target);
    if (nr.residual <= target && nr.s * sign > 0) return to_result(surf, z, nr);
    if (nr.s * sign > 0) best = std::min(best, nr.residual);
  }
  std::ostringstream os;
  os << "dual map (" << to_string(direction) << ") did not converge; best residual " << best;
  throw ConvergenceError(os.str(), best);
}

MapResult dual_map_from(const SupportSurface& surf, const Vector& z, Direction direction,
                        const Vector& normal_guess, double multiplier_guess,
                        const MapOptions& options) {
  check_point(surf, z);
  const double target = target_residual(surf, z, options);
  const NewtonResult nr = newton(surf, z, normal_guess, multiplier_guess, options, target);
  if (nr.residual <= target && nr.s * sign_of(direction) > 0) return to_result(surf, z, nr);
  return dual_map(surf, z, direction, options);
}

double inverse_consistency(const SupportSurface& s, const Vector& z, const MapOptions& options) {
  const MapResult fwd = dual_map(s, z, Direction::forward, options);
  const MapResult back = dual_map(s, fwd.image, Direction::backward, options);
  return (back.image - z).norm();
}

Matrix map_jacobian(const SupportSurface& s, const Vector& z, double step,
                    const MapOptions& options) {
  const MapResult base = dual_map(s, z, Direction::forward, options);
  const int n = s.dimension().ambient();
  Matrix jac(n, n);
  for (int k = 0; k < n; ++k) {
    Vector zp = z;
    Vector zm = z;
    zp(k) += step;
    zm(k) -= step;
    const MapResult plus =
        dual_map_from(s, zp, Direction::forward, base.tangency_normal, base.multiplier, options);
    const MapResult minus =
        dual_map_from(s, zm, Direction::forward, base.tangency_normal, base.multiplier, options);
    jac.col(k) = (plus.image - minus.image) / (2.0 * step);
  }
  return jac;
}

double symplecticity_defect(const SupportSurface& s, const Vector& z, double step,
                            const MapOptions& options) {
  const Matrix d = map_jacobian(s, z, step, options);
  const Matrix w = omega_matrix(s.dimension());
  return (d.transpose() * w * d - w).cwiseAbs().maxCoeff();
}

}  // namespace dualbill
