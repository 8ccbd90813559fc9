#include "dualbill/orbit_finder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "dualbill/dual_map.hpp"
#include "dualbill/symplectic.hpp"
#include "linalg.hpp"

namespace dualbill {

namespace {

constexpr double kLexTolerance = 1e-9;

int wrap(int i, int n) { return ((i % n) + n) % n; }

std::vector<Vector> tangency_points(const SupportSurface& s, const TangencyTuple& t) {
  std::vector<Vector> q;
  q.reserve(t.normals.size());
  for (const Vector& u : t.normals) q.push_back(s.point(u));
  return q;
}

void require_odd(int n) {
  if (n < 3 || n % 2 == 0) {
    throw DomainError("orbit length n must be odd and >= 3, got " + std::to_string(n));
  }
}

double closure_norm(const SupportSurface& s, const TangencyTuple& t) {
  return closure_residual(s, t).norm();
}

// Smallest distance between consecutive tangency points.
double min_consecutive_gap(std::span<const Vector> q) {
  const int n = static_cast<int>(q.size());
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) gap = std::min(gap, (q[i] - q[wrap(i + 1, n)]).norm());
  return gap;
}

OrbitSolution relabel(const OrbitSolution& orbit, bool reverse, int shift) {
  const int n = orbit.n();
  OrbitSolution out = orbit;
  for (int i = 0; i < n; ++i) {
    // Reversal: z'_i = z_{n-1-i}; tangency i' sits between z_{n-1-i} and z_{n-2-i}.
    const int vi = reverse ? wrap(n - 1 - (i + shift), n) : wrap(i + shift, n);
    const int ti = reverse ? wrap(n - 2 - (i + shift), n) : wrap(i + shift, n);
    out.vertices[i] = orbit.vertices[vi];
    out.tangency_points[i] = orbit.tangency_points[ti];
    out.tuple.normals[i] = orbit.tuple.normals[ti];
    out.tuple.multipliers[i] = reverse ? -orbit.tuple.multipliers[ti] : orbit.tuple.multipliers[ti];
  }
  if (reverse) out.area_value = -orbit.area_value;
  return out;
}

// -1, 0, +1 comparison of vertex sequences, entries within kLexTolerance compare equal.
int lex_compare(const OrbitSolution& a, const OrbitSolution& b) {
  for (std::size_t i = 0; i < a.vertices.size(); ++i) {
    for (Eigen::Index k = 0; k < a.vertices[i].size(); ++k) {
      const double d = a.vertices[i](k) - b.vertices[i](k);
      if (d < -kLexTolerance) return -1;
      if (d > kLexTolerance) return 1;
    }
  }
  return 0;
}

}  // namespace

void validate_tuple(const TangencyTuple& tuple) {
  require_odd(tuple.n());
  if (tuple.multipliers.size() != tuple.normals.size()) {
    throw DomainError("tangency tuple needs one multiplier per normal");
  }
  const Eigen::Index dim = tuple.normals.front().size();
  for (const Vector& u : tuple.normals) {
    if (u.size() != dim) throw DimensionMismatch("tangency normals of different dimensions");
    require_unit(u);
  }
}

TangencyTuple sphere_seed(const Vector& u, int n, int rotation) {
  require_odd(n);
  const Vector unit = u.normalized();
  const Vector ju = j_apply(unit);
  const double step = 2.0 * std::numbers::pi * rotation / n;
  TangencyTuple t;
  for (int i = 0; i < n; ++i) {
    const double theta = step * i;
    t.normals.push_back((std::cos(theta) * unit + std::sin(theta) * ju).normalized());
    t.multipliers.push_back(std::tan(std::numbers::pi * rotation / n));
  }
  if (n == 3 && rotation == 1) {
    // Exact lambda^i u, lambda = exp(2 pi i / 3).
    for (int i = 0; i < 3; ++i) t.normals[i] = cube_root_rotate(unit, i);
    std::fill(t.multipliers.begin(), t.multipliers.end(), std::sqrt(3.0));
  }
  return t;
}

double functional_F(std::span<const Vector> q) {
  const int n = static_cast<int>(q.size());
  require_odd(n);
  double f = 0.0;
  // (-1)^{i+j} with one-based i, j equals (-1)^{i+j} with zero-based indices.
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) f += ((i + j) % 2 == 0 ? 1.0 : -1.0) * omega(q[i], q[j]);
  }
  return f;
}

std::vector<Vector> functional_F_point_gradient(std::span<const Vector> q) {
  const int n = static_cast<int>(q.size());
  require_odd(n);
  std::vector<Vector> grad(n, Vector::Zero(q.front().size()));
  // d omega(q_i, q_j) = J q_i . dq_j - J q_j . dq_i
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double sign = (i + j) % 2 == 0 ? 1.0 : -1.0;
      grad[j] += sign * j_apply(q[i]);
      grad[i] -= sign * j_apply(q[j]);
    }
  }
  return grad;
}

std::vector<Vector> functional_F_gradient(const SupportSurface& s, const TangencyTuple& tuple) {
  validate_tuple(tuple);
  const std::vector<Vector> q = tangency_points(s, tuple);
  const std::vector<Vector> dq = functional_F_point_gradient(q);
  std::vector<Vector> grad;
  grad.reserve(q.size());
  for (int k = 0; k < tuple.n(); ++k) {
    const Vector& u = tuple.normals[k];
    Vector g = s.point_jacobian(u) * dq[k];
    g -= g.dot(u) * u;
    grad.push_back(std::move(g));
  }
  return grad;
}

std::vector<Vector> vertices_from_tangency(std::span<const Vector> q) {
  const int n = static_cast<int>(q.size());
  require_odd(n);
  std::vector<Vector> z(n, Vector::Zero(q.front().size()));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) z[i] += (j % 2 == 0 ? 1.0 : -1.0) * q[wrap(i + j, n)];
  }
  return z;
}

Vector closure_residual(const SupportSurface& s, const TangencyTuple& tuple) {
  validate_tuple(tuple);
  const int n = tuple.n();
  const int dim = s.dimension().ambient();
  if (tuple.normals.front().size() != dim) {
    throw DimensionMismatch("tangency normals do not match the surface dimension");
  }
  const std::vector<Vector> q = tangency_points(s, tuple);
  const auto& u = tuple.normals;
  const auto& a = tuple.multipliers;
  Vector r(n * dim);
  for (int i = 0; i < n; ++i) {
    Vector block;
    if (n == 3) {
      const int k = wrap(i + 1, n);
      block = q[i] + a[i] * j_apply(u[i]) - q[k] + a[k] * j_apply(u[k]);
    } else {
      block = -a[i] * j_apply(u[i]);
      for (int j = 0; j <= n - 2; ++j) block += (j % 2 == 0 ? 1.0 : -1.0) * q[wrap(i + 1 + j, n)];
    }
    r.segment(i * dim, dim) = block;
  }
  return r;
}

Matrix closure_jacobian(const SupportSurface& s, const TangencyTuple& tuple) {
  validate_tuple(tuple);
  const int n = tuple.n();
  const int dim = s.dimension().ambient();
  const Matrix jm = j_matrix(s.dimension());
  const auto& u = tuple.normals;
  const auto& a = tuple.multipliers;
  std::vector<Matrix> dq;
  dq.reserve(n);
  for (const Vector& ui : u) dq.push_back(s.point_jacobian(ui));

  const int rows = n * dim + n;
  Matrix jac = Matrix::Zero(rows, rows);
  const int acol = n * dim;
  for (int i = 0; i < n; ++i) {
    const int row = i * dim;
    if (n == 3) {
      const int k = wrap(i + 1, n);
      jac.block(row, i * dim, dim, dim) += dq[i] + a[i] * jm;
      jac.block(row, k * dim, dim, dim) += -dq[k] + a[k] * jm;
      jac.block(row, acol + i, dim, 1) += j_apply(u[i]);
      jac.block(row, acol + k, dim, 1) += j_apply(u[k]);
    } else {
      jac.block(row, i * dim, dim, dim) += -a[i] * jm;
      jac.block(row, acol + i, dim, 1) += -j_apply(u[i]);
      for (int j = 0; j <= n - 2; ++j) {
        const int k = wrap(i + 1 + j, n);
        jac.block(row, k * dim, dim, dim) += (j % 2 == 0 ? 1.0 : -1.0) * dq[k];
      }
    }
    jac.block(n * dim + i, i * dim, 1, dim) = u[i].transpose();
  }
  return jac;
}

std::string to_string(PolishStatus status) {
  switch (status) {
    case PolishStatus::converged: return "converged";
    case PolishStatus::not_converged: return "not_converged";
    case PolishStatus::backtracking: return "fake orbit";
    case PolishStatus::zero_area: return "zero_area";
    case PolishStatus::mixed_orientation: return "mixed_orientation";
  }
  return "unknown";
}

OrbitSolution make_solution(const SupportSurface& s, const TangencyTuple& tuple,
                            const PolishOptions& options) {
  OrbitSolution sol;
  sol.tuple = tuple;
  sol.tangency_points = tangency_points(s, tuple);
  sol.vertices = vertices_from_tangency(sol.tangency_points);
  sol.area_value = functional_F(sol.tangency_points);
  sol.residual = closure_norm(s, tuple);
  Eigen::JacobiSVD<Matrix> svd(closure_jacobian(s, tuple));
  const auto& sv = svd.singularValues();
  sol.smallest_singular_value = sv.minCoeff();
  sol.nullity = static_cast<int>((sv.array() < options.isolation_threshold).count());
  sol.is_isolated = sol.smallest_singular_value > options.isolation_threshold;
  return sol;
}

PolishOutcome newton_polish(const SupportSurface& s, const TangencyTuple& seed,
                            const PolishOptions& options) {
  validate_tuple(seed);
  PolishOutcome out;
  const double diam = s.diameter();
  TangencyTuple t = seed;
  for (Vector& u : t.normals) u.normalize();

  if (min_consecutive_gap(tangency_points(s, t)) <= options.backtrack_factor * diam) {
    out.status = PolishStatus::backtracking;
    out.reason = "fake orbit: seed has coinciding consecutive tangency points";
    out.residual = closure_norm(s, t);
    return out;
  }

  const int n = t.n();
  const int dim = s.dimension().ambient();
  Vector res = closure_residual(s, t);
  double r = res.norm();
  int extra = 0;
  int it = 0;
  int converged_at = -1;
  for (; it < options.max_iterations; ++it) {
    if (r <= options.tolerance) {
      if (converged_at < 0) converged_at = it;
      // Two more steps take the residual to roundoff level.
      if (++extra > 2) break;
    }
    const Matrix jac = closure_jacobian(s, t);
    Vector rhs = Vector::Zero(jac.rows());
    rhs.head(n * dim) = -res;
    const Vector delta = detail::solve_min_norm(jac, rhs);

    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= options.max_halvings; ++halving, step *= 0.5) {
      TangencyTuple trial = t;
      for (int i = 0; i < n; ++i) {
        trial.normals[i] = (t.normals[i] + step * delta.segment(i * dim, dim)).normalized();
        trial.multipliers[i] = t.multipliers[i] + step * delta(n * dim + i);
      }
      Vector trial_res = closure_residual(s, trial);
      const double tr = trial_res.norm();
      if (tr < r) {
        t = std::move(trial);
        res = std::move(trial_res);
        r = tr;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  if (converged_at < 0 && r <= options.tolerance) converged_at = it;
  out.iterations = converged_at >= 0 ? converged_at : it;
  out.residual = r;
  if (!(r <= options.tolerance)) {
    out.status = PolishStatus::not_converged;
    std::ostringstream os;
    os << "no convergence after " << out.iterations << " iterations, residual " << r;
    out.reason = os.str();
    return out;
  }

  OrbitSolution sol = make_solution(s, t, options);
  sol.iterations = out.iterations;
  if (min_consecutive_gap(sol.tangency_points) <= options.backtrack_factor * diam) {
    out.status = PolishStatus::backtracking;
    out.reason = "fake orbit: consecutive tangency points coincide";
    return out;
  }
  const auto& a = sol.tuple.multipliers;
  const bool all_positive = std::all_of(a.begin(), a.end(), [](double x) { return x > 0; });
  const bool all_negative = std::all_of(a.begin(), a.end(), [](double x) { return x < 0; });
  if (!all_positive && !all_negative) {
    out.status = PolishStatus::mixed_orientation;
    out.reason = "multipliers change sign; not an orbit of T";
    return out;
  }
  if (!(std::abs(sol.area_value) > options.zero_area_factor * diam * diam)) {
    out.status = PolishStatus::zero_area;
    std::ostringstream os;
    os << "symplectic area " << sol.area_value << " below threshold";
    out.reason = os.str();
    return out;
  }
  out.status = PolishStatus::converged;
  out.orbit = std::move(sol);
  return out;
}

std::vector<OrbitSolution> dihedral_images(const OrbitSolution& orbit) {
  std::vector<OrbitSolution> images;
  images.reserve(2 * orbit.vertices.size());
  for (bool reverse : {false, true}) {
    for (int shift = 0; shift < orbit.n(); ++shift) images.push_back(relabel(orbit, reverse, shift));
  }
  return images;
}

OrbitSolution canonicalize_mod_dihedral(const OrbitSolution& orbit) {
  std::vector<OrbitSolution> images = dihedral_images(orbit);
  std::size_t best = 0;
  for (std::size_t i = 1; i < images.size(); ++i) {
    if (lex_compare(images[i], images[best]) < 0) best = i;
  }
  return images[best];
}

double dihedral_distance(const OrbitSolution& a, const OrbitSolution& b) {
  if (a.n() != b.n() || a.vertices.empty() || a.vertices.front().size() != b.vertices.front().size()) {
    return std::numeric_limits<double>::infinity();
  }
  double best = std::numeric_limits<double>::infinity();
  for (const OrbitSolution& image : dihedral_images(b)) {
    double worst = 0.0;
    for (int i = 0; i < a.n(); ++i) worst = std::max(worst, (a.vertices[i] - image.vertices[i]).norm());
    best = std::min(best, worst);
  }
  return best;
}

double criticality_check(const SupportSurface& s, const OrbitSolution& orbit) {
  double sq = 0.0;
  for (const Vector& g : functional_F_gradient(s, orbit.tuple)) sq += g.squaredNorm();
  return std::sqrt(sq);
}

double round_trip_defect(const SupportSurface& s, const OrbitSolution& orbit) {
  const Direction dir = orbit.tuple.multipliers.front() > 0 ? Direction::forward : Direction::backward;
  const int n = orbit.n();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const MapResult r = dual_map(s, orbit.vertices[i], dir);
    worst = std::max(worst, (r.image - orbit.vertices[wrap(i + 1, n)]).norm());
  }
  return worst;
}

std::optional<std::size_t> OrbitSet::find(const OrbitSolution& orbit) const {
  for (std::size_t i = 0; i < orbits.size(); ++i) {
    if (dihedral_distance(orbits[i], orbit) <= dedup_tolerance) return i;
  }
  return std::nullopt;
}

bool OrbitSet::insert(const OrbitSolution& orbit) {
  if (find(orbit)) return false;
  orbits.push_back(canonicalize_mod_dihedral(orbit));
  return true;
}

std::vector<Vector> random_unit_vectors(Dimension dim, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    Vector u(dim.ambient());
    for (Eigen::Index k = 0; k < u.size(); ++k) u(k) = normal(rng);
    out.push_back(u.normalized());
  }
  return out;
}

OrbitSet multistart_search(const SupportSurface& s, const SearchOptions& options) {
  if (options.n_starts < 1) throw std::invalid_argument("multistart_search needs n_starts >= 1");

  std::vector<TangencyTuple> seeds;
  for (const Vector& u : random_unit_vectors(s.dimension(), options.n_starts, options.rng_seed)) {
    seeds.push_back(sphere_seed(u));
  }
  seeds.insert(seeds.end(), options.extra_seeds.begin(), options.extra_seeds.end());

  std::vector<PolishOutcome> outcomes(seeds.size());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::min<std::size_t>(seeds.size(), options.threads > 0 ? options.threads : hw);
  auto work = [&](std::size_t first) {
    for (std::size_t i = first; i < seeds.size(); i += workers) {
      outcomes[i] = newton_polish(s, seeds[i], options.polish);
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  // Merge in seed order so the result does not depend on the worker count.
  OrbitSet set;
  set.dedup_tolerance = options.dedup_tolerance;
  set.stats.starts_attempted = static_cast<int>(seeds.size());
  for (const PolishOutcome& outcome : outcomes) {
    switch (outcome.status) {
      case PolishStatus::not_converged: ++set.stats.not_converged; continue;
      case PolishStatus::backtracking: ++set.stats.rejected_backtracking; continue;
      case PolishStatus::zero_area: ++set.stats.rejected_zero_area; continue;
      case PolishStatus::mixed_orientation: ++set.stats.rejected_orientation; continue;
      case PolishStatus::converged: break;
    }
    ++set.stats.converged;
    const OrbitSolution& orbit = *outcome.orbit;
    if (orbit.is_isolated) {
      if (!set.insert(orbit)) ++set.stats.rejected_duplicates;
      continue;
    }
    ++set.stats.non_isolated;
    const double value = std::abs(orbit.area_value);
    auto same_family = [&](const OrbitFamily& f) {
      const double fv = std::abs(f.representative.area_value);
      return std::abs(fv - value) <= options.family_value_tolerance * std::max(1.0, value);
    };
    auto it = std::find_if(set.families.begin(), set.families.end(), same_family);
    if (it == set.families.end()) {
      set.families.push_back({canonicalize_mod_dihedral(orbit), 1});
    } else {
      ++it->members;
    }
  }
  return set;
}

}  // namespace dualbill
