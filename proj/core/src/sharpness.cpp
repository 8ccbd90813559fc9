#include "dualbill/sharpness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dualbill/symplectic.hpp"
#include "linalg.hpp"

namespace dualbill {

namespace {

constexpr double kLagrangeTolerance = 1e-10;
constexpr double kZ3Tolerance = 1e-6;

bool same_z3_orbit(const Vector& p, const Vector& q) {
  for (int k = 0; k < 3; ++k) {
    if ((cube_root_rotate(p, k) - q).norm() < kZ3Tolerance) return true;
  }
  return false;
}

Vector lagrange_system(const Vector& p, double eta, const PerturbationParams& params) {
  Vector g(p.size() + 1);
  g.head(p.size()) = perturbation_grad_f(p, params) - eta * p;
  g(p.size()) = 0.5 * (p.squaredNorm() - 1.0);
  return g;
}

}  // namespace

double lagrange_residual(const Vector& p, double eta, const PerturbationParams& params) {
  return (perturbation_grad_f(p, params) - eta * p).norm();
}

CriticalSweep sweep_critical_points(const PerturbationParams& params, int starts,
                                    std::uint64_t seed) {
  const int n = 2 * params.m();
  CriticalSweep sweep;
  sweep.starts = starts;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int start = 0; start < starts; ++start) {
    Vector p(n);
    for (int k = 0; k < n; ++k) p(k) = normal(rng);
    p.normalize();
    double eta = p.dot(perturbation_grad_f(p, params));

    Vector g = lagrange_system(p, eta, params);
    double r = g.norm();
    for (int it = 0; it < 100 && r > 1e-13; ++it) {
      Matrix jac = Matrix::Zero(n + 1, n + 1);
      jac.topLeftCorner(n, n) = perturbation_hess_f(p, params) - eta * Matrix::Identity(n, n);
      jac.topRightCorner(n, 1) = -p;
      jac.bottomLeftCorner(1, n) = p.transpose();
      const Vector delta = detail::solve_min_norm(jac, -g);
      double t = 1.0;
      bool accepted = false;
      for (int halving = 0; halving <= 30; ++halving, t *= 0.5) {
        const Vector pt = p + t * delta.head(n);
        const double et = eta + t * delta(n);
        const Vector gt = lagrange_system(pt, et, params);
        if (gt.norm() < r) {
          p = pt;
          eta = et;
          g = gt;
          r = gt.norm();
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    if (!(r <= 1e-11)) continue;
    ++sweep.converged;
    p.normalize();

    int carrying = 0;
    for (int i = 0; i < params.m(); ++i) {
      const double x = p(i);
      const double y = p(params.m() + i);
      if (x * x + y * y > 1e-8) ++carrying;
    }
    sweep.max_carrying_pairs = std::max(sweep.max_carrying_pairs, carrying);

    const bool known = std::any_of(sweep.representatives.begin(), sweep.representatives.end(),
                                   [&](const Vector& rep) { return same_z3_orbit(rep, p); });
    if (!known) sweep.representatives.push_back(p);
  }
  return sweep;
}

std::vector<CriticalOrbitOfF> critical_orbits_of_f(const PerturbationParams& params,
                                                   bool verify_sweep) {
  validate(params);
  const int m = params.m();
  std::vector<CriticalOrbitOfF> out;
  for (int i = 0; i < m; ++i) {
    for (int branch : {-1, 1}) {
      CriticalOrbitOfF crit;
      crit.index = i;
      crit.branch = branch;
      crit.eta = params.a[i] + branch * params.eps;
      // x_i = (eta - a_i) / eps, and the unit sphere forces x_i = branch exactly.
      crit.representative = Vector::Zero(2 * m);
      crit.representative(i) = branch;
      crit.critical_value = perturbation_f(crit.representative, params);
      const double res = lagrange_residual(crit.representative, crit.eta, params);
      if (!(res < kLagrangeTolerance)) {
        std::ostringstream os;
        os << "closed-form critical point fails the Lagrange system (residual " << res << ")";
        throw std::logic_error(os.str());
      }
      out.push_back(std::move(crit));
    }
  }

  if (verify_sweep) {
    const CriticalSweep sweep = sweep_critical_points(params);
    for (const Vector& rep : sweep.representatives) {
      const bool listed = std::any_of(out.begin(), out.end(), [&](const CriticalOrbitOfF& c) {
        return same_z3_orbit(c.representative, rep);
      });
      if (!listed) throw std::logic_error("numeric sweep found an additional critical Z_3-orbit");
    }
  }
  return out;
}

LinearizedClosure solve_linearized_closure(const PerturbationParams& params, const Vector& z) {
  const int m = params.m();
  const int dim = 2 * m;
  if (z.size() != dim) throw DimensionMismatch("solve_linearized_closure: wrong dimension");
  require_unit(z, 1e-10);

  LinearizedClosure out;
  out.c = perturbation_f(z, params);
  const Vector grad = perturbation_grad_f(z, params);
  out.w = grad - grad.dot(z) * z;

  // First-order closure, for i = 1, 2, 3 cyclically (J = multiplication by i):
  //   lambda^{-1} [(c + J alpha_i) z + w + (I + sqrt3 J) v_i] = (c - J alpha_{i+1}) z + w + (I - sqrt3 J) v_{i+1}
  // Unknowns: v_1, v_2 in T_z S (v_3 = 0) and alpha_1..alpha_3.
  const double sqrt3 = std::sqrt(3.0);
  const Matrix basis = detail::tangent_basis(z);
  const Matrix jm = j_matrix(Dimension(m));
  const Matrix id = Matrix::Identity(dim, dim);
  // lambda^{-1} = lambda^2 = -1/2 - (sqrt3 / 2) J
  const Matrix inv_lambda = -0.5 * id - 0.5 * sqrt3 * jm;

  const int tcols = dim - 1;
  const int cols = 2 * tcols + 3;
  Matrix a = Matrix::Zero(3 * dim, cols);
  Vector b(3 * dim);
  const Vector cz_w = out.c * z + out.w;
  for (int i = 0; i < 3; ++i) {
    const int next = (i + 1) % 3;
    const int row = i * dim;
    b.segment(row, dim) = -(inv_lambda * cz_w - cz_w);
    a.block(row, 2 * tcols + i, dim, 1) += inv_lambda * jm * z;
    a.block(row, 2 * tcols + next, dim, 1) += jm * z;
    if (i < 2) a.block(row, i * tcols, dim, tcols) += inv_lambda * (id + sqrt3 * jm) * basis;
    if (next < 2) a.block(row, next * tcols, dim, tcols) += -(id - sqrt3 * jm) * basis;
  }

  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.smallest_singular_value = svd.singularValues().minCoeff();
  const Vector x = svd.solve(b);
  out.consistency_residual = (a * x - b).norm();
  out.v = {basis * x.segment(0, tcols), basis * x.segment(tcols, tcols), Vector::Zero(dim)};
  out.alpha = {x(2 * tcols), x(2 * tcols + 1), x(2 * tcols + 2)};
  return out;
}

TangencyTuple linearized_seed(const PerturbationParams& params, const CriticalOrbitOfF& crit) {
  const LinearizedClosure lin = solve_linearized_closure(params, crit.representative);
  if (!(lin.smallest_singular_value > 1e-10)) {
    std::ostringstream os;
    os << "linearized closure system is singular (smallest singular value "
       << lin.smallest_singular_value << ")";
    throw std::runtime_error(os.str());
  }
  const double sqrt3 = std::sqrt(3.0);
  TangencyTuple seed;
  for (int i = 1; i <= 3; ++i) {
    const Vector base = crit.representative + params.eps * lin.v[i - 1];
    seed.normals.push_back(cube_root_rotate(base, i).normalized());
    seed.multipliers.push_back(sqrt3 + params.eps * lin.alpha[i - 1]);
  }
  return seed;
}

SharpnessReport sharpness_experiment(const PerturbationParams& params, int n_starts,
                                     std::uint64_t rng_seed, int threads) {
  SharpnessReport report;
  report.expected = 2 * params.m();
  report.critical_orbits = critical_orbits_of_f(params, true);
  const SupportSurface surface = SupportSurface::perturbed_sphere(params);

  std::vector<TangencyTuple> seeds;
  for (const CriticalOrbitOfF& crit : report.critical_orbits) {
    seeds.push_back(linearized_seed(params, crit));
  }

  SearchOptions options;
  options.n_starts = n_starts;
  options.rng_seed = rng_seed;
  options.threads = threads;
  options.extra_seeds = seeds;
  report.orbits = multistart_search(surface, options);
  report.count = report.orbits.count();

  options.n_starts = 2 * n_starts;
  report.count_doubled = multistart_search(surface, options).count();
  report.stable = report.count == report.count_doubled;

  std::vector<int> claims(report.orbits.orbits.size(), 0);
  bool all_matched = true;
  for (const TangencyTuple& seed : seeds) {
    PolishOutcome outcome = newton_polish(surface, seed, options.polish);
    int index = -1;
    if (outcome.ok()) {
      if (auto found = report.orbits.find(*outcome.orbit)) index = static_cast<int>(*found);
    }
    if (index < 0) {
      all_matched = false;
    } else {
      ++claims[index];
    }
    report.seed_to_orbit.push_back(index);
    report.seed_outcomes.push_back(std::move(outcome));
  }
  report.bijection = all_matched && seeds.size() == report.orbits.orbits.size() &&
                     std::all_of(claims.begin(), claims.end(), [](int c) { return c == 1; });
  report.success = report.count == report.expected && report.bijection && report.stable;
  return report;
}

}  // namespace dualbill
