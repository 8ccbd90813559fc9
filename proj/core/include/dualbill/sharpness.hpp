#pragma once

#include <cstdint>
#include <vector>

#include "dualbill/orbit_finder.hpp"
#include "dualbill/surface.hpp"

namespace dualbill {

// Critical Z_3-orbit {p, lambda p, lambda^2 p} of perturbation_f on the unit sphere, carried by the
// coordinate pair (x_i, y_i): eta = a_i + branch * eps, representative x_i = branch.
struct CriticalOrbitOfF {
  Vector representative;
  int index = 0;  // zero-based coordinate pair
  double eta = 0.0;
  int branch = 1;
  double critical_value = 0.0;
};

// Residual |grad f(p) - eta p| of the Lagrange system for f on the unit sphere.
double lagrange_residual(const Vector& p, double eta, const PerturbationParams& params);

struct CriticalSweep {
  std::vector<Vector> representatives;  // one per distinct Z_3-orbit found
  int starts = 0;
  int converged = 0;
  // Largest number of coordinate pairs with x_i^2 + y_i^2 > 1e-8 at any converged point.
  int max_carrying_pairs = 0;
};

// Damped Newton on the Lagrange system (grad f = eta p, |p| = 1) from random starts;
// finds saddles as well as extrema. Converged points are grouped into Z_3-orbits.
CriticalSweep sweep_critical_points(const PerturbationParams& params, int starts = 500,
                                    std::uint64_t seed = 0xc41715);

// The 2m closed-form critical Z_3-orbits, each verified against the Lagrange system.
// With verify_sweep, a 500-start numeric sweep must find nothing else (std::logic_error otherwise).
// Throws SurfaceError if eps^2 >= delta_bound(a).
std::vector<CriticalOrbitOfF> critical_orbits_of_f(const PerturbationParams& params,
                                                   bool verify_sweep = true);

// First-order solution of the closure system around the sphere orbit through z:
// u_i = lambda^i (z + eps v_i), a_i = sqrt(3) + eps alpha_i, with v_3 = 0.
struct LinearizedClosure {
  std::vector<Vector> v;
  std::vector<double> alpha;
  double c = 0.0;  // f(z)
  Vector w;        // spherical gradient of f at z
  double consistency_residual = 0.0;
  double smallest_singular_value = 0.0;
};

LinearizedClosure solve_linearized_closure(const PerturbationParams& params, const Vector& z);

// Throws std::runtime_error if the linear system is rank deficient.
TangencyTuple linearized_seed(const PerturbationParams& params, const CriticalOrbitOfF& crit);

struct SharpnessReport {
  int expected = 0;  // 2m
  int count = 0;
  int count_doubled = 0;
  bool stable = false;
  bool bijection = false;
  bool success = false;
  std::vector<CriticalOrbitOfF> critical_orbits;
  std::vector<PolishOutcome> seed_outcomes;
  std::vector<int> seed_to_orbit;  // index into orbits.orbits or -1
  OrbitSet orbits;
};

SharpnessReport sharpness_experiment(const PerturbationParams& params, int n_starts = 2000,
                                     std::uint64_t rng_seed = 20240601, int threads = 0);

}  // namespace dualbill
