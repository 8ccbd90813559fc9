#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dualbill/surface.hpp"

namespace dualbill {

// n unit normals u_1..u_n (tangency points q_i = q(u_i)) and multipliers a_1..a_n with
// z_{i+1} - z_i = 2 a_i J u_i. Vertex z_i precedes tangency i, z_{i+1} follows it.
struct TangencyTuple {
  std::vector<Vector> normals;
  std::vector<double> multipliers;

  int n() const { return static_cast<int>(normals.size()); }
};

// Throws DomainError unless n is odd >= 3, normals are unit (1e-12) of equal dimension,
// and there is one multiplier per normal.
void validate_tuple(const TangencyTuple& tuple);

// Ansatz u_i = rho^i u, a_i = tan(pi r / n), rho = exp(2 pi i r / n): the exact n-periodic
// family of the unit sphere with rotation number r. For n = 3, r = 1: (u, lambda u, lambda^2 u), a = sqrt(3).
TangencyTuple sphere_seed(const Vector& u, int n = 3, int rotation = 1);

struct OrbitSolution {
  TangencyTuple tuple;
  std::vector<Vector> tangency_points;
  std::vector<Vector> vertices;
  double area_value = 0.0;
  double residual = 0.0;
  bool is_isolated = false;
  double smallest_singular_value = 0.0;
  int nullity = 0;  // singular values of the Newton matrix below the isolation threshold
  int iterations = 0;

  int n() const { return tuple.n(); }
};

// sum_{i<j} (-1)^{i+j} omega(q_i, q_j); throws DomainError for even n.
double functional_F(std::span<const Vector> q);

// dF/dq_k for each k, as ambient vectors.
std::vector<Vector> functional_F_point_gradient(std::span<const Vector> q);

// Gradient of u -> F(q(u_1), ..., q(u_n)) with respect to each normal, tangent to the sphere.
std::vector<Vector> functional_F_gradient(const SupportSurface& s, const TangencyTuple& tuple);

// z_i = sum_{j=0}^{n-1} (-1)^j q_{i+j}.
std::vector<Vector> vertices_from_tangency(std::span<const Vector> q);

// n = 3: R_i = q_i + a_i J u_i - q_{i+1} + a_{i+1} J u_{i+1} (dimension 6m).
// n > 3: R_k = sum_{j=0}^{n-2} (-1)^j q_{k+1+j} - a_k J u_k (dimension 2mn).
Vector closure_residual(const SupportSurface& s, const TangencyTuple& tuple);

// d closure_residual / d(u_1..u_n, a_1..a_n), bordered with the rows u_i . du_i = 0 so that
// the system is square: (2mn + n) x (2mn + n).
Matrix closure_jacobian(const SupportSurface& s, const TangencyTuple& tuple);

struct PolishOptions {
  double tolerance = 1e-10;
  int max_iterations = 50;
  int max_halvings = 20;
  double isolation_threshold = 1e-8;
  double backtrack_factor = 1e-6;  // |q_i - q_{i+1}| <= factor * diam is a fake orbit
  double zero_area_factor = 1e-6;  // |F| <= factor * diam^2 is rejected
};

enum class PolishStatus { converged, not_converged, backtracking, zero_area, mixed_orientation };

std::string to_string(PolishStatus status);

struct PolishOutcome {
  PolishStatus status = PolishStatus::not_converged;
  std::optional<OrbitSolution> orbit;
  std::string reason;
  int iterations = 0;
  double residual = 0.0;

  bool ok() const { return status == PolishStatus::converged; }
};

// Damped Newton on closure_residual with normalization retraction per normal.
PolishOutcome newton_polish(const SupportSurface& s, const TangencyTuple& seed,
                            const PolishOptions& options = {});

// Builds the full OrbitSolution record for a tuple (no Newton iterations).
OrbitSolution make_solution(const SupportSurface& s, const TangencyTuple& tuple,
                            const PolishOptions& options = {});

// The 2n images of the orbit under cyclic shifts and reversal. Reversal runs the orbit
// backwards, which negates the multipliers.
std::vector<OrbitSolution> dihedral_images(const OrbitSolution& orbit);

// Image with the lexicographically smallest vertex sequence (entries within 1e-9 compare equal).
OrbitSolution canonicalize_mod_dihedral(const OrbitSolution& orbit);

// min over the dihedral action of the max vertex distance.
double dihedral_distance(const OrbitSolution& a, const OrbitSolution& b);

// Norm of the stacked tangential gradient of F at the orbit's normals.
double criticality_check(const SupportSurface& s, const OrbitSolution& orbit);

// max_i |T(z_i) - z_{i+1}| with T applied in the orbit's direction of travel.
double round_trip_defect(const SupportSurface& s, const OrbitSolution& orbit);

// A connected set of non-isolated solutions, identified by its (constant) critical value.
struct OrbitFamily {
  OrbitSolution representative;
  int members = 0;
};

struct SearchStats {
  int starts_attempted = 0;
  int converged = 0;
  int not_converged = 0;
  int rejected_backtracking = 0;
  int rejected_zero_area = 0;
  int rejected_orientation = 0;
  int rejected_duplicates = 0;
  int non_isolated = 0;
};

struct OrbitSet {
  std::vector<OrbitSolution> orbits;  // isolated, canonical, pairwise D_n-distinct
  std::vector<OrbitFamily> families;  // non-isolated solutions, not counted as orbits
  double dedup_tolerance = 1e-6;
  SearchStats stats;

  int count() const { return static_cast<int>(orbits.size()); }

  // Canonicalizes and stores the orbit unless a D_n-equivalent one is present.
  // Returns true if it was added.
  bool insert(const OrbitSolution& orbit);

  // Index of the stored orbit within dedup tolerance of `orbit`, if any.
  std::optional<std::size_t> find(const OrbitSolution& orbit) const;
};

struct SearchOptions {
  int n_starts = 2000;
  std::uint64_t rng_seed = 20240601;
  int threads = 0;  // 0: hardware concurrency
  double dedup_tolerance = 1e-6;
  double family_value_tolerance = 1e-7;  // relative, for grouping non-isolated solutions
  PolishOptions polish;
  std::vector<TangencyTuple> extra_seeds;  // polished after the random seeds
};

// Random seeds are the sphere ansatz (u, lambda u, lambda^2 u), a = sqrt(3) for uniform
// random unit u. Deterministic for a fixed rng_seed regardless of thread count.
OrbitSet multistart_search(const SupportSurface& s, const SearchOptions& options = {});

// Unit vectors drawn from the search's generator, in seed order.
std::vector<Vector> random_unit_vectors(Dimension dim, int count, std::uint64_t seed);

}  // namespace dualbill
