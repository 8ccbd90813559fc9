#pragma once

#include <cstdint>

#include "dualbill/surface.hpp"

namespace dualbill {

enum class Direction { forward, backward };

std::string to_string(Direction d);

// One application of the dual billiard map: image = 2 q(u) - z where
// q(u) - z = s J u with s > 0 (forward) or s < 0 (backward).
struct MapResult {
  Vector image;
  Vector tangency_normal;
  Vector tangency_point;
  double multiplier = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

struct MapOptions {
  double tolerance = 1e-12;  // on |q(u) - z - s J u|, relative to max(1, |z - center|)
  int max_iterations = 50;
  int max_halvings = 20;
  int random_restarts = 8;
  std::uint64_t seed = 0x0d0a1b11;
};

bool is_exterior(const SupportSurface& s, const Vector& z, double margin = 1e-10);

// max over unit u of z . u - h(u); the Euclidean distance from z to the body when positive.
double support_excess(const SupportSurface& s, const Vector& z);

// Throws DomainError if z is not exterior and ConvergenceError if no seed converges.
MapResult dual_map(const SupportSurface& s, const Vector& z, Direction direction,
                   const MapOptions& options = {});

// Newton solve warm-started at a known normal (and multiplier); falls back to dual_map.
MapResult dual_map_from(const SupportSurface& s, const Vector& z, Direction direction,
                        const Vector& normal_guess, double multiplier_guess,
                        const MapOptions& options = {});

double inverse_consistency(const SupportSurface& s, const Vector& z,
                           const MapOptions& options = {});

// Central-difference Jacobian of z -> T(z) (forward).
Matrix map_jacobian(const SupportSurface& s, const Vector& z, double step = 1e-5,
                    const MapOptions& options = {});

// max |D^T W D - W| with D the central-difference Jacobian and W the matrix of omega.
double symplecticity_defect(const SupportSurface& s, const Vector& z, double step = 1e-5,
                            const MapOptions& options = {});

}  // namespace dualbill
