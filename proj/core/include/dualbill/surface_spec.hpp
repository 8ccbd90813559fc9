#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dualbill/surface.hpp"

namespace dualbill {

// Parsed form of a surface spec file. Line-oriented `key = value`, '#' starts a comment.
// Keys: kind (sphere|ellipsoid|perturbed_sphere), m, radius, semi_axes, a, eps.
struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::sphere;
  int m = 1;
  double radius = 1.0;
  std::vector<double> semi_axes;
  std::vector<double> a;
  std::optional<double> eps;
};

// Throws SurfaceError on unknown keys, malformed values or inconsistent lengths.
SurfaceSpec parse_surface_spec(std::istream& in);
SurfaceSpec parse_surface_spec_string(const std::string& text);
SurfaceSpec load_surface_spec(const std::string& path);

std::string format_surface_spec(const SurfaceSpec& spec);

SupportSurface make_surface(const SurfaceSpec& spec);

// Comma-separated list of reals; throws std::invalid_argument on malformed input.
std::vector<double> parse_real_list(const std::string& text);

}  // namespace dualbill
