#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "dualbill/dual_map.hpp"
#include "dualbill/orbit_finder.hpp"
#include "dualbill/sharpness.hpp"
#include "dualbill/surface_spec.hpp"

namespace dualbill::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr std::uint64_t kDefaultSeed = 20240601;

struct RunConfig {
  std::string surface_path;
  std::string point_text;
  std::string direction = "forward";
  int steps = 1;
  int starts = 2000;
  std::uint64_t seed = kDefaultSeed;
  std::optional<double> tol;
  std::string format = "json";
  std::string out_path;
  int threads = 0;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double x) { return fmt::format("{:.17g}", x); }

json to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json to_json(const SurfaceSpec& spec) {
  json j;
  j["kind"] = to_string(spec.kind);
  j["m"] = spec.m;
  switch (spec.kind) {
    case SurfaceKind::sphere: j["radius"] = spec.radius; break;
    case SurfaceKind::ellipsoid: j["semi_axes"] = spec.semi_axes; break;
    case SurfaceKind::perturbed_sphere:
      j["a"] = spec.a;
      if (spec.eps) j["eps"] = *spec.eps;
      break;
    case SurfaceKind::custom: break;
  }
  return j;
}

// x1..xm, y1..ym with a prefix.
std::vector<std::string> coord_names(const std::string& prefix, int m) {
  std::vector<std::string> names;
  for (const char* block : {"x", "y"}) {
    for (int i = 1; i <= m; ++i) names.push_back(fmt::format("{}{}{}", prefix, block, i));
  }
  return names;
}

void csv_row(std::ostream& os, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
  os << "\n";
}

void append(std::vector<std::string>& cells, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) cells.push_back(num(v(i)));
}

Vector parse_point(const std::string& text, int dim) {
  std::vector<double> values;
  try {
    values = parse_real_list(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--point: ") + e.what());
  }
  if (static_cast<int>(values.size()) != dim) {
    throw UsageError(fmt::format("--point has {} coordinates, the surface needs {}", values.size(), dim));
  }
  return Eigen::Map<const Vector>(values.data(), dim);
}

Direction parse_direction(const std::string& text) {
  if (text == "forward") return Direction::forward;
  if (text == "backward") return Direction::backward;
  throw UsageError("--direction must be forward or backward");
}

// ---- map -----------------------------------------------------------------

int cmd_map(const RunConfig& cfg, const SurfaceSpec& spec, const SupportSurface& s, std::ostream& out) {
  const Vector z = parse_point(cfg.point_text, s.dimension().ambient());
  const Direction dir = parse_direction(cfg.direction);
  const MapResult r = dual_map(s, z, dir);
  if (cfg.format == "json") {
    json j;
    j["command"] = "map";
    j["surface"] = to_json(spec);
    j["direction"] = to_string(dir);
    j["point"] = to_json(z);
    j["image"] = to_json(r.image);
    j["tangency_normal"] = to_json(r.tangency_normal);
    j["tangency_point"] = to_json(r.tangency_point);
    j["multiplier"] = r.multiplier;
    j["residual"] = r.residual;
    j["iterations"] = r.iterations;
    out << j.dump(2) << "\n";
  } else {
    const int m = s.dimension().m();
    std::vector<std::string> header;
    for (const char* p : {"point_", "image_", "normal_"}) {
      const auto names = coord_names(p, m);
      header.insert(header.end(), names.begin(), names.end());
    }
    header.insert(header.end(), {"multiplier", "residual", "iterations"});
    csv_row(out, header);
    std::vector<std::string> row;
    append(row, z);
    append(row, r.image);
    append(row, r.tangency_normal);
    row.insert(row.end(), {num(r.multiplier), num(r.residual), std::to_string(r.iterations)});
    csv_row(out, row);
  }
  return ok;
}

// ---- trajectory ----------------------------------------------------------

int cmd_trajectory(const RunConfig& cfg, const SurfaceSpec& spec, const SupportSurface& s,
                   std::ostream& out, std::ostream& err) {
  if (cfg.steps < 0) throw UsageError("--steps must be >= 0");
  const Direction dir = parse_direction(cfg.direction);
  std::vector<Vector> points{parse_point(cfg.point_text, s.dimension().ambient())};
  for (int k = 1; k <= cfg.steps; ++k) {
    try {
      points.push_back(dual_map(s, points.back(), dir).image);
    } catch (const std::exception& e) {
      err << "step " << k << ": " << e.what() << "\n";
      throw;
    }
  }
  if (cfg.format == "json") {
    json j;
    j["command"] = "trajectory";
    j["surface"] = to_json(spec);
    j["direction"] = to_string(dir);
    j["steps"] = cfg.steps;
    json pts = json::array();
    for (const Vector& p : points) pts.push_back(to_json(p));
    j["points"] = pts;
    out << j.dump(2) << "\n";
  } else {
    std::vector<std::string> header{"step"};
    const auto names = coord_names("", s.dimension().m());
    header.insert(header.end(), names.begin(), names.end());
    csv_row(out, header);
    for (std::size_t k = 0; k < points.size(); ++k) {
      std::vector<std::string> row{std::to_string(k)};
      append(row, points[k]);
      csv_row(out, row);
    }
  }
  return ok;
}

// ---- orbits --------------------------------------------------------------

json orbit_json(int index, const OrbitSolution& o) {
  json j;
  j["index"] = index;
  json verts = json::array();
  json normals = json::array();
  for (const Vector& v : o.vertices) verts.push_back(to_json(v));
  for (const Vector& u : o.tuple.normals) normals.push_back(to_json(u));
  j["vertices"] = verts;
  j["tangency_normals"] = normals;
  j["multipliers"] = o.tuple.multipliers;
  j["area_value"] = o.area_value;
  j["residual"] = o.residual;
  j["is_isolated"] = o.is_isolated;
  j["smallest_singular_value"] = o.smallest_singular_value;
  return j;
}

json stats_json(const SearchStats& st) {
  json j;
  j["starts_attempted"] = st.starts_attempted;
  j["converged"] = st.converged;
  j["not_converged"] = st.not_converged;
  j["rejected_backtracking"] = st.rejected_backtracking;
  j["rejected_zero_area"] = st.rejected_zero_area;
  j["rejected_orientation"] = st.rejected_orientation;
  j["rejected_duplicates"] = st.rejected_duplicates;
  j["non_isolated"] = st.non_isolated;
  return j;
}

void write_orbit_set(const RunConfig& cfg, const SurfaceSpec& spec, const SupportSurface& s,
                     const OrbitSet& set, const std::string& command, std::ostream& out,
                     const json& extra = json::object()) {
  if (cfg.format == "json") {
    json j;
    j["command"] = command;
    j["surface"] = to_json(spec);
    j["starts"] = cfg.starts;
    j["seed"] = cfg.seed;
    json orbits = json::array();
    for (int i = 0; i < set.count(); ++i) orbits.push_back(orbit_json(i, set.orbits[i]));
    j["orbits"] = orbits;
    json families = json::array();
    for (const OrbitFamily& f : set.families) {
      json fj = orbit_json(static_cast<int>(families.size()), f.representative);
      fj["members"] = f.members;
      fj["nullity"] = f.representative.nullity;
      families.push_back(fj);
    }
    j["families"] = families;
    for (const auto& [key, value] : extra.items()) j[key] = value;
    json summary;
    summary["count"] = set.count();
    summary["family_flag"] = !set.families.empty();
    summary["families"] = set.families.size();
    summary["stats"] = stats_json(set.stats);
    j["summary"] = summary;
    out << j.dump(2) << "\n";
    return;
  }
  const int m = s.dimension().m();
  std::vector<std::string> header{"index"};
  for (int v = 1; v <= 3; ++v) {
    const auto names = coord_names(fmt::format("z{}_", v), m);
    header.insert(header.end(), names.begin(), names.end());
  }
  header.insert(header.end(), {"a1", "a2", "a3", "area_value", "residual", "is_isolated"});
  csv_row(out, header);
  for (int i = 0; i < set.count(); ++i) {
    const OrbitSolution& o = set.orbits[i];
    std::vector<std::string> row{std::to_string(i)};
    for (const Vector& z : o.vertices) append(row, z);
    for (double a : o.tuple.multipliers) row.push_back(num(a));
    row.insert(row.end(), {num(o.area_value), num(o.residual), o.is_isolated ? "1" : "0"});
    csv_row(out, row);
  }
  const SearchStats& st = set.stats;
  out << fmt::format(
      "# count={} family_flag={} families={} starts={} converged={} not_converged={} "
      "rejected_backtracking={} rejected_zero_area={} rejected_orientation={} rejected_duplicates={} "
      "non_isolated={}\n",
      set.count(), set.families.empty() ? 0 : 1, set.families.size(), st.starts_attempted, st.converged,
      st.not_converged, st.rejected_backtracking, st.rejected_zero_area, st.rejected_orientation,
      st.rejected_duplicates, st.non_isolated);
}

int cmd_orbits(const RunConfig& cfg, const SurfaceSpec& spec, const SupportSurface& s, std::ostream& out) {
  if (cfg.starts < 1) throw UsageError("--starts must be >= 1");
  SearchOptions opts;
  opts.n_starts = cfg.starts;
  opts.rng_seed = cfg.seed;
  opts.threads = cfg.threads;
  const OrbitSet set = multistart_search(s, opts);
  write_orbit_set(cfg, spec, s, set, "orbits", out);
  return ok;
}

// ---- sharpness -----------------------------------------------------------

int cmd_sharpness(const RunConfig& cfg, const SurfaceSpec& spec, const SupportSurface& s,
                  std::ostream& out, std::ostream& err) {
  if (s.kind() != SurfaceKind::perturbed_sphere) {
    throw UsageError("sharpness needs a perturbed_sphere surface");
  }
  if (cfg.starts < 1) throw UsageError("--starts must be >= 1");
  const SharpnessReport r = sharpness_experiment(s.perturbation(), cfg.starts, cfg.seed, cfg.threads);
  json extra;
  extra["expected"] = r.expected;
  extra["count_doubled"] = r.count_doubled;
  extra["stable"] = r.stable;
  extra["bijection"] = r.bijection;
  extra["success"] = r.success;
  json crit = json::array();
  for (std::size_t i = 0; i < r.critical_orbits.size(); ++i) {
    const CriticalOrbitOfF& c = r.critical_orbits[i];
    json cj;
    cj["representative"] = to_json(c.representative);
    cj["pair"] = c.index + 1;
    cj["eta"] = c.eta;
    cj["critical_value"] = c.critical_value;
    cj["seed_status"] = to_string(r.seed_outcomes[i].status);
    cj["orbit"] = r.seed_to_orbit[i];
    crit.push_back(cj);
  }
  extra["critical_orbits"] = crit;
  if (cfg.format == "json") {
    write_orbit_set(cfg, spec, s, r.orbits, "sharpness", out, extra);
  } else {
    write_orbit_set(cfg, spec, s, r.orbits, "sharpness", out);
    out << fmt::format("# expected={} count_doubled={} stable={} bijection={} success={}\n", r.expected,
                       r.count_doubled, r.stable ? 1 : 0, r.bijection ? 1 : 0, r.success ? 1 : 0);
  }
  if (!r.success) {
    err << fmt::format("sharpness: found {} orbits, expected {} (stable: {}, bijection: {})\n", r.count,
                       r.expected, r.stable, r.bijection);
    return verification;
  }
  return ok;
}

// ---- verify --------------------------------------------------------------

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool lower_bound = false;  // pass iff value > threshold instead of value < threshold
  bool pass() const { return lower_bound ? value > threshold : value < threshold; }
};

int cmd_verify(const RunConfig& cfg, const SurfaceSpec& spec, const SupportSurface& s, std::ostream& out,
               std::ostream& err) {
  if (cfg.tol && !(*cfg.tol > 0.0)) throw UsageError("--tol must be positive");
  auto tol = [&](double fallback) { return cfg.tol.value_or(fallback); };
  const int dim = s.dimension().ambient();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> scale(1.3, 2.5);
  auto random_unit = [&] {
    Vector v(dim);
    for (int k = 0; k < dim; ++k) v(k) = normal(rng);
    return Vector(v.normalized());
  };

  constexpr int kPoints = 20;
  double inverse = 0.0;
  double symplectic = 0.0;
  double midpoint = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const Vector z = s.point(random_unit()) * scale(rng);
    inverse = std::max(inverse, inverse_consistency(s, z));
    symplectic = std::max(symplectic, symplecticity_defect(s, z));
    for (Direction d : {Direction::forward, Direction::backward}) {
      const MapResult r = dual_map(s, z, d);
      midpoint = std::max(midpoint, (s.point(r.tangency_normal) - 0.5 * (z + r.image)).norm());
    }
  }

  double symmetry = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::vector<Vector> q{s.point(random_unit()), s.point(random_unit()), s.point(random_unit())};
    Vector t(dim);
    for (int k = 0; k < dim; ++k) t(k) = normal(rng);
    const double f = functional_F(q);
    symmetry = std::max({symmetry, std::abs(functional_F(std::vector<Vector>{q[1], q[2], q[0]}) - f),
                         std::abs(functional_F(std::vector<Vector>{q[1], q[0], q[2]}) + f),
                         std::abs(functional_F(std::vector<Vector>{q[0] + t, q[1] + t, q[2] + t}) - f)});
  }

  SearchOptions opts;
  opts.n_starts = std::min(cfg.starts, 200);
  opts.rng_seed = cfg.seed;
  opts.threads = cfg.threads;
  const OrbitSet set = multistart_search(s, opts);
  std::vector<const OrbitSolution*> found;
  for (const auto& o : set.orbits) found.push_back(&o);
  for (const auto& f : set.families) found.push_back(&f.representative);
  double criticality = 0.0;
  double round_trip = 0.0;
  double min_area = std::numeric_limits<double>::infinity();
  for (const OrbitSolution* o : found) {
    criticality = std::max(criticality, criticality_check(s, *o));
    round_trip = std::max(round_trip, round_trip_defect(s, *o));
    min_area = std::min(min_area, std::abs(o->area_value));
  }
  const double diam = s.diameter();

  const std::vector<Check> checks{
      {"inverse_consistency", inverse, tol(1e-8)},
      {"symplecticity_defect", symplectic, tol(1e-5)},
      {"midpoint_on_surface", midpoint, tol(1e-9)},
      {"F_symmetries", symmetry, tol(1e-10)},
      {"orbit_criticality", criticality, tol(1e-8)},
      {"orbit_round_trip", round_trip, tol(1e-8)},
      {"orbit_area_threshold", found.empty() ? 0.0 : min_area / (diam * diam), 1e-6, true},
  };
  std::vector<std::string> failures;
  json jchecks = json::array();
  for (const Check& c : checks) {
    // Vacuous when the search found nothing to check.
    const bool pass = (c.lower_bound && found.empty()) || c.pass();
    if (!pass) failures.push_back(c.name);
    json cj;
    cj["name"] = c.name;
    cj["value"] = c.value;
    cj["threshold"] = c.threshold;
    cj["pass"] = pass;
    jchecks.push_back(cj);
  }
  if (cfg.format == "json") {
    json j;
    j["command"] = "verify";
    j["surface"] = to_json(spec);
    j["orbits_checked"] = found.size();
    j["checks"] = jchecks;
    j["pass"] = failures.empty();
    out << j.dump(2) << "\n";
  } else {
    csv_row(out, {"check", "value", "threshold", "pass"});
    for (const auto& cj : jchecks) {
      csv_row(out, {cj["name"].get<std::string>(), num(cj["value"].get<double>()),
                    num(cj["threshold"].get<double>()), cj["pass"].get<bool>() ? "1" : "0"});
    }
  }
  if (!failures.empty()) {
    err << "verification failed:";
    for (const auto& f : failures) err << " " << f;
    err << "\n";
    return verification;
  }
  return ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Dual billiard maps and 3-periodic orbits of convex hypersurfaces"};
  app.name("dualbill");
  app.require_subcommand(1, 1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--surface", cfg.surface_path, "Surface spec file")->required();
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", cfg.out_path, "Write results to this file instead of stdout");
  };
  auto add_search = [&](CLI::App* sub) {
    sub->add_option("--starts", cfg.starts, "Number of random starts");
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_option("--threads", cfg.threads, "Worker threads (0: all cores)");
  };

  CLI::App* map = app.add_subcommand("map", "Apply the dual billiard map once");
  add_common(map);
  map->add_option("--point", cfg.point_text, "Exterior point, comma separated")->required();
  map->add_option("--direction", cfg.direction, "forward or backward");

  CLI::App* traj = app.add_subcommand("trajectory", "Iterate the map");
  add_common(traj);
  traj->add_option("--point", cfg.point_text, "Exterior start point, comma separated")->required();
  traj->add_option("--direction", cfg.direction, "forward or backward");
  traj->add_option("--steps", cfg.steps, "Number of iterations");

  CLI::App* orbits = app.add_subcommand("orbits", "Search for 3-periodic orbits");
  add_common(orbits);
  add_search(orbits);

  CLI::App* verify = app.add_subcommand("verify", "Run the property checks on a surface");
  add_common(verify);
  add_search(verify);
  verify->add_option("--tol", cfg.tol, "Override every error threshold");

  CLI::App* sharp = app.add_subcommand("sharpness", "Exact-count experiment on a perturbed sphere");
  add_common(sharp);
  add_search(sharp);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return usage;
  }

  std::ofstream file;
  if (!cfg.out_path.empty()) {
    file.open(cfg.out_path);
    if (!file) {
      err << "cannot open output file '" << cfg.out_path << "'\n";
      return usage;
    }
  }
  std::ostream& sink = cfg.out_path.empty() ? out : file;

  try {
    const SurfaceSpec spec = load_surface_spec(cfg.surface_path);
    const SupportSurface s = make_surface(spec);
    if (map->parsed()) return cmd_map(cfg, spec, s, sink);
    if (traj->parsed()) return cmd_trajectory(cfg, spec, s, sink, err);
    if (orbits->parsed()) return cmd_orbits(cfg, spec, s, sink);
    if (verify->parsed()) return cmd_verify(cfg, spec, s, sink, err);
    return cmd_sharpness(cfg, spec, s, sink, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return usage;
  } catch (const SurfaceError& e) {
    err << "surface rejected: " << e.what() << "\n";
    return domain;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return domain;
  } catch (const ConvergenceError& e) {
    err << "convergence error: " << e.what() << " (best residual " << e.best_residual() << ")\n";
    return convergence;
  } catch (const DimensionMismatch& e) {
    err << "usage error: " << e.what() << "\n";
    return usage;
  }
}

}  // namespace dualbill::cli
