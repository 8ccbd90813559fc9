#include <gtest/gtest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "dualbill/orbit_finder.hpp"
#include "dualbill/surface_spec.hpp"

namespace dualbill {
namespace {

using json = nlohmann::json;

std::string surface(const std::string& name) { return std::string(DUALBILL_SURFACES_DIR) + "/" + name; }

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(Cli, MapCircle) {
  const Invocation r = run({"map", "--surface", surface("circle.txt"), "--point", "2,0"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["image"][0].get<double>(), -1.0, 1e-9);
  EXPECT_NEAR(j["image"][1].get<double>(), std::sqrt(3.0), 1e-9);
  EXPECT_GT(j["multiplier"].get<double>(), 0.0);

  const Invocation back = run({"map", "--surface", surface("circle.txt"), "--point", "2,0", "--direction",
                        "backward", "--format", "csv"});
  ASSERT_EQ(back.code, 0);
  EXPECT_NE(back.out.find("-1.7320508"), std::string::npos) << back.out;
  EXPECT_EQ(back.out.rfind("point_x1,point_y1,image_x1,image_y1,", 0), 0u);
}

TEST(Cli, MapErrors) {
  const Invocation interior = run({"map", "--surface", surface("circle.txt"), "--point", "0,0"});
  EXPECT_EQ(interior.code, 2);
  EXPECT_NE(interior.err.find("point is not exterior"), std::string::npos);
  EXPECT_EQ(run({"map", "--surface", surface("circle.txt"), "--point", "2;0"}).code, 1);
  EXPECT_EQ(run({"map", "--surface", surface("circle.txt"), "--point", "2,0,1"}).code, 1);
  EXPECT_EQ(run({"map", "--surface", surface("circle.txt"), "--point", "2,0", "--direction", "up"}).code, 1);
  EXPECT_EQ(run({"map", "--surface", surface("circle.txt")}).code, 1);
  EXPECT_EQ(run({"map", "--surface", surface("circle.txt"), "--point", "2,0", "--format", "xml"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, TrajectoryTriangle) {
  const Invocation r = run({"trajectory", "--surface", surface("circle.txt"), "--point", "2,0", "--steps", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j["points"].size(), 4u);
  EXPECT_NEAR(j["points"][3][0].get<double>(), 2.0, 1e-9);
  EXPECT_NEAR(j["points"][3][1].get<double>(), 0.0, 1e-9);
}

TEST(Cli, TrajectoryLongRunKeepsRadius) {
  const Invocation r = run({"trajectory", "--surface", surface("circle.txt"), "--point", "3,0", "--steps", "1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j["points"].size(), 1001u);
  for (const auto& p : j["points"]) {
    EXPECT_NEAR(std::hypot(p[0].get<double>(), p[1].get<double>()), 3.0, 1e-7);
  }
}

TEST(Cli, TrajectoryZeroStepsEchoes) {
  const Invocation r = run({"trajectory", "--surface", surface("circle.txt"), "--point", "2.5,0.5", "--steps", "0",
                     "--format", "csv"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "step,x1,y1\n0,2.5,0.5\n");
}

TEST(Cli, TrajectoryFailureNamesStep) {
  const Invocation r = run({"trajectory", "--surface", surface("circle.txt"), "--point", "0.5,0", "--steps", "2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("step 1"), std::string::npos) << r.err;
}

TEST(Cli, OrbitsRoundTrip) {
  const Invocation r = run({"orbits", "--surface", surface("perturbed_m2.txt")});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["summary"]["count"].get<int>(), 4);
  EXPECT_FALSE(j["summary"]["family_flag"].get<bool>());

  const SupportSurface s = make_surface(load_surface_spec(surface("perturbed_m2.txt")));
  for (const auto& rec : j["orbits"]) {
    TangencyTuple t;
    for (const auto& u : rec["tangency_normals"]) {
      const auto values = u.get<std::vector<double>>();
      t.normals.push_back(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
    }
    t.multipliers = rec["multipliers"].get<std::vector<double>>();
    EXPECT_NEAR(closure_residual(s, t).norm(), rec["residual"].get<double>(), 1e-9);
    EXPECT_TRUE(rec["is_isolated"].get<bool>());
  }
}

TEST(Cli, OrbitsByteIdentical) {
  const std::vector<std::string> args{"orbits", "--surface", surface("perturbed_m2.txt"), "--starts", "200",
                                      "--seed", "7", "--format", "csv"};
  const Invocation a = run(args);
  const Invocation b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const std::string header = a.out.substr(0, a.out.find('\n'));
  EXPECT_EQ(header.rfind("index,z1_x1,z1_x2,z1_y1,z1_y2,z2_x1", 0), 0u) << header;
  EXPECT_NE(header.find("a1,a2,a3,area_value,residual,is_isolated"), std::string::npos);
}

TEST(Cli, OrbitsSphereIsFamily) {
  const Invocation r = run({"orbits", "--surface", surface("sphere_m2.txt"), "--starts", "50"});
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["summary"]["family_flag"].get<bool>());
  EXPECT_EQ(j["summary"]["count"].get<int>(), 0);
  EXPECT_FALSE(j["families"][0]["is_isolated"].get<bool>());
}

TEST(Cli, OutFile) {
  const auto path = std::filesystem::temp_directory_path() / "dualbill_cli_out.json";
  const Invocation r = run({"map", "--surface", surface("circle.txt"), "--point", "2,0", "--out", path.string()});
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  const json j = json::parse(in);
  EXPECT_EQ(j["command"], "map");
  std::filesystem::remove(path);
}

TEST(Cli, Verify) {
  const Invocation good = run({"verify", "--surface", surface("sphere_m2.txt")});
  EXPECT_EQ(good.code, 0) << good.out << good.err;
  EXPECT_TRUE(json::parse(good.out)["pass"].get<bool>());

  const Invocation strict = run({"verify", "--surface", surface("sphere_m2.txt"), "--tol", "1e-20"});
  EXPECT_EQ(strict.code, 4);
  EXPECT_NE(strict.err.find("verification failed"), std::string::npos);

  const Invocation bad = run({"verify", "--surface", surface("nonconvex.txt")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("direction"), std::string::npos) << bad.err;
}

TEST(Cli, Sharpness) {
  const Invocation r = run({"sharpness", "--surface", surface("perturbed_m2.txt"), "--starts", "300"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["success"].get<bool>());
  EXPECT_EQ(j["summary"]["count"].get<int>(), 4);
  EXPECT_EQ(run({"sharpness", "--surface", surface("circle.txt")}).code, 1);
}

}  // namespace
}  // namespace dualbill
