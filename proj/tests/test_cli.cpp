#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nlepi/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "nlepi");
  std::ostringstream out, err;
  Result r;
  r.code = nlepi::run_command(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("nlepi_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("eigen prints a JSON summary") {
  const auto r = run({"eigen", "--l", "10"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["lambda_p"].get<double>() == doctest::Approx(0.39614).epsilon(1e-4));
  CHECK(j["lambda_A"].get<double>() == doctest::Approx(std::sqrt(2.0) - 1));
  CHECK(j["R0"].get<double>() == doctest::Approx(2.0));
  CHECK(j["lower"].get<double>() <= j["lambda_p"].get<double>());
  CHECK(j["upper"].get<double>() >= j["lambda_p"].get<double>());
  CHECK_FALSE(j.contains("wall_seconds"));
}

TEST_CASE("eigenfunction dump and overrides") {
  const auto d = scratch("eigen");
  const auto r = run({"eigen", "--l", "2", "--dump-eigenfunction", (d / "phi.csv").string(), "--set", "model.d1=0.5",
                      "--set", "run.deterministic=false"});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out).contains("wall_seconds"));
  const std::string csv = slurp(d / "phi.csv");
  CHECK(csv.rfind("x,phi1,phi2\n", 0) == 0);
  fs::remove_all(d);
}

TEST_CASE("exit codes") {
  CHECK(run({"critical", "--set", "model.c=0.5"}).code == 2);
  CHECK(run({"eigen", "--set", "model.nope=1"}).code == 1);
  CHECK(run({"eigen", "--set", "model.c=-1"}).code == 1);
  CHECK(run({"search", "--parameter", "bogus"}).code == 1);
  CHECK(run({}).code == 1);
  CHECK(run({"eigen", "--config", "/nonexistent/file.toml"}).code == 1);

  const auto v = run({"validate", "--set", "model.c=-1", "--set", "init.h0=-1", "--set", "run.dt=5"});
  CHECK(v.code == 1);
  const auto j = nlohmann::json::parse(v.out);
  CHECK_FALSE(j["ok"].get<bool>());
  CHECK(j["problems"].size() >= 3);
  CHECK(run({"validate"}).code == 0);
}

TEST_CASE("the installed binary reports the same exit codes") {
  const char* bin = std::getenv("NLEPI_CLI");
  if (!bin) return;
  auto status = [&](const std::string& args) {
    const int s = std::system((std::string(bin) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  CHECK(status("nu --l 1") == 0);
  CHECK(status("validate --set model.c=-1") == 1);
  CHECK(status("critical --set model.c=0.5") == 2);
}

TEST_CASE("compare4 and steady write their files") {
  const auto d = scratch("files");
  const std::string dir = "output.dir=" + d.string();
  REQUIRE(run({"compare4", "--set", dir, "--set", "compare.count=5", "--set", "compare.refine=false"}).code == 0);
  const std::string csv = slurp(d / "compare4.csv");
  CHECK(csv.rfind("l,nu,lambda1,lambda2,lambda3,lambda4,lambda_p_closed,lambda_p_matrix\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  const auto j = nlohmann::json::parse(slurp(d / "compare4.json"));
  CHECK(j.contains("curves"));

  REQUIRE(run({"steady", "--l", "6", "--set", dir, "--set", "output.prefix=s_"}).code == 0);
  CHECK(slurp(d / "s_steady.csv").rfind("x,U,V,u_star_minus_U,v_star_minus_V\n", 0) == 0);
  CHECK(nlohmann::json::parse(slurp(d / "s_steady.json"))["zero"].get<bool>() == false);

  REQUIRE(run({"evolve", "--set", dir, "--set", "run.T_max=3", "--set", "output.profiles=true"}).code == 0);
  CHECK(slurp(d / "timeseries.csv").rfind("t,g,h,sup_u,sup_v,mass_u,mass_v\n", 0) == 0);
  CHECK(slurp(d / "profiles.csv").rfind("t,x,u,v\n", 0) == 0);
  const auto ev = nlohmann::json::parse(slurp(d / "evolve.json"));
  CHECK(ev["mass_balance"]["max_defect"].get<double>() <= ev["mass_balance"]["bound"].get<double>());
  fs::remove_all(d);
}

TEST_CASE("sweep resumes from a partial table") {
  const auto d = scratch("sweep");
  const std::string out = (d / "sweep.csv").string();
  const std::vector<std::string> args{"sweep",  "--axis", "init.h0=0.3,1.0", "--axis", "model.mu1=0.5,1",
                                      "--set",  "run.T_max=5", "--out", out};
  const auto first = run(args);
  REQUIRE(first.code == 0);
  const auto j1 = nlohmann::json::parse(first.out);
  CHECK(j1["cells"].get<int>() == 4);
  CHECK(j1["computed"].get<int>() == 4);
  const std::string full = slurp(out);
  CHECK(full.rfind("key,init.h0,model.mu1,verdict,", 0) == 0);

  // Drop the last data row and rerun: only that cell is recomputed.
  std::string partial = full.substr(0, full.size() - 1);
  partial = partial.substr(0, partial.rfind('\n') + 1);
  std::ofstream(out) << partial;
  const auto second = run(args);
  REQUIRE(second.code == 0);
  const auto j2 = nlohmann::json::parse(second.out);
  CHECK(j2["computed"].get<int>() == 1);
  CHECK(j2["reused"].get<int>() == 3);
  CHECK(slurp(out) == full);

  CHECK(run({"sweep", "--axis", "model.nope=1,2", "--out", out}).code == 1);
  fs::remove_all(d);
}
