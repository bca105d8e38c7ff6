#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rvrbm/error.hpp"
#include "rvrbm/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace rvrbm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
  const auto dir = fs::temp_directory_path() / ("rvrbm_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p)
{
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::string error_of(const Assignments& a)
{
  try {
    resolve_config(a);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

} // namespace

TEST_CASE("config text parsing")
{
  const auto a = parse_config_text("# comment\n[sim]\nn = 100  # trailing\n m=5\n\n[cv]\nclamp = -2, 2\n"
                                   "experiment.preset = test1a\n");
  REQUIRE(a.size() == 4);
  CHECK(a[0] == std::pair<std::string, std::string>{"sim.n", "100"});
  CHECK(a[1] == std::pair<std::string, std::string>{"sim.m", "5"});
  CHECK(a[2] == std::pair<std::string, std::string>{"cv.clamp", "-2, 2"});
  CHECK(a[3].first == "experiment.preset");
  CHECK_THROWS_AS(parse_config_text("[sim\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("n 100\n"), ConfigError);
}

TEST_CASE("test1a preset resolves its parameters")
{
  const auto cfg = resolve_config({{"experiment.preset", "test1a"}});
  CHECK(cfg.preset == Preset::test1a);
  const auto* bc = std::get_if<BoundedConfidenceKernel>(&cfg.sim.model.kernel);
  REQUIRE(bc);
  CHECK(bc->delta == 1.0);
  CHECK(cfg.sim.n == 10000);
  CHECK(cfg.sim.m == 10);
  CHECK(cfg.sim.t_end == 5.0);
  CHECK(cfg.sim.dt == 0.01);
  CHECK(cfg.methods == std::vector<Method>{Method::rbm, Method::rvrbm});
  REQUIRE(cfg.sim.cv);
  CHECK(cfg.sim.cv->surrogate.kind == SurrogateKind::case1);
  CHECK(cfg.resolved.at("sim.t_end") == "5");
  CHECK(cfg.sim.snapshot_times == std::vector<double>{1, 5});
}

TEST_CASE("other presets")
{
  const auto b = resolve_config({{"experiment.preset", "test1b"}});
  CHECK(std::get<BoundedConfidenceKernel>(b.sim.model.kernel).delta == 0.5);
  CHECK(b.sim.model.initial_law == InitialLaw::two_cluster);
  CHECK(b.sim.cv->surrogate.clusters == std::vector<std::vector<double>>{{-0.5}, {0.5}});

  const auto t2 = resolve_config({{"experiment.preset", "test2"}});
  const auto* d = std::get_if<OpinionDiffusion>(&t2.sim.model.diffusion);
  REQUIRE(d);
  CHECK(d->sigma2 == 0.1);

  const auto t3 = resolve_config({{"experiment.preset", "test3"}});
  const auto& cs = std::get<CuckerSmaleKernel>(t3.sim.model.kernel);
  CHECK(cs.xi == 1.0);
  CHECK(cs.beta == 0.1);
  CHECK(t3.sim.t_end == 10.0);
  CHECK(t3.sim.cv->lambda_mode == LambdaMode::per_particle);
  CHECK(t3.sim.kde->auto_phase_grid);
}

TEST_CASE("overrides apply after the preset")
{
  const auto cfg = resolve_config({{"experiment.preset", "test1a"}, {"sim.n", "1e5"},
                                   {"model.delta", "0.5"}, {"sim.t_end", "2"}});
  CHECK(cfg.sim.n == 100000);
  CHECK(std::get<BoundedConfidenceKernel>(cfg.sim.model.kernel).delta == 0.5);
  // The preset's snapshot at t = 5 is dropped for the shorter run.
  CHECK(cfg.sim.snapshot_times == std::vector<double>{1});
}

TEST_CASE("configuration errors name the problem")
{
  CHECK(error_of({}) == "no preset and no model specified");
  CHECK(error_of(parse_config_text("")) == "no preset and no model specified");

  const auto big_m = error_of({{"experiment.preset", "test1a"}, {"sim.m", "20000"}});
  CHECK(big_m.find("20000") != std::string::npos);
  CHECK(big_m.find("10000") != std::string::npos);

  CHECK(error_of({{"sim.bogus", "1"}}).find("sim.bogus") != std::string::npos);
  CHECK(error_of({{"experiment.preset", "test9"}}).find("test9") != std::string::npos);
  CHECK(error_of({{"experiment.preset", "test1a"}, {"sim.dt", "fast"}}).find("sim.dt") !=
        std::string::npos);
  CHECK(error_of({{"experiment.preset", "custom"}, {"model.kernel", "constant"}}).find(
          "model.initial") != std::string::npos);
  CHECK(error_of({{"experiment.preset", "test1a"}, {"sweep.axis", "n"}, {"sweep.values", "100"},
                  {"sweep.repeats", "0"}})
          .find("sweep.repeats") != std::string::npos);
  CHECK(error_of({{"experiment.preset", "test1a"}, {"experiment.snapshot_times", "9"}}) != "");
}

TEST_CASE("custom model from a config file")
{
  const auto dir = scratch("custom");
  fs::create_directories(dir);
  std::ofstream(dir / "c.ini") << "[model]\nkernel = constant\ninitial = uniform_opinion\n"
                                  "[sim]\nn = 50\nm = 5\nt_end = 0.1\n[experiment]\nmethods = full\n";
  const auto cfg = parse_config(dir / "c.ini", {{"sim.seed", "9"}});
  CHECK(cfg.sim.n == 50);
  CHECK(cfg.sim.seed == 9);
  CHECK(!cfg.sim.cv);
  CHECK_THROWS_AS(parse_config(dir / "missing.ini"), ConfigError);
}

TEST_CASE("run writes series, densities and a manifest")
{
  const auto dir = scratch("run");
  auto cfg = resolve_config({{"experiment.preset", "test1a"},
                             {"sim.n", "300"},
                             {"sim.t_end", "1"},
                             {"experiment.out", dir.string()}});
  const auto result = run_experiment(cfg);
  for (const char* name : {"series_rbm.csv", "series_rvrbm.csv", "density_rbm_t1.csv",
                           "density_rvrbm_t1.csv", "manifest.json"})
    CHECK(fs::exists(dir / name));

  const auto series = slurp(dir / "series_rvrbm.csv");
  CHECK(series.rfind("t,mean,variance,error,lambda_mean,clamp_count,projection_count\n", 0) == 0);
  // rbm rows leave the two control-variate columns empty.
  std::istringstream rbm(slurp(dir / "series_rbm.csv"));
  std::string row;
  while (std::getline(rbm, row))
    CHECK(std::count(row.begin(), row.end(), ',') == 6);
  CHECK(series == series_csv(result.runs[1]));

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["config"]["sim.n"] == "300");
  CHECK(manifest["seed"] == 1);
  CHECK(manifest["files"].size() == 4);
  CHECK(manifest.contains("version"));

  // Byte-identical bodies on rerun.
  const auto again = scratch("run_again");
  cfg.out_dir = again;
  run_experiment(cfg);
  for (const char* name : {"series_rbm.csv", "series_rvrbm.csv", "density_rvrbm_t1.csv"})
    CHECK(slurp(dir / name) == slurp(again / name));
}

TEST_CASE("zero-time sweep error scales like n^-1/2")
{
  const auto dir = scratch("sweep");
  const auto cfg = resolve_config({{"experiment.preset", "test1a"},
                                   {"experiment.methods", "full"},
                                   {"sim.t_end", "0"},
                                   {"sim.error_reference", "law"},
                                   {"sweep.axis", "n"},
                                   {"sweep.values", "100,1000,10000"},
                                   {"sweep.repeats", "100"},
                                   {"experiment.out", dir.string()}});
  run_experiment(cfg);
  std::istringstream is(slurp(dir / "summary.csv"));
  std::string line;
  std::getline(is, line);
  CHECK(line == "axis,value,method,repeats,mean_error,rms_error,ci_low,ci_high,mean_final_lambda");
  std::vector<double> logn, logerr;
  while (std::getline(is, line)) {
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string item;
    while (std::getline(ls, item, ','))
      f.push_back(item);
    logn.push_back(std::log(std::stod(f[1])));
    logerr.push_back(std::log(std::stod(f[5])));
  }
  REQUIRE(logn.size() == 3);
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    mx += logn[k] / 3;
    my += logerr[k] / 3;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    sxy += (logn[k] - mx) * (logerr[k] - my);
    sxx += (logn[k] - mx) * (logn[k] - mx);
  }
  CHECK(std::abs(sxy / sxx + 0.5) < 0.5 * 0.25);
}

TEST_CASE("unwritable output directory is an I/O error")
{
  auto cfg = resolve_config({{"experiment.preset", "test1a"}, {"sim.n", "100"}, {"sim.t_end", "0.1"},
                             {"experiment.out", "/proc/no/such/dir"}});
  CHECK_THROWS_AS(run_experiment(cfg), IoError);
}

TEST_CASE("bench report")
{
  const auto dir = scratch("bench");
  const auto cfg = resolve_config({{"experiment.preset", "test1a"},
                                   {"bench.n_values", "200,400"},
                                   {"bench.steps", "2"},
                                   {"bench.full_steps", "1"},
                                   {"bench.repetitions", "1"},
                                   {"experiment.out", dir.string()}});
  const auto r = bench(cfg);
  CHECK(r.step_seconds.at("full").size() == 2);
  CHECK(r.step_seconds.at("rvrbm").size() == 2);
  const auto j = nlohmann::json::parse(slurp(dir / "bench.json"));
  CHECK(j["doubling_ratios"]["rbm"].size() == 1);
  CHECK(j["rvrbm_over_rbm"].size() == 2);
  CHECK(doubling_ratios({1, 2, 8}) == std::vector<double>{2, 4});
}

TEST_CASE("known keys cover every section")
{
  const auto keys = known_keys();
  for (const char* k : {"experiment.preset", "sim.n", "model.kernel", "cv.surrogate", "kde.sigma2",
                        "sweep.axis", "bench.n_values"})
    CHECK(std::find(keys.begin(), keys.end(), k) != keys.end());
  for (Preset p : {Preset::test1a, Preset::test1b, Preset::test2, Preset::test3})
    for (const auto& [key, value] : preset_assignments(p))
      CHECK(std::find(keys.begin(), keys.end(), key) != keys.end());
}
